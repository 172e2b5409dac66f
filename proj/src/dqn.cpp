#include "gridnav/dqn.hpp"

#include <cmath>

namespace gridnav::deep {

namespace {

std::vector<int> full_sizes(int input, const std::vector<int>& hidden, int output) {
    std::vector<int> sizes;
    sizes.push_back(input);
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(output);
    return sizes;
}

}  // namespace

DqnAgent::DqnAgent(int input_size, int action_count, const DqnConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      online_(nn::MlpNetwork::init(full_sizes(input_size, cfg.hidden, action_count), seed)),
      target_(online_),
      adam_(nn::AdamState::like(online_)),
      epsilon_(cfg.epsilon) {}

int DqnAgent::act(std::span<const double> features, std::mt19937_64& rng) const {
    nn::Vector x = Eigen::Map<const nn::Vector>(features.data(),
                                                static_cast<Eigen::Index>(features.size()));
    nn::Vector q = online_.forward1(x);
    if (!q.allFinite()) throw TrainingError("non-finite Q-values in dqn act");
    return tabular::epsilon_greedy({q.data(), static_cast<std::size_t>(q.size())},
                                   epsilon_.epsilon, rng);
}

std::optional<double> DqnAgent::learn(const ReplayBuffer& buffer, std::mt19937_64& rng) {
    if (!buffer.ready(cfg_.batch_size)) return std::nullopt;
    auto idx = buffer.sample_indices(cfg_.batch_size, rng);

    const Eigen::Index batch = static_cast<Eigen::Index>(idx.size());
    const Eigen::Index in = online_.input_size();
    nn::Matrix states(batch, in);
    nn::Matrix next_states(batch, in);
    for (Eigen::Index i = 0; i < batch; ++i) {
        const Transition& t = buffer[idx[static_cast<std::size_t>(i)]];
        states.row(i) = Eigen::Map<const nn::Vector>(t.state.data(), in).transpose();
        next_states.row(i) = Eigen::Map<const nn::Vector>(t.next_state.data(), in).transpose();
    }

    nn::Matrix next_q = target_.forward(next_states);
    nn::ForwardCache cache;
    nn::Matrix q = online_.forward(states, &cache);

    nn::Matrix output_grad = nn::Matrix::Zero(batch, q.cols());
    double loss_sum = 0.0;
    double inv_batch = 1.0 / static_cast<double>(batch);
    for (Eigen::Index i = 0; i < batch; ++i) {
        const Transition& t = buffer[idx[static_cast<std::size_t>(i)]];
        double y = t.reward;
        if (!t.terminal) y += cfg_.gamma * next_q.row(i).maxCoeff();
        double pred = q(i, t.action);
        if (cfg_.loss == DqnConfig::Loss::Huber) {
            auto h = nn::huber(pred, y, cfg_.huber_delta);
            loss_sum += h.value;
            output_grad(i, t.action) = h.grad * inv_batch;
        } else {
            double e = pred - y;
            loss_sum += e * e;
            output_grad(i, t.action) = 2.0 * e * inv_batch;
        }
    }
    double loss = loss_sum * inv_batch;
    if (!std::isfinite(loss)) throw TrainingError("non-finite DQN loss");

    nn::Gradients grads = online_.backward(cache, output_grad);
    nn::adam_step(online_, grads, adam_, cfg_.lr);
    ++learn_steps_;
    return loss;
}

}  // namespace gridnav::deep
