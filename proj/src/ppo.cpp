#include "gridnav/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gridnav/rng.hpp"

namespace gridnav::deep {

GaeResult compute_gae(std::span<const RolloutEntry> rollout, double gamma, double lambda,
                      std::optional<double> bootstrap_value) {
    if (rollout.empty()) throw std::invalid_argument("compute_gae on empty rollout");
    if (!rollout.back().terminal && !bootstrap_value.has_value())
        throw std::logic_error("non-terminal rollout tail needs a bootstrap value");

    const std::size_t n = rollout.size();
    GaeResult out;
    out.advantages.resize(n);
    out.returns.resize(n);
    double next_advantage = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        const RolloutEntry& e = rollout[i];
        double mask = e.terminal ? 0.0 : 1.0;
        double next_value = 0.0;
        if (!e.terminal)
            next_value = (i + 1 < n) ? rollout[i + 1].value : *bootstrap_value;
        double delta = e.reward + gamma * next_value * mask - e.value;
        double adv = delta + gamma * lambda * mask * next_advantage;
        out.advantages[i] = adv;
        out.returns[i] = adv + e.value;
        next_advantage = adv;
    }
    return out;
}

double probability_ratio(double log_prob_new, double log_prob_old) {
    return std::exp(log_prob_new - log_prob_old);
}

namespace {

std::vector<int> trunk_sizes(int input, const std::vector<int>& hidden) {
    std::vector<int> sizes{input};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    return sizes;
}

}  // namespace

PpoAgent::PpoAgent(int input_size, int action_count, const PpoConfig& cfg, std::uint64_t seed)
    : cfg_(cfg) {
    if (cfg.trunk_hidden.empty()) throw std::invalid_argument("trunk needs hidden layers");
    trunk_ = nn::MlpNetwork::init(trunk_sizes(input_size, cfg.trunk_hidden),
                                  mix_seed(seed, "trunk"), nn::Activation::ReLU);
    int trunk_out = cfg.trunk_hidden.back();
    actor_ = nn::MlpNetwork::init({trunk_out, cfg.head_hidden, action_count},
                                  mix_seed(seed, "actor"));
    critic_ = nn::MlpNetwork::init({trunk_out, cfg.head_hidden, 1}, mix_seed(seed, "critic"));
    trunk_adam_ = nn::AdamState::like(trunk_);
    actor_adam_ = nn::AdamState::like(actor_);
    critic_adam_ = nn::AdamState::like(critic_);
}

PpoAgent::ActResult PpoAgent::act(std::span<const double> features, std::mt19937_64& rng) const {
    nn::Vector x = Eigen::Map<const nn::Vector>(features.data(),
                                                static_cast<Eigen::Index>(features.size()));
    nn::Vector h = trunk_.forward1(x);
    nn::Vector logits = actor_.forward1(h);
    if (!logits.allFinite()) throw TrainingError("non-finite actor logits");
    nn::Vector probs = nn::softmax(logits);
    nn::Vector log_probs = nn::log_softmax(logits);
    ActResult r;
    r.action = nn::categorical_sample(probs, rng);
    r.log_prob = log_probs[r.action];
    r.value = critic_.forward1(h)[0];
    r.entropy = nn::entropy(probs);
    return r;
}

double PpoAgent::value_of(std::span<const double> features) const {
    nn::Vector x = Eigen::Map<const nn::Vector>(features.data(),
                                                static_cast<Eigen::Index>(features.size()));
    return critic_.forward1(trunk_.forward1(x))[0];
}

void PpoAgent::store(RolloutEntry entry) {
    entries_.push_back(std::move(entry));
}

void PpoAgent::prepare_update(std::optional<double> bootstrap_value) {
    GaeResult gae = compute_gae(entries_, cfg_.gamma, cfg_.lambda, bootstrap_value);
    advantages_ = std::move(gae.advantages);
    returns_ = std::move(gae.returns);

    double mean = std::accumulate(advantages_.begin(), advantages_.end(), 0.0) /
                  static_cast<double>(advantages_.size());
    double var = 0.0;
    for (double a : advantages_) var += (a - mean) * (a - mean);
    var /= static_cast<double>(advantages_.size());
    double inv_std = 1.0 / (std::sqrt(var) + 1e-8);
    for (double& a : advantages_) a = (a - mean) * inv_std;
}

PpoAgent::BatchResult PpoAgent::compute_batch(std::span<const std::size_t> indices,
                                              bool with_grads) const {
    const Eigen::Index batch = static_cast<Eigen::Index>(indices.size());
    const Eigen::Index in = trunk_.input_size();
    nn::Matrix states(batch, in);
    for (Eigen::Index i = 0; i < batch; ++i) {
        const auto& s = entries_[indices[static_cast<std::size_t>(i)]].state;
        states.row(i) = Eigen::Map<const nn::Vector>(s.data(), in).transpose();
    }

    BatchResult r;
    nn::Matrix h = trunk_.forward(states, with_grads ? &r.trunk_cache : nullptr);
    nn::Matrix logits = actor_.forward(h, with_grads ? &r.actor_cache : nullptr);
    nn::Matrix values = critic_.forward(h, with_grads ? &r.critic_cache : nullptr);

    const int actions = static_cast<int>(logits.cols());
    const double inv_batch = 1.0 / static_cast<double>(batch);
    if (with_grads) {
        r.logit_grad = nn::Matrix::Zero(batch, actions);
        r.value_grad = nn::Matrix::Zero(batch, 1);
    }

    double policy_sum = 0.0, value_sum = 0.0, entropy_sum = 0.0;
    long clipped = 0;
    for (Eigen::Index i = 0; i < batch; ++i) {
        const RolloutEntry& e = entries_[indices[static_cast<std::size_t>(i)]];
        const double adv = advantages_[indices[static_cast<std::size_t>(i)]];
        const double ret = returns_[indices[static_cast<std::size_t>(i)]];

        nn::Vector logit_row = logits.row(i).transpose();
        nn::Vector log_probs = nn::log_softmax(logit_row);
        nn::Vector probs = log_probs.array().exp();
        double ratio = probability_ratio(log_probs[e.action], e.log_prob);

        double surr1 = ratio * adv;
        double clipped_ratio = std::clamp(ratio, 1.0 - cfg_.clip_eps, 1.0 + cfg_.clip_eps);
        double surr2 = clipped_ratio * adv;
        policy_sum += -std::min(surr1, surr2);
        if (std::abs(ratio - 1.0) > cfg_.clip_eps) ++clipped;

        double v = values(i, 0);
        double verr = v - ret;
        value_sum += verr * verr;

        double h_i = nn::entropy(probs);
        entropy_sum += h_i;

        if (with_grads) {
            // Policy term: gradient flows through the unclipped surrogate only
            // when it attains the min; a binding clip zeroes it.
            if (surr1 <= surr2) {
                double coeff = -adv * ratio * inv_batch;
                for (int a = 0; a < actions; ++a) {
                    double indicator = (a == e.action) ? 1.0 : 0.0;
                    r.logit_grad(i, a) += coeff * (indicator - probs[a]);
                }
            }
            // Entropy bonus: dH/dz_k = -p_k (log p_k + H).
            for (int a = 0; a < actions; ++a) {
                double dh = -probs[a] * (log_probs[a] + h_i);
                r.logit_grad(i, a) += -cfg_.entropy_coef * inv_batch * dh;
            }
            r.value_grad(i, 0) = cfg_.value_coef * 2.0 * verr * inv_batch;
        }
    }

    r.stats.policy_loss = policy_sum * inv_batch;
    r.stats.value_loss = value_sum * inv_batch;
    r.stats.entropy = entropy_sum * inv_batch;
    r.stats.clip_fraction = static_cast<double>(clipped) * inv_batch;

    double total = r.stats.policy_loss + cfg_.value_coef * r.stats.value_loss -
                   cfg_.entropy_coef * r.stats.entropy;
    if (!std::isfinite(total)) throw TrainingError("non-finite PPO loss");
    return r;
}

void PpoAgent::apply_batch(const BatchResult& batch) {
    nn::Matrix trunk_grad_from_actor;
    nn::Gradients actor_grads =
        actor_.backward(batch.actor_cache, batch.logit_grad, &trunk_grad_from_actor);
    nn::Matrix trunk_grad_from_critic;
    nn::Gradients critic_grads =
        critic_.backward(batch.critic_cache, batch.value_grad, &trunk_grad_from_critic);
    nn::Gradients trunk_grads =
        trunk_.backward(batch.trunk_cache, trunk_grad_from_actor + trunk_grad_from_critic);

    if (cfg_.max_grad_norm > 0.0)
        nn::clip_global_norm({&trunk_grads, &actor_grads, &critic_grads}, cfg_.max_grad_norm);
    nn::adam_step(trunk_, trunk_grads, trunk_adam_, cfg_.lr);
    nn::adam_step(actor_, actor_grads, actor_adam_, cfg_.lr);
    nn::adam_step(critic_, critic_grads, critic_adam_, cfg_.lr);
}

PpoDiagnostics PpoAgent::evaluate_minibatch(std::span<const std::size_t> indices) const {
    if (advantages_.size() != entries_.size())
        throw std::logic_error("evaluate_minibatch before prepare_update");
    return compute_batch(indices, false).stats;
}

PpoDiagnostics PpoAgent::update(std::optional<double> bootstrap_value, std::mt19937_64& rng) {
    if (entries_.empty()) throw std::logic_error("PPO update with empty rollout");
    prepare_update(bootstrap_value);

    std::vector<std::size_t> order(entries_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    PpoDiagnostics sum;
    long batches = 0;
    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += cfg_.minibatch) {
            std::size_t count = std::min(cfg_.minibatch, order.size() - start);
            std::span<const std::size_t> chunk(order.data() + start, count);
            BatchResult batch = compute_batch(chunk, true);
            apply_batch(batch);
            sum.policy_loss += batch.stats.policy_loss;
            sum.value_loss += batch.stats.value_loss;
            sum.entropy += batch.stats.entropy;
            sum.clip_fraction += batch.stats.clip_fraction;
            ++batches;
        }
    }
    entries_.clear();
    advantages_.clear();
    returns_.clear();

    PpoDiagnostics mean;
    mean.policy_loss = sum.policy_loss / batches;
    mean.value_loss = sum.value_loss / batches;
    mean.entropy = sum.entropy / batches;
    mean.clip_fraction = sum.clip_fraction / batches;
    return mean;
}

long PpoAgent::param_count() const {
    return trunk_.param_count() + actor_.param_count() + critic_.param_count();
}

}  // namespace gridnav::deep
