#pragma once

#include <optional>
#include <span>

#include "gridnav/nn.hpp"
#include "gridnav/replay.hpp"
#include "gridnav/tabular.hpp"  // EpsilonSchedule

namespace gridnav::deep {

struct DqnConfig {
    std::vector<int> hidden{256, 256, 256};
    double gamma = 0.99;
    double lr = 1e-3;
    std::size_t batch_size = 64;
    std::size_t buffer_capacity = 50000;
    int sync_interval = 500;  // learner steps between target syncs
    tabular::EpsilonSchedule epsilon{};
    enum class Loss { Huber, Mse } loss = Loss::Huber;
    double huber_delta = 1.0;
};

/// Deep Q-learning: online + target network pair over the feature
/// observation, epsilon-greedy behavior, replay-driven updates.
class DqnAgent {
public:
    DqnAgent(int input_size, int action_count, const DqnConfig& cfg, std::uint64_t seed);

    /// Epsilon-greedy over online Q-values. Throws TrainingError on
    /// non-finite network output.
    int act(std::span<const double> features, std::mt19937_64& rng) const;

    /// One batched update from the buffer, if it holds at least a batch.
    /// Per sample: y = r + gamma * max_a' Q_target(s',a') * [not terminal];
    /// gradients flow only through the taken action's online output. The
    /// target network is never touched here. Returns the mean loss, or
    /// nullopt when the buffer is not ready.
    std::optional<double> learn(const ReplayBuffer& buffer, std::mt19937_64& rng);

    /// Copy online parameters into the target network.
    void sync_target() { target_ = online_; }

    const nn::MlpNetwork& online() const { return online_; }
    const nn::MlpNetwork& target() const { return target_; }
    nn::MlpNetwork& online_mutable() { return online_; }
    nn::MlpNetwork& target_mutable() { return target_; }
    const nn::AdamState& adam() const { return adam_; }
    nn::AdamState& adam_mutable() { return adam_; }

    tabular::EpsilonSchedule& epsilon() { return epsilon_; }
    const tabular::EpsilonSchedule& epsilon() const { return epsilon_; }
    long learn_steps() const { return learn_steps_; }
    void set_learn_steps(long n) { learn_steps_ = n; }
    const DqnConfig& config() const { return cfg_; }

private:
    DqnConfig cfg_;
    nn::MlpNetwork online_;
    nn::MlpNetwork target_;
    nn::AdamState adam_;
    tabular::EpsilonSchedule epsilon_;
    long learn_steps_ = 0;
};

}  // namespace gridnav::deep
