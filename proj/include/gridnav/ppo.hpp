#pragma once

#include <optional>
#include <span>

#include "gridnav/nn.hpp"

namespace gridnav::deep {

/// One on-policy step: observation, action, behavior-policy log-probability,
/// reward, critic value at collection time, terminal flag.
struct RolloutEntry {
    std::vector<double> state;
    int action = 0;
    double log_prob = 0.0;
    double reward = 0.0;
    double value = 0.0;
    bool terminal = false;
};

struct GaeResult {
    std::vector<double> advantages;
    std::vector<double> returns;
};

/// Generalized advantage estimation over an ordered rollout:
///   delta_t = r_t + gamma * V(s_{t+1}) * [not terminal_t] - V(s_t)
///   A_t     = delta_t + gamma * lambda * [not terminal_t] * A_{t+1}
///   ret_t   = A_t + V(s_t)
/// The rollout may span episode boundaries; terminal flags cut the recursion.
/// `bootstrap_value` is V of the state following the last entry and is
/// required (contract fault otherwise) when that entry is non-terminal.
GaeResult compute_gae(std::span<const RolloutEntry> rollout, double gamma, double lambda,
                      std::optional<double> bootstrap_value);

/// r(theta) = exp(log pi_new(a|s) - log pi_old(a|s)).
double probability_ratio(double log_prob_new, double log_prob_old);

struct PpoConfig {
    std::vector<int> trunk_hidden{256, 256};
    int head_hidden = 256;
    double gamma = 0.99;
    double lambda = 0.95;
    double clip_eps = 0.2;
    double entropy_coef = 0.01;
    double value_coef = 0.5;
    double lr = 3e-4;
    double max_grad_norm = 0.5;  // 0 disables clipping
    int epochs = 4;
    std::size_t minibatch = 256;
    std::size_t horizon = 2048;
};

struct PpoDiagnostics {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
};

/// Actor-critic with a shared ReLU trunk and one hidden layer per head.
/// Collects a fixed-horizon rollout, then runs clipped-surrogate updates
/// over shuffled minibatches for several epochs.
class PpoAgent {
public:
    struct ActResult {
        int action = 0;
        double log_prob = 0.0;
        double value = 0.0;
        double entropy = 0.0;  // of the sampling distribution; the exploration metric
    };

    PpoAgent(int input_size, int action_count, const PpoConfig& cfg, std::uint64_t seed);

    /// Sample from softmax(actor logits); returns the log-probability under
    /// the current (soon to be old) policy and the critic value.
    ActResult act(std::span<const double> features, std::mt19937_64& rng) const;

    /// Critic value of a state; used to bootstrap a truncated rollout.
    double value_of(std::span<const double> features) const;

    void store(RolloutEntry entry);
    bool rollout_full() const { return entries_.size() >= cfg_.horizon; }
    std::size_t rollout_size() const { return entries_.size(); }

    /// Compute GAE and normalize advantages (zero mean, unit variance) over
    /// the collected rollout. Split out so tests can inspect the prepared
    /// batch before any optimizer step.
    void prepare_update(std::optional<double> bootstrap_value);
    std::span<const double> advantages() const { return advantages_; }
    std::span<const double> returns() const { return returns_; }

    /// Loss terms over the given rollout indices with the current parameters;
    /// no optimizer step. Requires prepare_update().
    PpoDiagnostics evaluate_minibatch(std::span<const std::size_t> indices) const;

    /// Full update: prepare, then `epochs` passes over shuffled minibatches
    /// (one Adam step each, joint global-norm clip across trunk and heads).
    /// Clears the rollout. Returns minibatch-averaged diagnostics.
    PpoDiagnostics update(std::optional<double> bootstrap_value, std::mt19937_64& rng);

    long param_count() const;
    const nn::MlpNetwork& trunk() const { return trunk_; }
    const nn::MlpNetwork& actor() const { return actor_; }
    const nn::MlpNetwork& critic() const { return critic_; }
    nn::MlpNetwork& trunk_mutable() { return trunk_; }
    nn::MlpNetwork& actor_mutable() { return actor_; }
    nn::MlpNetwork& critic_mutable() { return critic_; }
    const nn::AdamState& trunk_adam() const { return trunk_adam_; }
    nn::AdamState& trunk_adam_mutable() { return trunk_adam_; }
    const nn::AdamState& actor_adam() const { return actor_adam_; }
    nn::AdamState& actor_adam_mutable() { return actor_adam_; }
    const nn::AdamState& critic_adam() const { return critic_adam_; }
    nn::AdamState& critic_adam_mutable() { return critic_adam_; }
    const PpoConfig& config() const { return cfg_; }

private:
    struct BatchResult {
        PpoDiagnostics stats;
        nn::Matrix logit_grad;
        nn::Matrix value_grad;
        nn::ForwardCache trunk_cache, actor_cache, critic_cache;
    };
    BatchResult compute_batch(std::span<const std::size_t> indices, bool with_grads) const;
    void apply_batch(const BatchResult& batch);

    PpoConfig cfg_;
    nn::MlpNetwork trunk_, actor_, critic_;
    nn::AdamState trunk_adam_, actor_adam_, critic_adam_;
    std::vector<RolloutEntry> entries_;
    std::vector<double> advantages_, returns_;
};

}  // namespace gridnav::deep
