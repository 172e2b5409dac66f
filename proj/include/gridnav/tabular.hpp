#pragma once

#include <random>
#include <span>
#include <vector>

#include "gridnav/errors.hpp"

namespace gridnav::tabular {

/// Per-episode multiplicative exploration decay with a floor.
struct EpsilonSchedule {
    double epsilon = 1.0;
    double decay = 0.9995;
    double floor = 0.05;

    void decay_once() { epsilon = std::max(floor, epsilon * decay); }
};

/// Flat state x action value table, zero-initialized.
struct QTable {
    int state_count = 0;
    int action_count = 0;
    std::vector<double> values;  // state-major

    static QTable zeros(int states, int actions = 4);

    double at(int s, int a) const { return values[static_cast<std::size_t>(s) * action_count + a]; }
    double& at(int s, int a) { return values[static_cast<std::size_t>(s) * action_count + a]; }
    std::span<const double> row(int s) const {
        return {values.data() + static_cast<std::size_t>(s) * action_count,
                static_cast<std::size_t>(action_count)};
    }
};

/// Epsilon-greedy selection over a value row: with probability epsilon a
/// uniform action, otherwise uniform over the argmax set (random tie-break).
int epsilon_greedy(std::span<const double> action_values, double epsilon, std::mt19937_64& rng);

inline int select_action(const QTable& q, int state, double epsilon, std::mt19937_64& rng) {
    return epsilon_greedy(q.row(state), epsilon, rng);
}

/// One-step Q-learning update:
///   Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') * [not terminal] - Q(s,a))
/// Returns the new entry. Throws TrainingError on non-finite reward.
double q_update(QTable& q, int s, int a, double reward, int s_next, bool terminal,
                double alpha, double gamma);

struct QConfig {
    double alpha = 0.1;
    double gamma = 0.99;
    EpsilonSchedule epsilon{};
};

/// Table + schedule bundle driven by the harness.
class QLearningAgent {
public:
    QLearningAgent(int state_count, const QConfig& cfg)
        : cfg_(cfg), schedule_(cfg.epsilon), table_(QTable::zeros(state_count)) {}

    int act(int state, std::mt19937_64& rng) const {
        return select_action(table_, state, schedule_.epsilon, rng);
    }
    void learn(int s, int a, double r, int s_next, bool terminal) {
        q_update(table_, s, a, r, s_next, terminal, cfg_.alpha, cfg_.gamma);
    }
    void end_episode() { schedule_.decay_once(); }

    double epsilon() const { return schedule_.epsilon; }
    const QTable& table() const { return table_; }
    QTable& table() { return table_; }
    const QConfig& config() const { return cfg_; }

private:
    QConfig cfg_;
    EpsilonSchedule schedule_;
    QTable table_;
};

}  // namespace gridnav::tabular
