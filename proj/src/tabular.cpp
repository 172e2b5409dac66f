#include "gridnav/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridnav::tabular {

QTable QTable::zeros(int states, int actions) {
    if (states <= 0 || actions <= 0)
        throw std::invalid_argument("QTable dimensions must be positive");
    QTable q;
    q.state_count = states;
    q.action_count = actions;
    q.values.assign(static_cast<std::size_t>(states) * static_cast<std::size_t>(actions), 0.0);
    return q;
}

int epsilon_greedy(std::span<const double> action_values, double epsilon, std::mt19937_64& rng) {
    int n = static_cast<int>(action_values.size());
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (epsilon > 0.0 && coin(rng) < epsilon)
        return std::uniform_int_distribution<int>(0, n - 1)(rng);

    double best = *std::max_element(action_values.begin(), action_values.end());
    int ties = 0;
    for (int a = 0; a < n; ++a)
        if (action_values[static_cast<std::size_t>(a)] == best) ++ties;
    if (ties == 1) {
        for (int a = 0; a < n; ++a)
            if (action_values[static_cast<std::size_t>(a)] == best) return a;
    }
    int pick = std::uniform_int_distribution<int>(0, ties - 1)(rng);
    for (int a = 0; a < n; ++a) {
        if (action_values[static_cast<std::size_t>(a)] == best && pick-- == 0) return a;
    }
    return n - 1;  // unreachable
}

double q_update(QTable& q, int s, int a, double reward, int s_next, bool terminal,
                double alpha, double gamma) {
    if (!std::isfinite(reward)) throw TrainingError("non-finite reward in q_update");
    double target = reward;
    if (!terminal) {
        auto row = q.row(s_next);
        target += gamma * *std::max_element(row.begin(), row.end());
    }
    double& entry = q.at(s, a);
    entry += alpha * (target - entry);
    return entry;
}

}  // namespace gridnav::tabular
