#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridnav/grid_map.hpp"
#include "gridnav/nn.hpp"
#include "gridnav/ppo.hpp"

namespace gridnav::validation {

/// Central finite differences (step h) of the scalar loss sum(output *
/// output_grad) against analytic backward() for one network/input pair.
/// Returns the max relative error over all parameters.
double gradient_max_rel_error(const nn::MlpNetwork& net, const nn::Vector& input,
                              const nn::Vector& output_grad, double h,
                              double analytic_perturbation = 0.0);

struct GradientCheckResult {
    double max_rel_error = 0.0;
    int trials = 0;
};

/// Run `trials` random small networks (<=3 hidden layers, widths <= 32)
/// through the finite-difference check. Inputs are resampled away from ReLU
/// kinks so central differences stay valid. `inject_bug` perturbs the
/// analytic gradient; a working check must then fail.
GradientCheckResult gradient_check(int trials, std::uint64_t seed, double h = 1e-5,
                                   bool inject_bug = false);

/// Direct double-sum advantage estimate: A_t = sum_l (gamma*lambda)^l *
/// delta_{t+l}, truncated at the first terminal. Independent of the
/// backward-recursion implementation it checks.
std::vector<double> gae_brute_force(std::span<const deep::RolloutEntry> rollout, double gamma,
                                    double lambda, std::optional<double> bootstrap_value);

/// Max absolute deviation between compute_gae and the brute-force sum over
/// `trials` random rollouts of the given length, including lambda in {0,1}.
double gae_check_max_error(int trials, int rollout_length, std::uint64_t seed);

/// Deterministic tabular model of the environment without obstacles or
/// falls, rebuilt from the motion/reward rules (not the Environment code).
/// States index as (y * width + x) * 4 + heading.
struct TabularModel {
    int state_count = 0;
    std::vector<bool> terminal;                  // absorbing goal states
    std::vector<std::array<int, 4>> next_state;  // per state, per action
    std::vector<std::array<double, 4>> reward;   // immediate reward
};

TabularModel build_model(const env::GridMap& map);

struct ValueIterationResult {
    std::vector<double> values;                 // V*
    std::vector<std::array<double, 4>> q;       // Q*
    int sweeps = 0;
};

/// Bellman optimality iteration to the given sup-norm threshold.
ValueIterationResult value_iteration(const TabularModel& model, double gamma,
                                     double threshold = 1e-10, int max_sweeps = 1000000);

/// Actions whose Q* is within `tie_tolerance` of the best; size 1 means the
/// optimal action is unique.
std::vector<int> optimal_action_set(const ValueIterationResult& vi, int state,
                                    double tie_tolerance = 1e-9);

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// The cmd_validate suite: gradient check, GAE oracle, value-iteration
/// convergence smoke. The seed feeds the randomized checks; pass/fail must
/// not depend on it.
std::vector<CheckResult> run_oracle_suite(std::uint64_t seed, bool inject_gradient_bug = false);

}  // namespace gridnav::validation
