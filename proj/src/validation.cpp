#include "gridnav/validation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "gridnav/environment.hpp"
#include "gridnav/rng.hpp"
#include "gridnav/tabular.hpp"

namespace gridnav::validation {

namespace {

double loss_of(const nn::MlpNetwork& net, const nn::Vector& input, const nn::Vector& grad) {
    return net.forward1(input).dot(grad);
}

std::vector<double*> parameter_pointers(nn::MlpNetwork& net) {
    std::vector<double*> params;
    for (auto& layer : net.layers) {
        for (Eigen::Index i = 0; i < layer.weights.size(); ++i)
            params.push_back(layer.weights.data() + i);
        for (Eigen::Index i = 0; i < layer.biases.size(); ++i)
            params.push_back(layer.biases.data() + i);
    }
    return params;
}

std::vector<double> flatten(const nn::Gradients& g) {
    std::vector<double> flat;
    for (const auto& w : g.weights) flat.insert(flat.end(), w.data(), w.data() + w.size());
    for (const auto& b : g.biases) flat.insert(flat.end(), b.data(), b.data() + b.size());
    return flat;
}

// backward() flattened in the same order as parameter_pointers().
std::vector<double> analytic_flat(const nn::MlpNetwork& net, const nn::Vector& input,
                                  const nn::Vector& output_grad) {
    nn::ForwardCache cache;
    nn::Matrix in_row = input.transpose();
    net.forward(in_row, &cache);
    nn::Gradients g = net.backward(cache, output_grad.transpose());
    std::vector<double> flat;
    for (std::size_t l = 0; l < g.weights.size(); ++l) {
        flat.insert(flat.end(), g.weights[l].data(), g.weights[l].data() + g.weights[l].size());
        flat.insert(flat.end(), g.biases[l].data(), g.biases[l].data() + g.biases[l].size());
    }
    return flat;
}

// Smallest |pre-activation| across hidden units; central differences need
// the network to stay on one side of every ReLU kink.
double relu_margin(const nn::MlpNetwork& net, const nn::Vector& input) {
    nn::ForwardCache cache;
    nn::Matrix in_row = input.transpose();
    net.forward(in_row, &cache);
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        if (net.layers[l].activation != nn::Activation::ReLU) continue;
        margin = std::min(margin, cache.pre[l].cwiseAbs().minCoeff());
    }
    return margin;
}

}  // namespace

double gradient_max_rel_error(const nn::MlpNetwork& net, const nn::Vector& input,
                              const nn::Vector& output_grad, double h,
                              double analytic_perturbation) {
    std::vector<double> analytic = analytic_flat(net, input, output_grad);
    if (analytic_perturbation != 0.0)
        for (double& a : analytic) a += analytic_perturbation;

    nn::MlpNetwork probe = net;
    std::vector<double*> params = parameter_pointers(probe);
    double worst = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
        double saved = *params[k];
        *params[k] = saved + h;
        double up = loss_of(probe, input, output_grad);
        *params[k] = saved - h;
        double down = loss_of(probe, input, output_grad);
        *params[k] = saved;
        double fd = (up - down) / (2.0 * h);
        double denom = std::max(std::abs(analytic[k]), std::abs(fd));
        double err = denom < 1e-8 ? std::abs(analytic[k] - fd)
                                  : std::abs(analytic[k] - fd) / denom;
        worst = std::max(worst, err);
    }
    return worst;
}

GradientCheckResult gradient_check(int trials, std::uint64_t seed, double h, bool inject_bug) {
    std::mt19937_64 rng = make_rng(seed, "gradient-check");
    GradientCheckResult result;
    result.trials = trials;
    for (int t = 0; t < trials; ++t) {
        std::uniform_int_distribution<int> depth_dist(1, 3);
        std::uniform_int_distribution<int> width_dist(1, 32);
        std::uniform_int_distribution<int> io_dist(1, 8);
        std::vector<int> sizes{io_dist(rng)};
        int depth = depth_dist(rng);
        for (int d = 0; d < depth; ++d) sizes.push_back(width_dist(rng));
        sizes.push_back(io_dist(rng));

        nn::MlpNetwork net = nn::MlpNetwork::init(sizes, rng());

        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        nn::Vector input(sizes.front());
        for (int attempt = 0; attempt < 64; ++attempt) {
            for (Eigen::Index i = 0; i < input.size(); ++i) input[i] = unit(rng);
            if (relu_margin(net, input) > 1e-3) break;
        }
        nn::Vector output_grad(sizes.back());
        for (Eigen::Index i = 0; i < output_grad.size(); ++i) output_grad[i] = unit(rng);

        double err = gradient_max_rel_error(net, input, output_grad, h,
                                            inject_bug ? 1e-3 : 0.0);
        result.max_rel_error = std::max(result.max_rel_error, err);
    }
    return result;
}

std::vector<double> gae_brute_force(std::span<const deep::RolloutEntry> rollout, double gamma,
                                    double lambda, std::optional<double> bootstrap_value) {
    const std::size_t n = rollout.size();
    auto delta_at = [&](std::size_t t) {
        const auto& e = rollout[t];
        if (e.terminal) return e.reward - e.value;
        double next_value = (t + 1 < n) ? rollout[t + 1].value : bootstrap_value.value();
        return e.reward + gamma * next_value - e.value;
    };
    std::vector<double> adv(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        double acc = 0.0;
        double w = 1.0;
        for (std::size_t u = t; u < n; ++u) {
            acc += w * delta_at(u);
            if (rollout[u].terminal) break;
            w *= gamma * lambda;
        }
        adv[t] = acc;
    }
    return adv;
}

double gae_check_max_error(int trials, int rollout_length, std::uint64_t seed) {
    std::mt19937_64 rng = make_rng(seed, "gae-check");
    std::uniform_real_distribution<double> reward_dist(-100.0, 100.0);
    std::uniform_real_distribution<double> value_dist(-50.0, 50.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        std::vector<deep::RolloutEntry> rollout(static_cast<std::size_t>(rollout_length));
        for (auto& e : rollout) {
            e.reward = reward_dist(rng);
            e.value = value_dist(rng);
            e.terminal = unit(rng) < 0.15;
        }
        double gamma = 0.9 + 0.099 * unit(rng);
        double lambda = (t % 3 == 0) ? 0.0 : (t % 3 == 1) ? 1.0 : unit(rng);
        std::optional<double> bootstrap;
        if (!rollout.back().terminal) bootstrap = value_dist(rng);

        auto got = deep::compute_gae(rollout, gamma, lambda, bootstrap);
        auto want = gae_brute_force(rollout, gamma, lambda, bootstrap);
        for (std::size_t i = 0; i < want.size(); ++i)
            worst = std::max(worst, std::abs(got.advantages[i] - want[i]));
    }
    return worst;
}

TabularModel build_model(const env::GridMap& map) {
    const int w = map.width;
    const int hgt = map.height;
    const int d_max = std::abs(map.start_cell.x - map.goal_cell.x) +
                      std::abs(map.start_cell.y - map.goal_cell.y);

    auto dist_to_goal = [&](int x, int y) {
        return std::abs(x - map.goal_cell.x) + std::abs(y - map.goal_cell.y);
    };
    auto penalty = [&](int x, int y) {
        double ratio = std::min(1.0, static_cast<double>(dist_to_goal(x, y)) / d_max);
        return -(1.0 + 9.0 * ratio);
    };
    auto index = [&](int x, int y, int h) { return (y * w + x) * 4 + h; };

    TabularModel m;
    m.state_count = w * hgt * 4;
    m.terminal.assign(static_cast<std::size_t>(m.state_count), false);
    m.next_state.assign(static_cast<std::size_t>(m.state_count), {});
    m.reward.assign(static_cast<std::size_t>(m.state_count), {});

    // Heading order North, East, South, West; action order Forward, TurnLeft,
    // TurnRight, Wait.
    constexpr int dx[4] = {0, 1, 0, -1};
    constexpr int dy[4] = {-1, 0, 1, 0};

    for (int y = 0; y < hgt; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int h = 0; h < 4; ++h) {
                int s = index(x, y, h);
                if (x == map.goal_cell.x && y == map.goal_cell.y) {
                    m.terminal[static_cast<std::size_t>(s)] = true;
                    continue;
                }
                auto& ns = m.next_state[static_cast<std::size_t>(s)];
                auto& rw = m.reward[static_cast<std::size_t>(s)];
                // Forward
                {
                    int tx = x + dx[h];
                    int ty = y + dy[h];
                    bool blocked = tx < 0 || tx >= w || ty < 0 || ty >= hgt ||
                                   map.at({tx, ty}) == env::Occupancy::Full;
                    if (blocked) {
                        ns[0] = s;
                        rw[0] = -100.0;
                    } else if (tx == map.goal_cell.x && ty == map.goal_cell.y) {
                        ns[0] = index(tx, ty, h);
                        rw[0] = 100.0;
                    } else {
                        ns[0] = index(tx, ty, h);
                        rw[0] = penalty(tx, ty);
                    }
                }
                ns[1] = index(x, y, (h + 3) % 4);  // TurnLeft
                rw[1] = penalty(x, y);
                ns[2] = index(x, y, (h + 1) % 4);  // TurnRight
                rw[2] = penalty(x, y);
                ns[3] = s;  // Wait
                rw[3] = penalty(x, y);
            }
        }
    }
    return m;
}

ValueIterationResult value_iteration(const TabularModel& model, double gamma, double threshold,
                                     int max_sweeps) {
    ValueIterationResult r;
    r.values.assign(static_cast<std::size_t>(model.state_count), 0.0);
    r.q.assign(static_cast<std::size_t>(model.state_count), {});

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double change = 0.0;
        for (int s = 0; s < model.state_count; ++s) {
            if (model.terminal[static_cast<std::size_t>(s)]) continue;
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < 4; ++a) {
                int ns = model.next_state[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
                double q = model.reward[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] +
                           gamma * r.values[static_cast<std::size_t>(ns)];
                r.q[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] = q;
                best = std::max(best, q);
            }
            change = std::max(change, std::abs(best - r.values[static_cast<std::size_t>(s)]));
            r.values[static_cast<std::size_t>(s)] = best;
        }
        r.sweeps = sweep + 1;
        if (change < threshold) break;
    }
    return r;
}

std::vector<int> optimal_action_set(const ValueIterationResult& vi, int state,
                                    double tie_tolerance) {
    const auto& q = vi.q[static_cast<std::size_t>(state)];
    double best = *std::max_element(q.begin(), q.end());
    std::vector<int> out;
    for (int a = 0; a < 4; ++a)
        if (q[static_cast<std::size_t>(a)] >= best - tie_tolerance) out.push_back(a);
    return out;
}

namespace {

env::GridMap small_empty_map(int w, int h) {
    env::GridMap map;
    map.width = w;
    map.height = h;
    map.cell_size = 0.5;
    map.cells.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h),
                     env::Occupancy::Empty);
    map.start_cell = {0, 0};
    map.goal_cell = {w - 1, h - 1};
    return map;
}

// Fixed-seed Q-learning run compared against value iteration; the released
// artifact must always pass this.
CheckResult value_iteration_smoke() {
    env::GridMap map = small_empty_map(4, 4);
    TabularModel model = build_model(map);
    tabular::QConfig cfg;
    ValueIterationResult vi = value_iteration(model, cfg.gamma);

    env::Environment e(map, {0.0, 200});
    tabular::QLearningAgent agent(env::state_count(map), cfg);
    std::mt19937_64 env_rng = make_rng(20201, "env");
    std::mt19937_64 agent_rng = make_rng(20201, "agent");
    for (int ep = 0; ep < 5000; ++ep) {
        e.reset();
        while (true) {
            int s = e.discrete_state();
            int a = agent.act(s, agent_rng);
            auto out = e.step(static_cast<env::Action>(a), env_rng);
            agent.learn(s, a, out.reward, e.discrete_state(), out.terminal);
            if (out.terminal) break;
        }
        agent.end_episode();
    }

    int unique_states = 0;
    int mismatches = 0;
    for (int s = 0; s < model.state_count; ++s) {
        if (model.terminal[static_cast<std::size_t>(s)]) continue;
        auto optimal = optimal_action_set(vi, s);
        if (optimal.size() != 1) continue;
        ++unique_states;
        auto row = agent.table().row(s);
        int greedy = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
        if (greedy != optimal[0]) ++mismatches;
    }
    std::ostringstream detail;
    detail << mismatches << " greedy mismatches over " << unique_states
           << " uniquely-optimal states (4x4 grid, 5000 episodes)";
    return {"value_iteration_smoke", mismatches == 0, detail.str()};
}

}  // namespace

std::vector<CheckResult> run_oracle_suite(std::uint64_t seed, bool inject_gradient_bug) {
    std::vector<CheckResult> results;

    GradientCheckResult grad = gradient_check(100, seed, 1e-5, inject_gradient_bug);
    std::ostringstream grad_detail;
    grad_detail << "max relative error " << grad.max_rel_error << " over " << grad.trials
                << " networks (tolerance 1e-4)";
    results.push_back({"gradient_check", grad.max_rel_error < 1e-4, grad_detail.str()});

    double gae_err = gae_check_max_error(100, 20, seed);
    std::ostringstream gae_detail;
    gae_detail << "max deviation " << gae_err << " from brute-force recursion (tolerance 1e-10)";
    results.push_back({"gae_oracle", gae_err < 1e-10, gae_detail.str()});

    results.push_back(value_iteration_smoke());
    return results;
}

}  // namespace gridnav::validation
