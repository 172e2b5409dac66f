#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "gridnav/environment.hpp"
#include "gridnav/rng.hpp"
#include "gridnav/tabular.hpp"
#include "gridnav/validation.hpp"

using namespace gridnav;
using namespace gridnav::tabular;

namespace {

env::GridMap empty_map(int w, int h) {
    env::GridMap map;
    map.width = w;
    map.height = h;
    map.cell_size = 0.5;
    map.cells.assign(static_cast<std::size_t>(w * h), env::Occupancy::Empty);
    map.start_cell = {0, 0};
    map.goal_cell = {w - 1, h - 1};
    return map;
}

}  // namespace

TEST_CASE("init_qtable is all zeros") {
    QTable q = QTable::zeros(1600, 4);
    CHECK(q.values.size() == 6400);
    CHECK(*std::max_element(q.values.begin(), q.values.end()) == 0.0);
    CHECK(*std::min_element(q.values.begin(), q.values.end()) == 0.0);
    CHECK_THROWS_AS(QTable::zeros(0, 4), std::invalid_argument);
}

TEST_CASE("select_action is greedy at epsilon=0 with a unique argmax") {
    QTable q = QTable::zeros(2, 4);
    q.at(0, 0) = 1.0;
    q.at(0, 1) = 5.0;
    q.at(0, 2) = 2.0;
    q.at(0, 3) = 0.0;
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100; ++i) CHECK(select_action(q, 0, 0.0, rng) == 1);
}

TEST_CASE("select_action at epsilon=1 is uniform over actions") {
    QTable q = QTable::zeros(1, 4);
    q.at(0, 2) = 100.0;  // greedy would always pick 2
    std::mt19937_64 rng = make_rng(7, "eps-greedy");
    std::array<int, 4> counts{};
    const int n = 10000;
    for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(select_action(q, 0, 1.0, rng))];
    for (int a = 0; a < 4; ++a) {
        double freq = static_cast<double>(counts[static_cast<std::size_t>(a)]) / n;
        CHECK(freq > 0.23);
        CHECK(freq < 0.27);
    }
}

TEST_CASE("greedy ties break uniformly at random") {
    QTable q = QTable::zeros(1, 4);  // fresh row: all-zero tie
    std::mt19937_64 rng = make_rng(8, "ties");
    std::array<int, 4> counts{};
    const int n = 10000;
    for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(select_action(q, 0, 0.0, rng))];
    for (int a = 0; a < 4; ++a) {
        double freq = static_cast<double>(counts[static_cast<std::size_t>(a)]) / n;
        CHECK(freq > 0.22);
        CHECK(freq < 0.28);
    }

    // partial tie: only the tied pair should appear
    q.at(0, 1) = 3.0;
    q.at(0, 3) = 3.0;
    counts = {};
    for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(select_action(q, 0, 0.0, rng))];
    CHECK(counts[0] == 0);
    CHECK(counts[2] == 0);
    CHECK(counts[1] + counts[3] == n);
    CHECK(std::abs(counts[1] - counts[3]) < n / 10);
}

TEST_CASE("q_update substitution examples") {
    QTable q = QTable::zeros(4, 4);

    // Q=0, alpha=0.5, R=-1, gamma=0.9, max'=0 -> -0.5
    CHECK(q_update(q, 0, 0, -1.0, 1, false, 0.5, 0.9) == doctest::Approx(-0.5));

    // Q=2, alpha=0.1, R=100, terminal -> 11.8
    q.at(1, 2) = 2.0;
    CHECK(q_update(q, 1, 2, 100.0, 3, true, 0.1, 0.9) == doctest::Approx(11.8));

    // Q=1, alpha=0.5, R=-100, gamma=0.9, max'=2 -> -48.6
    q.at(2, 0) = 1.0;
    q.at(3, 1) = 2.0;
    CHECK(q_update(q, 2, 0, -100.0, 3, false, 0.5, 0.9) == doctest::Approx(-48.6));

    CHECK_THROWS_AS(q_update(q, 0, 0, std::nan(""), 1, false, 0.5, 0.9), TrainingError);
}

TEST_CASE("terminal updates ignore the next state's values") {
    QTable q = QTable::zeros(2, 4);
    q.at(1, 0) = 1e9;  // must not leak through the terminal
    double v = q_update(q, 0, 0, -50.0, 1, true, 1.0, 0.99);
    CHECK(v == doctest::Approx(-50.0));
}

TEST_CASE("epsilon schedule decays multiplicatively to the floor") {
    EpsilonSchedule s;
    s.epsilon = 1.0;
    s.decay = 0.9995;
    s.floor = 0.05;
    s.decay_once();
    CHECK(s.epsilon == doctest::Approx(0.9995));

    EpsilonSchedule at_floor{0.05, 0.9, 0.05};
    at_floor.decay_once();
    CHECK(at_floor.epsilon == 0.05);

    // closed form after N decays
    EpsilonSchedule iter{1.0, 0.999, 0.01};
    for (int n = 1; n <= 3000; ++n) {
        iter.decay_once();
        double want = std::max(0.01, std::pow(0.999, n));
        CHECK(iter.epsilon == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("epsilon is monotonically non-increasing across episodes") {
    EpsilonSchedule s{1.0, 0.99, 0.05};
    double prev = s.epsilon;
    for (int i = 0; i < 1000; ++i) {
        s.decay_once();
        CHECK(s.epsilon <= prev);
        prev = s.epsilon;
    }
}

TEST_CASE("q_update is a near-fixed-point at the Bellman optimum") {
    env::GridMap map = empty_map(4, 4);
    validation::TabularModel model = validation::build_model(map);
    auto vi = validation::value_iteration(model, 0.99, 1e-13, 2000000);

    QTable q = QTable::zeros(model.state_count, 4);
    for (int s = 0; s < model.state_count; ++s)
        for (int a = 0; a < 4; ++a)
            if (!model.terminal[static_cast<std::size_t>(s)])
                q.at(s, a) = vi.q[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];

    for (int s = 0; s < model.state_count; ++s) {
        if (model.terminal[static_cast<std::size_t>(s)]) continue;
        for (int a = 0; a < 4; ++a) {
            int ns = model.next_state[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
            double r = model.reward[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
            double before = q.at(s, a);
            double after = q_update(q, s, a, r, ns,
                                    model.terminal[static_cast<std::size_t>(ns)], 0.1, 0.99);
            CHECK(std::abs(after - before) < 1e-12);
            q.at(s, a) = before;  // restore for the other probes
        }
    }
}

TEST_CASE("training on a 4x4 grid recovers the value-iteration policy") {
    env::GridMap map = empty_map(4, 4);
    validation::TabularModel model = validation::build_model(map);
    auto vi = validation::value_iteration(model, 0.99, 1e-10);

    env::Environment e(map, {0.0, 200});
    QConfig cfg;
    QLearningAgent agent(env::state_count(map), cfg);
    std::mt19937_64 env_rng = make_rng(1, "env");
    std::mt19937_64 agent_rng = make_rng(1, "agent");
    double bound = 100.0 / (1.0 - cfg.gamma) + 1.0;

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

    // no divergence
    for (double v : agent.table().values) {
        CHECK(std::isfinite(v));
        CHECK(std::abs(v) <= bound);
    }

    int mismatches = 0;
    int unique_states = 0;
    for (int s = 0; s < model.state_count; ++s) {
        if (model.terminal[static_cast<std::size_t>(s)]) continue;
        auto optimal = validation::optimal_action_set(vi, s);
        if (optimal.size() != 1) continue;
        ++unique_states;
        auto row = agent.table().row(s);
        int greedy = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
        if (greedy != optimal[0]) ++mismatches;
    }
    CHECK(unique_states > 0);
    CHECK(mismatches == 0);
}
