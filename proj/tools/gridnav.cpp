// gridnav: train Q/DQN/PPO navigators on grid maps, compare runs, and
// validate the numerical core.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <thread>

#include "gridnav/compare.hpp"
#include "gridnav/harness.hpp"
#include "gridnav/validation.hpp"

namespace {

using gridnav::ConfigError;
using gridnav::harness::Algorithm;
using gridnav::harness::ExperimentConfig;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            out.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            throw ConfigError(what + ": expected comma-separated integers, got '" + s + "'");
        }
    }
    if (out.empty()) throw ConfigError(what + ": empty list");
    return out;
}

double parse_num(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("--hp " + key + ": expected a number, got '" + v + "'");
    }
}

// Hyperparameter overrides for the selected algorithm, e.g. --hp lr=0.001.
void apply_hp(ExperimentConfig& c, const std::string& key, const std::string& value) {
    if (c.algorithm == Algorithm::Q) {
        auto& q = c.q;
        if (key == "alpha") q.alpha = parse_num(value, key);
        else if (key == "gamma") q.gamma = parse_num(value, key);
        else if (key == "epsilon") q.epsilon.epsilon = parse_num(value, key);
        else if (key == "epsilon_decay") q.epsilon.decay = parse_num(value, key);
        else if (key == "epsilon_floor") q.epsilon.floor = parse_num(value, key);
        else
            throw ConfigError("--hp: unknown q key '" + key +
                              "' (alpha, gamma, epsilon, epsilon_decay, epsilon_floor)");
        return;
    }
    if (c.algorithm == Algorithm::Dqn) {
        auto& d = c.dqn;
        if (key == "gamma") d.gamma = parse_num(value, key);
        else if (key == "lr") d.lr = parse_num(value, key);
        else if (key == "batch_size") d.batch_size = static_cast<std::size_t>(parse_num(value, key));
        else if (key == "buffer_capacity")
            d.buffer_capacity = static_cast<std::size_t>(parse_num(value, key));
        else if (key == "sync_interval") d.sync_interval = static_cast<int>(parse_num(value, key));
        else if (key == "huber_delta") d.huber_delta = parse_num(value, key);
        else if (key == "loss") {
            if (value == "huber") d.loss = gridnav::deep::DqnConfig::Loss::Huber;
            else if (value == "mse") d.loss = gridnav::deep::DqnConfig::Loss::Mse;
            else throw ConfigError("--hp loss: expected huber or mse");
        } else if (key == "hidden") d.hidden = parse_int_list(value, "--hp hidden");
        else if (key == "epsilon") d.epsilon.epsilon = parse_num(value, key);
        else if (key == "epsilon_decay") d.epsilon.decay = parse_num(value, key);
        else if (key == "epsilon_floor") d.epsilon.floor = parse_num(value, key);
        else
            throw ConfigError("--hp: unknown dqn key '" + key +
                              "' (gamma, lr, batch_size, buffer_capacity, sync_interval, loss, "
                              "huber_delta, hidden, epsilon, epsilon_decay, epsilon_floor)");
        return;
    }
    auto& p = c.ppo;
    if (key == "gamma") p.gamma = parse_num(value, key);
    else if (key == "lambda") p.lambda = parse_num(value, key);
    else if (key == "clip_eps") p.clip_eps = parse_num(value, key);
    else if (key == "entropy_coef") p.entropy_coef = parse_num(value, key);
    else if (key == "value_coef") p.value_coef = parse_num(value, key);
    else if (key == "lr") p.lr = parse_num(value, key);
    else if (key == "max_grad_norm") p.max_grad_norm = parse_num(value, key);
    else if (key == "epochs") p.epochs = static_cast<int>(parse_num(value, key));
    else if (key == "minibatch") p.minibatch = static_cast<std::size_t>(parse_num(value, key));
    else if (key == "horizon") p.horizon = static_cast<std::size_t>(parse_num(value, key));
    else if (key == "trunk_hidden") p.trunk_hidden = parse_int_list(value, "--hp trunk_hidden");
    else if (key == "head_hidden") p.head_hidden = static_cast<int>(parse_num(value, key));
    else
        throw ConfigError("--hp: unknown ppo key '" + key +
                          "' (gamma, lambda, clip_eps, entropy_coef, value_coef, lr, "
                          "max_grad_norm, epochs, minibatch, horizon, trunk_hidden, head_hidden)");
}

struct TrainArgs {
    std::string algo = "q";
    std::string map_path;
    long episodes = 20000;
    int max_steps = 200;
    std::uint64_t seed = 0;
    std::string seeds;  // comma list; fans out over parallel workers
    double p_fall = 0.01;
    long checkpoint_every = 1000;
    bool no_wall_time = false;
    std::string out_dir = "runs";
    std::string run_dir;
    std::string config_path;
    std::vector<std::string> hp;
};

ExperimentConfig build_config(const TrainArgs& args, const CLI::App* cmd) {
    ExperimentConfig c;
    // Precedence: built-in defaults, then config file, then explicit flags.
    if (!args.config_path.empty()) {
        std::ifstream in(args.config_path);
        if (!in) throw ConfigError("cannot open config file: " + args.config_path);
        nlohmann::ordered_json j;
        try {
            j = nlohmann::ordered_json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("config file " + args.config_path + ": " + e.what());
        }
        gridnav::harness::config_from_json(j, c);
    }
    auto passed = [&](const char* flag) { return cmd->count(flag) > 0; };
    if (passed("--algo")) c.algorithm = gridnav::harness::algorithm_from_string(args.algo);
    if (passed("--map")) c.map_path = args.map_path;
    if (passed("--episodes")) c.episodes = args.episodes;
    if (passed("--max-steps")) c.max_steps = args.max_steps;
    if (passed("--seed")) c.seed = args.seed;
    if (passed("--p-fall")) c.p_fall = args.p_fall;
    if (passed("--checkpoint-every")) c.checkpoint_every = args.checkpoint_every;
    if (passed("--no-wall-time")) c.record_wall_time = false;
    if (passed("--out")) c.out_dir = args.out_dir;
    if (passed("--run-dir")) c.run_dir = args.run_dir;

    for (const std::string& kv : args.hp) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--hp expects key=value, got '" + kv + "'");
        apply_hp(c, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return c;
}

int cmd_train(const TrainArgs& args, const CLI::App* cmd) {
    ExperimentConfig base;
    try {
        base = build_config(args, cmd);
        base.validate();
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    std::vector<std::uint64_t> seeds;
    if (!args.seeds.empty()) {
        for (int s : parse_int_list(args.seeds, "--seeds"))
            seeds.push_back(static_cast<std::uint64_t>(s));
        if (!base.run_dir.empty())
            throw ConfigError("--run-dir cannot be combined with --seeds");
    } else {
        seeds.push_back(base.seed);
    }

    struct Outcome {
        std::uint64_t seed;
        std::string run_dir;
        std::string error;
    };
    std::vector<Outcome> outcomes(seeds.size());
    auto worker = [&](std::size_t i) {
        ExperimentConfig c = base;
        c.seed = seeds[i];
        outcomes[i].seed = seeds[i];
        try {
            outcomes[i].run_dir = gridnav::harness::run_experiment(c).string();
        } catch (const std::exception& e) {
            outcomes[i].error = e.what();
        }
    };
    if (seeds.size() == 1) {
        worker(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(seeds.size());
        for (std::size_t i = 0; i < seeds.size(); ++i) threads.emplace_back(worker, i);
        for (auto& t : threads) t.join();
    }

    bool failed = false;
    for (const Outcome& o : outcomes) {
        if (!o.error.empty()) {
            std::cerr << "seed " << o.seed << " failed: " << o.error << '\n';
            failed = true;
            continue;
        }
        auto records = gridnav::harness::read_metrics(std::filesystem::path(o.run_dir) /
                                                      "metrics.csv");
        long goals = 0;
        double reward_sum = 0.0;
        for (const auto& r : records) {
            goals += r.reached_goal ? 1 : 0;
            reward_sum += r.total_reward;
        }
        double n = records.empty() ? 1.0 : static_cast<double>(records.size());
        std::cout << o.run_dir << "\nepisodes=" << records.size()
                  << " success_rate=" << static_cast<double>(goals) / n
                  << " mean_reward=" << reward_sum / n << '\n';
    }
    return failed ? kExitRuntime : kExitOk;
}

int cmd_compare(const std::vector<std::string>& run_dirs, const std::string& out_dir,
                int window) {
    std::vector<gridnav::compare::RunData> runs;
    runs.reserve(run_dirs.size());
    for (const auto& dir : run_dirs) runs.push_back(gridnav::compare::load_run(dir));
    gridnav::compare::write_comparison(runs, out_dir, window);
    std::cout << "comparison written to " << out_dir << '\n';
    for (const char* name :
         {"fig4_reward.csv", "fig5_exploration.csv", "fig6_steps.csv", "fig7_steps_to_goal.csv",
          "fig8_collisions.csv", "fig9_reward_boxplot.csv", "fig10_steps_boxplot.csv",
          "analysis.json"})
        std::cout << "  " << name << '\n';
    return kExitOk;
}

int cmd_validate(std::uint64_t seed, bool negative_control) {
    auto results = gridnav::validation::run_oracle_suite(seed, negative_control);
    bool all_pass = true;
    for (const auto& r : results) {
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << " - " << r.detail << '\n';
        all_pass = all_pass && r.pass;
    }
    return all_pass ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grid navigation RL benchmark: tabular Q-learning vs DQN vs PPO"};
    app.require_subcommand(1);

    TrainArgs train_args;
    CLI::App* train = app.add_subcommand("train", "Run one training experiment (or several seeds)");
    train->add_option("--algo", train_args.algo, "Algorithm")
        ->check(CLI::IsMember({"q", "dqn", "ppo"}))
        ->capture_default_str();
    train->add_option("--map", train_args.map_path, "Map file path");
    train->add_option("--episodes", train_args.episodes, "Episode budget")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    train->add_option("--max-steps", train_args.max_steps, "Step cap per episode")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    train->add_option("--seed", train_args.seed, "Master seed")->capture_default_str();
    train->add_option("--seeds", train_args.seeds,
                      "Comma-separated seeds; runs in parallel workers");
    train->add_option("--p-fall", train_args.p_fall, "Fall probability per forward move")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    train->add_option("--checkpoint-every", train_args.checkpoint_every,
                      "Episodes between checkpoints (0 = final only)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    train->add_flag("--no-wall-time", train_args.no_wall_time,
                    "Write wall_time_ms=0 so reruns are byte-identical");
    train->add_option("--out", train_args.out_dir, "Directory for run directories")
        ->capture_default_str();
    train->add_option("--run-dir", train_args.run_dir,
                      "Exact run directory (overrides --out naming)");
    train->add_option("--config", train_args.config_path, "JSON config file");
    train->add_option("--hp", train_args.hp,
                      "Hyperparameter override key=value for the selected algorithm (repeatable)");

    std::vector<std::string> compare_dirs;
    std::string compare_out = "comparison";
    int compare_window = 100;
    CLI::App* cmp = app.add_subcommand("compare", "Build figure CSVs and tests from runs");
    cmp->add_option("runs", compare_dirs, "Run directories (>= 2)")->required()->expected(2, -1);
    cmp->add_option("--out", compare_out, "Output directory")->capture_default_str();
    cmp->add_option("--window", compare_window, "Smoothing window (episodes)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    std::uint64_t validate_seed = 0;
    bool negative_control = false;
    CLI::App* val = app.add_subcommand("validate", "Run the built-in oracle suite");
    val->add_option("--seed", validate_seed, "Seed for the randomized checks")
        ->capture_default_str();
    val->add_flag("--negative-control", negative_control,
                  "Inject a gradient bug; the gradient check must then fail")
        ->group("");  // test fixture, hidden from --help

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (train->parsed()) return cmd_train(train_args, train);
        if (cmp->parsed()) return cmd_compare(compare_dirs, compare_out, compare_window);
        return cmd_validate(validate_seed, negative_control);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
