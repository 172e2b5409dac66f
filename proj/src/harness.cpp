#include "gridnav/harness.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "gridnav/checkpoint.hpp"
#include "gridnav/rng.hpp"

namespace gridnav::harness {

using json = nlohmann::ordered_json;

const char* to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Q: return "q";
        case Algorithm::Dqn: return "dqn";
        case Algorithm::Ppo: return "ppo";
    }
    return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
    if (s == "q") return Algorithm::Q;
    if (s == "dqn") return Algorithm::Dqn;
    if (s == "ppo") return Algorithm::Ppo;
    throw ConfigError("unknown algorithm '" + s + "' (expected one of: q, dqn, ppo)");
}

void ExperimentConfig::validate() const {
    if (map_path.empty()) throw ConfigError("map path is required");
    if (episodes < 1) throw ConfigError("episodes must be >= 1");
    if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
    if (p_fall < 0.0 || p_fall > 1.0) throw ConfigError("p_fall must be in [0,1]");
    if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");

    auto check_schedule = [](const tabular::EpsilonSchedule& s, const char* who) {
        if (s.epsilon < 0.0 || s.epsilon > 1.0)
            throw ConfigError(std::string(who) + ": epsilon must be in [0,1]");
        if (s.decay <= 0.0 || s.decay > 1.0)
            throw ConfigError(std::string(who) + ": epsilon decay must be in (0,1]");
        if (s.floor < 0.0 || s.floor > 1.0)
            throw ConfigError(std::string(who) + ": epsilon floor must be in [0,1]");
        if (s.floor > s.epsilon)
            throw ConfigError(std::string(who) + ": epsilon floor above initial epsilon");
    };

    if (q.alpha <= 0.0 || q.alpha > 1.0) throw ConfigError("q: alpha must be in (0,1]");
    if (q.gamma < 0.0 || q.gamma > 1.0) throw ConfigError("q: gamma must be in [0,1]");
    check_schedule(q.epsilon, "q");

    if (dqn.gamma < 0.0 || dqn.gamma > 1.0) throw ConfigError("dqn: gamma must be in [0,1]");
    if (dqn.lr <= 0.0) throw ConfigError("dqn: lr must be positive");
    if (dqn.batch_size < 1) throw ConfigError("dqn: batch_size must be >= 1");
    if (dqn.buffer_capacity < dqn.batch_size)
        throw ConfigError("dqn: buffer_capacity must be >= batch_size");
    if (dqn.sync_interval < 1) throw ConfigError("dqn: sync_interval must be >= 1");
    if (dqn.huber_delta <= 0.0) throw ConfigError("dqn: huber_delta must be positive");
    if (dqn.hidden.empty()) throw ConfigError("dqn: at least one hidden layer");
    check_schedule(dqn.epsilon, "dqn");

    if (ppo.gamma < 0.0 || ppo.gamma > 1.0) throw ConfigError("ppo: gamma must be in [0,1]");
    if (ppo.lambda < 0.0 || ppo.lambda > 1.0) throw ConfigError("ppo: lambda must be in [0,1]");
    if (ppo.clip_eps <= 0.0 || ppo.clip_eps >= 1.0)
        throw ConfigError("ppo: clip_eps must be in (0,1)");
    if (ppo.lr <= 0.0) throw ConfigError("ppo: lr must be positive");
    if (ppo.entropy_coef < 0.0) throw ConfigError("ppo: entropy_coef must be >= 0");
    if (ppo.value_coef < 0.0) throw ConfigError("ppo: value_coef must be >= 0");
    if (ppo.max_grad_norm < 0.0) throw ConfigError("ppo: max_grad_norm must be >= 0");
    if (ppo.epochs < 1) throw ConfigError("ppo: epochs must be >= 1");
    if (ppo.minibatch < 1) throw ConfigError("ppo: minibatch must be >= 1");
    if (ppo.horizon < 1) throw ConfigError("ppo: horizon must be >= 1");
    if (ppo.trunk_hidden.empty()) throw ConfigError("ppo: trunk needs hidden layers");
    if (ppo.head_hidden < 1) throw ConfigError("ppo: head_hidden must be >= 1");
}

json config_to_json(const ExperimentConfig& c) {
    return json{
        {"algorithm", to_string(c.algorithm)},
        {"map", c.map_path},
        {"episodes", c.episodes},
        {"max_steps", c.max_steps},
        {"seed", c.seed},
        {"p_fall", c.p_fall},
        {"checkpoint_every", c.checkpoint_every},
        {"record_wall_time", c.record_wall_time},
        {"q",
         {{"alpha", c.q.alpha},
          {"gamma", c.q.gamma},
          {"epsilon", c.q.epsilon.epsilon},
          {"epsilon_decay", c.q.epsilon.decay},
          {"epsilon_floor", c.q.epsilon.floor}}},
        {"dqn",
         {{"hidden", c.dqn.hidden},
          {"gamma", c.dqn.gamma},
          {"lr", c.dqn.lr},
          {"batch_size", c.dqn.batch_size},
          {"buffer_capacity", c.dqn.buffer_capacity},
          {"sync_interval", c.dqn.sync_interval},
          {"loss", c.dqn.loss == deep::DqnConfig::Loss::Huber ? "huber" : "mse"},
          {"huber_delta", c.dqn.huber_delta},
          {"epsilon", c.dqn.epsilon.epsilon},
          {"epsilon_decay", c.dqn.epsilon.decay},
          {"epsilon_floor", c.dqn.epsilon.floor}}},
        {"ppo",
         {{"trunk_hidden", c.ppo.trunk_hidden},
          {"head_hidden", c.ppo.head_hidden},
          {"gamma", c.ppo.gamma},
          {"lambda", c.ppo.lambda},
          {"clip_eps", c.ppo.clip_eps},
          {"entropy_coef", c.ppo.entropy_coef},
          {"value_coef", c.ppo.value_coef},
          {"lr", c.ppo.lr},
          {"max_grad_norm", c.ppo.max_grad_norm},
          {"epochs", c.ppo.epochs},
          {"minibatch", c.ppo.minibatch},
          {"horizon", c.ppo.horizon}}},
    };
}

void config_from_json(const json& j, ExperimentConfig& c) {
    if (j.contains("algorithm")) c.algorithm = algorithm_from_string(j.at("algorithm"));
    if (j.contains("map")) c.map_path = j.at("map").get<std::string>();
    if (j.contains("episodes")) c.episodes = j.at("episodes").get<long>();
    if (j.contains("max_steps")) c.max_steps = j.at("max_steps").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("p_fall")) c.p_fall = j.at("p_fall").get<double>();
    if (j.contains("checkpoint_every")) c.checkpoint_every = j.at("checkpoint_every").get<long>();
    if (j.contains("record_wall_time")) c.record_wall_time = j.at("record_wall_time").get<bool>();
    if (j.contains("q")) {
        const auto& q = j.at("q");
        if (q.contains("alpha")) c.q.alpha = q.at("alpha").get<double>();
        if (q.contains("gamma")) c.q.gamma = q.at("gamma").get<double>();
        if (q.contains("epsilon")) c.q.epsilon.epsilon = q.at("epsilon").get<double>();
        if (q.contains("epsilon_decay")) c.q.epsilon.decay = q.at("epsilon_decay").get<double>();
        if (q.contains("epsilon_floor")) c.q.epsilon.floor = q.at("epsilon_floor").get<double>();
    }
    if (j.contains("dqn")) {
        const auto& d = j.at("dqn");
        if (d.contains("hidden")) c.dqn.hidden = d.at("hidden").get<std::vector<int>>();
        if (d.contains("gamma")) c.dqn.gamma = d.at("gamma").get<double>();
        if (d.contains("lr")) c.dqn.lr = d.at("lr").get<double>();
        if (d.contains("batch_size")) c.dqn.batch_size = d.at("batch_size").get<std::size_t>();
        if (d.contains("buffer_capacity"))
            c.dqn.buffer_capacity = d.at("buffer_capacity").get<std::size_t>();
        if (d.contains("sync_interval")) c.dqn.sync_interval = d.at("sync_interval").get<int>();
        if (d.contains("loss")) {
            std::string loss = d.at("loss").get<std::string>();
            if (loss == "huber") c.dqn.loss = deep::DqnConfig::Loss::Huber;
            else if (loss == "mse") c.dqn.loss = deep::DqnConfig::Loss::Mse;
            else throw ConfigError("dqn: loss must be 'huber' or 'mse'");
        }
        if (d.contains("huber_delta")) c.dqn.huber_delta = d.at("huber_delta").get<double>();
        if (d.contains("epsilon")) c.dqn.epsilon.epsilon = d.at("epsilon").get<double>();
        if (d.contains("epsilon_decay")) c.dqn.epsilon.decay = d.at("epsilon_decay").get<double>();
        if (d.contains("epsilon_floor")) c.dqn.epsilon.floor = d.at("epsilon_floor").get<double>();
    }
    if (j.contains("ppo")) {
        const auto& p = j.at("ppo");
        if (p.contains("trunk_hidden"))
            c.ppo.trunk_hidden = p.at("trunk_hidden").get<std::vector<int>>();
        if (p.contains("head_hidden")) c.ppo.head_hidden = p.at("head_hidden").get<int>();
        if (p.contains("gamma")) c.ppo.gamma = p.at("gamma").get<double>();
        if (p.contains("lambda")) c.ppo.lambda = p.at("lambda").get<double>();
        if (p.contains("clip_eps")) c.ppo.clip_eps = p.at("clip_eps").get<double>();
        if (p.contains("entropy_coef")) c.ppo.entropy_coef = p.at("entropy_coef").get<double>();
        if (p.contains("value_coef")) c.ppo.value_coef = p.at("value_coef").get<double>();
        if (p.contains("lr")) c.ppo.lr = p.at("lr").get<double>();
        if (p.contains("max_grad_norm")) c.ppo.max_grad_norm = p.at("max_grad_norm").get<double>();
        if (p.contains("epochs")) c.ppo.epochs = p.at("epochs").get<int>();
        if (p.contains("minibatch")) c.ppo.minibatch = p.at("minibatch").get<std::size_t>();
        if (p.contains("horizon")) c.ppo.horizon = p.at("horizon").get<std::size_t>();
    }
}

namespace {

class QAdapter final : public Agent {
public:
    QAdapter(int state_count, const tabular::QConfig& cfg) : agent_(state_count, cfg) {}

    int act(const Observation& obs, std::mt19937_64& rng) override {
        return agent_.act(obs.state, rng);
    }
    void learn(const Observation& obs, int action, const env::StepOutcome& out,
               const Observation& next_obs, std::mt19937_64&) override {
        agent_.learn(obs.state, action, out.reward, next_obs.state, out.terminal);
    }
    void episode_end() override { agent_.end_episode(); }
    double exploration() const override { return agent_.epsilon(); }
    json checkpoint_payload() const override { return qtable_to_json(agent_.table()); }

private:
    tabular::QLearningAgent agent_;
};

class DqnAdapter final : public Agent {
public:
    DqnAdapter(int input_size, const deep::DqnConfig& cfg, std::uint64_t seed)
        : agent_(input_size, env::kActionCount, cfg, seed), buffer_(cfg.buffer_capacity) {}

    int act(const Observation& obs, std::mt19937_64& rng) override {
        return agent_.act(obs.features, rng);
    }
    void learn(const Observation& obs, int action, const env::StepOutcome& out,
               const Observation& next_obs, std::mt19937_64& rng) override {
        buffer_.push({obs.features, action, out.reward, next_obs.features, out.terminal});
        if (agent_.learn(buffer_, rng) &&
            agent_.learn_steps() % agent_.config().sync_interval == 0) {
            agent_.sync_target();
        }
    }
    void episode_end() override { agent_.epsilon().decay_once(); }
    double exploration() const override { return agent_.epsilon().epsilon; }
    json checkpoint_payload() const override { return dqn_agent_to_json(agent_); }

private:
    deep::DqnAgent agent_;
    deep::ReplayBuffer buffer_;
};

class PpoAdapter final : public Agent {
public:
    PpoAdapter(int input_size, const deep::PpoConfig& cfg, std::uint64_t seed)
        : agent_(input_size, env::kActionCount, cfg, seed) {}

    int act(const Observation& obs, std::mt19937_64& rng) override {
        pending_ = agent_.act(obs.features, rng);
        entropy_sum_ += pending_.entropy;
        ++entropy_count_;
        return pending_.action;
    }
    void learn(const Observation& obs, int action, const env::StepOutcome& out,
               const Observation& next_obs, std::mt19937_64& rng) override {
        agent_.store({obs.features, action, pending_.log_prob, out.reward, pending_.value,
                      out.terminal});
        if (agent_.rollout_full()) {
            std::optional<double> bootstrap;
            if (!out.terminal) bootstrap = agent_.value_of(next_obs.features);
            agent_.update(bootstrap, rng);
        }
    }
    void episode_start() override {
        entropy_sum_ = 0.0;
        entropy_count_ = 0;
    }
    double exploration() const override {
        return entropy_count_ > 0 ? entropy_sum_ / static_cast<double>(entropy_count_) : 0.0;
    }
    json checkpoint_payload() const override { return ppo_agent_to_json(agent_); }

private:
    deep::PpoAgent agent_;
    deep::PpoAgent::ActResult pending_{};
    double entropy_sum_ = 0.0;
    long entropy_count_ = 0;
};

std::string timestamp_utc() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y%m%d-%H%M%S");
    return ss.str();
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace

std::unique_ptr<Agent> make_agent(const ExperimentConfig& config, const env::Environment& e) {
    std::uint64_t init_seed = mix_seed(config.seed, "init");
    switch (config.algorithm) {
        case Algorithm::Q:
            return std::make_unique<QAdapter>(env::state_count(e.map()), config.q);
        case Algorithm::Dqn:
            return std::make_unique<DqnAdapter>(env::kFeatureSize, config.dqn, init_seed);
        case Algorithm::Ppo:
            return std::make_unique<PpoAdapter>(env::kFeatureSize, config.ppo, init_seed);
    }
    throw ConfigError("unknown algorithm");
}

std::pair<EpisodeRecord, env::EpisodeEvent> run_episode(env::Environment& e, Agent& agent,
                                                        const ExperimentConfig& config,
                                                        long episode_index,
                                                        std::mt19937_64& env_rng,
                                                        std::mt19937_64& agent_rng) {
    if (e.terminal()) throw std::logic_error("run_episode requires a reset environment");

    auto started = std::chrono::steady_clock::now();
    agent.episode_start();

    EpisodeRecord record;
    record.episode = episode_index;
    Observation obs{e.discrete_state(), e.features()};
    env::StepOutcome out;
    while (true) {
        int action = agent.act(obs, agent_rng);
        out = e.step(static_cast<env::Action>(action), env_rng);
        Observation next_obs{e.discrete_state(), e.features()};
        agent.learn(obs, action, out, next_obs, agent_rng);

        record.total_reward += out.reward;
        ++record.steps;
        if (out.collided) ++record.collisions;
        if (out.terminal) break;
        obs = std::move(next_obs);
    }
    record.reached_goal = out.reached_goal;
    record.fell = out.fell;
    record.timed_out = out.timed_out;
    record.exploration = agent.exploration();
    if (config.record_wall_time) {
        record.wall_time_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
                .count();
    }
    return {record, env::to_event(out)};
}

std::filesystem::path run_experiment(const ExperimentConfig& config) {
    config.validate();
    env::GridMap map = env::load_map_file(config.map_path);
    env::Environment e(std::move(map), {config.p_fall, config.max_steps});
    auto agent = make_agent(config, e);

    std::mt19937_64 env_rng = make_rng(config.seed, "env");
    std::mt19937_64 agent_rng = make_rng(config.seed, "agent");

    std::filesystem::path dir;
    if (!config.run_dir.empty()) {
        dir = config.run_dir;
    } else {
        std::string stem = std::filesystem::path(config.map_path).stem().string();
        std::string base = std::string(to_string(config.algorithm)) + "_" + stem + "_" +
                           std::to_string(config.seed) + "_" + timestamp_utc();
        dir = std::filesystem::path(config.out_dir) / base;
        for (int k = 1; std::filesystem::exists(dir); ++k)
            dir = std::filesystem::path(config.out_dir) / (base + "-" + std::to_string(k));
    }
    std::filesystem::create_directories(dir);

    json manifest{{"artifact_version", kArtifactVersion},
                  {"format_version", kCheckpointVersion},
                  {"config", config_to_json(config)},
                  {"status", "running"},
                  {"started_at", timestamp_utc()}};
    write_json_file(dir / "manifest.json", manifest);

    std::ofstream metrics(dir / "metrics.csv");
    std::ofstream events(dir / "events.jsonl");
    if (!metrics || !events) throw ConfigError("cannot write run files in " + dir.string());
    write_metrics_header(metrics);

    auto write_checkpoint = [&](long episode, const std::string& name) {
        json ck{{"format_version", kCheckpointVersion},
                {"algorithm", to_string(config.algorithm)},
                {"episode", episode},
                {"agent", agent->checkpoint_payload()}};
        std::ostringstream env_state, agent_state;
        env_state << env_rng;
        agent_state << agent_rng;
        ck["rng"] = {{"env", env_state.str()}, {"agent", agent_state.str()}};
        write_json_file(dir / name, ck);
    };

    long completed = 0;
    double reward_sum = 0.0;
    long goals = 0;
    try {
        for (long ep = 0; ep < config.episodes; ++ep) {
            e.reset();
            auto [record, event] = run_episode(e, *agent, config, ep, env_rng, agent_rng);
            write_metrics_row(metrics, record);
            json ev{{"fall", event.fall}, {"goal", event.goal}, {"time", event.time}};
            events << ev.dump() << '\n';
            agent->episode_end();
            reward_sum += record.total_reward;
            goals += record.reached_goal ? 1 : 0;
            completed = ep + 1;
            if (config.checkpoint_every > 0 && completed % config.checkpoint_every == 0 &&
                completed < config.episodes) {
                std::ostringstream name;
                name << "checkpoint_ep" << std::setw(7) << std::setfill('0') << completed
                     << ".json";
                write_checkpoint(completed, name.str());
            }
        }
    } catch (const TrainingError& err) {
        manifest["status"] = "aborted";
        manifest["aborted_at_episode"] = completed;
        manifest["error"] = err.what();
        write_json_file(dir / "manifest.json", manifest);
        throw TrainingError(std::string(err.what()) + " (episode " + std::to_string(completed) +
                            ", run " + dir.string() + ")");
    }

    write_checkpoint(completed, "checkpoint_final.json");
    manifest["status"] = "completed";
    manifest["episodes_completed"] = completed;
    manifest["finished_at"] = timestamp_utc();
    manifest["summary"] = {
        {"success_rate", completed > 0 ? static_cast<double>(goals) / completed : 0.0},
        {"mean_reward", completed > 0 ? reward_sum / completed : 0.0}};
    write_json_file(dir / "manifest.json", manifest);
    return dir;
}

}  // namespace gridnav::harness
