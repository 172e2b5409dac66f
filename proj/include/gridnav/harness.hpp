#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include <json.hpp>

#include "gridnav/dqn.hpp"
#include "gridnav/environment.hpp"
#include "gridnav/metrics.hpp"
#include "gridnav/ppo.hpp"
#include "gridnav/tabular.hpp"

namespace gridnav::harness {

inline constexpr const char* kArtifactVersion = "1.0.0";

enum class Algorithm { Q, Dqn, Ppo };

const char* to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

struct ExperimentConfig {
    Algorithm algorithm = Algorithm::Q;
    std::string map_path;
    long episodes = 20000;
    int max_steps = 200;
    std::uint64_t seed = 0;
    double p_fall = 0.01;
    long checkpoint_every = 1000;  // 0 = final checkpoint only
    // Wall time per episode is inherently nondeterministic; disable to make
    // metrics files byte-identical across reruns of the same (config, seed).
    bool record_wall_time = true;
    std::string out_dir = "runs";
    std::string run_dir;  // optional explicit run directory (overrides naming)

    tabular::QConfig q;
    deep::DqnConfig dqn;
    deep::PpoConfig ppo;

    void validate() const;  // throws ConfigError
};

nlohmann::ordered_json config_to_json(const ExperimentConfig& c);
void config_from_json(const nlohmann::ordered_json& j, ExperimentConfig& c);

/// Discrete index + feature view of the same environment state.
struct Observation {
    int state = 0;
    std::vector<double> features;
};

/// Uniform driver interface over the three learners. The harness calls
/// act -> env.step -> learn once per tick; learning cadence (every step for
/// Q/DQN, horizon-triggered for PPO) lives behind learn().
class Agent {
public:
    virtual ~Agent() = default;
    virtual int act(const Observation& obs, std::mt19937_64& rng) = 0;
    virtual void learn(const Observation& obs, int action, const env::StepOutcome& out,
                       const Observation& next_obs, std::mt19937_64& rng) = 0;
    virtual void episode_start() {}
    virtual void episode_end() {}
    virtual double exploration() const = 0;
    virtual nlohmann::ordered_json checkpoint_payload() const = 0;
};

std::unique_ptr<Agent> make_agent(const ExperimentConfig& config, const env::Environment& e);

/// Drive one episode on an already-reset environment.
std::pair<EpisodeRecord, env::EpisodeEvent> run_episode(env::Environment& e, Agent& agent,
                                                        const ExperimentConfig& config,
                                                        long episode_index,
                                                        std::mt19937_64& env_rng,
                                                        std::mt19937_64& agent_rng);

/// Full training run: seeds streams, loops episodes with reset in between,
/// streams metrics.csv and events.jsonl, writes checkpoints and a manifest.
/// Returns the run directory.
std::filesystem::path run_experiment(const ExperimentConfig& config);

}  // namespace gridnav::harness
