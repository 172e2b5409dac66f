#pragma once

#include <random>
#include <vector>

#include "gridnav/grid_map.hpp"

namespace gridnav::env {

/// Result of one environment tick.
struct StepOutcome {
    Pose next_pose;
    double reward = 0.0;
    bool collided = false;
    bool fell = false;
    bool reached_goal = false;
    bool timed_out = false;
    bool terminal = false;
};

/// Terminal cause in the supervisor wire format: at most one flag true.
struct EpisodeEvent {
    bool fall = false;
    bool goal = false;
    bool time = false;
};

/// Reward for one step. Precedence: goal > fall > collision > step penalty.
/// The step penalty scales linearly from -10 at the start's distance to -1
/// next to the goal: -(1 + 9 * dist / d_max), ratio clamped to 1 if the agent
/// wanders behind the start.
double step_reward(bool collided, bool fell, bool reached_goal, int dist, int d_max);

/// Heading after a turn action (Forward/Wait leave it unchanged).
Heading rotate(Heading h, Action a);

/// Cell one step ahead of the pose (may be out of bounds).
Cell forward_cell(const Pose& p);

/// Bijective state index: ((y * width) + x) * 4 + heading.
int observe_discrete(const Pose& p, const GridMap& map);

inline int state_count(const GridMap& map) { return map.width * map.height * kHeadingCount; }

inline constexpr int kFeatureSize = 35;

/// Fixed-length observation for the network agents, every component in [-1, 1]:
///   [0..1]   agent x, y normalized to [0, 1]
///   [2..5]   heading one-hot
///   [6..7]   goal delta, normalized by grid extent
///   [8..32]  5x5 occupancy window centered on the agent (row-major, y outer);
///            Full=1, Partial=0.5, Empty=0, out-of-bounds=1
///   [33..34] delta to the nearest dynamic obstacle (current positions in
///            `map.obstacles`), zero vector when there are none
std::vector<double> observe_features(const Pose& p, const GridMap& map);

/// Grid navigation environment: discrete actions, shaped penalties, dynamic
/// obstacles on waypoint loops, Bernoulli fall model on successful forward
/// moves. Single-threaded per instance.
class Environment {
public:
    struct Options {
        double p_fall = 0.01;
        int max_steps = 200;
    };

    explicit Environment(GridMap map, Options opt = {});

    /// Back to the start cell facing East, obstacle phases zeroed, counter reset.
    Pose reset();

    /// Advance one tick. Requires a prior reset and a non-terminal episode.
    StepOutcome step(Action a, std::mt19937_64& rng);

    const Pose& pose() const { return pose_; }
    const GridMap& map() const { return map_; }
    const Options& options() const { return opt_; }
    int steps_taken() const { return steps_; }
    bool terminal() const { return terminal_; }

    int discrete_state() const { return observe_discrete(pose_, map_); }
    std::vector<double> features() const { return observe_features(pose_, map_); }

    /// True if any dynamic obstacle currently occupies `c`.
    bool obstacle_at(Cell c) const;

private:
    GridMap map_;
    Options opt_;
    Pose pose_;
    int steps_ = 0;
    int d_max_ = 1;
    bool terminal_ = true;  // requires reset() before step()
};

/// Map a terminal outcome to the supervisor event record.
EpisodeEvent to_event(const StepOutcome& out);

}  // namespace gridnav::env
