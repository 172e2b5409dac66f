#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace gridnav::harness {

/// One row of the per-episode metrics stream.
struct EpisodeRecord {
    long episode = 0;
    double total_reward = 0.0;
    int steps = 0;
    int collisions = 0;
    bool reached_goal = false;
    bool fell = false;
    bool timed_out = false;
    double exploration = 0.0;  // epsilon for Q/DQN, mean policy entropy for PPO
    double wall_time_ms = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "episode,total_reward,steps,collisions,reached_goal,fell,timed_out,exploration,wall_time_ms";

/// Doubles are written in shortest round-trip form; rereading loses nothing.
void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const EpisodeRecord& r);

/// Parse a metrics stream. Malformed input raises ConfigError naming the
/// offending line.
std::vector<EpisodeRecord> parse_metrics(std::istream& in, const std::string& source_name);
std::vector<EpisodeRecord> read_metrics(const std::filesystem::path& path);

}  // namespace gridnav::harness
