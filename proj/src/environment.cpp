#include "gridnav/environment.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gridnav::env {

double step_reward(bool collided, bool fell, bool reached_goal, int dist, int d_max) {
    if (d_max <= 0) throw ConfigError("d_max must be positive (start must differ from goal)");
    if (reached_goal) return 100.0;
    if (fell) return -50.0;
    if (collided) return -100.0;
    double ratio = std::min(1.0, static_cast<double>(dist) / static_cast<double>(d_max));
    return -(1.0 + 9.0 * ratio);
}

Heading rotate(Heading h, Action a) {
    int v = static_cast<int>(h);
    if (a == Action::TurnLeft) v = (v + 3) % 4;
    else if (a == Action::TurnRight) v = (v + 1) % 4;
    return static_cast<Heading>(v);
}

Cell forward_cell(const Pose& p) {
    Cell c = p.cell;
    switch (p.heading) {
        case Heading::North: --c.y; break;
        case Heading::East: ++c.x; break;
        case Heading::South: ++c.y; break;
        case Heading::West: --c.x; break;
    }
    return c;
}

int observe_discrete(const Pose& p, const GridMap& map) {
    return (p.cell.y * map.width + p.cell.x) * kHeadingCount + static_cast<int>(p.heading);
}

std::vector<double> observe_features(const Pose& p, const GridMap& map) {
    std::vector<double> f;
    f.reserve(kFeatureSize);
    double x_den = std::max(1, map.width - 1);
    double y_den = std::max(1, map.height - 1);
    f.push_back(p.cell.x / x_den);
    f.push_back(p.cell.y / y_den);
    for (int h = 0; h < kHeadingCount; ++h)
        f.push_back(h == static_cast<int>(p.heading) ? 1.0 : 0.0);
    f.push_back((map.goal_cell.x - p.cell.x) / x_den);
    f.push_back((map.goal_cell.y - p.cell.y) / y_den);
    for (int dy = -2; dy <= 2; ++dy) {
        for (int dx = -2; dx <= 2; ++dx) {
            Cell c{p.cell.x + dx, p.cell.y + dy};
            if (!map.in_bounds(c)) {
                f.push_back(1.0);
            } else {
                switch (map.at(c)) {
                    case Occupancy::Full: f.push_back(1.0); break;
                    case Occupancy::Partial: f.push_back(0.5); break;
                    case Occupancy::Empty: f.push_back(0.0); break;
                }
            }
        }
    }
    int best = std::numeric_limits<int>::max();
    Cell nearest{};
    for (const auto& ob : map.obstacles) {
        Cell c = ob.position();
        int d = std::abs(c.x - p.cell.x) + std::abs(c.y - p.cell.y);
        if (d < best) {
            best = d;
            nearest = c;
        }
    }
    if (best == std::numeric_limits<int>::max()) {
        f.push_back(0.0);
        f.push_back(0.0);
    } else {
        f.push_back((nearest.x - p.cell.x) / x_den);
        f.push_back((nearest.y - p.cell.y) / y_den);
    }
    assert(static_cast<int>(f.size()) == kFeatureSize);
    return f;
}

Environment::Environment(GridMap map, Options opt) : map_(std::move(map)), opt_(opt) {
    if (!map_.in_bounds(map_.start_cell) || !map_.in_bounds(map_.goal_cell))
        throw ConfigError("start/goal out of bounds");
    if (map_.start_cell == map_.goal_cell)
        throw ConfigError("start cell equals goal cell");
    if (map_.at(map_.start_cell) != Occupancy::Empty || map_.at(map_.goal_cell) != Occupancy::Empty)
        throw ConfigError("start and goal cells must be empty");
    if (opt_.max_steps < 1) throw ConfigError("max_steps must be >= 1");
    if (opt_.p_fall < 0.0 || opt_.p_fall > 1.0) throw ConfigError("p_fall must be in [0,1]");
    d_max_ = max_goal_distance(map_);
}

Pose Environment::reset() {
    pose_ = Pose{map_.start_cell, Heading::East};
    for (auto& ob : map_.obstacles) ob.phase = 0;
    steps_ = 0;
    terminal_ = false;
    return pose_;
}

bool Environment::obstacle_at(Cell c) const {
    return std::any_of(map_.obstacles.begin(), map_.obstacles.end(),
                       [&](const DynamicObstacle& ob) { return ob.position() == c; });
}

StepOutcome Environment::step(Action a, std::mt19937_64& rng) {
    if (terminal_) throw std::logic_error("step() on a terminal episode; call reset()");

    StepOutcome out;
    out.next_pose = pose_;

    if (a == Action::TurnLeft || a == Action::TurnRight) {
        out.next_pose.heading = rotate(pose_.heading, a);
    } else if (a == Action::Forward) {
        Cell target = forward_cell(pose_);
        // Obstacles move after the agent, so the swap case (agent enters the
        // cell an obstacle is about to leave) is caught by the current-cell test.
        if (!map_.in_bounds(target) || map_.at(target) == Occupancy::Full || obstacle_at(target)) {
            out.collided = true;
        } else {
            out.next_pose.cell = target;
            if (target == map_.goal_cell) {
                out.reached_goal = true;
            } else if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < opt_.p_fall) {
                out.fell = true;
            }
        }
    }
    // Wait: nothing moves.

    ++steps_;
    if (!out.reached_goal && !out.fell && steps_ >= opt_.max_steps) out.timed_out = true;

    out.reward = step_reward(out.collided, out.fell, out.reached_goal,
                             distance_to_goal(out.next_pose.cell, map_), d_max_);
    out.terminal = out.fell || out.reached_goal || out.timed_out;

    for (auto& ob : map_.obstacles) {
        if (steps_ % ob.period == 0)
            ob.phase = (ob.phase + 1) % static_cast<int>(ob.waypoints.size());
    }

    pose_ = out.next_pose;
    terminal_ = out.terminal;
    return out;
}

EpisodeEvent to_event(const StepOutcome& out) {
    EpisodeEvent e;
    e.fall = out.fell;
    e.goal = out.reached_goal;
    e.time = out.timed_out;
    return e;
}

}  // namespace gridnav::env
