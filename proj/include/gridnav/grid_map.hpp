#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gridnav/errors.hpp"

namespace gridnav::env {

enum class Occupancy : std::uint8_t { Empty, Partial, Full };

enum class Heading : std::uint8_t { North, East, South, West };

enum class Action : std::uint8_t { Forward, TurnLeft, TurnRight, Wait };

inline constexpr int kActionCount = 4;
inline constexpr int kHeadingCount = 4;

struct Cell {
    int x = 0;
    int y = 0;
    bool operator==(const Cell&) const = default;
};

/// Obstacle cycling through a fixed waypoint loop, advancing one waypoint
/// every `period` environment ticks. `phase` indexes the current waypoint.
struct DynamicObstacle {
    int id = 0;
    std::vector<Cell> waypoints;
    int period = 1;
    int phase = 0;

    Cell position() const { return waypoints[static_cast<std::size_t>(phase)]; }
};

/// Discrete agent state: cell plus facing direction.
struct Pose {
    Cell cell;
    Heading heading = Heading::East;
    bool operator==(const Pose&) const = default;
};

/// Occupancy grid with start/goal cells and dynamic obstacle schedules.
/// Cells are row-major: cells[y * width + x]. Row 0 is the first map row;
/// North decreases y, East increases x.
struct GridMap {
    int width = 20;
    int height = 20;
    double cell_size = 0.5;  // meters per cell
    std::vector<Occupancy> cells;
    Cell start_cell;
    Cell goal_cell;
    std::vector<DynamicObstacle> obstacles;

    bool in_bounds(Cell c) const {
        return c.x >= 0 && c.x < width && c.y >= 0 && c.y < height;
    }
    Occupancy at(Cell c) const {
        return cells[static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width) +
                     static_cast<std::size_t>(c.x)];
    }
    double world_width() const { return width * cell_size; }
    double world_height() const { return height * cell_size; }
};

/// Parse a map from text. Format:
///   grid <width> <height> <cell_size_m>
///   <height> rows of: '.'=Empty  '~'=Partial  '#'=Full  'S'=start  'G'=goal
///   zero or more: O x1,y1 x2,y2 ... period=<k>
/// Throws MapParseError (with line/column) on malformed input and ConfigError
/// when the validated grid is unusable (start adjacent constraints).
GridMap load_map(const std::string& text);

/// load_map over a file's contents.
GridMap load_map_file(const std::filesystem::path& path);

/// Continuous world coordinate -> containing cell. Throws std::domain_error
/// when (x, y) lies outside the world extent.
Cell world_to_cell(double x, double y, const GridMap& map);

/// Center of a cell in world coordinates.
std::pair<double, double> cell_to_world(Cell c, const GridMap& map);

/// Manhattan distance from `c` to the goal.
int distance_to_goal(Cell c, const GridMap& map);

/// distance_to_goal evaluated at the start cell; the reward scale anchor.
int max_goal_distance(const GridMap& map);

const char* to_string(Action a);
const char* to_string(Heading h);

}  // namespace gridnav::env
