#include "gridnav/grid_map.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace gridnav::env {

namespace {

bool adjacent_or_equal(Cell a, Cell b) {
    int d = std::abs(a.x - b.x) + std::abs(a.y - b.y);
    return d <= 1;
}

// Splits on spaces, remembering the 1-based column where each token starts.
std::vector<std::pair<std::string, int>> tokenize(const std::string& line) {
    std::vector<std::pair<std::string, int>> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        if (i >= line.size()) break;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        out.emplace_back(line.substr(start, i - start), static_cast<int>(start) + 1);
    }
    return out;
}

int parse_int(const std::string& tok, int line_no, int col, const char* what) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw MapParseError(line_no, col, std::string("expected integer ") + what + ", got '" + tok + "'");
    }
}

double parse_double(const std::string& tok, int line_no, int col, const char* what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw MapParseError(line_no, col, std::string("expected number ") + what + ", got '" + tok + "'");
    }
}

DynamicObstacle parse_obstacle(const std::vector<std::pair<std::string, int>>& toks,
                               int line_no, int next_id, const GridMap& map) {
    DynamicObstacle ob;
    ob.id = next_id;
    ob.period = -1;
    for (std::size_t i = 1; i < toks.size(); ++i) {
        const auto& [tok, col] = toks[i];
        if (tok.rfind("period=", 0) == 0) {
            ob.period = parse_int(tok.substr(7), line_no, col, "for period");
            if (ob.period < 1)
                throw MapParseError(line_no, col, "obstacle period must be >= 1");
            continue;
        }
        auto comma = tok.find(',');
        if (comma == std::string::npos)
            throw MapParseError(line_no, col, "expected waypoint 'x,y', got '" + tok + "'");
        Cell c;
        c.x = parse_int(tok.substr(0, comma), line_no, col, "for waypoint x");
        c.y = parse_int(tok.substr(comma + 1), line_no, col, "for waypoint y");
        if (!map.in_bounds(c))
            throw MapParseError(line_no, col, "obstacle waypoint out of bounds");
        if (c == map.goal_cell)
            throw MapParseError(line_no, col, "obstacle waypoint may not sit on the goal");
        ob.waypoints.push_back(c);
    }
    if (ob.waypoints.empty())
        throw MapParseError(line_no, toks[0].second, "obstacle has no waypoints");
    if (ob.period < 1)
        throw MapParseError(line_no, toks[0].second, "obstacle line missing period=<k>");
    for (std::size_t i = 0; i < ob.waypoints.size(); ++i) {
        Cell a = ob.waypoints[i];
        Cell b = ob.waypoints[(i + 1) % ob.waypoints.size()];
        if (!adjacent_or_equal(a, b))
            throw MapParseError(line_no, toks[0].second,
                                "waypoints " + std::to_string(i) + " and " +
                                    std::to_string((i + 1) % ob.waypoints.size()) +
                                    " are not 4-neighbors (cyclically)");
    }
    return ob;
}

}  // namespace

GridMap load_map(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;

    // Header.
    GridMap map;
    map.cells.clear();
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        if (toks[0].first != "grid")
            throw MapParseError(line_no, toks[0].second, "expected header 'grid <w> <h> <cell_size>'");
        if (toks.size() != 4)
            throw MapParseError(line_no, toks[0].second, "header needs exactly width, height, cell_size");
        map.width = parse_int(toks[1].first, line_no, toks[1].second, "for width");
        map.height = parse_int(toks[2].first, line_no, toks[2].second, "for height");
        map.cell_size = parse_double(toks[3].first, line_no, toks[3].second, "for cell size");
        if (map.width < 1 || map.height < 1)
            throw MapParseError(line_no, toks[1].second, "grid dimensions must be positive");
        if (!(map.cell_size > 0.0))
            throw MapParseError(line_no, toks[3].second, "cell size must be positive");
        have_header = true;
        break;
    }
    if (!have_header) throw MapParseError(line_no + 1, 1, "missing 'grid' header");

    map.cells.assign(static_cast<std::size_t>(map.width) * static_cast<std::size_t>(map.height),
                     Occupancy::Empty);
    int starts = 0;
    int goals = 0;
    int rows_read = 0;
    while (rows_read < map.height) {
        if (!std::getline(in, line))
            throw MapParseError(line_no + 1, 1,
                                "expected " + std::to_string(map.height) + " grid rows, got " +
                                    std::to_string(rows_read));
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (static_cast<int>(line.size()) != map.width)
            throw MapParseError(line_no, static_cast<int>(line.size()) + 1,
                                "row has " + std::to_string(line.size()) + " cells, expected " +
                                    std::to_string(map.width));
        int y = rows_read;
        for (int x = 0; x < map.width; ++x) {
            char ch = line[static_cast<std::size_t>(x)];
            Occupancy occ = Occupancy::Empty;
            switch (ch) {
                case '.': occ = Occupancy::Empty; break;
                case '~': occ = Occupancy::Partial; break;
                case '#': occ = Occupancy::Full; break;
                case 'S':
                    map.start_cell = {x, y};
                    ++starts;
                    break;
                case 'G':
                    map.goal_cell = {x, y};
                    ++goals;
                    break;
                default:
                    throw MapParseError(line_no, x + 1,
                                        std::string("unknown cell character '") + ch + "'");
            }
            map.cells[static_cast<std::size_t>(y) * static_cast<std::size_t>(map.width) +
                      static_cast<std::size_t>(x)] = occ;
        }
        ++rows_read;
    }
    if (starts != 1)
        throw MapParseError(line_no, 1, "map must contain exactly one 'S', found " + std::to_string(starts));
    if (goals != 1)
        throw MapParseError(line_no, 1, "map must contain exactly one 'G', found " + std::to_string(goals));
    if (map.start_cell == map.goal_cell)
        throw ConfigError("start cell equals goal cell; reward scaling is undefined");

    // Obstacle block.
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        if (toks[0].first != "O")
            throw MapParseError(line_no, toks[0].second,
                                "expected obstacle line 'O x,y ... period=<k>' after grid rows");
        map.obstacles.push_back(
            parse_obstacle(toks, line_no, static_cast<int>(map.obstacles.size()), map));
    }
    return map;
}

GridMap load_map_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open map file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_map(ss.str());
}

Cell world_to_cell(double x, double y, const GridMap& map) {
    if (!(x >= 0.0) || !(y >= 0.0) || x >= map.world_width() || y >= map.world_height())
        throw std::domain_error("world coordinate outside map extent");
    return {static_cast<int>(std::floor(x / map.cell_size)),
            static_cast<int>(std::floor(y / map.cell_size))};
}

std::pair<double, double> cell_to_world(Cell c, const GridMap& map) {
    return {(c.x + 0.5) * map.cell_size, (c.y + 0.5) * map.cell_size};
}

int distance_to_goal(Cell c, const GridMap& map) {
    return std::abs(c.x - map.goal_cell.x) + std::abs(c.y - map.goal_cell.y);
}

int max_goal_distance(const GridMap& map) {
    return distance_to_goal(map.start_cell, map);
}

const char* to_string(Action a) {
    switch (a) {
        case Action::Forward: return "forward";
        case Action::TurnLeft: return "turn_left";
        case Action::TurnRight: return "turn_right";
        case Action::Wait: return "wait";
    }
    return "?";
}

const char* to_string(Heading h) {
    switch (h) {
        case Heading::North: return "north";
        case Heading::East: return "east";
        case Heading::South: return "south";
        case Heading::West: return "west";
    }
    return "?";
}

}  // namespace gridnav::env
