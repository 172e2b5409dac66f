#include "gridnav/metrics.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "gridnav/errors.hpp"

namespace gridnav::harness {

namespace {

void append_double(std::string& out, double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, end);
    (void)ec;
}

double parse_double_field(const std::string& tok, const std::string& where) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw ConfigError(where + ": bad numeric field '" + tok + "'");
    return v;
}

long parse_long_field(const std::string& tok, const std::string& where) {
    long v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw ConfigError(where + ": bad integer field '" + tok + "'");
    return v;
}

bool parse_bool_field(const std::string& tok, const std::string& where) {
    if (tok == "1") return true;
    if (tok == "0") return false;
    throw ConfigError(where + ": bad boolean field '" + tok + "'");
}

}  // namespace

void write_metrics_header(std::ostream& out) {
    out << kMetricsHeader << '\n';
}

void write_metrics_row(std::ostream& out, const EpisodeRecord& r) {
    std::string line;
    line.reserve(96);
    line += std::to_string(r.episode);
    line += ',';
    append_double(line, r.total_reward);
    line += ',';
    line += std::to_string(r.steps);
    line += ',';
    line += std::to_string(r.collisions);
    line += ',';
    line += r.reached_goal ? '1' : '0';
    line += ',';
    line += r.fell ? '1' : '0';
    line += ',';
    line += r.timed_out ? '1' : '0';
    line += ',';
    append_double(line, r.exploration);
    line += ',';
    append_double(line, r.wall_time_ms);
    line += '\n';
    out << line;
}

std::vector<EpisodeRecord> parse_metrics(std::istream& in, const std::string& source_name) {
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError(source_name + ": empty metrics file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kMetricsHeader)
        throw ConfigError(source_name + " line 1: unexpected metrics header '" + line + "'");

    std::vector<EpisodeRecord> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::string where = source_name + " line " + std::to_string(line_no);

        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) fields.push_back(tok);
        if (fields.size() != 9)
            throw ConfigError(where + ": expected 9 fields, got " + std::to_string(fields.size()));

        EpisodeRecord r;
        r.episode = parse_long_field(fields[0], where);
        r.total_reward = parse_double_field(fields[1], where);
        r.steps = static_cast<int>(parse_long_field(fields[2], where));
        r.collisions = static_cast<int>(parse_long_field(fields[3], where));
        r.reached_goal = parse_bool_field(fields[4], where);
        r.fell = parse_bool_field(fields[5], where);
        r.timed_out = parse_bool_field(fields[6], where);
        r.exploration = parse_double_field(fields[7], where);
        r.wall_time_ms = parse_double_field(fields[8], where);
        rows.push_back(r);
    }
    return rows;
}

std::vector<EpisodeRecord> read_metrics(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open metrics file: " + path.string());
    return parse_metrics(in, path.filename().string());
}

}  // namespace gridnav::harness
