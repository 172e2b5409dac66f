#pragma once

#include <stdexcept>
#include <string>

namespace gridnav {

/// Invalid experiment or map configuration (bad episode count, start == goal, ...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an update produces non-finite losses or gradients. The harness
/// aborts the run and reports the episode index.
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Degenerate statistical input (zero variance where a test needs spread).
class StatsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Map file rejected; carries the 1-based line and column of the offending token.
class MapParseError : public std::runtime_error {
public:
    MapParseError(int line, int column, const std::string& message)
        : std::runtime_error("map parse error at line " + std::to_string(line) +
                             ", column " + std::to_string(column) + ": " + message),
          line_(line),
          column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

}  // namespace gridnav
