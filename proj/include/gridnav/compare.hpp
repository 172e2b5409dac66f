#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gridnav/metrics.hpp"

namespace gridnav::compare {

struct RunData {
    std::string label;      // run directory name
    std::string algorithm;  // from the manifest
    std::vector<harness::EpisodeRecord> records;
};

/// Read manifest.json + metrics.csv from a run directory. Rejects runs whose
/// format version does not match this binary.
RunData load_run(const std::filesystem::path& run_dir);

/// Emit the plot-ready CSV per figure family plus analysis.json (boxplot
/// summaries and pairwise Welch / rank-sum tests on reward and steps, pooled
/// per algorithm).
void write_comparison(const std::vector<RunData>& runs, const std::filesystem::path& out_dir,
                      int smoothing_window);

}  // namespace gridnav::compare
