#include "gridnav/compare.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "gridnav/harness.hpp"
#include "gridnav/stats.hpp"

namespace gridnav::compare {

using json = nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, end);
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) throw ConfigError("cannot write " + p.string());
    return out;
}

json summary_to_json(const stats::Summary& s) {
    json j{{"count", s.count}, {"mean", s.mean},       {"min", s.min}, {"q1", s.q1},
           {"median", s.median}, {"q3", s.q3},         {"max", s.max}, {"iqr", s.iqr},
           {"outlier_count", s.outliers.size()}};
    if (s.success_rate) j["success_rate"] = *s.success_rate;
    return j;
}

json test_to_json(const stats::TestResult& t) {
    json j{{"name", t.name}, {"statistic", t.statistic}, {"p_value", t.p_value}};
    if (t.degrees_of_freedom) j["degrees_of_freedom"] = *t.degrees_of_freedom;
    return j;
}

json run_test(const char* which, std::span<const double> a, std::span<const double> b) {
    try {
        stats::TestResult t = which == std::string("welch") ? stats::welch_t_test(a, b)
                                                            : stats::wilcoxon_rank_sum(a, b);
        return test_to_json(t);
    } catch (const StatsError& e) {
        return json{{"name", which}, {"error", e.what()}};
    }
}

}  // namespace

RunData load_run(const std::filesystem::path& run_dir) {
    std::ifstream mf(run_dir / "manifest.json");
    if (!mf) throw ConfigError("missing manifest.json in " + run_dir.string());
    json manifest = json::parse(mf);
    int version = manifest.value("format_version", -1);
    if (version != harness::kCheckpointVersion)
        throw ConfigError("run " + run_dir.string() + " has metrics schema version " +
                          std::to_string(version) + ", this tool expects " +
                          std::to_string(harness::kCheckpointVersion));
    RunData run;
    run.label = run_dir.filename().string();
    run.algorithm = manifest.at("config").at("algorithm").get<std::string>();
    run.records = harness::read_metrics(run_dir / "metrics.csv");
    return run;
}

void write_comparison(const std::vector<RunData>& runs, const std::filesystem::path& out_dir,
                      int smoothing_window) {
    if (runs.size() < 2) throw ConfigError("compare needs at least two runs");
    std::filesystem::create_directories(out_dir);

    // Per-episode curves, one row per run/episode.
    {
        auto fig4 = open_out(out_dir / "fig4_reward.csv");
        fig4 << "run,algorithm,episode,reward,reward_smoothed\n";
        auto fig5 = open_out(out_dir / "fig5_exploration.csv");
        fig5 << "run,algorithm,episode,exploration\n";
        auto fig6 = open_out(out_dir / "fig6_steps.csv");
        fig6 << "run,algorithm,episode,steps,reached_goal\n";
        auto fig8 = open_out(out_dir / "fig8_collisions.csv");
        fig8 << "run,algorithm,episode,collisions,collisions_smoothed\n";
        for (const RunData& run : runs) {
            std::vector<double> rewards, collisions;
            rewards.reserve(run.records.size());
            collisions.reserve(run.records.size());
            for (const auto& r : run.records) {
                rewards.push_back(r.total_reward);
                collisions.push_back(static_cast<double>(r.collisions));
            }
            auto reward_ma = stats::moving_average(rewards, smoothing_window);
            auto collision_ma = stats::moving_average(collisions, smoothing_window);
            for (std::size_t i = 0; i < run.records.size(); ++i) {
                const auto& r = run.records[i];
                fig4 << run.label << ',' << run.algorithm << ',' << r.episode << ','
                     << fmt(r.total_reward) << ',' << fmt(reward_ma[i]) << '\n';
                fig5 << run.label << ',' << run.algorithm << ',' << r.episode << ','
                     << fmt(r.exploration) << '\n';
                fig6 << run.label << ',' << run.algorithm << ',' << r.episode << ',' << r.steps
                     << ',' << (r.reached_goal ? 1 : 0) << '\n';
                fig8 << run.label << ',' << run.algorithm << ',' << r.episode << ','
                     << r.collisions << ',' << fmt(collision_ma[i]) << '\n';
            }
        }
    }

    // Pool per algorithm (multiple seeds of one algorithm aggregate).
    std::map<std::string, std::vector<harness::EpisodeRecord>> pooled;
    for (const RunData& run : runs)
        pooled[run.algorithm].insert(pooled[run.algorithm].end(), run.records.begin(),
                                     run.records.end());

    {
        auto fig7 = open_out(out_dir / "fig7_steps_to_goal.csv");
        fig7 << "run,algorithm,mean_steps_to_goal,median_steps_to_goal,success_rate\n";
        auto row = [&](const std::string& label, const std::string& algo,
                       std::span<const harness::EpisodeRecord> records) {
            stats::StepsToGoal agg = stats::steps_to_goal_aggregate(records);
            fig7 << label << ',' << algo << ','
                 << (agg.mean_steps ? fmt(*agg.mean_steps) : std::string()) << ','
                 << (agg.median_steps ? fmt(*agg.median_steps) : std::string()) << ','
                 << fmt(agg.success_rate) << '\n';
        };
        for (const RunData& run : runs) row(run.label, run.algorithm, run.records);
        for (const auto& [algo, records] : pooled) row("pooled", algo, records);
    }

    auto values_of = [](std::span<const harness::EpisodeRecord> records, bool steps) {
        std::vector<double> v;
        v.reserve(records.size());
        for (const auto& r : records)
            v.push_back(steps ? static_cast<double>(r.steps) : r.total_reward);
        return v;
    };

    auto write_boxplots = [&](const std::filesystem::path& path, bool steps) {
        auto out = open_out(path);
        out << "algorithm,count,mean,min,q1,median,q3,max,iqr,outlier_count,success_rate\n";
        for (const auto& [algo, records] : pooled) {
            std::vector<double> v = values_of(records, steps);
            stats::Summary s = stats::boxplot_summary(v);
            long goals = 0;
            for (const auto& r : records) goals += r.reached_goal ? 1 : 0;
            double rate = records.empty() ? 0.0 : static_cast<double>(goals) / records.size();
            out << algo << ',' << s.count << ',' << fmt(s.mean) << ',' << fmt(s.min) << ','
                << fmt(s.q1) << ',' << fmt(s.median) << ',' << fmt(s.q3) << ',' << fmt(s.max)
                << ',' << fmt(s.iqr) << ',' << s.outliers.size() << ',' << fmt(rate) << '\n';
        }
    };
    write_boxplots(out_dir / "fig9_reward_boxplot.csv", false);
    write_boxplots(out_dir / "fig10_steps_boxplot.csv", true);

    // analysis.json: summaries plus pairwise difference-in-means tests.
    json analysis;
    analysis["smoothing_window"] = smoothing_window;
    analysis["runs"] = json::array();
    for (const RunData& run : runs)
        analysis["runs"].push_back(json{{"label", run.label},
                                        {"algorithm", run.algorithm},
                                        {"episodes", run.records.size()}});
    for (const auto& [algo, records] : pooled) {
        std::vector<double> rewards = values_of(records, false);
        std::vector<double> steps = values_of(records, true);
        stats::Summary rs = stats::boxplot_summary(rewards);
        stats::Summary ss = stats::boxplot_summary(steps);
        long goals = 0;
        for (const auto& r : records) goals += r.reached_goal ? 1 : 0;
        rs.success_rate = records.empty() ? 0.0 : static_cast<double>(goals) / records.size();
        stats::StepsToGoal agg = stats::steps_to_goal_aggregate(records);
        json entry{{"reward", summary_to_json(rs)}, {"steps", summary_to_json(ss)}};
        entry["steps_to_goal"] = json{{"success_rate", agg.success_rate}};
        if (agg.mean_steps) entry["steps_to_goal"]["mean"] = *agg.mean_steps;
        if (agg.median_steps) entry["steps_to_goal"]["median"] = *agg.median_steps;
        analysis["algorithms"][algo] = entry;
    }
    analysis["tests"] = json::array();
    std::vector<std::string> algos;
    for (const auto& [algo, _] : pooled) algos.push_back(algo);
    for (std::size_t i = 0; i < algos.size(); ++i) {
        for (std::size_t j = i + 1; j < algos.size(); ++j) {
            const auto& a = pooled[algos[i]];
            const auto& b = pooled[algos[j]];
            json pair{{"a", algos[i]}, {"b", algos[j]}};
            pair["reward"] = json::array(
                {run_test("welch", values_of(a, false), values_of(b, false)),
                 run_test("wilcoxon", values_of(a, false), values_of(b, false))});
            pair["steps"] = json::array(
                {run_test("welch", values_of(a, true), values_of(b, true)),
                 run_test("wilcoxon", values_of(a, true), values_of(b, true))});
            analysis["tests"].push_back(pair);
        }
    }
    auto out = open_out(out_dir / "analysis.json");
    out << analysis.dump(2) << '\n';
}

}  // namespace gridnav::compare
