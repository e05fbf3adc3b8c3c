#include "pixmatch/evalkit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unordered_set>

#include "pixmatch/error.hpp"
#include "pixmatch/parallel.hpp"
#include "text_util.hpp"

namespace pixmatch {

namespace {

double distinct_length(std::span<const EdgeIndex> edges, const RoadNetwork& net,
                       std::unordered_set<EdgeIndex>* out_set) {
    std::unordered_set<EdgeIndex> seen;
    double total = 0.0;
    for (EdgeIndex e : edges) {
        if (seen.insert(e).second) total += net.edge(e).length_m;
    }
    if (out_set) *out_set = std::move(seen);
    return total;
}

StageSummary summarize_stage(const EvalReport& report, double StageTimings::*field) {
    std::vector<double> values;
    for (const auto& row : report.rows) values.push_back(row.timings.*field);
    StageSummary s;
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean_s = sum / static_cast<double>(values.size());
    s.p95_s = percentile(std::move(values), 0.95);
    return s;
}

std::string opt(const std::optional<double>& v) {
    return v ? detail::format_double(*v) : std::string{};
}

TrajectoryRow evaluate_one(const RoadNetwork& net, const CellularTrajectory& traj,
                           const GroundTruthPath* gt, const PipelineConfig& config,
                           const MaskProvider& masks) {
    TrajectoryRow row;
    row.traj_id = traj.traj_id;
    if (gt) row.gt_length_m = distinct_length(gt->edges, net, nullptr);
    StageTimings timings;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const auto out = run_pipeline(traj, net, config, masks, &timings);
        row.timings = out.timings;
        row.cost_m = out.result.cost_m;
        row.expanded_labels = out.result.expanded_labels;
        row.matched_length_m = distinct_length(out.result.edges, net, nullptr);
        if (gt && !gt->edges.empty()) {
            const auto pr = precision_recall(out.result.edges, gt->edges, net);
            row.precision = pr.precision;
            row.recall = pr.recall;
        }
    } catch (const Error& e) {
        row.status = e.kind();
        row.timings = timings;
        row.timings.total_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    return row;
}

}  // namespace

PrecisionRecall precision_recall(std::span<const EdgeIndex> output,
                                 std::span<const EdgeIndex> ground_truth, const RoadNetwork& net) {
    if (ground_truth.empty()) throw InvalidInput("empty_ground_truth", "ground truth path is empty");
    if (output.empty()) throw InvalidInput("empty_output", "matched path is empty");
    std::unordered_set<EdgeIndex> out_set, gt_set;
    const double out_len = distinct_length(output, net, &out_set);
    const double gt_len = distinct_length(ground_truth, net, &gt_set);
    // Sum in ascending edge order so the result does not depend on hashing.
    std::vector<EdgeIndex> common;
    for (EdgeIndex e : out_set) {
        if (gt_set.count(e)) common.push_back(e);
    }
    std::sort(common.begin(), common.end());
    double correct = 0.0;
    for (EdgeIndex e : common) correct += net.edge(e).length_m;
    return {correct / out_len, correct / gt_len};
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const double rank = std::ceil(q * static_cast<double>(values.size()));
    const auto idx = static_cast<std::size_t>(std::clamp(rank, 1.0, double(values.size()))) - 1;
    return values[idx];
}

Aggregates aggregate(const EvalReport& report) {
    Aggregates a;
    a.trajectories = report.rows.size();
    double p_num = 0.0, p_den = 0.0, r_num = 0.0, r_den = 0.0, p_sum = 0.0, r_sum = 0.0;
    std::size_t scored = 0;
    for (const auto& row : report.rows) {
        if (row.status == "ok") ++a.matched;
        if (!row.precision || !row.recall) continue;
        ++scored;
        p_num += *row.precision * row.matched_length_m;
        p_den += row.matched_length_m;
        r_num += *row.recall * row.gt_length_m;
        r_den += row.gt_length_m;
        p_sum += *row.precision;
        r_sum += *row.recall;
    }
    if (scored > 0) {
        a.precision_macro = p_sum / static_cast<double>(scored);
        a.recall_macro = r_sum / static_cast<double>(scored);
        if (p_den > 0.0) a.precision_weighted = p_num / p_den;
        if (r_den > 0.0) a.recall_weighted = r_num / r_den;
    }
    a.rasterize = summarize_stage(report, &StageTimings::rasterize_s);
    a.calibrate = summarize_stage(report, &StageTimings::calibrate_s);
    a.match = summarize_stage(report, &StageTimings::match_s);
    a.total = summarize_stage(report, &StageTimings::total_s);
    return a;
}

EvalReport benchmark(const RoadNetwork& net, std::span<const CellularTrajectory> trajectories,
                     const std::unordered_map<std::string, GroundTruthPath>& ground_truth,
                     const PipelineConfig& config, const MaskProvider& masks, unsigned jobs) {
    EvalReport report;
    report.rows.resize(trajectories.size());
    auto work = [&](std::size_t i) {
        const auto it = ground_truth.find(trajectories[i].traj_id);
        report.rows[i] = evaluate_one(net, trajectories[i],
                                      it == ground_truth.end() ? nullptr : &it->second, config, masks);
    };
    parallel_for(trajectories.size(), jobs, work);
    for (const auto& row : report.rows) {
        if (row.status != "ok") ++report.failures[row.status];
    }
    return report;
}

EvalReport score_matches(const RoadNetwork& net, std::span<const MatchRecord> matches,
                         const std::unordered_map<std::string, GroundTruthPath>& truth) {
    EvalReport report;
    for (const auto& m : matches) {
        TrajectoryRow row;
        row.traj_id = m.traj_id;
        row.status = m.status;
        row.cost_m = m.cost_m;
        row.expanded_labels = m.expanded_labels;
        row.matched_length_m = path_length(m.edges, net);
        row.timings.match_s = m.runtime_s;
        row.timings.total_s = m.runtime_s;
        const auto it = truth.find(m.traj_id);
        if (it != truth.end()) row.gt_length_m = path_length(it->second.edges, net);
        if (m.status == "ok" && it != truth.end()) {
            try {
                const auto pr = precision_recall(m.edges, it->second.edges, net);
                row.precision = pr.precision;
                row.recall = pr.recall;
            } catch (const Error& e) {
                row.status = e.kind();
            }
        }
        if (row.status != "ok") ++report.failures[row.status];
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string summarize_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "traj_id,status,precision,recall,matched_length_m,gt_length_m,cost_m,expanded_labels,"
           "rasterize_s,calibrate_s,match_s,total_s\n";
    for (const auto& r : report.rows) {
        out << r.traj_id << ',' << r.status << ',' << opt(r.precision) << ',' << opt(r.recall)
            << ',' << detail::format_double(r.matched_length_m) << ','
            << detail::format_double(r.gt_length_m) << ',' << opt(r.cost_m) << ','
            << r.expanded_labels << ',' << detail::format_double(r.timings.rasterize_s) << ','
            << detail::format_double(r.timings.calibrate_s) << ','
            << detail::format_double(r.timings.match_s) << ','
            << detail::format_double(r.timings.total_s) << '\n';
    }
    return out.str();
}

std::string summarize_text(const EvalReport& report) {
    const auto a = aggregate(report);
    std::ostringstream out;
    auto show = [&](const char* name, const std::optional<double>& v) {
        out << std::left << std::setw(28) << name;
        if (v) {
            out << std::fixed << std::setprecision(4) << *v << '\n';
        } else {
            out << "n/a\n";
        }
    };
    out << std::left << std::setw(28) << "trajectories" << a.trajectories << '\n';
    out << std::left << std::setw(28) << "matched" << a.matched << '\n';
    show("precision (length-weighted)", a.precision_weighted);
    show("recall (length-weighted)", a.recall_weighted);
    show("precision (macro)", a.precision_macro);
    show("recall (macro)", a.recall_macro);
    auto stage = [&](const char* name, const StageSummary& s) {
        out << std::left << std::setw(28) << name << std::fixed << std::setprecision(6) << "mean "
            << s.mean_s << " s, p95 " << s.p95_s << " s\n";
    };
    stage("rasterize", a.rasterize);
    stage("calibrate", a.calibrate);
    stage("match", a.match);
    stage("total", a.total);
    for (const auto& [kind, count] : report.failures) {
        out << std::left << std::setw(28) << ("failures: " + kind) << count << '\n';
    }
    return out.str();
}

std::string report_json(const EvalReport& report) {
    using nlohmann::ordered_json;
    const auto a = aggregate(report);
    auto nullable = [](const std::optional<double>& v) {
        return v ? ordered_json(*v) : ordered_json(nullptr);
    };
    auto stage = [](const StageSummary& s) {
        return ordered_json{{"mean_s", s.mean_s}, {"p95_s", s.p95_s}};
    };
    ordered_json j;
    j["aggregates"] = {
        {"trajectories", a.trajectories},
        {"matched", a.matched},
        {"precision_length_weighted", nullable(a.precision_weighted)},
        {"recall_length_weighted", nullable(a.recall_weighted)},
        {"precision_macro", nullable(a.precision_macro)},
        {"recall_macro", nullable(a.recall_macro)},
        {"rasterize", stage(a.rasterize)},
        {"calibrate", stage(a.calibrate)},
        {"match", stage(a.match)},
        {"total", stage(a.total)},
    };
    j["failures"] = ordered_json::object();
    for (const auto& [kind, count] : report.failures) j["failures"][kind] = count;
    j["rows"] = ordered_json::array();
    for (const auto& r : report.rows) {
        j["rows"].push_back({
            {"traj_id", r.traj_id},
            {"status", r.status},
            {"precision", nullable(r.precision)},
            {"recall", nullable(r.recall)},
            {"matched_length_m", r.matched_length_m},
            {"gt_length_m", r.gt_length_m},
            {"cost_m", nullable(r.cost_m)},
            {"expanded_labels", r.expanded_labels},
            {"rasterize_s", r.timings.rasterize_s},
            {"calibrate_s", r.timings.calibrate_s},
            {"match_s", r.timings.match_s},
            {"total_s", r.timings.total_s},
        });
    }
    return j.dump(2) + "\n";
}

}  // namespace pixmatch
