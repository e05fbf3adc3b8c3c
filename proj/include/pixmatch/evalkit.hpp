#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pixmatch/dataset_io.hpp"
#include "pixmatch/pipeline.hpp"
#include "pixmatch/roadnet.hpp"
#include "pixmatch/trajgen.hpp"

namespace pixmatch {

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
};

/// Segment-level, length-based: each distinct edge counts once.
/// precision = |out ∩ gt| / |out|, recall = |out ∩ gt| / |gt|, with |.|
/// the summed edge length. Throws InvalidInput("empty_ground_truth") or
/// InvalidInput("empty_output").
PrecisionRecall precision_recall(std::span<const EdgeIndex> output,
                                 std::span<const EdgeIndex> ground_truth, const RoadNetwork& net);

struct TrajectoryRow {
    std::string traj_id;
    std::string status = "ok";  // "ok" or an error kind
    std::optional<double> precision;
    std::optional<double> recall;
    double matched_length_m = 0.0;
    double gt_length_m = 0.0;
    std::optional<double> cost_m;
    std::size_t expanded_labels = 0;
    StageTimings timings;
};

struct EvalReport {
    std::vector<TrajectoryRow> rows;
    std::map<std::string, std::size_t> failures;  // by error kind
};

struct StageSummary {
    double mean_s = 0.0;
    double p95_s = 0.0;
};

struct Aggregates {
    std::size_t trajectories = 0;
    std::size_t matched = 0;
    // Length-weighted: precision by matched length, recall by gt length.
    std::optional<double> precision_weighted;
    std::optional<double> recall_weighted;
    // Per-trajectory (macro) means.
    std::optional<double> precision_macro;
    std::optional<double> recall_macro;
    StageSummary rasterize;
    StageSummary calibrate;
    StageSummary match;
    StageSummary total;
};

Aggregates aggregate(const EvalReport& report);

/// Nearest-rank percentile of `values` (q in [0,1]); 0 for an empty list.
double percentile(std::vector<double> values, double q);

/// Runs the full pipeline on every trajectory, timing each stage. A failing
/// trajectory becomes a row with its error kind; the batch continues.
/// Ground truth is looked up by traj_id; rows without one carry no metrics.
EvalReport benchmark(const RoadNetwork& net, std::span<const CellularTrajectory> trajectories,
                     const std::unordered_map<std::string, GroundTruthPath>& ground_truth,
                     const PipelineConfig& config, const MaskProvider& masks = {},
                     unsigned jobs = 1);

/// Scores previously written matches. Rows keep the match status; only
/// successful matches with a ground truth get precision and recall.
/// runtime_s is reported as both the match and the total stage time.
EvalReport score_matches(const RoadNetwork& net, std::span<const MatchRecord> matches,
                         const std::unordered_map<std::string, GroundTruthPath>& ground_truth);

/// Fixed column order:
/// traj_id,status,precision,recall,matched_length_m,gt_length_m,cost_m,
/// expanded_labels,rasterize_s,calibrate_s,match_s,total_s
std::string summarize_csv(const EvalReport& report);

/// Human-readable aggregate table.
std::string summarize_text(const EvalReport& report);

/// report.json body: aggregates, failure counts, and rows.
std::string report_json(const EvalReport& report);

}  // namespace pixmatch
