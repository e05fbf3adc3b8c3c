#pragma once

#include <filesystem>
#include <functional>
#include <optional>

#include "pixmatch/calibrate.hpp"
#include "pixmatch/pathfind.hpp"
#include "pixmatch/raster.hpp"

namespace pixmatch {

inline constexpr double kDefaultBufferM = 500.0;
inline constexpr double kDefaultCostFraction = 0.03;

struct PipelineConfig {
    int width = kDefaultWidth;
    double buffer_m = kDefaultBufferM;
    std::optional<int> radius_px;  // unset: default_radius(noise_sigma_m)
    double noise_sigma_m = 0.0;
    double cost_fraction = kDefaultCostFraction;
    int relax = 0;  // budget doublings allowed after NoFeasiblePath
    SearchOptions search;
};

struct StageTimings {
    double rasterize_s = 0.0;
    double calibrate_s = 0.0;
    double match_s = 0.0;
    double total_s = 0.0;
};

/// Supplies the calibration mask for one trajectory window. The default
/// provider is the deterministic calibrator.
using MaskProvider =
    std::function<CalibrationMask(const PixelGrid& traj_grid, const PixelGrid& road_grid)>;

/// Loads `<dir>/<traj_id>.mask.pgm` (plus sidecar) for each trajectory and
/// intersects it with the road grid.
MaskProvider mask_dir_provider(const std::filesystem::path& dir);

struct PipelineOutput {
    Georef georef;
    TrajectoryRaster trajectory;
    RoadRaster roads;
    CalibrationMask mask;
    CandidateSet candidates;
    Endpoints endpoints;
    double budget_m = 0.0;
    int relax_used = 0;
    MatchResult result;
    StageTimings timings;
};

/// Rasterize, calibrate, and match one trajectory. Errors from any stage
/// propagate. When `progress` is given it receives each stage time as the
/// stage completes, so timings survive a failure in a later stage.
PipelineOutput run_pipeline(const CellularTrajectory& traj, const RoadNetwork& net,
                            const PipelineConfig& config, const MaskProvider& masks = {},
                            StageTimings* progress = nullptr);

}  // namespace pixmatch
