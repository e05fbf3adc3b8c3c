#include "pixmatch/pipeline.hpp"

#include <chrono>

namespace pixmatch {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
    return std::chrono::duration<double>(Clock::now() - t).count();
}

}  // namespace

MaskProvider mask_dir_provider(const std::filesystem::path& dir) {
    return [dir](const PixelGrid& traj_grid, const PixelGrid& road_grid) {
        const auto pgm = dir / grid_filename(traj_grid.traj_id, Channel::mask);
        return load_external_mask(pgm, sidecar_path(pgm), road_grid);
    };
}

PipelineOutput run_pipeline(const CellularTrajectory& traj, const RoadNetwork& net,
                            const PipelineConfig& config, const MaskProvider& masks,
                            StageTimings* progress) {
    const auto t_start = Clock::now();
    PipelineOutput out;
    StageTimings scratch;
    StageTimings& timings = progress ? *progress : scratch;
    timings = {};

    auto t = Clock::now();
    out.georef = make_georef(traj, config.buffer_m, config.width);
    out.trajectory = rasterize_trajectory(traj, out.georef);
    out.roads = rasterize_roads(net, out.georef);
    out.roads.grid.traj_id = traj.traj_id;
    out.roads.grid.n_points = static_cast<int>(traj.samples.size());
    timings.rasterize_s = seconds_since(t);

    timings.total_s = seconds_since(t_start);
    t = Clock::now();
    if (masks) {
        out.mask = masks(out.trajectory.grid, out.roads.grid);
    } else {
        const int radius = config.radius_px.value_or(default_radius(config.noise_sigma_m, out.georef));
        out.mask = calibrate_deterministic(out.trajectory.grid, out.roads.grid, radius);
    }
    timings.calibrate_s = seconds_since(t);

    timings.total_s = seconds_since(t_start);
    t = Clock::now();
    out.candidates = candidate_set(out.mask, net, out.georef);
    out.endpoints = select_endpoints(out.candidates, traj, net);
    out.budget_m = config.cost_fraction * trajectory_length(traj);
    for (int attempt = 0;; ++attempt) {
        try {
            out.result = constrained_search(net, out.candidates, out.endpoints.start,
                                            out.endpoints.end, out.budget_m, config.search);
            break;
        } catch (const NoFeasiblePath&) {
            if (attempt >= config.relax) {
                timings.match_s = seconds_since(t);
                timings.total_s = seconds_since(t_start);
                throw;
            }
            out.budget_m *= 2.0;
            out.relax_used = attempt + 1;
        }
    }
    out.result.traj_id = traj.traj_id;
    timings.match_s = seconds_since(t);
    timings.total_s = seconds_since(t_start);
    out.timings = timings;
    return out;
}

}  // namespace pixmatch
