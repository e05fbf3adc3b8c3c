#include "pixmatch/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "pixmatch/distance_field.hpp"
#include "pixmatch/error.hpp"

namespace pixmatch {

namespace {

constexpr double kMinNoiseRadiusM = 100.0;

void require_same_window(const PixelGrid& a, const PixelGrid& b) {
    if (!georef_matches(a.georef(), b.georef())) {
        throw InvalidInput("georef_mismatch", "grids for \"" + a.traj_id + "\" do not share a Georef");
    }
}

}  // namespace

CalibrationMask calibrate_deterministic(const PixelGrid& traj_grid, const PixelGrid& road_grid,
                                        int radius_px) {
    require_same_window(traj_grid, road_grid);
    if (radius_px < 1) throw InvalidInput("radius_px must be >= 1");
    if (road_grid.count_nonzero() == 0) {
        throw InvalidInput("empty_road", "road grid for \"" + traj_grid.traj_id + "\" is empty");
    }

    const auto traj = traj_grid.values();
    std::vector<std::uint8_t> seeds(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) seeds[i] = traj[i] != 0.0;
    const int w = traj_grid.width();
    const auto dist2 = squared_distance_transform(seeds, w, w);

    CalibrationMask out{PixelGrid(road_grid.georef(), Channel::mask), MaskSource::deterministic, 0};
    out.grid.traj_id = traj_grid.traj_id;
    out.grid.n_points = traj_grid.n_points;
    const double r2 = static_cast<double>(radius_px) * radius_px;
    const auto road = road_grid.values();
    auto mask = out.grid.values();
    double nearest2 = std::numeric_limits<double>::infinity();
    std::size_t set = 0;
    for (std::size_t i = 0; i < road.size(); ++i) {
        if (road[i] == 0.0) continue;
        nearest2 = std::min(nearest2, dist2[i]);
        if (dist2[i] <= r2) {
            mask[i] = 1.0;
            ++set;
        }
    }
    if (set == 0) {
        const std::string hint =
            std::isfinite(nearest2)
                ? "; minimum radius that succeeds: " +
                      std::to_string(static_cast<long long>(std::ceil(std::sqrt(nearest2))))
                : "; trajectory grid is empty";
        throw InvalidInput("empty_mask",
                           "calibrated mask for \"" + traj_grid.traj_id + "\" is empty at radius " +
                               std::to_string(radius_px) + hint);
    }
    return out;
}

CalibrationMask adopt_external_mask(const PixelGrid& mask, const PixelGrid& road_grid) {
    if (mask.channel() != Channel::mask) {
        throw InvalidInput("georef_mismatch", "external grid channel is not \"mask\"");
    }
    require_same_window(mask, road_grid);
    CalibrationMask out{PixelGrid(road_grid.georef(), Channel::mask), MaskSource::external, 0};
    out.grid.traj_id = mask.traj_id.empty() ? road_grid.traj_id : mask.traj_id;
    out.grid.n_points = mask.n_points;
    const auto in = mask.values();
    const auto road = road_grid.values();
    auto cells = out.grid.values();
    std::size_t kept = 0;
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (in[i] < 0.5) continue;
        if (road[i] == 0.0) {
            ++out.dropped;
            continue;
        }
        cells[i] = 1.0;
        ++kept;
    }
    if (kept == 0) {
        throw InvalidInput("empty_mask", "external mask for \"" + out.grid.traj_id +
                                             "\" has no cells on the road grid");
    }
    return out;
}

CalibrationMask load_external_mask(const std::filesystem::path& pgm_path,
                                   const std::filesystem::path& sidecar_path,
                                   const PixelGrid& road_grid) {
    return adopt_external_mask(read_grid(pgm_path, sidecar_path), road_grid);
}

int default_radius(double noise_sigma_m, const Georef& g) {
    const double meters = std::max(noise_sigma_m, kMinNoiseRadiusM);
    const double raw = std::ceil(meters / g.meters_per_pixel);
    const double upper = std::max(1, g.width / 2);
    return static_cast<int>(std::clamp(raw, 1.0, upper));
}

}  // namespace pixmatch
