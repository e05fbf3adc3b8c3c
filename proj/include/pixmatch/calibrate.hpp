#pragma once

#include <filesystem>

#include "pixmatch/raster.hpp"

namespace pixmatch {

enum class MaskSource { deterministic, external };

/// Binary mask over road cells; never empty.
struct CalibrationMask {
    PixelGrid grid;
    MaskSource source = MaskSource::deterministic;
    std::size_t dropped = 0;  // off-road cells removed on load (external only)
};

/// Distance-field baseline: every road cell within radius_px (Euclidean,
/// in cells) of an occupied trajectory cell. Throws InvalidInput with kind
/// georef_mismatch, empty_road, or empty_mask; the empty_mask message
/// names the smallest radius that would have succeeded.
CalibrationMask calibrate_deterministic(const PixelGrid& traj_grid, const PixelGrid& road_grid,
                                        int radius_px);

/// Loads an externally produced mask (byte >= 128 -> 1), keeps only cells
/// also set in `road_grid`, and records how many were dropped.
CalibrationMask load_external_mask(const std::filesystem::path& pgm_path,
                                   const std::filesystem::path& sidecar_path,
                                   const PixelGrid& road_grid);

/// Same, for a mask grid already in memory.
CalibrationMask adopt_external_mask(const PixelGrid& mask, const PixelGrid& road_grid);

/// ceil(max(noise_sigma, 100 m) / meters_per_pixel), clamped to [1, width/2].
int default_radius(double noise_sigma_m, const Georef& g);

}  // namespace pixmatch
