#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pixmatch/raster.hpp"

namespace pixmatch {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr Rgb kRoadColor{255, 255, 0};
inline constexpr Rgb kMaskColor{255, 255, 255};
inline constexpr Rgb kPathColor{255, 0, 0};

/// Trajectory value v in (0,1] maps to a cyan of rising brightness.
Rgb trajectory_color(double v);

/// Row 0 of the image is the north edge, as in the PGM files.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<Rgb> pixels;

    const Rgb& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Any layer may be null. Painting order: road, mask, path, trajectory.
struct RenderLayers {
    const PixelGrid* roads = nullptr;
    const PixelGrid* mask = nullptr;
    const PixelGrid* path = nullptr;
    const PixelGrid* trajectory = nullptr;
};

/// Throws InvalidInput("georef_mismatch") when the layers disagree, or
/// InvalidInput("empty_render") when every layer is null.
Image render_overlay(const RenderLayers& layers);

/// Binary PPM (P6, maxval 255).
void write_ppm(const Image& image, const std::filesystem::path& path);
Image read_ppm(const std::filesystem::path& path);

}  // namespace pixmatch
