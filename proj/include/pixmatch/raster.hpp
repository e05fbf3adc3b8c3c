#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pixmatch/geo.hpp"
#include "pixmatch/roadnet.hpp"
#include "pixmatch/trajgen.hpp"

namespace pixmatch {

inline constexpr int kDefaultWidth = 224;
inline constexpr int kMinWidth = 16;

enum class Channel { trajectory, road, mask, gt_path };

std::string_view channel_name(Channel c);
/// Throws InvalidInput("bad_channel") for unknown names.
Channel parse_channel(std::string_view name);
bool is_binary(Channel c);

/// Square W x W window in a local equirectangular projection. The
/// projection is anchored at the window center, whose latitude sets the
/// east-west scale.
struct Georef {
    GeoPoint origin;  // southwest corner
    double meters_per_pixel = 1.0;
    int width = kDefaultWidth;

    double side_m() const { return meters_per_pixel * width; }
    double center_lat() const;
    GeoPoint center() const;
};

/// Exact width, 1e-9 absolute on origin degrees and meters_per_pixel.
bool georef_matches(const Georef& a, const Georef& b, double tol = 1e-9);

struct Cell {
    int col = 0;
    int row = 0;

    friend bool operator==(const Cell&, const Cell&) = default;
};

/// Caches the projection constants of one Georef for hot loops.
class GridProjection {
public:
    explicit GridProjection(const Georef& g);

    /// Floor projection; row 0 is the south edge. Points outside the window
    /// map to out-of-range indices.
    Cell to_pixel(const GeoPoint& p) const;
    GeoPoint from_pixel(int col, int row) const;
    bool in_range(const Cell& c) const {
        return c.col >= 0 && c.row >= 0 && c.col < width_ && c.row < width_;
    }

private:
    GeoPoint origin_;
    double mpp_;
    int width_;
    double meters_per_deg_lon_;
    double meters_per_deg_lat_;
};

/// Window = trajectory bounding box grown by buffer_m, padded to a square
/// about its center. Throws InvalidInput("degenerate_window") when the side
/// would be zero.
Georef make_georef(const CellularTrajectory& traj, double buffer_m, int width = kDefaultWidth);

Cell to_pixel(const Georef& g, const GeoPoint& p);
/// Cell center.
GeoPoint from_pixel(const Georef& g, int col, int row);

class PixelGrid {
public:
    PixelGrid() = default;
    PixelGrid(const Georef& g, Channel channel);

    const Georef& georef() const { return georef_; }
    Channel channel() const { return channel_; }
    int width() const { return georef_.width; }

    double at(int col, int row) const { return values_[index(col, row)]; }
    double at(const Cell& c) const { return at(c.col, c.row); }
    void set(int col, int row, double v) { values_[index(col, row)] = v; }
    void set(const Cell& c, double v) { set(c.col, c.row, v); }

    std::size_t index(int col, int row) const {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(georef_.width) +
               static_cast<std::size_t>(col);
    }
    Cell cell_of(std::size_t index) const {
        return {static_cast<int>(index % georef_.width), static_cast<int>(index / georef_.width)};
    }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    std::size_t count_nonzero() const;

    std::string traj_id;
    int n_points = 0;

private:
    Georef georef_;
    Channel channel_ = Channel::trajectory;
    std::vector<double> values_;
};

/// Throws InvalidInput when values leave [0,1] or a binary channel holds a
/// value other than 0/1.
void validate(const PixelGrid& grid);

struct TrajectoryRaster {
    PixelGrid grid;
    std::size_t skipped = 0;  // samples outside the window
};

/// Cell of sample i (1-based) holds i/|T|; the larger index wins on shared
/// cells. Throws InvalidInput("out_of_window") if no sample lands inside.
TrajectoryRaster rasterize_trajectory(const CellularTrajectory& traj, const Georef& g);

/// Road grid plus the reverse index from cell to the edges drawn through it.
struct RoadRaster {
    PixelGrid grid;
    std::vector<std::pair<std::uint32_t, EdgeIndex>> cell_edges;  // sorted

    std::vector<EdgeIndex> edges_at(const Cell& c) const;
};

/// Bresenham line between endpoint cells for every edge with an endpoint
/// in the window.
RoadRaster rasterize_roads(const RoadNetwork& net, const Georef& g);

PixelGrid rasterize_path(const GroundTruthPath& path, const RoadNetwork& net, const Georef& g);

/// All cells of the integer line from a to b inclusive.
void bresenham(const Cell& a, const Cell& b, const std::function<void(const Cell&)>& visit);

/// Sample indices (1-based) decoded from a trajectory grid as
/// round(value * n_points). Requires n_points < 255 for exact recovery
/// after byte quantization.
std::vector<std::pair<Cell, int>> decode_trajectory_cells(const PixelGrid& grid);

// --- file encoding --------------------------------------------------------

std::uint8_t quantize(double v);

/// `<traj_id>.<channel>.pgm`, with characters outside [A-Za-z0-9_.-]
/// replaced by '_'.
std::string grid_filename(std::string_view traj_id, Channel channel);

/// `foo.pgm` -> `foo.georef.json`.
std::filesystem::path sidecar_path(const std::filesystem::path& pgm_path);

/// Binary PGM (P5, maxval 255), first file row = north edge, plus sidecar.
void write_grid(const PixelGrid& grid, const std::filesystem::path& pgm_path);

/// Throws InvalidInput with kind bad_magic, size_mismatch, or missing_sidecar.
PixelGrid read_grid(const std::filesystem::path& pgm_path);
PixelGrid read_grid(const std::filesystem::path& pgm_path,
                    const std::filesystem::path& sidecar_path);

}  // namespace pixmatch
