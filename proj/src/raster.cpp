#include "pixmatch/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "pixmatch/error.hpp"

namespace pixmatch {

std::string_view channel_name(Channel c) {
    switch (c) {
        case Channel::trajectory: return "trajectory";
        case Channel::road: return "road";
        case Channel::mask: return "mask";
        case Channel::gt_path: return "gt_path";
    }
    return "trajectory";
}

Channel parse_channel(std::string_view name) {
    for (Channel c : {Channel::trajectory, Channel::road, Channel::mask, Channel::gt_path}) {
        if (channel_name(c) == name) return c;
    }
    throw InvalidInput("bad_channel", "unknown channel \"" + std::string(name) + "\"");
}

bool is_binary(Channel c) { return c != Channel::trajectory; }

double Georef::center_lat() const {
    return origin.lat + rad_to_deg(side_m() / 2.0 / kEarthRadiusM);
}

GeoPoint Georef::center() const {
    const double k = std::cos(deg_to_rad(center_lat()));
    return {origin.lon + rad_to_deg(side_m() / 2.0 / (kEarthRadiusM * k)), center_lat()};
}

bool georef_matches(const Georef& a, const Georef& b, double tol) {
    return a.width == b.width && std::abs(a.origin.lon - b.origin.lon) <= tol &&
           std::abs(a.origin.lat - b.origin.lat) <= tol &&
           std::abs(a.meters_per_pixel - b.meters_per_pixel) <= tol;
}

GridProjection::GridProjection(const Georef& g)
    : origin_(g.origin), mpp_(g.meters_per_pixel), width_(g.width) {
    meters_per_deg_lat_ = deg_to_rad(1.0) * kEarthRadiusM;
    meters_per_deg_lon_ = meters_per_deg_lat_ * std::cos(deg_to_rad(g.center_lat()));
}

Cell GridProjection::to_pixel(const GeoPoint& p) const {
    const double x = (p.lon - origin_.lon) * meters_per_deg_lon_ / mpp_;
    const double y = (p.lat - origin_.lat) * meters_per_deg_lat_ / mpp_;
    // Clamp far-away points so the int conversion stays defined.
    const double lim = 1e9;
    return {static_cast<int>(std::floor(std::clamp(x, -lim, lim))),
            static_cast<int>(std::floor(std::clamp(y, -lim, lim)))};
}

GeoPoint GridProjection::from_pixel(int col, int row) const {
    return {origin_.lon + (col + 0.5) * mpp_ / meters_per_deg_lon_,
            origin_.lat + (row + 0.5) * mpp_ / meters_per_deg_lat_};
}

Cell to_pixel(const Georef& g, const GeoPoint& p) { return GridProjection(g).to_pixel(p); }

GeoPoint from_pixel(const Georef& g, int col, int row) {
    return GridProjection(g).from_pixel(col, row);
}

Georef make_georef(const CellularTrajectory& traj, double buffer_m, int width) {
    if (traj.samples.empty()) throw InvalidInput("degenerate_window", "trajectory has no samples");
    if (!(buffer_m >= 0.0)) throw InvalidInput("buffer_m must be >= 0");
    if (width < kMinWidth) {
        throw InvalidInput("width must be >= " + std::to_string(kMinWidth));
    }
    double min_lon = traj.samples[0].pos.lon, max_lon = min_lon;
    double min_lat = traj.samples[0].pos.lat, max_lat = min_lat;
    for (const auto& s : traj.samples) {
        min_lon = std::min(min_lon, s.pos.lon);
        max_lon = std::max(max_lon, s.pos.lon);
        min_lat = std::min(min_lat, s.pos.lat);
        max_lat = std::max(max_lat, s.pos.lat);
    }
    const double lat_c = (min_lat + max_lat) / 2.0;
    const double lon_c = (min_lon + max_lon) / 2.0;
    const double ew = deg_to_rad(max_lon - min_lon) * kEarthRadiusM * std::cos(deg_to_rad(lat_c));
    const double ns = deg_to_rad(max_lat - min_lat) * kEarthRadiusM;
    const double side = std::max(ew, ns) + 2.0 * buffer_m;
    if (!(side > 0.0)) {
        throw InvalidInput("degenerate_window",
                           "trajectory \"" + traj.traj_id + "\" has zero extent and zero buffer");
    }
    const double half = side / 2.0;
    Georef g;
    g.width = width;
    g.meters_per_pixel = side / width;
    g.origin.lat = lat_c - rad_to_deg(half / kEarthRadiusM);
    const double k = std::cos(deg_to_rad(g.center_lat()));
    g.origin.lon = lon_c - rad_to_deg(half / (kEarthRadiusM * k));
    return g;
}

PixelGrid::PixelGrid(const Georef& g, Channel channel)
    : georef_(g),
      channel_(channel),
      values_(static_cast<std::size_t>(g.width) * static_cast<std::size_t>(g.width), 0.0) {}

std::size_t PixelGrid::count_nonzero() const {
    return static_cast<std::size_t>(
        std::count_if(values_.begin(), values_.end(), [](double v) { return v != 0.0; }));
}

void validate(const PixelGrid& grid) {
    const bool binary = is_binary(grid.channel());
    for (double v : grid.values()) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw InvalidInput("bad_grid", "grid value outside [0,1]");
        }
        if (binary && v != 0.0 && v != 1.0) {
            throw InvalidInput("bad_grid", std::string("non-binary value in ") +
                                               std::string(channel_name(grid.channel())) + " grid");
        }
    }
}

TrajectoryRaster rasterize_trajectory(const CellularTrajectory& traj, const Georef& g) {
    TrajectoryRaster out{PixelGrid(g, Channel::trajectory), 0};
    out.grid.traj_id = traj.traj_id;
    out.grid.n_points = static_cast<int>(traj.samples.size());
    const GridProjection proj(g);
    const double n = static_cast<double>(traj.samples.size());
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const Cell c = proj.to_pixel(traj.samples[i].pos);
        if (!proj.in_range(c)) {
            ++out.skipped;
            continue;
        }
        // Later samples overwrite: the larger index wins.
        out.grid.set(c, static_cast<double>(i + 1) / n);
    }
    if (out.skipped == traj.samples.size()) {
        throw InvalidInput("out_of_window",
                           "every sample of \"" + traj.traj_id + "\" is outside the window");
    }
    return out;
}

void bresenham(const Cell& a, const Cell& b, const std::function<void(const Cell&)>& visit) {
    int x = a.col, y = a.row;
    const int dx = std::abs(b.col - a.col);
    const int dy = -std::abs(b.row - a.row);
    const int sx = a.col < b.col ? 1 : -1;
    const int sy = a.row < b.row ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        visit({x, y});
        if (x == b.col && y == b.row) return;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y += sy;
        }
    }
}

namespace {

template <typename EdgeRange>
void draw_edges(const RoadNetwork& net, const EdgeRange& edges, PixelGrid& grid,
                std::vector<std::pair<std::uint32_t, EdgeIndex>>* index) {
    const GridProjection proj(grid.georef());
    for (EdgeIndex e : edges) {
        const Cell a = proj.to_pixel(net.from_pos(e));
        const Cell b = proj.to_pixel(net.to_pos(e));
        if (!proj.in_range(a) && !proj.in_range(b)) continue;
        bresenham(a, b, [&](const Cell& c) {
            if (!proj.in_range(c)) return;
            grid.set(c, 1.0);
            if (index) index->emplace_back(static_cast<std::uint32_t>(grid.index(c.col, c.row)), e);
        });
    }
}

}  // namespace

std::vector<EdgeIndex> RoadRaster::edges_at(const Cell& c) const {
    const auto key = static_cast<std::uint32_t>(grid.index(c.col, c.row));
    auto lo = std::lower_bound(cell_edges.begin(), cell_edges.end(), std::make_pair(key, EdgeIndex{0}));
    std::vector<EdgeIndex> out;
    for (; lo != cell_edges.end() && lo->first == key; ++lo) out.push_back(lo->second);
    return out;
}

RoadRaster rasterize_roads(const RoadNetwork& net, const Georef& g) {
    RoadRaster out{PixelGrid(g, Channel::road), {}};
    std::vector<EdgeIndex> all(net.edge_count());
    for (EdgeIndex e = 0; e < all.size(); ++e) all[e] = e;
    draw_edges(net, all, out.grid, &out.cell_edges);
    std::sort(out.cell_edges.begin(), out.cell_edges.end());
    out.cell_edges.erase(std::unique(out.cell_edges.begin(), out.cell_edges.end()),
                         out.cell_edges.end());
    return out;
}

PixelGrid rasterize_path(const GroundTruthPath& path, const RoadNetwork& net, const Georef& g) {
    PixelGrid grid(g, Channel::gt_path);
    grid.traj_id = path.traj_id;
    draw_edges(net, path.edges, grid, nullptr);
    return grid;
}

std::vector<std::pair<Cell, int>> decode_trajectory_cells(const PixelGrid& grid) {
    std::vector<std::pair<Cell, int>> out;
    const auto values = grid.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] == 0.0) continue;
        out.emplace_back(grid.cell_of(i), static_cast<int>(std::lround(values[i] * grid.n_points)));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    return out;
}

}  // namespace pixmatch
