#pragma once

#include <cmath>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "pixmatch/geo.hpp"
#include "pixmatch/raster.hpp"
#include "pixmatch/roadnet.hpp"

namespace pixmatch::testing {

/// Great-circle distance via the angle between unit vectors, a formula
/// independent of the haversine implementation.
inline double great_circle_oracle(const GeoPoint& a, const GeoPoint& b) {
    auto unit = [](const GeoPoint& p) {
        const long double lon = p.lon * M_PIl / 180.0L;
        const long double lat = p.lat * M_PIl / 180.0L;
        return std::vector<long double>{std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon),
                                        std::sin(lat)};
    };
    const auto u = unit(a);
    const auto v = unit(b);
    const long double cx = u[1] * v[2] - u[2] * v[1];
    const long double cy = u[2] * v[0] - u[0] * v[2];
    const long double cz = u[0] * v[1] - u[1] * v[0];
    const long double cross = std::sqrt(cx * cx + cy * cy + cz * cz);
    const long double dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    return static_cast<double>(6371000.0L * std::atan2(cross, dot));
}

/// Road cells within `radius` of any nonzero trajectory cell, by a double
/// loop over all pairs.
inline std::set<std::pair<int, int>> brute_force_mask(const PixelGrid& traj, const PixelGrid& road,
                                                      int radius) {
    std::vector<std::pair<int, int>> occupied;
    const int w = traj.width();
    for (int r = 0; r < w; ++r)
        for (int c = 0; c < w; ++c)
            if (traj.at(c, r) > 0.0) occupied.emplace_back(c, r);
    std::set<std::pair<int, int>> out;
    for (int r = 0; r < w; ++r) {
        for (int c = 0; c < w; ++c) {
            if (road.at(c, r) <= 0.0) continue;
            for (const auto& [tc, tr] : occupied) {
                const long dx = c - tc, dy = r - tr;
                if (dx * dx + dy * dy <= static_cast<long>(radius) * radius) {
                    out.emplace(c, r);
                    break;
                }
            }
        }
    }
    return out;
}

inline std::set<std::pair<int, int>> set_cells(const PixelGrid& g) {
    std::set<std::pair<int, int>> out;
    for (int r = 0; r < g.width(); ++r)
        for (int c = 0; c < g.width(); ++c)
            if (g.at(c, r) > 0.0) out.emplace(c, r);
    return out;
}

/// Cells touched by a line sampled at 1/64-pixel steps between cell centers.
inline std::set<std::pair<int, int>> sampled_line_cells(const Cell& a, const Cell& b) {
    std::set<std::pair<int, int>> out;
    const int steps = 64 * (std::abs(b.col - a.col) + std::abs(b.row - a.row) + 1);
    for (int i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) / steps;
        out.emplace(static_cast<int>(std::lround(a.col + t * (b.col - a.col))),
                    static_cast<int>(std::lround(a.row + t * (b.row - a.row))));
    }
    return out;
}

/// Point at arc length s along a path, interpolating lon/lat linearly on
/// the containing edge.
inline GeoPoint arc_length_point(std::span<const EdgeIndex> path, const RoadNetwork& net, double s) {
    double walked = 0.0;
    for (EdgeIndex e : path) {
        const double len = net.edge(e).length_m;
        if (s <= walked + len) {
            const double f = (s - walked) / len;
            const auto& a = net.from_pos(e);
            const auto& b = net.to_pos(e);
            return {a.lon + f * (b.lon - a.lon), a.lat + f * (b.lat - a.lat)};
        }
        walked += len;
    }
    return net.to_pos(path.back());
}

inline long double ext_sum(std::span<const double> xs) {
    long double s = 0.0L;
    for (double x : xs) s += x;
    return s;
}

inline double weighted_mean(std::span<const double> values, std::span<const double> weights) {
    long double num = 0.0L, den = 0.0L;
    for (std::size_t i = 0; i < values.size(); ++i) {
        num += static_cast<long double>(values[i]) * weights[i];
        den += weights[i];
    }
    return static_cast<double>(num / den);
}

}  // namespace pixmatch::testing
