#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pixmatch/pathfind.hpp"
#include "pixmatch/raster.hpp"
#include "pixmatch/rng.hpp"
#include "pixmatch/roadnet.hpp"
#include "pixmatch/trajgen.hpp"

namespace pixmatch::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "pixmatch") {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline NodeRecord node(const std::string& id, double lon, double lat) {
    return {id, {lon, lat}, 0};
}

inline EdgeRecord edge(const std::string& id, const std::string& from, const std::string& to) {
    EdgeRecord e;
    e.id = id;
    e.from = from;
    e.to = to;
    return e;
}

/// Edge with an explicit length that bypasses the haversine check.
inline EdgeRecord edge(const std::string& id, const std::string& from, const std::string& to,
                       double length_m) {
    auto e = edge(id, from, to);
    e.length_m = length_m;
    e.geometry_override = true;
    return e;
}

/// A -> B -> C along the equator, 0.001 degree apart.
inline RoadNetwork chain_network() {
    return RoadNetwork::build({node("A", 0.0, 0.0), node("B", 0.001, 0.0), node("C", 0.002, 0.0)},
                              {edge("e1", "A", "B"), edge("e2", "B", "C")});
}

/// e1:A->B, e2:B->C, e3:B->D, e4:D->C, each 100 m.
inline RoadNetwork diamond_network() {
    return RoadNetwork::build(
        {node("A", 0.0, 0.0), node("B", 0.001, 0.0), node("C", 0.002, 0.0), node("D", 0.0015, 0.0005)},
        {edge("e1", "A", "B", 100.0), edge("e2", "B", "C", 100.0), edge("e3", "B", "D", 100.0),
         edge("e4", "D", "C", 100.0)});
}

/// Small random directed network: 4..10 nodes inside a ~1 km square, up to
/// 40 edges with integer lengths (to provoke ties) between 1 and 200 m.
inline RoadNetwork random_network(std::uint64_t seed, std::size_t max_edges = 40) {
    Rng rng(seed);
    const auto n_nodes = 4 + rng.below(7);
    std::vector<NodeRecord> nodes;
    for (std::size_t i = 0; i < n_nodes; ++i) {
        nodes.push_back(node("n" + std::to_string(i), 120.0 + 0.01 * rng.uniform(),
                             30.0 + 0.01 * rng.uniform()));
    }
    const auto n_edges = 1 + rng.below(max_edges);
    std::vector<EdgeRecord> edges;
    for (std::size_t i = 0; i < n_edges; ++i) {
        const auto a = rng.below(n_nodes);
        auto b = rng.below(n_nodes - 1);
        if (b >= a) ++b;
        edges.push_back(edge(std::to_string(i), nodes[a].id, nodes[b].id,
                             static_cast<double>(1 + rng.below(200))));
    }
    return RoadNetwork::build(std::move(nodes), std::move(edges));
}

/// Georef whose window covers the whole network with a small margin.
inline Georef covering_georef(const RoadNetwork& net, int width) {
    const auto box = bounding_box(net);
    const GeoPoint sw{box.min_lon - 0.001, box.min_lat - 0.001};
    const double side = std::max(haversine(sw, {box.max_lon + 0.001, sw.lat}),
                                 haversine(sw, {sw.lon, box.max_lat + 0.001}));
    return {sw, side / width, width};
}

/// Mask grid with each cell set with probability `density`.
inline PixelGrid random_mask(const Georef& g, double density, std::uint64_t seed) {
    Rng rng(seed);
    PixelGrid mask(g, Channel::mask);
    for (auto& v : mask.values()) v = rng.uniform() < density ? 1.0 : 0.0;
    return mask;
}

struct SearchInstance {
    RoadNetwork net;
    CandidateSet candidates;
    EdgeIndex start = 0;
    EdgeIndex end = 0;
    double budget_m = 0.0;
};

/// Random network, random mask-derived candidate set, random endpoints and
/// a budget drawn from [0, 400] m.
inline SearchInstance random_search_instance(std::uint64_t seed, std::size_t max_edges = 40) {
    SearchInstance inst;
    inst.net = random_network(seed, max_edges);
    Rng rng(derive_seed(seed, 1));
    const Georef g = covering_georef(inst.net, 16);
    CalibrationMask mask{random_mask(g, 0.3 + 0.6 * rng.uniform(), derive_seed(seed, 2)),
                         MaskSource::external, 0};
    std::vector<EdgeIndex> members;
    for (EdgeIndex e = 0; e < inst.net.edge_count(); ++e) {
        const auto a = to_pixel(g, inst.net.from_pos(e));
        const auto b = to_pixel(g, inst.net.to_pos(e));
        if (mask.grid.at(a) > 0.0 && mask.grid.at(b) > 0.0) members.push_back(e);
    }
    inst.candidates = CandidateSet(std::move(members), inst.net.edge_count());
    inst.start = static_cast<EdgeIndex>(rng.below(inst.net.edge_count()));
    inst.end = static_cast<EdgeIndex>(rng.below(inst.net.edge_count()));
    inst.budget_m = std::floor(400.0 * rng.uniform());
    return inst;
}

/// Straight west-to-east trajectory of n samples `step_m` apart.
inline CellularTrajectory line_trajectory(std::size_t n, double step_m,
                                          const GeoPoint& start = {120.0, 30.0}) {
    CellularTrajectory traj{"line", {}};
    const double deg_per_m = 1.0 / (kEarthRadiusM * std::cos(deg_to_rad(start.lat)) * M_PI / 180.0);
    for (std::size_t i = 0; i < n; ++i) {
        traj.samples.push_back({"tw" + std::to_string(i),
                                {start.lon + static_cast<double>(i) * step_m * deg_per_m, start.lat},
                                static_cast<double>(i) * 10.0});
    }
    return traj;
}

}  // namespace pixmatch::testing
