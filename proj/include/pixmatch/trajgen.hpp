#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pixmatch/geo.hpp"
#include "pixmatch/roadnet.hpp"

namespace pixmatch {

class Rng;

struct CellTowerSample {
    std::string tower_id;
    GeoPoint pos;
    double t = 0.0;

    friend bool operator==(const CellTowerSample&, const CellTowerSample&) = default;
};

/// Time-ordered tower observations for one trip. At least two samples,
/// non-decreasing timestamps, no consecutive repeats of a tower.
struct CellularTrajectory {
    std::string traj_id;
    std::vector<CellTowerSample> samples;

    friend bool operator==(const CellularTrajectory&, const CellularTrajectory&) = default;
};

/// Throws InvalidInput when any trajectory invariant is violated.
void validate(const CellularTrajectory& traj);

struct GroundTruthPath {
    std::string traj_id;
    std::vector<EdgeIndex> edges;

    friend bool operator==(const GroundTruthPath&, const GroundTruthPath&) = default;
};

/// True when every consecutive pair is joined head-to-tail.
bool is_connected(std::span<const EdgeIndex> edges, const RoadNetwork& net);

double path_length(std::span<const EdgeIndex> edges, const RoadNetwork& net);

struct Tower {
    std::string id;
    GeoPoint pos;
};

struct TowerSet {
    std::vector<Tower> towers;
};

/// Throws InvalidInput on an empty set, a duplicate id, or a bad position.
void validate(const TowerSet& towers);

struct TimedPosition {
    GeoPoint pos;
    double t = 0.0;
};

/// Shortest route from a random origin node to a destination drawn
/// uniformly from the nodes at network distance >= min_length_m. Retries
/// new origins up to `max_origin_retries` times before throwing
/// InvalidInput("path_exhausted").
GroundTruthPath generate_path(const RoadNetwork& net, std::uint64_t seed, double min_length_m,
                              int max_origin_retries = 100);

/// Arc-length samples every speed*interval meters from the path start,
/// always ending with the path end. Timestamps are t0 + arc/speed.
std::vector<TimedPosition> sample_positions(const GroundTruthPath& path, const RoadNetwork& net,
                                            double speed_mps, double interval_s,
                                            double t0 = 0.0);

struct TowerChoice {
    std::size_t tower = 0;  // index into TowerSet::towers
    double probability = 0.0;
};

/// Selection distribution over the 5 nearest towers: softmax of
/// -d^2/(2 sigma^2). sigma == 0 puts all mass on the nearest tower.
/// Distance ties resolve to the lower tower index.
std::vector<TowerChoice> tower_distribution(const GeoPoint& pos, const TowerSet& towers,
                                            double noise_sigma_m);

std::size_t draw_tower(std::span<const TowerChoice> choices, Rng& rng);

CellularTrajectory observe_towers(std::span<const TimedPosition> positions,
                                  const TowerSet& towers, double noise_sigma_m,
                                  std::uint64_t seed, std::string traj_id = {});

/// Sum of haversine distances between consecutive samples.
double trajectory_length(const CellularTrajectory& traj);

/// Bidirectional rows x cols lattice with `spacing_m` between neighbours,
/// southwest node at `origin`. Node and edge ids are decimal integers.
RoadNetwork make_grid_network(int rows, int cols, double spacing_m, const GeoPoint& origin);

/// One tower on every network node, tower id == node id.
TowerSet towers_at_nodes(const RoadNetwork& net);

/// Towers on a square lattice covering `window`, each displaced uniformly
/// by up to jitter_fraction * spacing in both axes.
TowerSet jittered_towers(const GeoWindow& window, double spacing_m, double jitter_fraction,
                         std::uint64_t seed);

}  // namespace pixmatch
