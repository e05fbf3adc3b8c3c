#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pixmatch/pathfind.hpp"
#include "pixmatch/roadnet.hpp"
#include "pixmatch/trajgen.hpp"

namespace pixmatch {

/// towers.csv: `tower_id,lon,lat`.
TowerSet load_towers(const std::filesystem::path& path);
void write_towers(const TowerSet& towers, const std::filesystem::path& path);

/// trajectories.jsonl: {traj_id, samples:[{tower_id,lon,lat,t}]} per line.
/// Every trajectory is validated; errors carry the line number.
std::vector<CellularTrajectory> load_trajectories(const std::filesystem::path& path);
void write_trajectories(std::span<const CellularTrajectory> trajs,
                        const std::filesystem::path& path);

/// ground_truth.jsonl: {traj_id, edges:[edge_id]} per line. Edge ids are
/// resolved against `net`; paths must be connected.
std::vector<GroundTruthPath> load_ground_truth(const std::filesystem::path& path,
                                               const RoadNetwork& net);
void write_ground_truth(std::span<const GroundTruthPath> paths, const RoadNetwork& net,
                        const std::filesystem::path& path);

/// One line of matches.jsonl. A failed trajectory has status set to the
/// error kind, no edges, and null cost/length.
struct MatchRecord {
    std::string traj_id;
    std::string status = "ok";
    std::vector<EdgeIndex> edges;
    std::optional<double> cost_m;
    std::optional<double> length_m;
    std::size_t expanded_labels = 0;
    double runtime_s = 0.0;
};

MatchRecord to_record(const MatchResult& result);
std::string match_line(const MatchRecord& record, const RoadNetwork& net);
std::vector<MatchRecord> load_matches(const std::filesystem::path& path, const RoadNetwork& net);
void write_matches(std::span<const MatchRecord> records, const RoadNetwork& net,
                   const std::filesystem::path& path);

}  // namespace pixmatch
