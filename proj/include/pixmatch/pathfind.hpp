#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pixmatch/calibrate.hpp"
#include "pixmatch/error.hpp"
#include "pixmatch/roadnet.hpp"
#include "pixmatch/trajgen.hpp"

namespace pixmatch {

/// Path arithmetic runs in integer micrometers so that costs and lengths
/// add associatively and ties compare exactly. Every edge is at least 1 um.
using Micros = std::int64_t;

Micros to_micros(double meters);
inline double to_meters(Micros m) { return static_cast<double>(m) / 1e6; }

/// Road segments whose both endpoint cells are set in the calibration mask.
class CandidateSet {
public:
    CandidateSet() = default;
    CandidateSet(std::vector<EdgeIndex> members, std::size_t edge_count);

    bool contains(EdgeIndex e) const { return e < member_.size() && member_[e]; }
    std::span<const EdgeIndex> edges() const { return edges_; }
    std::size_t size() const { return edges_.size(); }
    bool empty() const { return edges_.empty(); }

private:
    std::vector<EdgeIndex> edges_;  // ascending
    std::vector<char> member_;
};

/// Throws InvalidInput("empty_candidate_set") when no edge qualifies.
CandidateSet candidate_set(const CalibrationMask& mask, const RoadNetwork& net, const Georef& g);

/// Sum over the path of 0 for members of S_y and the edge length otherwise.
/// Throws InvalidInput("disconnected_path") for a broken path.
double deviation_cost(std::span<const EdgeIndex> path, const CandidateSet& candidates,
                      const RoadNetwork& net);

/// Path length summed in the same fixed-point units the search uses.
double path_length_m(std::span<const EdgeIndex> path, const RoadNetwork& net);

struct Endpoints {
    EdgeIndex start = 0;
    EdgeIndex end = 0;
};

/// start: candidate whose from_node is nearest the first sample; end:
/// candidate whose to_node is nearest the last sample. Ties go to the
/// smaller edge id.
Endpoints select_endpoints(const CandidateSet& candidates, const CellularTrajectory& traj,
                           const RoadNetwork& net);

struct MatchResult {
    std::string traj_id;
    std::vector<EdgeIndex> edges;
    double cost_m = 0.0;
    double length_m = 0.0;
    std::size_t expanded_labels = 0;
    double runtime_s = 0.0;
};

class NoFeasiblePath : public Error {
public:
    NoFeasiblePath(double budget_m, double min_achievable_cost_m);

    double budget_m() const noexcept { return budget_m_; }
    double min_achievable_cost_m() const noexcept { return min_achievable_; }

private:
    double budget_m_;
    double min_achievable_;
};

class UnreachableEnd : public Error {
public:
    UnreachableEnd(const std::string& start_id, const std::string& end_id);
};

struct SearchOptions {
    /// Per-edge Pareto pruning over (cost, length). Turning it off requires
    /// max_path_edges > 0, since zero-cost cycles would never terminate.
    bool dominance_pruning = true;
    /// Labels longer than this many edges are not expanded; 0 = unbounded.
    std::size_t max_path_edges = 0;
};

/// Label-setting search over edge sequences from `start` to `end` with
/// deviation cost <= budget. Minimizes cost, then length, then the edge id
/// sequence lexicographically.
MatchResult constrained_search(const RoadNetwork& net, const CandidateSet& candidates,
                               EdgeIndex start, EdgeIndex end, double budget_m,
                               const SearchOptions& options = {});

inline constexpr std::size_t kDefaultOracleDepth = 14;

/// Exhaustive depth-first enumeration of every connected sequence of at
/// most max_depth edges, with the same objective and tie-breaks. Prefixes
/// are cut only by lower bounds that prove they cannot win. Testing oracle
/// only: exponential in max_depth.
MatchResult brute_force_search(const RoadNetwork& net, const CandidateSet& candidates,
                               EdgeIndex start, EdgeIndex end, double budget_m,
                               std::size_t max_depth = kDefaultOracleDepth);

}  // namespace pixmatch
