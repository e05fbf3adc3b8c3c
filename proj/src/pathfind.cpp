#include "pixmatch/pathfind.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

#include "pixmatch/raster.hpp"

namespace pixmatch {

namespace {

constexpr Micros kNoCost = std::numeric_limits<Micros>::max();

Micros budget_micros(double budget_m) {
    if (!(budget_m >= 0.0)) throw InvalidInput("budget must be >= 0");
    if (budget_m > 9e12) return kNoCost;
    return static_cast<Micros>(std::floor(budget_m * 1e6));
}

// Per-search fixed-point edge weights.
struct EdgeWeights {
    std::vector<Micros> length;
    std::vector<Micros> deviation;

    EdgeWeights(const RoadNetwork& net, const CandidateSet& candidates)
        : length(net.edge_count()), deviation(net.edge_count()) {
        for (EdgeIndex e = 0; e < net.edge_count(); ++e) {
            length[e] = to_micros(net.edge(e).length_m);
            deviation[e] = candidates.contains(e) ? 0 : length[e];
        }
    }
};

void check_edge(const RoadNetwork& net, EdgeIndex e) {
    if (e >= net.edge_count()) throw InvalidInput("unknown_edge", "edge index out of range");
}

// Minimum deviation cost of any start -> end sequence, or kNoCost when end
// is unreachable. Dijkstra over edges.
Micros min_achievable_cost(const RoadNetwork& net, const EdgeWeights& w, EdgeIndex start,
                           EdgeIndex end) {
    std::vector<Micros> best(net.edge_count(), kNoCost);
    using Entry = std::pair<Micros, EdgeIndex>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    best[start] = w.deviation[start];
    queue.emplace(best[start], start);
    while (!queue.empty()) {
        const auto [c, e] = queue.top();
        queue.pop();
        if (c > best[e]) continue;
        if (e == end) return c;
        for (EdgeIndex s : net.successors(e)) {
            const Micros nc = c + w.deviation[s];
            if (nc < best[s]) {
                best[s] = nc;
                queue.emplace(nc, s);
            }
        }
    }
    return kNoCost;
}

[[noreturn]] void report_failure(const RoadNetwork& net, const EdgeWeights& w, EdgeIndex start,
                                 EdgeIndex end, double budget_m) {
    const Micros floor_cost = min_achievable_cost(net, w, start, end);
    if (floor_cost == kNoCost) throw UnreachableEnd(net.edge(start).id, net.edge(end).id);
    throw NoFeasiblePath(budget_m, to_meters(floor_cost));
}

struct Label {
    EdgeIndex edge;
    Micros cost;
    Micros length;
    std::uint32_t parent;  // kRoot for the initial label
    std::uint32_t depth;   // edges in the path
    bool dead = false;
};

constexpr std::uint32_t kRoot = std::numeric_limits<std::uint32_t>::max();

std::vector<EdgeIndex> chain(const std::vector<Label>& labels, std::uint32_t id) {
    std::vector<EdgeIndex> out;
    for (; id != kRoot; id = labels[id].parent) out.push_back(labels[id].edge);
    std::reverse(out.begin(), out.end());
    return out;
}

bool lex_less(const std::vector<Label>& labels, std::uint32_t a, std::uint32_t b) {
    const auto sa = chain(labels, a);
    const auto sb = chain(labels, b);
    return std::lexicographical_compare(sa.begin(), sa.end(), sb.begin(), sb.end());
}

}  // namespace

Micros to_micros(double meters) {
    return std::max<Micros>(1, static_cast<Micros>(std::llround(meters * 1e6)));
}

CandidateSet::CandidateSet(std::vector<EdgeIndex> members, std::size_t edge_count)
    : edges_(std::move(members)), member_(edge_count, 0) {
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    for (EdgeIndex e : edges_) {
        if (e >= edge_count) throw InvalidInput("unknown_edge", "candidate edge out of range");
        member_[e] = 1;
    }
}

CandidateSet candidate_set(const CalibrationMask& mask, const RoadNetwork& net, const Georef& g) {
    if (net.edge_count() == 0) throw InvalidInput("empty_network", "network has no edges");
    const GridProjection proj(g);
    auto inside = [&](const GeoPoint& p) {
        const Cell c = proj.to_pixel(p);
        return proj.in_range(c) && mask.grid.at(c) != 0.0;
    };
    std::vector<EdgeIndex> members;
    for (EdgeIndex e = 0; e < net.edge_count(); ++e) {
        if (inside(net.from_pos(e)) && inside(net.to_pos(e))) members.push_back(e);
    }
    if (members.empty()) {
        throw InvalidInput("empty_candidate_set",
                           "no road segment has both endpoints inside the mask for \"" +
                               mask.grid.traj_id + "\"");
    }
    return CandidateSet(std::move(members), net.edge_count());
}

double deviation_cost(std::span<const EdgeIndex> path, const CandidateSet& candidates,
                      const RoadNetwork& net) {
    for (EdgeIndex e : path) check_edge(net, e);
    if (!is_connected(path, net)) throw InvalidInput("disconnected_path", "path is not connected");
    Micros total = 0;
    for (EdgeIndex e : path) {
        if (!candidates.contains(e)) total += to_micros(net.edge(e).length_m);
    }
    return to_meters(total);
}

double path_length_m(std::span<const EdgeIndex> path, const RoadNetwork& net) {
    Micros total = 0;
    for (EdgeIndex e : path) total += to_micros(net.edge(e).length_m);
    return to_meters(total);
}

Endpoints select_endpoints(const CandidateSet& candidates, const CellularTrajectory& traj,
                           const RoadNetwork& net) {
    if (candidates.empty()) throw InvalidInput("empty_candidate_set", "candidate set is empty");
    if (traj.samples.empty()) throw InvalidInput("trajectory has no samples");
    const GeoPoint first = traj.samples.front().pos;
    const GeoPoint last = traj.samples.back().pos;
    Endpoints out{candidates.edges().front(), candidates.edges().front()};
    double best_start = std::numeric_limits<double>::infinity();
    double best_end = best_start;
    // Ascending iteration + strict comparison keeps the smaller id on ties.
    for (EdgeIndex e : candidates.edges()) {
        const double ds = haversine(net.from_pos(e), first);
        if (ds < best_start) {
            best_start = ds;
            out.start = e;
        }
        const double de = haversine(net.to_pos(e), last);
        if (de < best_end) {
            best_end = de;
            out.end = e;
        }
    }
    return out;
}

NoFeasiblePath::NoFeasiblePath(double budget_m, double min_achievable_cost_m)
    : Error("no_feasible_path", "no path within cost budget " + std::to_string(budget_m) +
                                    " m; minimum achievable cost " +
                                    std::to_string(min_achievable_cost_m) + " m"),
      budget_m_(budget_m),
      min_achievable_(min_achievable_cost_m) {}

UnreachableEnd::UnreachableEnd(const std::string& start_id, const std::string& end_id)
    : Error("unreachable_end", "end edge \"" + end_id + "\" is unreachable from \"" + start_id + "\"") {}

MatchResult constrained_search(const RoadNetwork& net, const CandidateSet& candidates,
                               EdgeIndex start, EdgeIndex end, double budget_m,
                               const SearchOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    check_edge(net, start);
    check_edge(net, end);
    if (!options.dominance_pruning && options.max_path_edges == 0) {
        throw InvalidInput("search without dominance pruning needs max_path_edges > 0");
    }
    const Micros budget = budget_micros(budget_m);
    const EdgeWeights w(net, candidates);

    std::vector<Label> labels;
    std::vector<std::vector<std::uint32_t>> frontier(options.dominance_pruning ? net.edge_count() : 0);
    using Key = std::tuple<Micros, Micros, std::uint32_t>;
    std::priority_queue<Key, std::vector<Key>, std::greater<>> queue;

    if (w.deviation[start] > budget) report_failure(net, w, start, end, budget_m);
    labels.push_back({start, w.deviation[start], w.length[start], kRoot, 1});
    if (options.dominance_pruning) frontier[start].push_back(0);
    queue.emplace(labels[0].cost, labels[0].length, 0);

    std::uint32_t best = kRoot;
    std::size_t expanded = 0;
    while (!queue.empty()) {
        const auto [cost, length, id] = queue.top();
        queue.pop();
        if (labels[id].dead) continue;
        if (best != kRoot) {
            const auto best_key = std::make_pair(labels[best].cost, labels[best].length);
            if (std::make_pair(cost, length) > best_key) break;
            if (labels[id].edge != end) continue;  // equal key: any extension is longer
        }
        if (labels[id].edge == end) {
            if (best == kRoot || lex_less(labels, id, best)) best = id;
            continue;
        }
        if (options.max_path_edges != 0 && labels[id].depth >= options.max_path_edges) continue;
        ++expanded;

        for (EdgeIndex next : net.successors(labels[id].edge)) {
            const Micros nc = cost + w.deviation[next];
            if (nc > budget) continue;
            const Micros nl = length + w.length[next];
            const auto nid = static_cast<std::uint32_t>(labels.size());
            labels.push_back({next, nc, nl, id, labels[id].depth + 1});

            if (options.dominance_pruning) {
                auto& bucket = frontier[next];
                bool dominated = false;
                for (std::uint32_t other : bucket) {
                    const Label& o = labels[other];
                    if (o.cost <= nc && o.length <= nl &&
                        (o.cost != nc || o.length != nl || lex_less(labels, other, nid))) {
                        dominated = true;
                        break;
                    }
                }
                if (dominated) {
                    labels.pop_back();
                    continue;
                }
                std::erase_if(bucket, [&](std::uint32_t other) {
                    Label& o = labels[other];
                    if (nc <= o.cost && nl <= o.length) {
                        o.dead = true;
                        return true;
                    }
                    return false;
                });
                bucket.push_back(nid);
            }
            queue.emplace(nc, nl, nid);
        }
    }

    if (best == kRoot) report_failure(net, w, start, end, budget_m);
    MatchResult result;
    result.edges = chain(labels, best);
    result.cost_m = to_meters(labels[best].cost);
    result.length_m = to_meters(labels[best].length);
    result.expanded_labels = expanded;
    result.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

MatchResult brute_force_search(const RoadNetwork& net, const CandidateSet& candidates,
                               EdgeIndex start, EdgeIndex end, double budget_m,
                               std::size_t max_depth) {
    const auto t0 = std::chrono::steady_clock::now();
    check_edge(net, start);
    check_edge(net, end);
    if (max_depth == 0) throw InvalidInput("max_depth must be >= 1");
    const Micros budget = budget_micros(budget_m);
    const EdgeWeights w(net, candidates);

    // Lower bounds from each edge to `end` (excluding the edge itself) on
    // cost, length and hop count, by Bellman-Ford relaxation. They only
    // prune sequences that provably cannot beat the incumbent.
    const std::size_t n = net.edge_count();
    const Micros kFar = kNoCost / 4;
    std::vector<Micros> cost_to_end(n, kFar), length_to_end(n, kFar);
    std::vector<std::size_t> hops_to_end(n, max_depth + 1);
    cost_to_end[end] = length_to_end[end] = 0;
    hops_to_end[end] = 0;
    for (bool changed = true; changed;) {
        changed = false;
        for (EdgeIndex e = 0; e < n; ++e) {
            for (EdgeIndex s : net.successors(e)) {
                if (cost_to_end[s] + w.deviation[s] < cost_to_end[e]) {
                    cost_to_end[e] = cost_to_end[s] + w.deviation[s];
                    changed = true;
                }
                if (length_to_end[s] + w.length[s] < length_to_end[e]) {
                    length_to_end[e] = length_to_end[s] + w.length[s];
                    changed = true;
                }
                if (hops_to_end[s] + 1 < hops_to_end[e]) {
                    hops_to_end[e] = hops_to_end[s] + 1;
                    changed = true;
                }
            }
        }
    }

    std::vector<EdgeIndex> seq{start};
    std::vector<EdgeIndex> best_seq;
    Micros best_cost = kNoCost, best_length = kNoCost;
    std::size_t visited = 0;

    // Pass 1: every feasible sequence of at most max_depth edges, in
    // depth-first order. Cost never decreases and length strictly grows
    // along a sequence, so bounded prefixes cannot be completed better.
    auto explore = [&](auto&& self, Micros cost, Micros length) -> void {
        ++visited;
        const EdgeIndex tail = seq.back();
        if (tail == end) {
            const auto key = std::make_pair(cost, length);
            const auto best_key = std::make_pair(best_cost, best_length);
            if (key < best_key || (key == best_key && seq < best_seq)) {
                best_cost = cost;
                best_length = length;
                best_seq = seq;
            }
            return;
        }
        if (seq.size() >= max_depth) return;
        for (EdgeIndex next : net.successors(tail)) {
            const Micros nc = cost + w.deviation[next];
            const Micros nl = length + w.length[next];
            if (nc + cost_to_end[next] > budget) continue;
            if (seq.size() + 1 + hops_to_end[next] > max_depth) continue;
            if (nc + cost_to_end[next] > best_cost) continue;
            if (nc + cost_to_end[next] == best_cost && nl + length_to_end[next] > best_length) continue;
            seq.push_back(next);
            self(self, nc, nl);
            seq.pop_back();
        }
    };
    if (w.deviation[start] <= budget) explore(explore, w.deviation[start], w.length[start]);

    if (best_seq.empty()) {
        // Pass 2: cheapest sequence of at most max_depth edges ignoring the
        // budget, by dynamic programming over (edge, sequence length).
        std::vector<Micros> at(n, kNoCost), next_at(n);
        at[start] = w.deviation[start];
        Micros floor_cost = at[end];
        for (std::size_t depth = 1; depth < max_depth; ++depth) {
            std::fill(next_at.begin(), next_at.end(), kNoCost);
            for (EdgeIndex e = 0; e < n; ++e) {
                if (at[e] == kNoCost) continue;
                for (EdgeIndex s : net.successors(e)) {
                    next_at[s] = std::min(next_at[s], at[e] + w.deviation[s]);
                }
            }
            at.swap(next_at);
            floor_cost = std::min(floor_cost, at[end]);
        }
        if (floor_cost == kNoCost) throw UnreachableEnd(net.edge(start).id, net.edge(end).id);
        throw NoFeasiblePath(budget_m, to_meters(floor_cost));
    }

    MatchResult result;
    result.edges = std::move(best_seq);
    result.cost_m = to_meters(best_cost);
    result.length_m = to_meters(best_length);
    result.expanded_labels = visited;
    result.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

}  // namespace pixmatch
