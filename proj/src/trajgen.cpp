#include "pixmatch/trajgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <unordered_set>

#include "pixmatch/error.hpp"
#include "pixmatch/rng.hpp"

namespace pixmatch {

namespace {

constexpr std::size_t kTowerCandidates = 5;

GeoPoint offset_meters(const GeoPoint& origin, double east_m, double north_m) {
    const double lat = origin.lat + rad_to_deg(north_m / kEarthRadiusM);
    const double lon =
        origin.lon + rad_to_deg(east_m / (kEarthRadiusM * std::cos(deg_to_rad(origin.lat))));
    return {lon, lat};
}

GeoPoint lerp(const GeoPoint& a, const GeoPoint& b, double f) {
    return {a.lon + (b.lon - a.lon) * f, a.lat + (b.lat - a.lat) * f};
}

}  // namespace

void validate(const CellularTrajectory& traj) {
    if (traj.samples.size() < 2) {
        throw InvalidInput("too_few_samples",
                           "trajectory \"" + traj.traj_id + "\" has fewer than 2 samples");
    }
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const auto& s = traj.samples[i];
        if (!is_valid(s.pos) || !std::isfinite(s.t)) {
            throw InvalidInput("trajectory \"" + traj.traj_id + "\" sample " + std::to_string(i) +
                               " is not finite");
        }
        if (i == 0) continue;
        const auto& prev = traj.samples[i - 1];
        if (s.t < prev.t) {
            throw InvalidInput("trajectory \"" + traj.traj_id + "\" timestamps decrease at sample " +
                               std::to_string(i));
        }
        if (s.tower_id == prev.tower_id) {
            throw InvalidInput("trajectory \"" + traj.traj_id + "\" repeats tower " + s.tower_id +
                               " at sample " + std::to_string(i));
        }
    }
}

bool is_connected(std::span<const EdgeIndex> edges, const RoadNetwork& net) {
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (net.edge(edges[i - 1]).to != net.edge(edges[i]).from) return false;
    }
    return true;
}

double path_length(std::span<const EdgeIndex> edges, const RoadNetwork& net) {
    double total = 0.0;
    for (EdgeIndex e : edges) total += net.edge(e).length_m;
    return total;
}

void validate(const TowerSet& towers) {
    if (towers.towers.empty()) throw InvalidInput("empty_towers", "tower set is empty");
    std::unordered_set<std::string> seen;
    for (const auto& t : towers.towers) {
        require_valid(t.pos);
        if (!seen.insert(t.id).second) {
            throw InvalidInput("duplicate_tower", "duplicate tower_id \"" + t.id + "\"");
        }
    }
}

GroundTruthPath generate_path(const RoadNetwork& net, std::uint64_t seed, double min_length_m,
                              int max_origin_retries) {
    if (net.edge_count() == 0) throw InvalidInput("path_exhausted", "network has no edges");
    Rng rng(seed);
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(net.node_count());
    std::vector<EdgeIndex> via(net.node_count());
    using Entry = std::pair<double, NodeIndex>;

    for (int attempt = 0; attempt < std::max(1, max_origin_retries); ++attempt) {
        const EdgeIndex first = static_cast<EdgeIndex>(rng.below(net.edge_count()));
        const NodeIndex origin = net.edge(first).from;

        std::fill(dist.begin(), dist.end(), inf);
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
        dist[origin] = 0.0;
        queue.emplace(0.0, origin);
        while (!queue.empty()) {
            const auto [d, n] = queue.top();
            queue.pop();
            if (d > dist[n]) continue;
            for (EdgeIndex e : net.outgoing(n)) {
                const NodeIndex m = net.edge(e).to;
                const double nd = d + net.edge(e).length_m;
                if (nd < dist[m]) {
                    dist[m] = nd;
                    via[m] = e;
                    queue.emplace(nd, m);
                }
            }
        }

        std::vector<NodeIndex> eligible;
        for (NodeIndex n = 0; n < net.node_count(); ++n) {
            if (n != origin && dist[n] != inf && dist[n] >= min_length_m) eligible.push_back(n);
        }
        if (eligible.empty()) continue;

        NodeIndex cursor = eligible[rng.below(eligible.size())];
        GroundTruthPath path;
        while (cursor != origin) {
            path.edges.push_back(via[cursor]);
            cursor = net.edge(via[cursor]).from;
        }
        std::reverse(path.edges.begin(), path.edges.end());
        return path;
    }
    throw InvalidInput("path_exhausted", "no path of length >= " + std::to_string(min_length_m) +
                                             " m after " + std::to_string(max_origin_retries) +
                                             " origin retries");
}

std::vector<TimedPosition> sample_positions(const GroundTruthPath& path, const RoadNetwork& net,
                                            double speed_mps, double interval_s, double t0) {
    if (!(speed_mps > 0.0) || !(interval_s > 0.0)) {
        throw InvalidInput("speed and interval must be positive");
    }
    const double total = path_length(path.edges, net);
    if (path.edges.empty() || !(total > 0.0)) {
        throw InvalidInput("degenerate_path", "cannot sample a zero-length path");
    }
    const double spacing = speed_mps * interval_s;

    std::vector<TimedPosition> out;
    std::size_t edge_pos = 0;
    double edge_start = 0.0;
    auto position_at = [&](double arc) {
        while (edge_pos + 1 < path.edges.size() &&
               arc > edge_start + net.edge(path.edges[edge_pos]).length_m) {
            edge_start += net.edge(path.edges[edge_pos]).length_m;
            ++edge_pos;
        }
        const EdgeIndex e = path.edges[edge_pos];
        const double f = std::clamp((arc - edge_start) / net.edge(e).length_m, 0.0, 1.0);
        return lerp(net.from_pos(e), net.to_pos(e), f);
    };

    // Points closer than this to the end collapse onto the final sample.
    const double end_slack = total * 1e-9;
    for (std::size_t k = 0;; ++k) {
        const double arc = static_cast<double>(k) * spacing;
        if (arc >= total - end_slack) break;
        out.push_back({position_at(arc), t0 + arc / speed_mps});
    }
    out.push_back({net.to_pos(path.edges.back()), t0 + total / speed_mps});
    return out;
}

std::vector<TowerChoice> tower_distribution(const GeoPoint& pos, const TowerSet& towers,
                                            double noise_sigma_m) {
    if (towers.towers.empty()) throw InvalidInput("empty_towers", "tower set is empty");
    std::vector<std::pair<double, std::size_t>> by_distance;
    by_distance.reserve(towers.towers.size());
    for (std::size_t i = 0; i < towers.towers.size(); ++i) {
        by_distance.emplace_back(haversine(pos, towers.towers[i].pos), i);
    }
    const std::size_t keep = std::min(kTowerCandidates, by_distance.size());
    std::partial_sort(by_distance.begin(), by_distance.begin() + keep, by_distance.end());

    std::vector<TowerChoice> choices;
    if (noise_sigma_m <= 0.0) {
        choices.push_back({by_distance[0].second, 1.0});
        return choices;
    }
    const double d0 = by_distance[0].first;
    const double two_var = 2.0 * noise_sigma_m * noise_sigma_m;
    double total = 0.0;
    for (std::size_t i = 0; i < keep; ++i) {
        const double d = by_distance[i].first;
        const double weight = std::exp(-(d * d - d0 * d0) / two_var);
        choices.push_back({by_distance[i].second, weight});
        total += weight;
    }
    for (auto& c : choices) c.probability /= total;
    return choices;
}

std::size_t draw_tower(std::span<const TowerChoice> choices, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (const auto& c : choices) {
        acc += c.probability;
        if (u < acc) return c.tower;
    }
    return choices.back().tower;
}

CellularTrajectory observe_towers(std::span<const TimedPosition> positions,
                                  const TowerSet& towers, double noise_sigma_m,
                                  std::uint64_t seed, std::string traj_id) {
    if (towers.towers.empty()) throw InvalidInput("empty_towers", "tower set is empty");
    Rng rng(seed);
    CellularTrajectory traj;
    traj.traj_id = std::move(traj_id);
    for (const auto& p : positions) {
        const auto choices = tower_distribution(p.pos, towers, noise_sigma_m);
        const std::size_t pick = choices.size() == 1 ? choices[0].tower : draw_tower(choices, rng);
        const auto& tower = towers.towers[pick];
        if (!traj.samples.empty() && traj.samples.back().tower_id == tower.id) continue;
        traj.samples.push_back({tower.id, tower.pos, p.t});
    }
    validate(traj);
    return traj;
}

double trajectory_length(const CellularTrajectory& traj) {
    double total = 0.0;
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        total += haversine(traj.samples[i - 1].pos, traj.samples[i].pos);
    }
    return total;
}

RoadNetwork make_grid_network(int rows, int cols, double spacing_m, const GeoPoint& origin) {
    if (rows < 1 || cols < 1 || !(spacing_m > 0.0)) {
        throw InvalidInput("grid network needs positive dimensions and spacing");
    }
    std::vector<NodeRecord> nodes;
    auto node_id = [cols](int r, int c) { return std::to_string(r * cols + c); };
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            nodes.push_back({node_id(r, c), offset_meters(origin, c * spacing_m, r * spacing_m)});
        }
    }
    std::vector<EdgeRecord> edges;
    int next = 0;
    auto add = [&](int r1, int c1, int r2, int c2) {
        EdgeRecord e;
        e.id = std::to_string(next++);
        e.from = node_id(r1, c1);
        e.to = node_id(r2, c2);
        edges.push_back(std::move(e));
    };
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) {
                add(r, c, r, c + 1);
                add(r, c + 1, r, c);
            }
            if (r + 1 < rows) {
                add(r, c, r + 1, c);
                add(r + 1, c, r, c);
            }
        }
    }
    return RoadNetwork::build(std::move(nodes), std::move(edges));
}

TowerSet towers_at_nodes(const RoadNetwork& net) {
    TowerSet set;
    for (const auto& n : net.nodes()) set.towers.push_back({n.id, n.pos});
    return set;
}

TowerSet jittered_towers(const GeoWindow& window, double spacing_m, double jitter_fraction,
                         std::uint64_t seed) {
    if (!(spacing_m > 0.0)) throw InvalidInput("tower spacing must be positive");
    Rng rng(seed);
    const GeoPoint sw{window.min_lon, window.min_lat};
    const double width_m =
        haversine(sw, {window.max_lon, window.min_lat});
    const double height_m = haversine(sw, {window.min_lon, window.max_lat});
    const int nx = static_cast<int>(std::floor(width_m / spacing_m)) + 1;
    const int ny = static_cast<int>(std::floor(height_m / spacing_m)) + 1;
    TowerSet set;
    int next = 0;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double dx = (rng.uniform() * 2.0 - 1.0) * jitter_fraction * spacing_m;
            const double dy = (rng.uniform() * 2.0 - 1.0) * jitter_fraction * spacing_m;
            set.towers.push_back(
                {std::to_string(next++), offset_meters(sw, i * spacing_m + dx, j * spacing_m + dy)});
        }
    }
    return set;
}

}  // namespace pixmatch
