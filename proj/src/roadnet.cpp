#include "pixmatch/roadnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "pixmatch/error.hpp"
#include "text_util.hpp"

namespace pixmatch {

namespace {

constexpr double kLengthTolerance = 0.005;

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string_view strip_leading_zeros(std::string_view s) {
    while (s.size() > 1 && s.front() == '0') s.remove_prefix(1);
    return s;
}

std::string where(const std::string& source, std::size_t line) {
    return line == 0 ? source : source + ":" + std::to_string(line);
}

bool parse_flag(std::string_view v) {
    v = detail::trim(v);
    return v == "1" || v == "true" || v == "TRUE" || v == "yes";
}

}  // namespace

bool id_less(std::string_view a, std::string_view b) {
    const bool na = all_digits(a);
    const bool nb = all_digits(b);
    if (na != nb) return na;
    if (na) {
        const auto sa = strip_leading_zeros(a);
        const auto sb = strip_leading_zeros(b);
        if (sa.size() != sb.size()) return sa.size() < sb.size();
        if (sa != sb) return sa < sb;
    }
    return a < b;
}

RoadNetwork::RoadNetwork(std::vector<RoadNode> nodes, std::vector<RoadEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    index();
}

void RoadNetwork::index() {
    edge_by_id_.clear();
    node_by_id_.clear();
    for (NodeIndex i = 0; i < nodes_.size(); ++i) node_by_id_.emplace(nodes_[i].id, i);
    for (EdgeIndex i = 0; i < edges_.size(); ++i) edge_by_id_.emplace(edges_[i].id, i);

    out_offsets_.assign(nodes_.size() + 1, 0);
    for (const auto& e : edges_) ++out_offsets_[e.from + 1];
    std::partial_sum(out_offsets_.begin(), out_offsets_.end(), out_offsets_.begin());
    out_edges_.assign(edges_.size(), 0);
    std::vector<std::uint32_t> cursor(out_offsets_.begin(), out_offsets_.end() - 1);
    // Edges are already in ascending id order, so each bucket fills sorted.
    for (EdgeIndex i = 0; i < edges_.size(); ++i) out_edges_[cursor[edges_[i].from]++] = i;
}

RoadNetwork RoadNetwork::build(std::vector<NodeRecord> node_records,
                               std::vector<EdgeRecord> edge_records, const std::string& source,
                               const std::string& node_source) {
    std::sort(node_records.begin(), node_records.end(),
              [](const NodeRecord& a, const NodeRecord& b) { return id_less(a.id, b.id); });
    std::vector<RoadNode> nodes;
    nodes.reserve(node_records.size());
    std::unordered_map<std::string, NodeIndex> node_index;
    for (auto& rec : node_records) {
        if (rec.id.empty()) throw ParseError(node_source, rec.line, "empty node_id");
        if (!is_valid(rec.pos)) {
            throw ParseError(node_source, rec.line, "node \"" + rec.id + "\" has invalid coordinates");
        }
        if (!node_index.emplace(rec.id, static_cast<NodeIndex>(nodes.size())).second) {
            throw ParseError(node_source, rec.line, "duplicate node_id \"" + rec.id + "\"");
        }
        nodes.push_back({std::move(rec.id), rec.pos});
    }

    std::sort(edge_records.begin(), edge_records.end(),
              [](const EdgeRecord& a, const EdgeRecord& b) { return id_less(a.id, b.id); });
    std::vector<RoadEdge> edges;
    edges.reserve(edge_records.size());
    for (std::size_t i = 0; i < edge_records.size(); ++i) {
        auto& rec = edge_records[i];
        if (rec.id.empty()) throw ParseError(source, rec.line, "empty edge_id");
        if (!edges.empty() && edges.back().id == rec.id) {
            throw ParseError(source, rec.line, "duplicate edge_id \"" + rec.id + "\"");
        }
        const auto from = node_index.find(rec.from);
        if (from == node_index.end()) {
            throw DanglingReference(rec.from, "edge " + rec.id + " at " + where(source, rec.line));
        }
        const auto to = node_index.find(rec.to);
        if (to == node_index.end()) {
            throw DanglingReference(rec.to, "edge " + rec.id + " at " + where(source, rec.line));
        }
        if (from->second == to->second && !rec.loop) {
            throw InvalidInput("self_loop", where(source, rec.line) + ": edge \"" + rec.id +
                                                "\" starts and ends at the same node without loop flag");
        }
        const double geodesic = haversine(nodes[from->second].pos, nodes[to->second].pos);
        double length = rec.length_m.value_or(geodesic);
        if (!std::isfinite(length) || length <= 0.0) {
            throw InvalidInput("non_positive_length", where(source, rec.line) + ": edge \"" +
                                                          rec.id + "\" has non-positive length");
        }
        if (rec.length_m && !rec.geometry_override && !rec.loop &&
            std::abs(length - geodesic) > kLengthTolerance * geodesic) {
            throw InvalidInput("length_mismatch",
                               where(source, rec.line) + ": edge \"" + rec.id + "\" length " +
                                   detail::format_double(length) + " m differs from haversine " +
                                   detail::format_double(geodesic) + " m by more than 0.5%");
        }
        edges.push_back({std::move(rec.id), from->second, to->second, length,
                         rec.geometry_override, rec.loop});
    }
    return RoadNetwork(std::move(nodes), std::move(edges));
}

std::span<const EdgeIndex> RoadNetwork::outgoing(NodeIndex n) const {
    return {out_edges_.data() + out_offsets_[n], out_offsets_[n + 1] - out_offsets_[n]};
}

std::span<const EdgeIndex> RoadNetwork::successors(EdgeIndex e) const {
    return outgoing(edges_.at(e).to);
}

std::vector<std::string> RoadNetwork::successors(std::string_view edge_id) const {
    std::vector<std::string> out;
    for (EdgeIndex s : successors(edge_index(edge_id))) out.push_back(edges_[s].id);
    return out;
}

std::optional<EdgeIndex> RoadNetwork::find_edge(std::string_view id) const {
    const auto it = edge_by_id_.find(std::string(id));
    if (it == edge_by_id_.end()) return std::nullopt;
    return it->second;
}

std::optional<NodeIndex> RoadNetwork::find_node(std::string_view id) const {
    const auto it = node_by_id_.find(std::string(id));
    if (it == node_by_id_.end()) return std::nullopt;
    return it->second;
}

EdgeIndex RoadNetwork::edge_index(std::string_view id) const {
    if (auto e = find_edge(id)) return *e;
    throw InvalidInput("unknown_edge", "unknown edge_id \"" + std::string(id) + "\"");
}

RoadNetwork load_network(const std::filesystem::path& nodes_path,
                         const std::filesystem::path& edges_path) {
    const auto node_table = detail::read_csv(nodes_path);
    const auto c_id = node_table.column("node_id");
    const auto c_lon = node_table.column("lon");
    const auto c_lat = node_table.column("lat");
    if (c_id == std::size_t(-1) || c_lon == std::size_t(-1) || c_lat == std::size_t(-1)) {
        throw ParseError(nodes_path.string(), 1, "header must contain node_id,lon,lat");
    }
    std::vector<NodeRecord> nodes;
    nodes.reserve(node_table.rows.size());
    for (const auto& row : node_table.rows) {
        const auto lon = detail::parse_double(row.fields[c_lon]);
        const auto lat = detail::parse_double(row.fields[c_lat]);
        if (!lon || !lat) throw ParseError(nodes_path.string(), row.line, "malformed coordinate");
        nodes.push_back({row.fields[c_id], {*lon, *lat}, row.line});
    }

    const auto edge_table = detail::read_csv(edges_path);
    const auto e_id = edge_table.column("edge_id");
    const auto e_from = edge_table.column("from_node");
    const auto e_to = edge_table.column("to_node");
    const auto e_len = edge_table.column("length_m");
    const auto e_geom = edge_table.column("geometry");
    const auto e_loop = edge_table.column("loop");
    if (e_id == std::size_t(-1) || e_from == std::size_t(-1) || e_to == std::size_t(-1) ||
        e_len == std::size_t(-1)) {
        throw ParseError(edges_path.string(), 1,
                         "header must contain edge_id,from_node,to_node,length_m");
    }
    std::vector<EdgeRecord> edges;
    edges.reserve(edge_table.rows.size());
    for (const auto& row : edge_table.rows) {
        EdgeRecord rec;
        rec.id = row.fields[e_id];
        rec.from = row.fields[e_from];
        rec.to = row.fields[e_to];
        rec.line = row.line;
        if (!row.fields[e_len].empty()) {
            rec.length_m = detail::parse_double(row.fields[e_len]);
            if (!rec.length_m) throw ParseError(edges_path.string(), row.line, "malformed length_m");
        }
        if (e_geom != std::size_t(-1)) rec.geometry_override = !row.fields[e_geom].empty();
        if (e_loop != std::size_t(-1)) rec.loop = parse_flag(row.fields[e_loop]);
        if (rec.from.empty() || rec.to.empty()) {
            throw ParseError(edges_path.string(), row.line, "missing endpoint");
        }
        edges.push_back(std::move(rec));
    }
    return RoadNetwork::build(std::move(nodes), std::move(edges), edges_path.string(),
                              nodes_path.string());
}

void write_network(const RoadNetwork& net, const std::filesystem::path& nodes_path,
                   const std::filesystem::path& edges_path) {
    std::ofstream nodes_out(nodes_path);
    if (!nodes_out) throw InvalidInput("io_error", "cannot write " + nodes_path.string());
    nodes_out << "node_id,lon,lat\n";
    for (const auto& n : net.nodes()) {
        nodes_out << n.id << ',' << detail::format_double(n.pos.lon) << ','
                  << detail::format_double(n.pos.lat) << '\n';
    }
    std::ofstream edges_out(edges_path);
    if (!edges_out) throw InvalidInput("io_error", "cannot write " + edges_path.string());
    bool any_flags = false;
    for (const auto& e : net.edges()) any_flags = any_flags || e.geometry_override || e.loop;
    edges_out << "edge_id,from_node,to_node,length_m" << (any_flags ? ",geometry,loop" : "") << '\n';
    for (const auto& e : net.edges()) {
        edges_out << e.id << ',' << net.node(e.from).id << ',' << net.node(e.to).id << ','
                  << detail::format_double(e.length_m);
        if (any_flags) {
            edges_out << ',' << (e.geometry_override ? "given" : "") << ',' << (e.loop ? "1" : "");
        }
        edges_out << '\n';
    }
}

RoadNetwork clip_window(const RoadNetwork& net, const GeoWindow& window) {
    std::vector<char> keep_node(net.node_count(), 0);
    std::vector<char> keep_edge(net.edge_count(), 0);
    for (NodeIndex n = 0; n < net.node_count(); ++n) keep_node[n] = window.contains(net.node(n).pos);
    for (EdgeIndex e = 0; e < net.edge_count(); ++e) {
        const auto& edge = net.edge(e);
        keep_edge[e] = keep_node[edge.from] || keep_node[edge.to];
    }
    for (EdgeIndex e = 0; e < net.edge_count(); ++e) {
        if (keep_edge[e]) keep_node[net.edge(e).from] = keep_node[net.edge(e).to] = 1;
    }

    std::vector<NodeIndex> remap(net.node_count(), std::numeric_limits<NodeIndex>::max());
    std::vector<RoadNode> nodes;
    for (NodeIndex n = 0; n < net.node_count(); ++n) {
        if (!keep_node[n]) continue;
        remap[n] = static_cast<NodeIndex>(nodes.size());
        nodes.push_back(net.node(n));
    }
    std::vector<RoadEdge> edges;
    for (EdgeIndex e = 0; e < net.edge_count(); ++e) {
        if (!keep_edge[e]) continue;
        RoadEdge edge = net.edge(e);
        edge.from = remap[edge.from];
        edge.to = remap[edge.to];
        edges.push_back(std::move(edge));
    }
    return RoadNetwork(std::move(nodes), std::move(edges));
}

GeoWindow bounding_box(const RoadNetwork& net) {
    if (net.node_count() == 0) return {};
    GeoWindow w{180.0, 90.0, -180.0, -90.0};
    for (const auto& n : net.nodes()) {
        w.min_lon = std::min(w.min_lon, n.pos.lon);
        w.min_lat = std::min(w.min_lat, n.pos.lat);
        w.max_lon = std::max(w.max_lon, n.pos.lon);
        w.max_lat = std::max(w.max_lat, n.pos.lat);
    }
    return w;
}

}  // namespace pixmatch
