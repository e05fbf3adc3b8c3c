#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pixmatch/geo.hpp"

namespace pixmatch {

using NodeIndex = std::uint32_t;
/// Dense edge handle. Indices follow ascending edge_id order (see id_less),
/// so comparing indices is comparing ids.
using EdgeIndex = std::uint32_t;

struct RoadNode {
    std::string id;
    GeoPoint pos;

    friend bool operator==(const RoadNode&, const RoadNode&) = default;
};

struct RoadEdge {
    std::string id;
    NodeIndex from = 0;
    NodeIndex to = 0;
    double length_m = 0.0;
    bool geometry_override = false;
    bool loop = false;

    friend bool operator==(const RoadEdge&, const RoadEdge&) = default;
};

/// Unvalidated node row, as read from nodes.csv or built in code.
struct NodeRecord {
    std::string id;
    GeoPoint pos;
    std::size_t line = 0;
};

/// Unvalidated edge row. A missing length is derived by haversine; a given
/// length must agree with haversine within 0.5% unless `geometry_override`.
struct EdgeRecord {
    std::string id;
    std::string from;
    std::string to;
    std::optional<double> length_m;
    bool geometry_override = false;
    bool loop = false;
    std::size_t line = 0;
};

/// Total order on identifiers: all-digit ids compare numerically and sort
/// before any other id; the rest compare bytewise.
bool id_less(std::string_view a, std::string_view b);

class RoadNetwork {
public:
    RoadNetwork() = default;

    /// Validates every invariant and builds the adjacency. Throws
    /// DanglingReference, InvalidInput, or ParseError (for records carrying
    /// a line number).
    static RoadNetwork build(std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges,
                             const std::string& source = "<memory>",
                             const std::string& node_source = "<memory>");

    std::span<const RoadNode> nodes() const { return nodes_; }
    std::span<const RoadEdge> edges() const { return edges_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    const RoadNode& node(NodeIndex n) const { return nodes_.at(n); }
    const RoadEdge& edge(EdgeIndex e) const { return edges_.at(e); }
    const GeoPoint& from_pos(EdgeIndex e) const { return nodes_[edges_[e].from].pos; }
    const GeoPoint& to_pos(EdgeIndex e) const { return nodes_[edges_[e].to].pos; }

    /// Edges leaving `n`, ascending id.
    std::span<const EdgeIndex> outgoing(NodeIndex n) const;

    /// Edges e' with from_node(e') == to_node(e), ascending id.
    std::span<const EdgeIndex> successors(EdgeIndex e) const;

    /// Id-level successors; throws InvalidInput("unknown_edge") for an unknown id.
    std::vector<std::string> successors(std::string_view edge_id) const;

    std::optional<EdgeIndex> find_edge(std::string_view id) const;
    std::optional<NodeIndex> find_node(std::string_view id) const;

    /// Like find_edge but throws InvalidInput("unknown_edge").
    EdgeIndex edge_index(std::string_view id) const;

    friend bool operator==(const RoadNetwork& a, const RoadNetwork& b) {
        return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
    }

private:
    RoadNetwork(std::vector<RoadNode> nodes, std::vector<RoadEdge> edges);
    void index();

    std::vector<RoadNode> nodes_;
    std::vector<RoadEdge> edges_;
    std::vector<std::uint32_t> out_offsets_;  // CSR over nodes
    std::vector<EdgeIndex> out_edges_;
    std::unordered_map<std::string, EdgeIndex> edge_by_id_;
    std::unordered_map<std::string, NodeIndex> node_by_id_;

    friend RoadNetwork clip_window(const RoadNetwork&, const GeoWindow&);
};

/// Reads nodes.csv (`node_id,lon,lat`) and edges.csv
/// (`edge_id,from_node,to_node,length_m[,geometry][,loop]`).
RoadNetwork load_network(const std::filesystem::path& nodes_path,
                         const std::filesystem::path& edges_path);

void write_network(const RoadNetwork& net, const std::filesystem::path& nodes_path,
                   const std::filesystem::path& edges_path);

/// Subnetwork of edges with at least one endpoint inside `window`.
RoadNetwork clip_window(const RoadNetwork& net, const GeoWindow& window);

GeoWindow bounding_box(const RoadNetwork& net);

}  // namespace pixmatch
