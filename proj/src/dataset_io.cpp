#include "pixmatch/dataset_io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "pixmatch/error.hpp"
#include "text_util.hpp"

namespace pixmatch {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("io_error", "cannot write " + path.string());
    return out;
}

/// Calls fn(line_number, object) for every non-blank line.
template <class Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("io_error", "cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(path.string(), line_no, e.what());
        }
        if (!obj.is_object()) throw ParseError(path.string(), line_no, "expected a JSON object");
        try {
            fn(line_no, obj);
        } catch (const ParseError&) {
            throw;
        } catch (const json::exception& e) {
            throw ParseError(path.string(), line_no, e.what());
        } catch (const Error& e) {
            throw ParseError(path.string(), line_no, e.kind() + ": " + e.what());
        }
    }
}

std::vector<EdgeIndex> resolve_edges(const json& ids, const RoadNetwork& net) {
    std::vector<EdgeIndex> edges;
    for (const auto& id : ids) {
        edges.push_back(net.edge_index(id.is_string() ? id.get<std::string>() : id.dump()));
    }
    return edges;
}

ordered_json edge_ids(std::span<const EdgeIndex> edges, const RoadNetwork& net) {
    ordered_json ids = ordered_json::array();
    for (EdgeIndex e : edges) ids.push_back(net.edge(e).id);
    return ids;
}

std::string id_string(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

}  // namespace

TowerSet load_towers(const std::filesystem::path& path) {
    const auto table = detail::read_csv(path);
    const auto c_id = table.column("tower_id");
    const auto c_lon = table.column("lon");
    const auto c_lat = table.column("lat");
    if (c_id == std::size_t(-1) || c_lon == std::size_t(-1) || c_lat == std::size_t(-1)) {
        throw ParseError(path.string(), 1, "header must contain tower_id,lon,lat");
    }
    TowerSet set;
    for (const auto& row : table.rows) {
        const auto lon = detail::parse_double(row.fields[c_lon]);
        const auto lat = detail::parse_double(row.fields[c_lat]);
        if (!lon || !lat) throw ParseError(path.string(), row.line, "bad coordinate");
        const GeoPoint p{*lon, *lat};
        if (!is_valid(p)) throw ParseError(path.string(), row.line, "coordinate out of range");
        set.towers.push_back({std::string(row.fields[c_id]), p});
    }
    validate(set);
    return set;
}

void write_towers(const TowerSet& towers, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "tower_id,lon,lat\n";
    for (const auto& t : towers.towers) {
        out << t.id << ',' << detail::format_double(t.pos.lon) << ','
            << detail::format_double(t.pos.lat) << '\n';
    }
}

std::vector<CellularTrajectory> load_trajectories(const std::filesystem::path& path) {
    std::vector<CellularTrajectory> trajs;
    for_each_json_line(path, [&](std::size_t, const json& obj) {
        CellularTrajectory traj;
        traj.traj_id = id_string(obj.at("traj_id"));
        for (const auto& s : obj.at("samples")) {
            traj.samples.push_back({id_string(s.at("tower_id")),
                                    {s.at("lon").get<double>(), s.at("lat").get<double>()},
                                    s.at("t").get<double>()});
            require_valid(traj.samples.back().pos);
        }
        validate(traj);
        trajs.push_back(std::move(traj));
    });
    return trajs;
}

void write_trajectories(std::span<const CellularTrajectory> trajs,
                        const std::filesystem::path& path) {
    auto out = open_out(path);
    for (const auto& traj : trajs) {
        ordered_json samples = ordered_json::array();
        for (const auto& s : traj.samples) {
            samples.push_back(
                {{"tower_id", s.tower_id}, {"lon", s.pos.lon}, {"lat", s.pos.lat}, {"t", s.t}});
        }
        out << ordered_json{{"traj_id", traj.traj_id}, {"samples", std::move(samples)}}.dump()
            << '\n';
    }
}

std::vector<GroundTruthPath> load_ground_truth(const std::filesystem::path& path,
                                               const RoadNetwork& net) {
    std::vector<GroundTruthPath> paths;
    for_each_json_line(path, [&](std::size_t, const json& obj) {
        GroundTruthPath gt{id_string(obj.at("traj_id")), resolve_edges(obj.at("edges"), net)};
        if (!is_connected(gt.edges, net)) {
            throw InvalidInput("disconnected_path", "ground truth path is not connected");
        }
        paths.push_back(std::move(gt));
    });
    return paths;
}

void write_ground_truth(std::span<const GroundTruthPath> paths, const RoadNetwork& net,
                        const std::filesystem::path& path) {
    auto out = open_out(path);
    for (const auto& gt : paths) {
        out << ordered_json{{"traj_id", gt.traj_id}, {"edges", edge_ids(gt.edges, net)}}.dump()
            << '\n';
    }
}

MatchRecord to_record(const MatchResult& result) {
    MatchRecord r;
    r.traj_id = result.traj_id;
    r.edges = result.edges;
    r.cost_m = result.cost_m;
    r.length_m = result.length_m;
    r.expanded_labels = result.expanded_labels;
    r.runtime_s = result.runtime_s;
    return r;
}

std::string match_line(const MatchRecord& r, const RoadNetwork& net) {
    auto nullable = [](const std::optional<double>& v) {
        return v ? ordered_json(*v) : ordered_json(nullptr);
    };
    return ordered_json{{"traj_id", r.traj_id},
                        {"edges", edge_ids(r.edges, net)},
                        {"cost_m", nullable(r.cost_m)},
                        {"length_m", nullable(r.length_m)},
                        {"expanded_labels", r.expanded_labels},
                        {"runtime_s", r.runtime_s},
                        {"status", r.status}}
        .dump();
}

std::vector<MatchRecord> load_matches(const std::filesystem::path& path, const RoadNetwork& net) {
    std::vector<MatchRecord> records;
    for_each_json_line(path, [&](std::size_t, const json& obj) {
        MatchRecord r;
        r.traj_id = id_string(obj.at("traj_id"));
        r.status = obj.value("status", std::string("ok"));
        r.edges = resolve_edges(obj.at("edges"), net);
        if (obj.contains("cost_m") && !obj["cost_m"].is_null()) r.cost_m = obj["cost_m"].get<double>();
        if (obj.contains("length_m") && !obj["length_m"].is_null()) {
            r.length_m = obj["length_m"].get<double>();
        }
        r.expanded_labels = obj.value("expanded_labels", std::size_t{0});
        r.runtime_s = obj.value("runtime_s", 0.0);
        records.push_back(std::move(r));
    });
    return records;
}

void write_matches(std::span<const MatchRecord> records, const RoadNetwork& net,
                   const std::filesystem::path& path) {
    auto out = open_out(path);
    for (const auto& r : records) out << match_line(r, net) << '\n';
}

}  // namespace pixmatch
