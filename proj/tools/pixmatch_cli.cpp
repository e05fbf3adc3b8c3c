#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pixmatch/calibrate.hpp"
#include "pixmatch/dataset_io.hpp"
#include "pixmatch/error.hpp"
#include "pixmatch/evalkit.hpp"
#include "pixmatch/mixmath.hpp"
#include "pixmatch/parallel.hpp"
#include "pixmatch/pipeline.hpp"
#include "pixmatch/raster.hpp"
#include "pixmatch/render.hpp"
#include "pixmatch/rng.hpp"
#include "pixmatch/roadnet.hpp"
#include "pixmatch/trajgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using namespace pixmatch;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitItemFailures = 1;
constexpr int kExitFatal = 2;
constexpr int kMaxRelax = 4;

struct RunConfig {
    std::string nodes, edges, towers, trajs, ground_truth, matches, mask_dir, mask, input, out;
    std::string traj_id;
    int width = kDefaultWidth;
    double buffer_m = kDefaultBufferM;
    int radius_px = 0;  // 0: error-scaled default
    double noise_sigma = 0.0;
    double cost_fraction = kDefaultCostFraction;
    int relax = 0;
    std::uint64_t seed = 42;
    unsigned jobs = 1;
    // synth
    int grid_rows = 12;
    int grid_cols = 12;
    double spacing_m = 200.0;
    int count = 50;
    double speed = 10.0;
    double interval = 12.0;
    double min_length = 1500.0;
    double tower_spacing = 0.0;  // 0: one tower per node
    double tower_jitter = 0.3;
    double origin_lon = 120.0;
    double origin_lat = 30.0;
};

/// One flag bound to a RunConfig field, so the same table drives parsing,
/// `--config` loading, and run_config.json output.
struct Binding {
    std::string key;
    CLI::Option* option = nullptr;
    std::function<void(const json&)> load;
    std::function<ordered_json()> dump;
};

class Command {
public:
    Command(CLI::App& parent, const std::string& name, const std::string& description)
        : app_(parent.add_subcommand(name, description)), name_(name) {
        app_->add_option("--config", config_path_, "run_config.json whose values fill unset flags");
    }

    template <class T>
    Command& bind(const std::string& flag, T& field, const std::string& description) {
        std::string key = flag.substr(2);
        for (char& c : key) {
            if (c == '-') c = '_';
        }
        auto* opt = app_->add_option(flag, field, description);
        if constexpr (!std::is_same_v<T, std::string>) opt->capture_default_str();
        bindings_.push_back({key, opt, [&field](const json& v) { field = v.get<T>(); },
                             [&field] { return ordered_json(field); }});
        return *this;
    }

    CLI::App* app() const { return app_; }
    const std::string& name() const { return name_; }

    /// Fills flags that were not given on the command line from --config.
    void finish() {
        if (!config_path_.empty()) {
            std::ifstream in(config_path_);
            if (!in) throw InvalidInput("config_error", "cannot open config " + config_path_);
            json cfg;
            try {
                cfg = json::parse(in);
            } catch (const json::exception& e) {
                throw InvalidInput("config_error", config_path_ + ": " + e.what());
            }
            for (auto& b : bindings_) {
                if (b.option->count() == 0 && cfg.contains(b.key) && !cfg[b.key].is_null()) {
                    try {
                        b.load(cfg[b.key]);
                    } catch (const json::exception& e) {
                        throw InvalidInput("config_error", "config key " + b.key + ": " + e.what());
                    }
                }
            }
        }
    }

    ordered_json config_json() const {
        ordered_json j;
        j["command"] = name_;
        for (const auto& b : bindings_) j[b.key] = b.dump();
        return j;
    }

private:
    CLI::App* app_;
    std::string name_;
    std::string config_path_;
    std::vector<Binding> bindings_;
};

void emit_error(const std::string& kind, const std::string& message,
                const std::string& traj_id = {}) {
    ordered_json j{{"error", kind}, {"message", message}};
    if (!traj_id.empty()) j["traj_id"] = traj_id;
    std::cerr << j.dump() << '\n';
}

void prepare_out_dir(const RunConfig& cfg, const Command& cmd) {
    if (cfg.out.empty()) throw InvalidInput("config_error", "--out is required");
    std::error_code ec;
    fs::create_directories(cfg.out, ec);
    if (ec) throw InvalidInput("io_error", "cannot create " + cfg.out + ": " + ec.message());
    std::ofstream out(fs::path(cfg.out) / "run_config.json", std::ios::binary);
    if (!out) throw InvalidInput("io_error", "cannot write run_config.json in " + cfg.out);
    out << cmd.config_json().dump(2) << '\n';
}

void check_common(const RunConfig& cfg) {
    if (cfg.width < kMinWidth) {
        throw InvalidInput("config_error", "--width must be at least " + std::to_string(kMinWidth));
    }
    if (!(cfg.buffer_m >= 0.0)) throw InvalidInput("config_error", "--buffer-m must be >= 0");
    if (cfg.radius_px < 0) throw InvalidInput("config_error", "--radius-px must be >= 1");
    if (!(cfg.noise_sigma >= 0.0)) throw InvalidInput("config_error", "--noise-sigma must be >= 0");
    if (!(cfg.cost_fraction >= 0.0)) {
        throw InvalidInput("config_error", "--cost-fraction must be >= 0");
    }
    if (cfg.relax < 0 || cfg.relax > kMaxRelax) {
        throw InvalidInput("config_error", "--relax must be in [0, 4]");
    }
    if (cfg.jobs == 0) throw InvalidInput("config_error", "--jobs must be >= 1");
}

PipelineConfig pipeline_config(const RunConfig& cfg) {
    PipelineConfig pc;
    pc.width = cfg.width;
    pc.buffer_m = cfg.buffer_m;
    if (cfg.radius_px > 0) pc.radius_px = cfg.radius_px;
    pc.noise_sigma_m = cfg.noise_sigma;
    pc.cost_fraction = cfg.cost_fraction;
    pc.relax = cfg.relax;
    return pc;
}

MaskProvider mask_provider(const RunConfig& cfg) {
    return cfg.mask_dir.empty() ? MaskProvider{} : mask_dir_provider(cfg.mask_dir);
}

RoadNetwork load_net(const RunConfig& cfg) {
    if (cfg.nodes.empty() || cfg.edges.empty()) {
        throw InvalidInput("config_error", "--nodes and --edges are required");
    }
    return load_network(cfg.nodes, cfg.edges);
}

std::vector<CellularTrajectory> load_trajs(const RunConfig& cfg) {
    if (cfg.trajs.empty()) throw InvalidInput("config_error", "--trajs is required");
    return load_trajectories(cfg.trajs);
}

/// Per-trajectory failure slot filled by worker threads and reported in
/// input order.
struct ItemError {
    std::string kind;
    std::string message;
};

int report_item_errors(const std::vector<CellularTrajectory>& trajs,
                       const std::vector<std::optional<ItemError>>& errors) {
    int failures = 0;
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        if (!errors[i]) continue;
        emit_error(errors[i]->kind, errors[i]->message, trajs[i].traj_id);
        ++failures;
    }
    return failures == 0 ? kExitOk : kExitItemFailures;
}

// --- synth ------------------------------------------------------------------

int run_synth(const RunConfig& cfg, const Command& cmd) {
    if (cfg.grid_rows < 2 || cfg.grid_cols < 2) {
        throw InvalidInput("config_error", "--grid-rows and --grid-cols must be >= 2");
    }
    if (!(cfg.spacing_m > 0.0) || !(cfg.speed > 0.0) || !(cfg.interval > 0.0)) {
        throw InvalidInput("config_error", "--spacing-m, --speed and --interval must be > 0");
    }
    if (cfg.count < 0) throw InvalidInput("config_error", "--count must be >= 0");
    prepare_out_dir(cfg, cmd);
    const fs::path out(cfg.out);

    if (cfg.nodes.empty() != cfg.edges.empty()) {
        throw InvalidInput("config_error", "--nodes and --edges must be given together");
    }
    const auto net = cfg.nodes.empty()
                         ? make_grid_network(cfg.grid_rows, cfg.grid_cols, cfg.spacing_m,
                                             {cfg.origin_lon, cfg.origin_lat})
                         : load_net(cfg);
    TowerSet towers;
    if (!cfg.towers.empty()) {
        towers = load_towers(cfg.towers);
    } else if (cfg.tower_spacing > 0.0) {
        towers = jittered_towers(bounding_box(net), cfg.tower_spacing, cfg.tower_jitter,
                                 derive_seed(cfg.seed, 0xC0FFEE));
    } else {
        towers = towers_at_nodes(net);
    }

    std::vector<CellularTrajectory> trajs;
    std::vector<GroundTruthPath> truths;
    int failures = 0;
    for (int i = 0; i < cfg.count; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "t%04d", i);
        const auto base = static_cast<std::uint64_t>(i);
        try {
            auto gt = generate_path(net, derive_seed(cfg.seed, 2 * base), cfg.min_length);
            gt.traj_id = id;
            const auto positions = sample_positions(gt, net, cfg.speed, cfg.interval);
            auto traj = observe_towers(positions, towers, cfg.noise_sigma,
                                       derive_seed(cfg.seed, 2 * base + 1), id);
            trajs.push_back(std::move(traj));
            truths.push_back(std::move(gt));
        } catch (const Error& e) {
            emit_error(e.kind(), e.what(), id);
            ++failures;
        }
    }
    write_network(net, out / "nodes.csv", out / "edges.csv");
    write_towers(towers, out / "towers.csv");
    write_trajectories(trajs, out / "trajectories.jsonl");
    write_ground_truth(truths, net, out / "ground_truth.jsonl");
    std::cout << "wrote " << trajs.size() << " trajectories, " << net.edge_count() << " edges, "
              << towers.towers.size() << " towers to " << cfg.out << '\n';
    return failures == 0 ? kExitOk : kExitItemFailures;
}

// --- rasterize --------------------------------------------------------------

int run_rasterize(const RunConfig& cfg, const Command& cmd) {
    check_common(cfg);
    const auto net = load_net(cfg);
    const auto trajs = load_trajs(cfg);
    std::unordered_map<std::string, GroundTruthPath> truth;
    if (!cfg.ground_truth.empty()) {
        for (auto& gt : load_ground_truth(cfg.ground_truth, net)) truth[gt.traj_id] = std::move(gt);
    }
    prepare_out_dir(cfg, cmd);
    const fs::path out(cfg.out);

    std::vector<std::optional<ItemError>> errors(trajs.size());
    parallel_for(trajs.size(), cfg.jobs, [&](std::size_t i) {
        const auto& traj = trajs[i];
        try {
            const auto g = make_georef(traj, cfg.buffer_m, cfg.width);
            auto t = rasterize_trajectory(traj, g);
            auto roads = rasterize_roads(net, g);
            roads.grid.traj_id = traj.traj_id;
            roads.grid.n_points = t.grid.n_points;
            write_grid(t.grid, out / grid_filename(traj.traj_id, Channel::trajectory));
            write_grid(roads.grid, out / grid_filename(traj.traj_id, Channel::road));
            if (const auto it = truth.find(traj.traj_id); it != truth.end()) {
                auto path = rasterize_path(it->second, net, g);
                path.traj_id = traj.traj_id;
                path.n_points = t.grid.n_points;
                write_grid(path, out / grid_filename(traj.traj_id, Channel::gt_path));
            }
        } catch (const Error& e) {
            errors[i] = ItemError{e.kind(), e.what()};
        }
    });
    return report_item_errors(trajs, errors);
}

// --- calibrate --------------------------------------------------------------

int run_calibrate(const RunConfig& cfg, const Command& cmd) {
    check_common(cfg);
    const auto net = load_net(cfg);
    const auto trajs = load_trajs(cfg);
    prepare_out_dir(cfg, cmd);
    const fs::path out(cfg.out);
    const auto provider = mask_provider(cfg);

    std::vector<std::optional<ItemError>> errors(trajs.size());
    std::vector<std::string> lines(trajs.size());
    parallel_for(trajs.size(), cfg.jobs, [&](std::size_t i) {
        const auto& traj = trajs[i];
        try {
            const auto g = make_georef(traj, cfg.buffer_m, cfg.width);
            const auto t = rasterize_trajectory(traj, g);
            auto roads = rasterize_roads(net, g);
            roads.grid.traj_id = traj.traj_id;
            roads.grid.n_points = t.grid.n_points;
            CalibrationMask mask;
            int radius = 0;
            if (provider) {
                mask = provider(t.grid, roads.grid);
            } else {
                radius = cfg.radius_px > 0 ? cfg.radius_px : default_radius(cfg.noise_sigma, g);
                mask = calibrate_deterministic(t.grid, roads.grid, radius);
            }
            mask.grid.traj_id = traj.traj_id;
            mask.grid.n_points = t.grid.n_points;
            write_grid(mask.grid, out / grid_filename(traj.traj_id, Channel::mask));
            ordered_json line{
                {"traj_id", traj.traj_id},
                {"source", mask.source == MaskSource::external ? "external" : "deterministic"},
                {"cells", mask.grid.count_nonzero()},
                {"dropped", mask.dropped}};
            if (radius > 0) line["radius_px"] = radius;
            lines[i] = line.dump();
        } catch (const Error& e) {
            errors[i] = ItemError{e.kind(), e.what()};
        }
    });
    std::ofstream log(out / "calibration.jsonl", std::ios::binary);
    for (const auto& line : lines) {
        if (!line.empty()) log << line << '\n';
    }
    return report_item_errors(trajs, errors);
}

// --- match ------------------------------------------------------------------

int run_match(const RunConfig& cfg, const Command& cmd) {
    check_common(cfg);
    const auto net = load_net(cfg);
    const auto trajs = load_trajs(cfg);
    prepare_out_dir(cfg, cmd);
    const auto pc = pipeline_config(cfg);
    const auto provider = mask_provider(cfg);

    std::vector<MatchRecord> records(trajs.size());
    std::vector<std::optional<ItemError>> errors(trajs.size());
    parallel_for(trajs.size(), cfg.jobs, [&](std::size_t i) {
        const auto& traj = trajs[i];
        try {
            records[i] = to_record(run_pipeline(traj, net, pc, provider).result);
        } catch (const Error& e) {
            records[i] = MatchRecord{};
            records[i].traj_id = traj.traj_id;
            records[i].status = e.kind();
            errors[i] = ItemError{e.kind(), e.what()};
        }
    });
    write_matches(records, net, fs::path(cfg.out) / "matches.jsonl");
    return report_item_errors(trajs, errors);
}

// --- eval -------------------------------------------------------------------

int run_eval(const RunConfig& cfg, const Command& cmd) {
    check_common(cfg);
    if (cfg.ground_truth.empty()) throw InvalidInput("config_error", "--ground-truth is required");
    const auto net = load_net(cfg);
    std::unordered_map<std::string, GroundTruthPath> truth;
    for (auto& gt : load_ground_truth(cfg.ground_truth, net)) truth[gt.traj_id] = std::move(gt);

    EvalReport report;
    if (!cfg.matches.empty()) {
        const auto matches = load_matches(cfg.matches, net);
        prepare_out_dir(cfg, cmd);
        report = score_matches(net, matches, truth);
    } else {
        const auto trajs = load_trajs(cfg);
        prepare_out_dir(cfg, cmd);
        report = benchmark(net, trajs, truth, pipeline_config(cfg), mask_provider(cfg), cfg.jobs);
    }
    const fs::path out(cfg.out);
    std::ofstream(out / "report.csv", std::ios::binary) << summarize_csv(report);
    std::ofstream(out / "report.json", std::ios::binary) << report_json(report);
    std::cout << summarize_text(report);
    for (const auto& row : report.rows) {
        if (row.status != "ok") emit_error(row.status, "trajectory failed", row.traj_id);
    }
    return report.failures.empty() ? kExitOk : kExitItemFailures;
}

// --- render -----------------------------------------------------------------

int run_render(const RunConfig& cfg, const Command& cmd) {
    check_common(cfg);
    const auto net = load_net(cfg);
    const auto trajs = load_trajs(cfg);
    if (trajs.empty()) throw InvalidInput("config_error", "no trajectories in " + cfg.trajs);
    const CellularTrajectory* traj = &trajs.front();
    if (!cfg.traj_id.empty()) {
        const auto it = std::find_if(trajs.begin(), trajs.end(),
                                     [&](const auto& t) { return t.traj_id == cfg.traj_id; });
        if (it == trajs.end()) {
            throw InvalidInput("config_error", "unknown trajectory " + cfg.traj_id);
        }
        traj = &*it;
    }
    std::optional<GroundTruthPath> matched;
    if (!cfg.matches.empty()) {
        for (auto& m : load_matches(cfg.matches, net)) {
            if (m.traj_id == traj->traj_id) matched = GroundTruthPath{m.traj_id, m.edges};
        }
    }
    prepare_out_dir(cfg, cmd);

    const auto g = make_georef(*traj, cfg.buffer_m, cfg.width);
    const auto t = rasterize_trajectory(*traj, g);
    const auto roads = rasterize_roads(net, g);
    std::optional<PixelGrid> mask;
    int status = kExitOk;
    if (!cfg.mask.empty()) {
        mask = read_grid(cfg.mask);
    } else {
        try {
            if (!cfg.mask_dir.empty()) {
                auto road_grid = roads.grid;
                road_grid.traj_id = traj->traj_id;
                mask = mask_dir_provider(cfg.mask_dir)(t.grid, road_grid).grid;
            } else {
                const int radius =
                    cfg.radius_px > 0 ? cfg.radius_px : default_radius(cfg.noise_sigma, g);
                mask = calibrate_deterministic(t.grid, roads.grid, radius).grid;
            }
        } catch (const Error& e) {
            emit_error(e.kind(), e.what(), traj->traj_id);
            status = kExitItemFailures;
        }
    }
    if (mask && !georef_matches(mask->georef(), g)) {
        throw InvalidInput("georef_mismatch", "mask georef differs from the trajectory window");
    }
    std::optional<PixelGrid> path;
    if (matched) path = rasterize_path(*matched, net, g);

    RenderLayers layers;
    layers.roads = &roads.grid;
    layers.mask = mask ? &*mask : nullptr;
    layers.path = path ? &*path : nullptr;
    layers.trajectory = &t.grid;
    auto stem = grid_filename(traj->traj_id, Channel::trajectory);
    stem.resize(stem.size() - std::string_view(".trajectory.pgm").size());
    const auto file = fs::path(cfg.out) / (stem + ".ppm");
    write_ppm(render_overlay(layers), file);
    std::cout << "wrote " << file.string() << '\n';
    return status;
}

// --- verify-mixmath ---------------------------------------------------------

double max_abs_error(const std::vector<double>& got, const std::vector<double>& want) {
    if (got.size() != want.size()) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        worst = std::max(worst, std::abs(got[i] - want[i]) / std::max(1.0, std::abs(want[i])));
    }
    return worst;
}

int run_verify_mixmath(const RunConfig& cfg, double tolerance) {
    if (cfg.input.empty()) throw InvalidInput("config_error", "--input is required");
    std::ifstream in(cfg.input);
    if (!in) throw InvalidInput("io_error", "cannot open " + cfg.input);
    std::string line;
    std::size_t line_no = 0, checked = 0, failed = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ordered_json result{{"line", line_no}};
        try {
            const auto j = json::parse(line);
            const auto kind = j.at("kind").get<std::string>();
            result["kind"] = kind;
            double err = 0.0;
            if (kind == "kl_diag_gaussian") {
                const auto mu = j.at("mu").get<std::vector<double>>();
                const auto sigma = j.at("sigma").get<std::vector<double>>();
                err = max_abs_error({mixmath::kl_diag_gaussian(mu, sigma)},
                                    {j.at("value").get<double>()});
            } else if (kind == "categorical_kl") {
                const auto w = j.at("w").get<std::vector<double>>();
                const auto prior = j.at("prior").get<std::vector<double>>();
                err = max_abs_error({mixmath::categorical_kl(w, prior)},
                                    {j.at("value").get<double>()});
            } else if (kind == "reparameterize") {
                mixmath::MixtureParams params;
                params.mu = j.at("mu").get<std::vector<std::vector<double>>>();
                params.sigma = j.at("sigma").get<std::vector<std::vector<double>>>();
                mixmath::ExpertSelection sel;
                sel.omega = j.at("omega").get<std::vector<double>>();
                params.weights = sel.omega;
                params.top_k = sel.omega.size();
                for (std::size_t c = 0; c < sel.omega.size(); ++c) sel.indices.push_back(c);
                const auto eps = j.at("eps").get<std::vector<double>>();
                err = max_abs_error(mixmath::reparameterize(params, sel, eps),
                                    j.at("z").get<std::vector<double>>());
            } else if (kind == "dist_stats") {
                const auto d = j.at("d").get<std::vector<double>>();
                const auto stats = mixmath::dist_stats(d);
                err = max_abs_error({stats.mean, stats.variance},
                                    {j.at("mean").get<double>(), j.at("variance").get<double>()});
            } else {
                throw InvalidInput("unknown_kind", "unknown tensor kind " + kind);
            }
            result["max_error"] = err;
            result["ok"] = err <= tolerance;
        } catch (const json::exception& e) {
            result["ok"] = false;
            result["error"] = "parse_error";
            result["message"] = e.what();
        } catch (const Error& e) {
            result["ok"] = false;
            result["error"] = e.kind();
            result["message"] = e.what();
        }
        ++checked;
        if (!result["ok"].get<bool>()) ++failed;
        std::cout << result.dump() << '\n';
    }
    std::cout << "checked " << checked << ", mismatches " << failed << '\n';
    return failed == 0 ? kExitOk : kExitItemFailures;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pixmatch: cellular trajectory map matching in pixel space"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_network = [&](Command& c) {
        c.bind("--nodes", cfg.nodes, "nodes.csv (node_id,lon,lat)")
            .bind("--edges", cfg.edges, "edges.csv (edge_id,from_node,to_node,length_m)");
    };
    auto add_raster = [&](Command& c) {
        c.bind("--width", cfg.width, "grid width in pixels")
            .bind("--buffer-m", cfg.buffer_m, "window buffer around the trajectory (m)");
    };
    auto add_calibration = [&](Command& c) {
        c.bind("--radius-px", cfg.radius_px, "calibration radius in pixels; 0 = from noise sigma")
            .bind("--noise-sigma", cfg.noise_sigma, "tower noise sigma (m) for the default radius")
            .bind("--mask-dir", cfg.mask_dir, "directory of external <traj_id>.mask.pgm files");
    };
    auto add_search = [&](Command& c) {
        c.bind("--cost-fraction", cfg.cost_fraction, "deviation budget as a fraction of trajectory length")
            .bind("--relax", cfg.relax, "budget doublings allowed on infeasibility (0-4)");
    };

    Command synth(app, "synth", "generate a grid network, towers, trajectories and ground truth");
    synth.bind("--nodes", cfg.nodes, "existing nodes.csv instead of a generated grid")
        .bind("--edges", cfg.edges, "existing edges.csv instead of a generated grid")
        .bind("--towers", cfg.towers, "existing towers.csv (tower_id,lon,lat)")
        .bind("--out", cfg.out, "output directory")
        .bind("--seed", cfg.seed, "RNG seed")
        .bind("--count", cfg.count, "number of trajectories")
        .bind("--grid-rows", cfg.grid_rows, "network rows")
        .bind("--grid-cols", cfg.grid_cols, "network columns")
        .bind("--spacing-m", cfg.spacing_m, "node spacing (m)")
        .bind("--origin-lon", cfg.origin_lon, "southwest node longitude")
        .bind("--origin-lat", cfg.origin_lat, "southwest node latitude")
        .bind("--speed", cfg.speed, "travel speed (m/s)")
        .bind("--interval", cfg.interval, "sampling interval (s)")
        .bind("--min-length", cfg.min_length, "minimum ground-truth path length (m)")
        .bind("--noise-sigma", cfg.noise_sigma, "tower selection noise sigma (m)")
        .bind("--tower-spacing", cfg.tower_spacing, "tower lattice spacing (m); 0 = tower per node")
        .bind("--tower-jitter", cfg.tower_jitter, "tower jitter as a fraction of spacing");

    Command rasterize(app, "rasterize", "write trajectory, road and ground-truth PGM grids");
    add_network(rasterize);
    rasterize.bind("--trajs", cfg.trajs, "trajectories.jsonl")
        .bind("--ground-truth", cfg.ground_truth, "ground_truth.jsonl (optional gt_path grids)")
        .bind("--out", cfg.out, "output directory")
        .bind("--jobs", cfg.jobs, "worker threads");
    add_raster(rasterize);

    Command calibrate(app, "calibrate", "write calibration mask PGM grids");
    add_network(calibrate);
    calibrate.bind("--trajs", cfg.trajs, "trajectories.jsonl")
        .bind("--out", cfg.out, "output directory")
        .bind("--jobs", cfg.jobs, "worker threads");
    add_raster(calibrate);
    add_calibration(calibrate);

    Command match(app, "match", "match trajectories and write matches.jsonl");
    add_network(match);
    match.bind("--trajs", cfg.trajs, "trajectories.jsonl")
        .bind("--out", cfg.out, "output directory")
        .bind("--jobs", cfg.jobs, "worker threads");
    add_raster(match);
    add_calibration(match);
    add_search(match);

    Command eval(app, "eval", "score matches (or run the pipeline) against ground truth");
    add_network(eval);
    eval.bind("--ground-truth", cfg.ground_truth, "ground_truth.jsonl")
        .bind("--matches", cfg.matches, "matches.jsonl; if absent, --trajs is matched and timed")
        .bind("--trajs", cfg.trajs, "trajectories.jsonl")
        .bind("--out", cfg.out, "output directory")
        .bind("--jobs", cfg.jobs, "worker threads");
    add_raster(eval);
    add_calibration(eval);
    add_search(eval);

    Command render(app, "render", "write a PPM overlay for one trajectory");
    add_network(render);
    render.bind("--trajs", cfg.trajs, "trajectories.jsonl")
        .bind("--traj-id", cfg.traj_id, "trajectory to draw (default: first)")
        .bind("--matches", cfg.matches, "matches.jsonl for the red matched path")
        .bind("--mask", cfg.mask, "explicit mask PGM to draw")
        .bind("--out", cfg.out, "output directory");
    add_raster(render);
    add_calibration(render);

    double tolerance = 1e-5;
    auto* verify = app.add_subcommand("verify-mixmath", "check exported mixture tensors");
    verify->add_option("--input", cfg.input, "tensors.jsonl")->required();
    verify->add_option("--tolerance", tolerance, "relative tolerance")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        emit_error("usage_error", e.what());
        return kExitFatal;
    }

    try {
        for (Command* c : {&synth, &rasterize, &calibrate, &match, &eval, &render}) {
            if (!c->app()->parsed()) continue;
            c->finish();
            if (c == &synth) return run_synth(cfg, *c);
            if (c == &rasterize) return run_rasterize(cfg, *c);
            if (c == &calibrate) return run_calibrate(cfg, *c);
            if (c == &match) return run_match(cfg, *c);
            if (c == &eval) return run_eval(cfg, *c);
            return run_render(cfg, *c);
        }
        return run_verify_mixmath(cfg, tolerance);
    } catch (const Error& e) {
        emit_error(e.kind(), e.what());
    } catch (const std::exception& e) {
        emit_error("internal_error", e.what());
    }
    return kExitFatal;
}
