#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>

#include "pixmatch/error.hpp"
#include "pixmatch/raster.hpp"

namespace pixmatch {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::uint8_t kBinaryThreshold = 128;

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
    std::string token;
    int c = in.get();
    for (;;) {
        while (c != EOF && std::isspace(c)) c = in.get();
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
            continue;
        }
        break;
    }
    while (c != EOF && !std::isspace(c)) {
        token.push_back(static_cast<char>(c));
        c = in.get();
    }
    // The single whitespace after maxval has been consumed here.
    return token;
}

int parse_int(const std::string& s, const std::filesystem::path& path) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw InvalidInput("bad_magic", path.string() + ": malformed PGM header field \"" + s + "\"");
    }
}

}  // namespace

std::uint8_t quantize(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

std::string grid_filename(std::string_view traj_id, Channel channel) {
    std::string name(traj_id);
    for (char& c : name) {
        const bool keep = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                          (c >= '0' && c <= '9') || c == '_' || c == '.' || c == '-';
        if (!keep) c = '_';
    }
    if (name.empty()) name = "_";
    return name + "." + std::string(channel_name(channel)) + ".pgm";
}

std::filesystem::path sidecar_path(const std::filesystem::path& pgm_path) {
    auto p = pgm_path;
    p.replace_extension(".georef.json");
    return p;
}

void write_grid(const PixelGrid& grid, const std::filesystem::path& pgm_path) {
    const int w = grid.width();
    std::ofstream out(pgm_path, std::ios::binary);
    if (!out) throw InvalidInput("io_error", "cannot write " + pgm_path.string());
    out << "P5\n" << w << ' ' << w << "\n255\n";
    std::vector<char> row(static_cast<std::size_t>(w));
    for (int r = w - 1; r >= 0; --r) {
        for (int c = 0; c < w; ++c) row[c] = static_cast<char>(quantize(grid.at(c, r)));
        out.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw InvalidInput("io_error", "short write to " + pgm_path.string());

    ordered_json meta;
    meta["origin_lon"] = grid.georef().origin.lon;
    meta["origin_lat"] = grid.georef().origin.lat;
    meta["meters_per_pixel"] = grid.georef().meters_per_pixel;
    meta["width"] = grid.georef().width;
    meta["channel"] = std::string(channel_name(grid.channel()));
    meta["traj_id"] = grid.traj_id;
    meta["n_points"] = grid.n_points;
    std::ofstream side(sidecar_path(pgm_path));
    if (!side) throw InvalidInput("io_error", "cannot write sidecar for " + pgm_path.string());
    side << meta.dump(2) << '\n';
}

PixelGrid read_grid(const std::filesystem::path& pgm_path) {
    return read_grid(pgm_path, sidecar_path(pgm_path));
}

PixelGrid read_grid(const std::filesystem::path& pgm_path,
                    const std::filesystem::path& sidecar) {
    std::ifstream side(sidecar);
    if (!side) throw InvalidInput("missing_sidecar", "missing sidecar " + sidecar.string());
    ordered_json meta;
    try {
        meta = ordered_json::parse(side);
    } catch (const std::exception& e) {
        throw InvalidInput("bad_sidecar", sidecar.string() + ": " + e.what());
    }
    Georef g;
    Channel channel{};
    std::string traj_id;
    int n_points = 0;
    try {
        g.origin = {meta.at("origin_lon").get<double>(), meta.at("origin_lat").get<double>()};
        g.meters_per_pixel = meta.at("meters_per_pixel").get<double>();
        g.width = meta.at("width").get<int>();
        channel = parse_channel(meta.at("channel").get<std::string>());
        traj_id = meta.value("traj_id", std::string{});
        n_points = meta.value("n_points", 0);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw InvalidInput("bad_sidecar", sidecar.string() + ": " + e.what());
    }
    if (g.width < kMinWidth || !(g.meters_per_pixel > 0.0)) {
        throw InvalidInput("bad_sidecar", sidecar.string() + ": invalid width or scale");
    }

    std::ifstream in(pgm_path, std::ios::binary);
    if (!in) throw InvalidInput("io_error", "cannot open " + pgm_path.string());
    if (next_token(in) != "P5") throw InvalidInput("bad_magic", pgm_path.string() + ": not a P5 PGM");
    const int w = parse_int(next_token(in), pgm_path);
    const int h = parse_int(next_token(in), pgm_path);
    const int maxval = parse_int(next_token(in), pgm_path);
    if (maxval != 255) throw InvalidInput("bad_magic", pgm_path.string() + ": maxval must be 255");
    if (w != g.width || h != g.width) {
        throw InvalidInput("size_mismatch", pgm_path.string() + ": image is " + std::to_string(w) +
                                                "x" + std::to_string(h) + ", sidecar says " +
                                                std::to_string(g.width));
    }
    const std::size_t expected = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    std::vector<char> bytes(expected);
    in.read(bytes.data(), static_cast<std::streamsize>(expected));
    if (static_cast<std::size_t>(in.gcount()) != expected || in.peek() != EOF) {
        throw InvalidInput("size_mismatch", pgm_path.string() + ": pixel data length mismatch");
    }

    PixelGrid grid(g, channel);
    grid.traj_id = std::move(traj_id);
    grid.n_points = n_points;
    const bool binary = is_binary(channel);
    for (int fr = 0; fr < w; ++fr) {
        const int row = w - 1 - fr;
        for (int c = 0; c < w; ++c) {
            const auto b = static_cast<std::uint8_t>(bytes[static_cast<std::size_t>(fr) * w + c]);
            grid.set(c, row, binary ? (b >= kBinaryThreshold ? 1.0 : 0.0) : b / 255.0);
        }
    }
    return grid;
}

}  // namespace pixmatch
