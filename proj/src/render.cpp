#include "pixmatch/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "pixmatch/error.hpp"

namespace pixmatch {

Rgb trajectory_color(double v) {
    const auto level = static_cast<std::uint8_t>(std::lround(64.0 + 191.0 * std::clamp(v, 0.0, 1.0)));
    return {0, level, level};
}

Image render_overlay(const RenderLayers& layers) {
    const PixelGrid* ref = nullptr;
    for (const PixelGrid* g : {layers.roads, layers.mask, layers.path, layers.trajectory}) {
        if (!g) continue;
        if (!ref) {
            ref = g;
        } else if (!georef_matches(ref->georef(), g->georef())) {
            throw InvalidInput("georef_mismatch", "render layers have different georefs");
        }
    }
    if (!ref) throw InvalidInput("empty_render", "no layer to render");

    const int w = ref->width();
    Image img{w, w, std::vector<Rgb>(static_cast<std::size_t>(w) * w)};
    auto paint = [&](const PixelGrid* g, auto color_of) {
        if (!g) return;
        for (int row = 0; row < w; ++row) {
            for (int col = 0; col < w; ++col) {
                const double v = g->at(col, row);
                if (v > 0.0) img.pixels[static_cast<std::size_t>(w - 1 - row) * w + col] = color_of(v);
            }
        }
    };
    paint(layers.roads, [](double) { return kRoadColor; });
    paint(layers.mask, [](double) { return kMaskColor; });
    paint(layers.path, [](double) { return kPathColor; });
    paint(layers.trajectory, trajectory_color);
    return img;
}

void write_ppm(const Image& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("io_error", "cannot write " + path.string());
    out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
    for (const auto& p : image.pixels) {
        const char bytes[3] = {static_cast<char>(p.r), static_cast<char>(p.g),
                               static_cast<char>(p.b)};
        out.write(bytes, 3);
    }
}

Image read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("io_error", "cannot open " + path.string());
    std::string magic;
    int maxval = 0;
    Image img;
    in >> magic >> img.width >> img.height >> maxval;
    if (magic != "P6") throw InvalidInput("bad_magic", path.string() + ": not a P6 file");
    if (!in || img.width <= 0 || img.height <= 0 || maxval != 255) {
        throw InvalidInput("size_mismatch", path.string() + ": bad header");
    }
    in.get();
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    for (auto& p : img.pixels) {
        char bytes[3];
        if (!in.read(bytes, 3)) throw InvalidInput("size_mismatch", path.string() + ": truncated");
        p = {static_cast<std::uint8_t>(bytes[0]), static_cast<std::uint8_t>(bytes[1]),
             static_cast<std::uint8_t>(bytes[2])};
    }
    return img;
}

}  // namespace pixmatch
