#include <doctest.h>

#include <fstream>
#include <set>
#include <unordered_set>

#include "../support/generators.hpp"
#include "../support/oracles.hpp"
#include "pixmatch/error.hpp"
#include "pixmatch/raster.hpp"
#include "pixmatch/rng.hpp"

using namespace pixmatch;
using namespace pixmatch::testing;

namespace {

const Georef kSmall{{120.0, 30.0}, 10.0, 32};

std::string kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return "ok";
}

CellularTrajectory at_cells(const Georef& g, const std::vector<Cell>& cells) {
    CellularTrajectory t{"t", {}};
    for (std::size_t i = 0; i < cells.size(); ++i) {
        t.samples.push_back({"s" + std::to_string(i), from_pixel(g, cells[i].col, cells[i].row),
                             static_cast<double>(i)});
    }
    return t;
}

}  // namespace

TEST_SUITE("raster") {
    TEST_CASE("make_georef sizes the window") {
        const auto line = line_trajectory(2, 1000.0);
        const auto g = make_georef(line, 500.0, 224);
        CHECK(g.side_m() == doctest::Approx(2000.0).epsilon(1e-9));
        CHECK(g.meters_per_pixel == doctest::Approx(8.93).epsilon(1e-3));
        CHECK(g.width == 224);

        CellularTrajectory still{"s", {{"a", {120.0, 30.0}, 0}, {"b", {120.0, 30.0}, 1}}};
        const auto gs = make_georef(still, 500.0, 224);
        CHECK(gs.side_m() == doctest::Approx(1000.0));
        CHECK(gs.center().lon == doctest::Approx(120.0).epsilon(1e-12));
        CHECK(gs.center().lat == doctest::Approx(30.0).epsilon(1e-12));
        CHECK(kind_of([&] { make_georef(still, 0.0, 224); }) == "degenerate_window");

        CellularTrajectory tall{"n", {{"a", {120.0, 30.0}, 0}, {"b", {120.001, 30.02}, 1}}};
        const double ns = great_circle_oracle({120.0, 30.0}, {120.0, 30.02});
        const auto gt = make_georef(tall, 300.0, 100);
        CHECK(gt.side_m() == doctest::Approx(ns + 600.0).epsilon(1e-6));
    }

    TEST_CASE("to_pixel and from_pixel") {
        const auto g = make_georef(line_trajectory(2, 1000.0), 500.0, 224);
        CHECK(to_pixel(g, g.origin) == Cell{0, 0});
        const auto c = to_pixel(g, g.center());
        CHECK(std::abs(c.col - 112) <= 1);
        CHECK(std::abs(c.row - 112) <= 1);
        const GridProjection proj(g);
        int bad = 0;
        for (int r = 0; r < 224; ++r)
            for (int col = 0; col < 224; ++col)
                if (!(proj.to_pixel(proj.from_pixel(col, r)) == Cell{col, r})) ++bad;
        CHECK(bad == 0);
        CHECK(!proj.in_range(proj.to_pixel({g.origin.lon - 0.01, g.origin.lat})));
        CHECK(proj.to_pixel({g.origin.lon, g.origin.lat - 0.01}).row < 0);
    }

    TEST_CASE("rasterize_trajectory encodes i/|T|") {
        const auto t = at_cells(kSmall, {{1, 1}, {5, 5}, {9, 9}, {13, 13}});
        const auto r = rasterize_trajectory(t, kSmall);
        std::multiset<double> vals;
        for (double v : r.grid.values())
            if (v > 0) vals.insert(v);
        CHECK(vals == std::multiset<double>{0.25, 0.5, 0.75, 1.0});
        CHECK(r.skipped == 0);

        const auto shared = at_cells(kSmall, {{1, 1}, {5, 5}, {5, 5}, {13, 13}});
        CHECK(rasterize_trajectory(shared, kSmall).grid.at(5, 5) == 0.75);
    }

    TEST_CASE("rasterize_trajectory counts distinct cells and skips outside points") {
        Rng rng(3);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<Cell> cells;
            for (int i = 0; i < 40; ++i) {
                cells.push_back({static_cast<int>(rng.below(8)), static_cast<int>(rng.below(8))});
            }
            const auto r = rasterize_trajectory(at_cells(kSmall, cells), kSmall);
            std::unordered_set<long> distinct;
            for (const auto& c : cells) distinct.insert(c.col * 100000L + c.row);
            CHECK(r.grid.count_nonzero() == distinct.size());
        }
        auto t = at_cells(kSmall, {{1, 1}, {2, 2}});
        t.samples.push_back({"far", {121.0, 31.0}, 9.0});
        CHECK(rasterize_trajectory(t, kSmall).skipped == 1);
        CellularTrajectory away{"a", {{"x", {10.0, 10.0}, 0}, {"y", {10.1, 10.0}, 1}}};
        CHECK(kind_of([&] { rasterize_trajectory(away, kSmall); }) == "out_of_window");
    }

    TEST_CASE("rasterize_roads: horizontal, empty and diagonal") {
        const auto a = from_pixel(kSmall, 0, 5);
        const auto b = from_pixel(kSmall, 31, 5);
        const auto horiz = RoadNetwork::build({node("A", a.lon, a.lat), node("B", b.lon, b.lat)},
                                              {edge("h", "A", "B")});
        const auto rr = rasterize_roads(horiz, kSmall);
        for (int r = 0; r < 32; ++r)
            for (int c = 0; c < 32; ++c) CHECK(rr.grid.at(c, r) == (r == 5 ? 1.0 : 0.0));
        CHECK(rr.edges_at({7, 5}) == std::vector<EdgeIndex>{0});
        CHECK(rr.edges_at({7, 6}).empty());

        const auto empty = RoadNetwork::build({}, {});
        CHECK(rasterize_roads(empty, kSmall).grid.count_nonzero() == 0);

        const auto d0 = from_pixel(kSmall, 0, 0);
        const auto d1 = from_pixel(kSmall, 31, 31);
        const auto diag = RoadNetwork::build({node("A", d0.lon, d0.lat), node("B", d1.lon, d1.lat)},
                                             {edge("d", "A", "B")});
        const auto dr = rasterize_roads(diag, kSmall);
        CHECK(dr.grid.count_nonzero() == 32);
        CHECK(set_cells(dr.grid) == sampled_line_cells({0, 0}, {31, 31}));
    }

    TEST_CASE("road raster covers edge endpoint cells; gt_path is a subset") {
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const auto net = random_network(seed);
            const auto g = covering_georef(net, 48);
            const auto roads = rasterize_roads(net, g);
            for (EdgeIndex e = 0; e < net.edge_count(); ++e) {
                CHECK(roads.grid.at(to_pixel(g, net.from_pos(e))) == 1.0);
                CHECK(roads.grid.at(to_pixel(g, net.to_pos(e))) == 1.0);
            }
            Rng rng(seed);
            GroundTruthPath path{"p", {}};
            for (EdgeIndex e = 0; e < net.edge_count(); ++e)
                if (rng.uniform() < 0.4) path.edges.push_back(e);
            const auto gt = rasterize_path(path, net, g);
            CHECK(gt.channel() == Channel::gt_path);
            for (std::size_t i = 0; i < gt.values().size(); ++i)
                CHECK(gt.values()[i] <= roads.grid.values()[i]);
        }
    }

    TEST_CASE("rasterize_path with all edges equals the road raster") {
        const auto net = make_grid_network(5, 5, 100.0, {120.0, 30.0});
        const auto g = covering_georef(net, 64);
        GroundTruthPath all{"p", {}};
        for (EdgeIndex e = 0; e < net.edge_count(); ++e) all.edges.push_back(e);
        const auto path = rasterize_path(all, net, g);
        const auto roads = rasterize_roads(net, g);
        CHECK(std::equal(path.values().begin(), path.values().end(), roads.grid.values().begin()));
        const Georef far{{10.0, 10.0}, 10.0, 32};
        CHECK(rasterize_path(all, net, far).count_nonzero() == 0);
    }

    TEST_CASE("quantization and PGM round trip") {
        CHECK(quantize(0.25) == 64);
        CHECK(quantize(1.0) == 255);
        CHECK(quantize(0.0) == 0);
        TempDir dir;
        PixelGrid t(kSmall, Channel::trajectory);
        t.set(3, 4, 0.25);
        t.traj_id = "abc";
        t.n_points = 4;
        write_grid(t, dir / "t.pgm");
        CHECK(std::filesystem::exists(dir / "t.georef.json"));
        const auto back = read_grid(dir / "t.pgm");
        CHECK(back.at(3, 4) == doctest::Approx(64.0 / 255.0));
        CHECK(back.traj_id == "abc");
        CHECK(back.n_points == 4);
        CHECK(back.channel() == Channel::trajectory);
        CHECK(georef_matches(back.georef(), kSmall, 0.0));

        PixelGrid road(kSmall, Channel::road);
        road.set(0, 31, 1.0);
        write_grid(road, dir / "r.pgm");
        std::ifstream raw(dir / "r.pgm", std::ios::binary);
        std::string magic;
        int w, h, maxval;
        raw >> magic >> w >> h >> maxval;
        raw.get();
        std::vector<char> bytes(32 * 32);
        raw.read(bytes.data(), bytes.size());
        CHECK(magic == "P5");
        CHECK(static_cast<unsigned char>(bytes[0]) == 255);  // row 31 (north) comes first
        CHECK(read_grid(dir / "r.pgm").at(0, 31) == 1.0);

        Rng rng(8);
        PixelGrid rnd(kSmall, Channel::trajectory);
        for (auto& v : rnd.values()) v = rng.uniform();
        write_grid(rnd, dir / "x.pgm");
        const auto rb = read_grid(dir / "x.pgm");
        double worst = 0.0;
        for (std::size_t i = 0; i < rnd.values().size(); ++i)
            worst = std::max(worst, std::abs(rnd.values()[i] - rb.values()[i]));
        CHECK(worst <= 1.0 / 510.0);
    }

    TEST_CASE("read_grid errors") {
        TempDir dir;
        PixelGrid m(kSmall, Channel::mask);
        write_grid(m, dir / "m.pgm");
        std::ofstream(dir / "bad.pgm", std::ios::binary) << "P2\n32 32\n255\n";
        std::filesystem::copy_file(dir / "m.georef.json", dir / "bad.georef.json");
        CHECK(kind_of([&] { read_grid(dir / "bad.pgm"); }) == "bad_magic");

        std::ofstream(dir / "short.pgm", std::ios::binary) << "P5\n32 32\n255\n" << std::string(10, '\0');
        std::filesystem::copy_file(dir / "m.georef.json", dir / "short.georef.json");
        CHECK(kind_of([&] { read_grid(dir / "short.pgm"); }) == "size_mismatch");

        std::ofstream(dir / "wide.pgm", std::ios::binary) << "P5\n16 16\n255\n" << std::string(256, '\0');
        std::filesystem::copy_file(dir / "m.georef.json", dir / "wide.georef.json");
        CHECK(kind_of([&] { read_grid(dir / "wide.pgm"); }) == "size_mismatch");

        std::filesystem::copy_file(dir / "m.pgm", dir / "lonely.pgm");
        CHECK(kind_of([&] { read_grid(dir / "lonely.pgm"); }) == "missing_sidecar");
    }

    TEST_CASE("grid validation and channels") {
        PixelGrid m(kSmall, Channel::mask);
        m.set(1, 1, 0.5);
        CHECK_THROWS_AS(validate(m), InvalidInput);
        PixelGrid t(kSmall, Channel::trajectory);
        t.set(1, 1, 0.5);
        CHECK_NOTHROW(validate(t));
        t.set(1, 1, 1.5);
        CHECK_THROWS_AS(validate(t), InvalidInput);
        CHECK(parse_channel("gt_path") == Channel::gt_path);
        CHECK(kind_of([] { parse_channel("rgb"); }) == "bad_channel");
        CHECK(grid_filename("a/b c", Channel::mask) == "a_b_c.mask.pgm");
    }

    TEST_CASE("bresenham endpoints and connectivity") {
        Rng rng(17);
        for (int i = 0; i < 200; ++i) {
            const Cell a{static_cast<int>(rng.below(60)) - 30, static_cast<int>(rng.below(60)) - 30};
            const Cell b{static_cast<int>(rng.below(60)) - 30, static_cast<int>(rng.below(60)) - 30};
            std::vector<Cell> cells;
            bresenham(a, b, [&](const Cell& c) { cells.push_back(c); });
            CHECK(cells.front() == a);
            CHECK(cells.back() == b);
            CHECK(cells.size() ==
                  static_cast<std::size_t>(std::max(std::abs(b.col - a.col), std::abs(b.row - a.row)) + 1));
            for (std::size_t k = 1; k < cells.size(); ++k) {
                CHECK(std::abs(cells[k].col - cells[k - 1].col) <= 1);
                CHECK(std::abs(cells[k].row - cells[k - 1].row) <= 1);
            }
        }
    }
}
