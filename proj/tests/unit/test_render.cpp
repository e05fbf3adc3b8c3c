#include <doctest.h>

#include "../support/generators.hpp"
#include "pixmatch/error.hpp"
#include "pixmatch/render.hpp"

using namespace pixmatch;
using namespace pixmatch::testing;

namespace {

Georef small_georef() { return {{120.0, 30.0}, 10.0, 16}; }

}  // namespace

TEST_SUITE("render") {
    TEST_CASE("layer order and colors") {
        const Georef g = small_georef();
        PixelGrid roads(g, Channel::road), mask(g, Channel::mask), path(g, Channel::gt_path),
            traj(g, Channel::trajectory);
        roads.set(1, 1, 1.0);
        roads.set(2, 2, 1.0);
        mask.set(2, 2, 1.0);
        roads.set(3, 3, 1.0);
        mask.set(3, 3, 1.0);
        path.set(3, 3, 1.0);
        traj.set(3, 3, 0.5);
        traj.set(4, 4, 1.0);
        const auto img = render_overlay({&roads, &mask, &path, &traj});
        CHECK(img.width == 16);
        CHECK(img.height == 16);
        // Row 0 of the image is the north edge: grid row r lands on y = 15 - r.
        CHECK(img.at(1, 14) == kRoadColor);
        CHECK(img.at(2, 13) == kMaskColor);
        CHECK(img.at(3, 12) == trajectory_color(0.5));
        CHECK(img.at(4, 11) == trajectory_color(1.0));
        CHECK(img.at(0, 0) == Rgb{0, 0, 0});

        const auto no_traj = render_overlay({&roads, &mask, &path, nullptr});
        CHECK(no_traj.at(3, 12) == kPathColor);
    }

    TEST_CASE("trajectory colors brighten with the sample index") {
        for (int i = 1; i < 100; ++i) {
            const auto a = trajectory_color(i / 100.0);
            const auto b = trajectory_color((i + 1) / 100.0);
            CHECK(a.r == 0);
            CHECK(a.g <= b.g);
        }
        CHECK(trajectory_color(1.0) == Rgb{0, 255, 255});
    }

    TEST_CASE("an empty mask paints no white pixels") {
        const Georef g = small_georef();
        PixelGrid roads(g, Channel::road), mask(g, Channel::mask);
        for (int i = 0; i < 16; ++i) roads.set(i, i, 1.0);
        const auto img = render_overlay({&roads, &mask, nullptr, nullptr});
        CHECK(std::count(img.pixels.begin(), img.pixels.end(), kMaskColor) == 0);
        CHECK(std::count(img.pixels.begin(), img.pixels.end(), kRoadColor) == 16);
    }

    TEST_CASE("errors") {
        CHECK_THROWS_AS(render_overlay({}), InvalidInput);
        PixelGrid a(small_georef(), Channel::road);
        Georef other = small_georef();
        other.width = 32;
        PixelGrid b(other, Channel::mask);
        try {
            render_overlay({&a, &b, nullptr, nullptr});
            FAIL("expected georef_mismatch");
        } catch (const InvalidInput& e) {
            CHECK(e.kind() == "georef_mismatch");
        }
    }

    TEST_CASE("ppm round trip") {
        TempDir dir;
        PixelGrid roads(small_georef(), Channel::road);
        roads.set(5, 6, 1.0);
        const auto img = render_overlay({&roads, nullptr, nullptr, nullptr});
        write_ppm(img, dir / "x.ppm");
        const auto back = read_ppm(dir / "x.ppm");
        CHECK(back.width == img.width);
        CHECK(back.height == img.height);
        CHECK(back.pixels == img.pixels);
    }
}
