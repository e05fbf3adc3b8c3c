#include <doctest.h>

#include <fstream>

#include "../support/generators.hpp"
#include "../support/oracles.hpp"
#include "pixmatch/error.hpp"
#include "pixmatch/rng.hpp"
#include "pixmatch/roadnet.hpp"

using namespace pixmatch;
using namespace pixmatch::testing;

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

}  // namespace

TEST_SUITE("roadnet") {
    TEST_CASE("haversine identity, equator step and symmetry") {
        const GeoPoint a{0.0, 0.0};
        CHECK(haversine(a, a) == 0.0);
        const double d = haversine(a, {0.001, 0.0});
        CHECK(d == doctest::Approx(great_circle_oracle(a, {0.001, 0.0})).epsilon(1e-9));
        CHECK(d == doctest::Approx(111.19).epsilon(1e-4));
        Rng rng(11);
        for (int i = 0; i < 100; ++i) {
            const GeoPoint p{rng.uniform() * 360.0 - 180.0, rng.uniform() * 180.0 - 90.0};
            const GeoPoint q{rng.uniform() * 360.0 - 180.0, rng.uniform() * 180.0 - 90.0};
            CHECK(haversine(p, q) == haversine(q, p));
            CHECK(haversine(p, q) == doctest::Approx(great_circle_oracle(p, q)).epsilon(1e-7));
        }
    }

    TEST_CASE("load_network derives missing lengths") {
        TempDir dir;
        write_file(dir / "nodes.csv", "node_id,lon,lat\nA,0,0\nB,0.001,0\n");
        write_file(dir / "edges.csv", "edge_id,from_node,to_node,length_m\ne1,A,B,\n");
        const auto net = load_network(dir / "nodes.csv", dir / "edges.csv");
        REQUIRE(net.edge_count() == 1);
        CHECK(net.edge(0).length_m ==
              doctest::Approx(great_circle_oracle({0, 0}, {0.001, 0})).epsilon(1e-9));
        CHECK(net.edge(0).length_m == doctest::Approx(111.19).epsilon(1e-4));
    }

    TEST_CASE("empty edges file gives an empty network") {
        TempDir dir;
        write_file(dir / "nodes.csv", "node_id,lon,lat\nA,0,0\n");
        write_file(dir / "edges.csv", "edge_id,from_node,to_node,length_m\n");
        const auto net = load_network(dir / "nodes.csv", dir / "edges.csv");
        CHECK(net.edge_count() == 0);
        CHECK(net.node_count() == 1);
        CHECK(net.outgoing(0).empty());
    }

    TEST_CASE("dangling node reference names the node") {
        TempDir dir;
        write_file(dir / "nodes.csv", "node_id,lon,lat\nA,0,0\n");
        write_file(dir / "edges.csv", "edge_id,from_node,to_node,length_m\ne1,A,Z,\n");
        try {
            load_network(dir / "nodes.csv", dir / "edges.csv");
            FAIL("expected DanglingReference");
        } catch (const DanglingReference& e) {
            CHECK(e.id() == "Z");
            CHECK(std::string(e.what()).find("\"Z\"") != std::string::npos);
        }
    }

    TEST_CASE("malformed rows report their line number") {
        TempDir dir;
        write_file(dir / "nodes.csv", "node_id,lon,lat\nA,0,0\nB,abc,0\n");
        write_file(dir / "edges.csv", "edge_id,from_node,to_node,length_m\n");
        try {
            load_network(dir / "nodes.csv", dir / "edges.csv");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 3);
        }
        write_file(dir / "nodes.csv", "node_id,lon,lat\nA,0,0\nB,0.001,0\n");
        write_file(dir / "edges.csv", "edge_id,from_node,to_node,length_m\ne1,A,B\n");
        CHECK_THROWS_AS(load_network(dir / "nodes.csv", dir / "edges.csv"), ParseError);
    }

    TEST_CASE("non-positive, mismatched and self-loop edges are rejected") {
        auto nodes = [] { return std::vector{node("A", 0, 0), node("B", 0.001, 0)}; };
        auto with_len = [](double len) {
            auto e = edge("e1", "A", "B");
            e.length_m = len;
            return e;
        };
        auto kind_of = [&](std::vector<EdgeRecord> edges) {
            try {
                RoadNetwork::build(nodes(), std::move(edges));
            } catch (const Error& e) {
                return e.kind();
            }
            return std::string("ok");
        };
        CHECK(kind_of({with_len(0.0)}) == "non_positive_length");
        CHECK(kind_of({with_len(-5.0)}) == "non_positive_length");
        CHECK(kind_of({with_len(120.0)}) == "length_mismatch");
        CHECK(kind_of({with_len(111.3)}) == "ok");
        CHECK(kind_of({edge("e1", "A", "B", 500.0)}) == "ok");
        CHECK(kind_of({edge("e1", "A", "A")}) == "self_loop");
        auto loop = edge("e1", "A", "A", 50.0);
        loop.loop = true;
        CHECK(kind_of({loop}) == "ok");
        CHECK(kind_of({edge("e1", "A", "B"), edge("e1", "B", "A")}) == "parse_error");
    }

    TEST_CASE("successors on chain, terminal edge and junction") {
        const auto chain = chain_network();
        CHECK(chain.successors("e1") == std::vector<std::string>{"e2"});
        CHECK(chain.successors("e2").empty());
        CHECK_THROWS_AS(chain.successors("nope"), InvalidInput);

        const auto junction = RoadNetwork::build(
            {node("A", 0, 0), node("B", 0.001, 0), node("C", 0.002, 0), node("D", 0.001, 0.001),
             node("E", 0.001, -0.001)},
            {edge("in", "A", "B"), edge("z", "B", "C"), edge("m", "B", "D"), edge("b", "B", "E"),
             edge("other", "C", "D")});
        std::vector<std::string> brute;
        for (const auto& e : junction.edges()) {
            if (e.from == junction.edge(junction.edge_index("in")).to) brute.push_back(e.id);
        }
        std::sort(brute.begin(), brute.end(), id_less);
        CHECK(junction.successors("in") == brute);
        CHECK(brute == std::vector<std::string>{"b", "m", "z"});
    }

    TEST_CASE("id ordering puts numeric ids first in numeric order") {
        CHECK(id_less("2", "10"));
        CHECK(!id_less("10", "2"));
        CHECK(id_less("10", "a"));
        CHECK(id_less("a", "b"));
        CHECK(!id_less("a", "a"));
    }

    TEST_CASE("adjacency closure on random networks") {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const auto net = random_network(seed);
            for (EdgeIndex e = 0; e < net.edge_count(); ++e) {
                std::size_t expected = 0;
                for (EdgeIndex f = 0; f < net.edge_count(); ++f) {
                    if (net.edge(f).from == net.edge(e).to) ++expected;
                }
                const auto succ = net.successors(e);
                CHECK(succ.size() == expected);
                for (std::size_t i = 0; i < succ.size(); ++i) {
                    CHECK(net.edge(succ[i]).from == net.edge(e).to);
                    if (i > 0) CHECK(succ[i - 1] < succ[i]);
                }
            }
        }
    }

    TEST_CASE("load determinism and write round trip") {
        TempDir dir;
        const auto net = random_network(5);
        write_network(net, dir / "n.csv", dir / "e.csv");
        const auto a = load_network(dir / "n.csv", dir / "e.csv");
        const auto b = load_network(dir / "n.csv", dir / "e.csv");
        CHECK(a == b);
        CHECK(a == net);
        const auto grid = make_grid_network(3, 3, 100.0, {120.0, 30.0});
        write_network(grid, dir / "gn.csv", dir / "ge.csv");
        CHECK(load_network(dir / "gn.csv", dir / "ge.csv") == grid);
    }

    TEST_CASE("clip_window") {
        const auto chain = chain_network();
        const auto all = clip_window(chain, bounding_box(chain));
        CHECK(all.edge_count() == chain.edge_count());
        for (EdgeIndex e = 0; e < chain.edge_count(); ++e) CHECK(all.edge(e) == chain.edge(e));

        const auto none = clip_window(chain, {10.0, 10.0, 11.0, 11.0});
        CHECK(none.edge_count() == 0);

        const GeoWindow around_b{0.0009, -0.0001, 0.0011, 0.0001};
        const auto mid = clip_window(chain, around_b);
        std::vector<std::string> brute;
        for (const auto& e : chain.edges()) {
            if (around_b.contains(chain.node(e.from).pos) || around_b.contains(chain.node(e.to).pos)) {
                brute.push_back(e.id);
            }
        }
        REQUIRE(mid.edge_count() == brute.size());
        CHECK(brute.size() == 2);
        CHECK(mid.successors("e1") == std::vector<std::string>{"e2"});

        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto net = random_network(seed);
            CHECK(clip_window(net, bounding_box(net)) == net);
        }
    }
}
