#include "georoute/topology.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <set>
#include <sstream>

using namespace georoute;

namespace {

void check_structure(const Topology& t, const std::optional<VoidRegion>& void_region = std::nullopt) {
    for (NodeId u = 0; u < t.size(); ++u) {
        const Point p = t.position(u);
        REQUIRE(p.finite());
        REQUIRE(p.x * p.x + p.y * p.y <= t.disk_radius() * t.disk_radius());
        if (void_region)
            REQUIRE_FALSE(void_region->contains(p));
        const auto adj = t.neighbors(u);
        REQUIRE(std::is_sorted(adj.begin(), adj.end()));
        for (NodeId v : adj) {
            REQUIRE(v != u);
            REQUIRE(t.has_edge(v, u));
        }
    }
    REQUIRE(t.connected());
}

} // namespace

TEST_SUITE("topology") {

TEST_CASE("radius_for_density") {
    CHECK(analytic_radius_for_density(1000, 8, 1.0) == doctest::Approx(0.0895).epsilon(1e-3));
    CHECK(analytic_radius_for_density(1000, 20, 1.0) == doctest::Approx(0.1415).epsilon(1e-3));
    CHECK(radius_for_density(2, 1, 1.0) == 1.0);
    CHECK_THROWS_AS(radius_for_density(3, 5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(radius_for_density(1, 1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(radius_for_density(10, 0, 1.0), std::invalid_argument);

    // the border correction widens the range
    const double refined = radius_for_density(1000, 8, 1.0);
    CHECK(refined > analytic_radius_for_density(1000, 8, 1.0));
    CHECK(refined < 0.11);
    CHECK(radius_for_density(1000, 8, 1.0) == refined); // deterministic
}

TEST_CASE("generated UDG reaches the target mean degree" * doctest::timeout(120)) {
    for (double density : {8.0, 20.0}) {
        const double r = radius_for_density(1000, density, 1.0);
        double total = 0.0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            GenerationOptions opts;
            opts.fallback_to_largest_component = true;
            total += generate_udg(1000, r, std::nullopt, RngSeed{seed}, opts).mean_degree();
        }
        CHECK(total / 20 == doctest::Approx(density).epsilon(0.0625));
    }
}

TEST_CASE("generate_udg") {
    SUBCASE("two nodes within range are linked") {
        const Topology t = generate_udg(2, 2.5, std::nullopt, RngSeed{1});
        CHECK(t.edge_count() == 1);
        CHECK(t.has_edge(0, 1));
    }
    SUBCASE("edges are exactly the pairs within range") {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const std::size_t n = 200;
            const double r = analytic_radius_for_density(n, 12);
            const Topology t = generate_udg(n, r, std::nullopt, RngSeed{seed});
            check_structure(t);
            for (NodeId u = 0; u < n; ++u)
                for (NodeId v = 0; v < n; ++v)
                    if (u != v)
                        REQUIRE(t.has_edge(u, v) == (euclid_dist(t.position(u), t.position(v)) <= r));
        }
    }
    SUBCASE("same seed, same graph") {
        const double r = analytic_radius_for_density(300, 10);
        CHECK(generate_udg(300, r, std::nullopt, RngSeed{42}) == generate_udg(300, r, std::nullopt, RngSeed{42}));
        CHECK_FALSE(generate_udg(300, r, std::nullopt, RngSeed{42}) ==
                    generate_udg(300, r, std::nullopt, RngSeed{43}));
    }
    SUBCASE("void stays empty") {
        const auto hole = VoidRegion::central_square(1.0);
        CHECK(hole.half_width == doctest::Approx(0.2));
        const Topology t = generate_udg(500, analytic_radius_for_density(500, 14), hole, RngSeed{9});
        check_structure(t, hole);
    }
    SUBCASE("retry cap") {
        GenerationOptions opts;
        opts.max_retries = 3;
        CHECK_THROWS_AS(generate_udg(500, 0.01, std::nullopt, RngSeed{1}, opts), GenerationError);
        opts.fallback_to_largest_component = true;
        const Topology t = generate_udg(500, 0.05, std::nullopt, RngSeed{1}, opts);
        CHECK(t.connected());
        CHECK(t.size() < 500);
    }
    CHECK_THROWS(generate_udg(1, 1.0, std::nullopt, RngSeed{1}));
    CHECK_THROWS(generate_udg(10, 1.0, VoidRegion{{0, 0}, 0.9, 0.9}, RngSeed{1}));
}

TEST_CASE("generate_proxigraph") {
    const std::size_t n = 400;
    const double r = analytic_radius_for_density(n, 14);
    SUBCASE("zero spread reduces to a UDG") {
        const Topology p = generate_proxigraph(n, r, 0.0, std::nullopt, RngSeed{5});
        const Topology u = generate_udg(n, r, std::nullopt, RngSeed{5});
        CHECK(p.positions() == u.positions());
        for (NodeId i = 0; i < n; ++i) {
            const auto a = p.neighbors(i), b = u.neighbors(i);
            REQUIRE(std::equal(a.begin(), a.end(), b.begin(), b.end()));
        }
        CHECK(p.model() == GraphModel::kProxiGraph);
    }
    SUBCASE("edges follow the smaller of the two ranges") {
        GenerationOptions opts;
        opts.max_retries = 1;
        const std::uint64_t seed = 77;
        const double mean = analytic_radius_for_density(n, 30);
        const Topology t = generate_proxigraph(n, mean, 0.25, std::nullopt, RngSeed{seed}, opts);
        const auto ranges = draw_proxigraph_ranges(n, mean, 0.25, derive_seed(seed, 0));
        for (double x : ranges)
            REQUIRE(x > 0.0);
        for (NodeId u = 0; u < n; ++u)
            for (NodeId v = u + 1; v < n; ++v)
                REQUIRE(t.has_edge(u, v) ==
                        (euclid_dist(t.position(u), t.position(v)) <= std::min(ranges[u], ranges[v])));
    }
    SUBCASE("not a unit disk graph") {
        const Topology t = generate_proxigraph(1000, radius_for_density(1000, 8, 1.0, std::nullopt, 0.25), 0.25,
                                               std::nullopt, RngSeed{3}, GenerationOptions{1.0, 100, true});
        check_structure(t);
        // some u has a farther neighbor w while a nearer node v is not linked
        bool found = false;
        for (NodeId u = 0; u < t.size() && !found; ++u)
            for (NodeId w : t.neighbors(u)) {
                const double dw = euclid_dist(t.position(u), t.position(w));
                for (NodeId v = 0; v < t.size() && !found; ++v)
                    if (v != u && !t.has_edge(u, v) && euclid_dist(t.position(u), t.position(v)) < dw)
                        found = true;
                if (found)
                    break;
            }
        CHECK(found);
    }
    SUBCASE("deterministic") {
        const auto hole = VoidRegion::central_square(1.0);
        const double mean = radius_for_density(n, 14, 1.0, hole, 0.25);
        CHECK(generate_proxigraph(n, mean, 0.25, hole, RngSeed{8}) ==
              generate_proxigraph(n, mean, 0.25, hole, RngSeed{8}));
        check_structure(generate_proxigraph(n, mean, 0.25, hole, RngSeed{8}), hole);
    }
    CHECK_THROWS(generate_proxigraph(n, r, 1.0, std::nullopt, RngSeed{1}));
    CHECK_THROWS(generate_proxigraph(n, r, -0.1, std::nullopt, RngSeed{1}));
}

TEST_CASE("k_neighborhood") {
    const Topology path = testing::path_graph(4);
    CHECK(k_neighborhood(path, 0, 2) == std::vector<NodeId>{1, 2});
    CHECK(k_neighborhood(path, 1, 1) == std::vector<NodeId>{0, 2});
    CHECK(k_neighborhood(path, 0, 10) == std::vector<NodeId>{1, 2, 3});
    CHECK_THROWS_AS(k_neighborhood(path, 9, 1), LookupError);
    CHECK_THROWS(k_neighborhood(path, 0, 0));

    const Topology t = testing::small_udg(150, 8, 4);
    for (NodeId u = 0; u < t.size(); ++u) {
        const auto adj = t.neighbors(u);
        REQUIRE(k_neighborhood(t, u, 1) == std::vector<NodeId>(adj.begin(), adj.end()));
    }
    // layered expansion with sets as the independent traversal
    for (NodeId u = 0; u < t.size(); u += 7) {
        std::set<NodeId> reached{u}, frontier{u};
        for (int layer = 0; layer < 3; ++layer) {
            std::set<NodeId> next;
            for (NodeId f : frontier)
                for (NodeId v : t.neighbors(f))
                    if (!reached.contains(v))
                        next.insert(v);
            reached.insert(next.begin(), next.end());
            frontier = next;
        }
        reached.erase(u);
        REQUIRE(k_neighborhood(t, u, 3) == std::vector<NodeId>(reached.begin(), reached.end()));
    }
}

TEST_CASE("bfs_hops") {
    const Topology path = testing::path_graph(3);
    CHECK(bfs_hops(path, 1, 1) == 0);
    CHECK(bfs_hops(path, 0, 2) == 2);
    const Topology split = Topology::from_edges({{0, 0}, {1, 0}, {5, 0}}, {{0, 1}});
    CHECK_FALSE(bfs_hops(split, 0, 2).has_value());
    CHECK_FALSE(split.connected());

    const Topology t = testing::small_udg(30, 5, 12);
    const auto fw = testing::floyd_warshall_hops(t);
    for (NodeId u = 0; u < t.size(); ++u)
        for (NodeId v = 0; v < t.size(); ++v)
            REQUIRE(bfs_hops(t, u, v).value_or(-1) == fw[u][v]);
}

TEST_CASE("largest_component") {
    const Topology t = Topology::from_edges({{0, 0}, {1, 0}, {5, 0}, {6, 0}, {7, 0}}, {{0, 1}, {2, 3}, {3, 4}});
    const Topology g = t.largest_component();
    CHECK(g.size() == 3);
    CHECK(g.position(0) == Point{5, 0});
    CHECK(g.connected());
    CHECK(g.edge_count() == 2);
}

TEST_CASE("topology text format round-trips bit-exactly") {
    const Topology t = generate_proxigraph(300, analytic_radius_for_density(300, 12), 0.25,
                                           VoidRegion::central_square(1.0), RngSeed{21});
    std::ostringstream first;
    write_topology(first, t);
    std::istringstream in(first.str());
    const Topology back = read_topology(in);
    CHECK(back == t);
    std::ostringstream second;
    write_topology(second, back);
    CHECK(second.str() == first.str());
    CHECK(first.str().rfind("nodes=300 model=proxigraph disk_radius=1\n", 0) == 0);

    std::istringstream bad("nodes=2 model=udg disk_radius=1\n0 0 0\n1 0.5 x\n");
    CHECK_THROWS(read_topology(bad));
    std::istringstream bad_edge("nodes=2 model=udg disk_radius=1\n0 0 0\n1 0.5 0\n1 0\n");
    CHECK_THROWS(read_topology(bad_edge));
    CHECK_THROWS(Topology::from_edges({{0, 0}, {std::nan(""), 0}}, {}));
}

} // TEST_SUITE
