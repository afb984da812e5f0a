#include "georoute/simulator.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <sstream>

using namespace georoute;

namespace {

RoutingConfig with_policy(Policy p, int k = 3) {
    RoutingConfig cfg;
    cfg.policy = p;
    cfg.k = k;
    return cfg;
}

// Whether some node of t is blocked (no strictly closer neighbor) for some destination.
bool has_blocked_pair(const Topology& t) {
    for (NodeId d = 0; d < t.size(); ++d)
        for (NodeId u = 0; u < t.size(); ++u) {
            if (u == d)
                continue;
            const double du = euclid_dist(t.position(u), t.position(d));
            const auto adj = t.neighbors(u);
            if (std::none_of(adj.begin(), adj.end(),
                             [&](NodeId v) { return euclid_dist(t.position(v), t.position(d)) < du; }))
                return true;
        }
    return false;
}

} // namespace

TEST_SUITE("simulator") {

TEST_CASE("walk around a dead end") {
    const Topology t = Topology::from_edges({{0, 0}, {1, 0.3}, {0.9, -0.9}, {5, -2}, {10, 0}},
                                            {{0, 1}, {0, 2}, {2, 3}, {3, 4}}, 20.0);
    SimulationRun run(t, RoutingConfig{});
    const std::vector<Flow> flows{{0, 4}};
    run.run_flows(flows, 2);
    REQUIRE(run.outcomes().size() == 2);
    const FlowOutcome& first = run.outcomes()[0];
    CHECK(first.delivered);
    CHECK(first.route_hops == 3);
    CHECK(first.total_transmissions == 5);
    CHECK(first.shortest_hops == 3);
    CHECK(first.duplicate_forwards == 0);
    // the node that backtracked is known blocked at the source
    CHECK(is_blocked_for(run.state(0).neighbor_blocked.at(1), t.position(1), t.position(4)));
    const FlowOutcome& second = run.outcomes()[1];
    CHECK(second.delivered);
    CHECK(second.total_transmissions == 3);

    Packet p;
    p.src = 0;
    p.dest_id = 4;
    p.dest_pos = t.position(4);
    SimulationRun fresh(t, RoutingConfig{});
    fresh.forward_packet(p, 3);
    CHECK(p.trace == std::vector<NodeId>{0, 1, 0, 2, 3, 4});
    CHECK(p.backtrack_stack == std::vector<NodeId>{0, 2, 3, 4});
    CHECK(p.transmissions == p.trace.size() - 1);
}

TEST_CASE("unreachable destination ends in a no-route drop") {
    // the destination sits behind the source; no neighbor ever improves
    const Topology t = Topology::from_edges({{0, 0}, {1, 0}, {2, 0}, {-1, 5}}, {{0, 1}, {1, 2}, {2, 3}}, 10.0);
    for (Policy p : {Policy::kGreedy, Policy::kDeflection, Policy::kDeflectionOptimized}) {
        SimulationRun run(t, with_policy(p));
        const std::vector<Flow> flows{{0, 3}};
        run.run_flows(flows, 3);
        for (const auto& o : run.outcomes()) {
            CHECK_FALSE(o.delivered);
            CHECK(o.drop_reason == DropReason::kNoRoute);
        }
    }
}

TEST_CASE("adjacent pairs are delivered in one hop") {
    const Topology t = testing::small_udg(80, 8, 3);
    SimulationRun run(t, RoutingConfig{});
    std::vector<Flow> flows;
    for (NodeId u = 0; u < t.size(); u += 5)
        flows.push_back({u, t.neighbors(u).front()});
    run.run_flows(flows, 10);
    for (const auto& o : run.outcomes()) {
        REQUIRE(o.delivered);
        REQUIRE(o.route_hops == 1);
        REQUIRE(o.total_transmissions == 1);
    }
    const auto m = collect_metrics(run);
    CHECK(*m.stretch == 1.0);
}

TEST_CASE("exact blocking delivers iff a strictly improving path exists" * doctest::timeout(120)) {
    RoutingConfig cfg;
    cfg.sector_generalization = false;
    int checked = 0, undeliverable = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const Topology t = testing::small_udg(50, 5, seed);
        SimulationRun run(t, cfg);
        const auto flows = generate_flows(t, 60, RngSeed{seed});
        run.run_flows(flows, 1);
        for (const auto& o : run.outcomes()) {
            const bool expect = testing::monotone_reachable(t, o.src, o.dst);
            REQUIRE(o.delivered == expect);
            undeliverable += expect ? 0 : 1;
            ++checked;
        }
    }
    CHECK(checked == 2400);
    CHECK(undeliverable > 0);
}

TEST_CASE("per-packet properties on void topologies" * doctest::timeout(300)) {
    const auto hole = VoidRegion::central_square(1.0);
    for (Policy policy : {Policy::kDeflection, Policy::kDeflectionOptimized}) {
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            const Topology t = testing::small_udg(300, 9, seed, hole);
            const auto flows = generate_flows(t, 150, RngSeed{seed});
            SimulationRun run(t, with_policy(policy));
            // snapshot sizes to check that blocked state only grows
            std::vector<std::size_t> exact_before(t.size(), 0);
            for (std::size_t f = 0; f < flows.size(); ++f) {
                run.run_flows(std::span(flows).subspan(f, 1), 5);
                for (NodeId u = 0; u < t.size(); ++u) {
                    REQUIRE(run.state(u).blocked_exact.size() >= exact_before[u]);
                    exact_before[u] = run.state(u).blocked_exact.size();
                }
            }
            REQUIRE(run.outcomes().size() == flows.size() * 5);
            const auto fw = testing::floyd_warshall_hops(t);
            for (const auto& o : run.outcomes()) {
                REQUIRE(o.duplicate_forwards == 0);
                REQUIRE(o.drop_reason != DropReason::kSafetyCap);
                REQUIRE(o.shortest_hops == fw[o.src][o.dst]);
                if (o.delivered)
                    REQUIRE(o.route_hops >= o.shortest_hops);
                else
                    REQUIRE(o.drop_reason == DropReason::kNoRoute);
            }
            const auto m = collect_metrics(run);
            CHECK(m.delivered + m.dropped == m.packets);
        }
    }
}

TEST_CASE("delivered paths are valid and strictly improving in exact mode") {
    RoutingConfig cfg;
    cfg.sector_generalization = false;
    const Topology t = testing::small_udg(200, 7, 8, VoidRegion::central_square(1.0));
    SimulationRun run(t, cfg);
    const auto flows = generate_flows(t, 200, RngSeed{8});
    for (const Flow& f : flows) {
        Packet p;
        p.src = f.src;
        p.dest_id = f.dst;
        p.dest_pos = t.position(f.dst);
        const auto o = run.forward_packet(p, 0);
        REQUIRE(p.transmissions == p.trace.size() - 1);
        if (!o.delivered)
            continue;
        const auto& path = p.backtrack_stack;
        REQUIRE(path.front() == f.src);
        REQUIRE(path.back() == f.dst);
        for (std::size_t i = 1; i < path.size(); ++i) {
            REQUIRE(t.has_edge(path[i - 1], path[i]));
            REQUIRE(euclid_dist(t.position(path[i]), p.dest_pos) < euclid_dist(t.position(path[i - 1]), p.dest_pos));
        }
        // the delivered path is a subsequence of the trace
        std::size_t j = 0;
        for (NodeId v : p.trace)
            if (j < path.size() && v == path[j])
                ++j;
        REQUIRE(j == path.size());
    }
}

TEST_CASE("greedy and deflection agree on void-free instances") {
    int compared = 0;
    for (std::uint64_t seed = 0; compared < 3 && seed < 400; ++seed) {
        const Topology t = testing::small_udg(40, 12, seed);
        if (has_blocked_pair(t))
            continue;
        ++compared;
        const auto flows = generate_flows(t, 100, RngSeed{seed});
        const auto g = run_simulation(t, with_policy(Policy::kGreedy), flows, 3, RngSeed{seed});
        const auto d = run_simulation(t, with_policy(Policy::kDeflection), flows, 3, RngSeed{seed});
        REQUIRE(g.outcomes() == d.outcomes());
        CHECK(collect_metrics(g).loss == 0.0);
    }
    CHECK(compared == 3);
}

TEST_CASE("later packets of a flow need no more transmissions") {
    const auto hole = VoidRegion::central_square(1.0);
    int flows_with_detours = 0;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const Topology t = testing::small_udg(300, 9, 100 + seed, hole);
        const auto run = run_simulation(t, RoutingConfig{}, 100, 10, RngSeed{seed});
        const auto& out = run.outcomes();
        for (std::size_t f = 0; f < 100; ++f) {
            const auto first = out.begin() + static_cast<std::ptrdiff_t>(f * 10);
            for (auto it = first + 1; it != first + 10; ++it)
                REQUIRE(it->total_transmissions <= (it - 1)->total_transmissions);
            if (first->total_transmissions > (first + 9)->total_transmissions)
                ++flows_with_detours;
        }
    }
    CHECK(flows_with_detours > 0);
}

TEST_CASE("propagate_blocked_info") {
    const Topology path = testing::path_graph(5);
    SimulationRun run(path, RoutingConfig{});
    NodeState& origin = run.state(2);
    origin.blocked_sectors.push_back(Sector::from_width(Angle(0.0), 1.0, 1.0));
    origin.publish();

    run.propagate_blocked_info(2, 1);
    CHECK(run.state(1).khood_blocked.contains(2));
    CHECK(run.state(3).khood_blocked.contains(2));
    CHECK(run.state(1).neighbor_blocked.contains(2));
    CHECK_FALSE(run.state(0).khood_blocked.contains(2));
    CHECK_FALSE(run.state(2).khood_blocked.contains(2));

    SUBCASE("idempotent") {
        const auto before = run.state(1).khood_blocked.at(2).blocked;
        run.propagate_blocked_info(2, 1);
        CHECK(run.state(1).khood_blocked.size() == 1);
        CHECK(run.state(1).khood_blocked.at(2).blocked == before);
        CHECK(run.state(1).neighbor_blocked.at(2) == before);
    }
    SUBCASE("two hops out, the forbidden sector sees the origin") {
        origin.blocked_sectors.assign(1, Sector::full(0.0));
        origin.publish();
        run.propagate_blocked_info(2, 2);
        CHECK(run.state(0).khood_blocked.contains(2));
        CHECK_FALSE(run.state(0).neighbor_blocked.contains(2));
        const auto f = compute_forbidden_sector(run.state(0), path.position(4), RoutingConfig{});
        REQUIRE(f);
        CHECK(f->source_set == std::vector<NodeId>{2});
        // replacement, not accumulation
        CHECK(run.state(1).khood_blocked.at(2).blocked->sectors.size() == 1);
    }
}

TEST_CASE("persist_knowledge switch") {
    const Topology t = Topology::from_edges({{0, 0}, {1, 0.3}, {0.9, -0.9}, {5, -2}, {10, 0}},
                                            {{0, 1}, {0, 2}, {2, 3}, {3, 4}}, 20.0);
    RoutingConfig cfg;
    cfg.persist_knowledge = false;
    const std::vector<Flow> flows{{0, 4}, {0, 4}};
    const auto run = run_simulation(t, cfg, flows, 2, RngSeed{0});
    REQUIRE(run.outcomes().size() == 4);
    CHECK(run.outcomes()[0].total_transmissions == 5);
    CHECK(run.outcomes()[1].total_transmissions == 3);
    CHECK(run.outcomes()[2].total_transmissions == 5); // state was cleared
    cfg.persist_knowledge = true;
    CHECK(run_simulation(t, cfg, flows, 2, RngSeed{0}).outcomes()[2].total_transmissions == 3);
}

TEST_CASE("metrics") {
    std::vector<FlowOutcome> outs(10);
    for (std::size_t i = 0; i < outs.size(); ++i) {
        outs[i].seq = static_cast<std::uint32_t>(i);
        outs[i].delivered = i >= 3;
        outs[i].route_hops = outs[i].delivered ? 2 : 0;
        outs[i].shortest_hops = 1;
        outs[i].total_transmissions = 2;
        if (!outs[i].delivered)
            outs[i].drop_reason = DropReason::kNoRoute;
    }
    auto m = collect_metrics(outs);
    CHECK(m.loss == doctest::Approx(0.3));
    CHECK(*m.route_length == 2.0);
    CHECK(*m.stretch == 2.0);
    CHECK(m.transmissions == 2.0);

    for (auto& o : outs)
        o.delivered = false;
    m = collect_metrics(outs);
    CHECK_FALSE(m.route_length);
    CHECK_FALSE(m.stretch);
    CHECK(m.loss == 1.0);
}

TEST_CASE("outcome log round trip and determinism") {
    const Topology t = testing::small_udg(200, 7, 5, VoidRegion::central_square(1.0));
    const auto run = run_simulation(t, with_policy(Policy::kDeflectionOptimized), 80, 4, RngSeed{5});
    std::ostringstream log;
    write_outcome_log(log, run.outcomes());
    std::istringstream in(log.str());
    const auto back = read_outcome_log(in);
    REQUIRE(back == run.outcomes());
    const auto a = collect_metrics(back), b = collect_metrics(run);
    CHECK(a.loss == b.loss);
    CHECK(a.route_length == b.route_length);
    CHECK(a.stretch == b.stretch);
    CHECK(a.transmissions == b.transmissions);

    const auto again = run_simulation(t, with_policy(Policy::kDeflectionOptimized), 80, 4, RngSeed{5});
    std::ostringstream log2;
    write_outcome_log(log2, again.outcomes());
    CHECK(log2.str() == log.str());

    std::istringstream bad("0 0 1 2 1 3 3 2 lost\n");
    CHECK_THROWS(read_outcome_log(bad));
}

TEST_CASE("generate_flows") {
    const Topology t = testing::path_graph(3);
    const auto flows = generate_flows(t, 500, RngSeed{1});
    CHECK(flows.size() == 500);
    for (const Flow& f : flows) {
        REQUIRE(f.src != f.dst);
        REQUIRE(f.dst < 3);
    }
    CHECK_THROWS(generate_flows(testing::path_graph(1), 1, RngSeed{1}));
    SimulationRun run(t, RoutingConfig{});
    const std::vector<Flow> bad{{1, 1}};
    CHECK_THROWS(run.run_flows(bad, 1));
}

} // TEST_SUITE
