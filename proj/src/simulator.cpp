#include "georoute/simulator.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_set>

namespace georoute {

std::vector<Flow> generate_flows(const Topology& t, std::size_t n_flows, RngSeed seed) {
    if (t.size() < 2)
        throw std::invalid_argument("generate_flows: need at least 2 nodes");
    std::mt19937_64 rng(derive_seed(seed.value, 0x666c6f77ULL));
    std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(t.size() - 1));
    std::vector<Flow> flows;
    flows.reserve(n_flows);
    while (flows.size() < n_flows) {
        Flow f{pick(rng), pick(rng)};
        if (f.src != f.dst)
            flows.push_back(f);
    }
    return flows;
}

std::string to_string(DropReason r) {
    return r == DropReason::kNoRoute ? "no-route" : "safety-cap";
}

SimulationRun::SimulationRun(const Topology& topology, RoutingConfig cfg, std::uint64_t seed)
    : topology_(&topology), cfg_(cfg), seed_(seed) {
    cfg_.validate();
    const auto n = topology.size();
    states_.reserve(n);
    views_.resize(n);
    for (NodeId u = 0; u < n; ++u) {
        states_.emplace_back(u, topology.position(u));
        for (NodeId v : topology.neighbors(u))
            views_[u].push_back(NeighborView{v, topology.position(v)});
    }
}

void SimulationRun::reset_state() {
    for (auto& s : states_)
        s.clear();
}

const std::vector<NodeId>& SimulationRun::khood(NodeId origin, int k) {
    if (khood_cache_k_ != k) {
        khood_cache_.assign(topology_->size(), {});
        khood_cache_k_ = k;
    }
    auto& entry = khood_cache_.at(origin);
    if (entry.empty())
        entry = k_neighborhood(*topology_, origin, k);
    return entry;
}

void SimulationRun::propagate_blocked_info(NodeId origin, int k) {
    const NodeState& src = states_.at(origin);
    const HelloRecord hello{src.position, topology_->neighbors(origin), src.published()};
    const auto direct = topology_->neighbors(origin);
    for (NodeId v : khood(origin, k)) {
        NodeState& st = states_[v];
        st.khood_blocked[origin] = hello;
        if (std::binary_search(direct.begin(), direct.end(), v))
            st.neighbor_blocked[origin] = hello.blocked;
    }
}

FlowOutcome SimulationRun::forward_packet(Packet& packet, int shortest_hops) {
    FlowOutcome out;
    out.flow_id = packet.flow_id;
    out.seq = packet.seq;
    out.src = packet.src;
    out.dst = packet.dest_id;
    out.shortest_hops = shortest_hops;

    packet.trace.assign(1, packet.src);
    packet.backtrack_stack.assign(1, packet.src);
    packet.transmissions = 0;
    std::unordered_set<std::uint64_t> forward_events;

    for (;;) {
        const NodeId cur = packet.backtrack_stack.back();
        if (cur == packet.dest_id) {
            out.delivered = true;
            out.route_hops = static_cast<int>(packet.backtrack_stack.size()) - 1;
            break;
        }
        if (packet.transmissions >= safety_cap()) {
            out.drop_reason = DropReason::kSafetyCap;
            break;
        }
        std::optional<NodeId> prev;
        if (packet.backtrack_stack.size() >= 2)
            prev = packet.backtrack_stack[packet.backtrack_stack.size() - 2];

        const RoutingDecision dec = decide(states_[cur], views_[cur], packet.dest_pos, prev, cfg_);
        if (dec.kind == RoutingDecision::Kind::kDrop) {
            out.drop_reason = DropReason::kNoRoute;
            break;
        }
        ++packet.transmissions;
        if (dec.kind == RoutingDecision::Kind::kForward) {
            if (!forward_events.insert((std::uint64_t{cur} << 32) | dec.next).second)
                ++out.duplicate_forwards;
            packet.backtrack_stack.push_back(dec.next);
            packet.trace.push_back(dec.next);
        } else {
            packet.backtrack_stack.pop_back();
            packet.trace.push_back(dec.next);
            // the backtracked packet carries the sender's blocked state
            states_[dec.next].neighbor_blocked[cur] = states_[cur].published();
            propagate_blocked_info(cur, cfg_.k);
        }
    }
    out.total_transmissions = static_cast<int>(packet.transmissions);
    return out;
}

void SimulationRun::run_flows(std::span<const Flow> flows, std::size_t packets_per_flow) {
    for (const Flow& f : flows) {
        if (f.src == f.dst || f.src >= topology_->size() || f.dst >= topology_->size())
            throw std::invalid_argument("run_flows: invalid flow endpoints");
        if (!cfg_.persist_knowledge)
            reset_state();
        const auto flow_id = static_cast<std::uint32_t>(flows_.size());
        flows_.push_back(f);
        const int shortest = bfs_hops(*topology_, f.src, f.dst).value_or(-1);
        for (std::size_t s = 0; s < packets_per_flow; ++s) {
            Packet p;
            p.flow_id = flow_id;
            p.seq = static_cast<std::uint32_t>(s);
            p.src = f.src;
            p.dest_id = f.dst;
            p.dest_pos = topology_->position(f.dst);
            outcomes_.push_back(forward_packet(p, shortest));
        }
    }
}

SimulationRun run_simulation(const Topology& topology, const RoutingConfig& cfg, std::size_t n_flows,
                             std::size_t packets_per_flow, RngSeed seed) {
    const auto flows = generate_flows(topology, n_flows, seed);
    return run_simulation(topology, cfg, flows, packets_per_flow, seed);
}

SimulationRun run_simulation(const Topology& topology, const RoutingConfig& cfg, std::span<const Flow> flows,
                             std::size_t packets_per_flow, RngSeed seed) {
    SimulationRun run(topology, cfg, seed.value);
    run.run_flows(flows, packets_per_flow);
    return run;
}

RunMetrics collect_metrics(std::span<const FlowOutcome> outcomes) {
    RunMetrics m;
    double hops = 0.0, stretch = 0.0, tx = 0.0;
    for (const FlowOutcome& o : outcomes) {
        ++m.packets;
        tx += o.total_transmissions;
        m.duplicate_forwards += static_cast<std::size_t>(o.duplicate_forwards);
        if (o.drop_reason == DropReason::kSafetyCap)
            ++m.safety_cap_aborts;
        if (o.delivered) {
            ++m.delivered;
            hops += o.route_hops;
            stretch += static_cast<double>(o.route_hops) / static_cast<double>(o.shortest_hops);
        }
    }
    m.dropped = m.packets - m.delivered;
    if (m.packets > 0) {
        m.loss = static_cast<double>(m.dropped) / static_cast<double>(m.packets);
        m.transmissions = tx / static_cast<double>(m.packets);
    }
    if (m.delivered > 0) {
        m.route_length = hops / static_cast<double>(m.delivered);
        m.stretch = stretch / static_cast<double>(m.delivered);
    }
    return m;
}

RunMetrics collect_metrics(const SimulationRun& run) {
    return collect_metrics(run.outcomes());
}

void write_outcome_log(std::ostream& os, std::span<const FlowOutcome> outcomes) {
    for (const FlowOutcome& o : outcomes)
        os << o.flow_id << ' ' << o.seq << ' ' << o.src << ' ' << o.dst << ' ' << (o.delivered ? 1 : 0) << ' '
           << o.route_hops << ' ' << o.total_transmissions << ' ' << o.shortest_hops << ' '
           << (o.drop_reason ? to_string(*o.drop_reason) : "-") << '\n';
}

std::vector<FlowOutcome> read_outcome_log(std::istream& is) {
    std::vector<FlowOutcome> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        std::istringstream ls(line);
        FlowOutcome o;
        int delivered = 0;
        std::string reason;
        if (!(ls >> o.flow_id >> o.seq >> o.src >> o.dst >> delivered >> o.route_hops >> o.total_transmissions >>
              o.shortest_hops >> reason))
            throw std::invalid_argument("outcome log: malformed line '" + line + "'");
        o.delivered = delivered != 0;
        if (reason == "no-route")
            o.drop_reason = DropReason::kNoRoute;
        else if (reason == "safety-cap")
            o.drop_reason = DropReason::kSafetyCap;
        else if (reason != "-")
            throw std::invalid_argument("outcome log: unknown drop reason '" + reason + "'");
        out.push_back(o);
    }
    return out;
}

} // namespace georoute
