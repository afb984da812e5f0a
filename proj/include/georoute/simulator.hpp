#pragma once

// Ideal-MAC packet engine: flows run one after another over a static
// topology, routing state persists between packets, every transmission
// (forward or backtrack) is loss-free.

#include "georoute/routing.hpp"
#include "georoute/topology.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace georoute {

struct Flow {
    NodeId src = 0;
    NodeId dst = 0;
};

/// n_flows random (src, dst) pairs with src != dst.
std::vector<Flow> generate_flows(const Topology& t, std::size_t n_flows, RngSeed seed);

enum class DropReason { kNoRoute, kSafetyCap };

std::string to_string(DropReason r);

struct Packet {
    std::uint32_t flow_id = 0;
    std::uint32_t seq = 0;
    NodeId src = 0;
    NodeId dest_id = 0;
    Point dest_pos;
    /// Every node the packet visited, backtrack moves included.
    std::vector<NodeId> trace;
    /// Current forward path from the source; its top is the packet's location.
    std::vector<NodeId> backtrack_stack;
    std::uint32_t transmissions = 0;
};

struct FlowOutcome {
    std::uint32_t flow_id = 0;
    std::uint32_t seq = 0;
    NodeId src = 0;
    NodeId dst = 0;
    bool delivered = false;
    /// Hops of the final delivered path (detours excluded).
    int route_hops = 0;
    int total_transmissions = 0;
    int shortest_hops = 0;
    std::optional<DropReason> drop_reason;
    /// Repeated (node, next hop) forward events within the packet.
    int duplicate_forwards = 0;

    bool operator==(const FlowOutcome&) const = default;
};

class SimulationRun {
public:
    SimulationRun(const Topology& topology, RoutingConfig cfg, std::uint64_t seed = 0);

    const Topology& topology() const { return *topology_; }
    const RoutingConfig& config() const { return cfg_; }
    std::uint64_t seed() const { return seed_; }

    NodeState& state(NodeId id) { return states_.at(id); }
    const NodeState& state(NodeId id) const { return states_.at(id); }
    std::span<const NeighborView> neighbor_views(NodeId id) const { return views_.at(id); }

    const std::vector<Flow>& flows() const { return flows_; }
    const std::vector<FlowOutcome>& outcomes() const { return outcomes_; }

    /// Safety cap on transmissions per packet.
    std::uint32_t safety_cap() const { return 4 * static_cast<std::uint32_t>(topology_->size()); }

    /// Runs the flows in order, `packets_per_flow` packets each, appending
    /// outcomes.
    void run_flows(std::span<const Flow> flows, std::size_t packets_per_flow);

    /// Drives one packet to a terminal state. The packet keeps its trace.
    FlowOutcome forward_packet(Packet& packet, int shortest_hops);

    /// Hello flood: every node within k hops of origin replaces what it knows
    /// about origin with origin's current state.
    void propagate_blocked_info(NodeId origin, int k);

    void reset_state();

private:
    const std::vector<NodeId>& khood(NodeId origin, int k);

    const Topology* topology_;
    RoutingConfig cfg_;
    std::uint64_t seed_;
    std::vector<NodeState> states_;
    std::vector<std::vector<NeighborView>> views_;
    std::vector<std::vector<NodeId>> khood_cache_;
    int khood_cache_k_ = 0;
    std::vector<Flow> flows_;
    std::vector<FlowOutcome> outcomes_;
};

/// Generates n_flows random flows from `seed` and runs them.
SimulationRun run_simulation(const Topology& topology, const RoutingConfig& cfg, std::size_t n_flows,
                             std::size_t packets_per_flow, RngSeed seed);

/// Runs a given flow list (paired comparisons across policies).
SimulationRun run_simulation(const Topology& topology, const RoutingConfig& cfg, std::span<const Flow> flows,
                             std::size_t packets_per_flow, RngSeed seed);

struct RunMetrics {
    std::size_t packets = 0;
    std::size_t delivered = 0;
    std::size_t dropped = 0;
    double loss = 0.0;
    std::optional<double> route_length;
    std::optional<double> stretch;
    double transmissions = 0.0;
    std::size_t safety_cap_aborts = 0;
    std::size_t duplicate_forwards = 0;
};

RunMetrics collect_metrics(std::span<const FlowOutcome> outcomes);
RunMetrics collect_metrics(const SimulationRun& run);

/// `flow seq src dst delivered route_hops transmissions shortest drop_reason`
void write_outcome_log(std::ostream& os, std::span<const FlowOutcome> outcomes);
std::vector<FlowOutcome> read_outcome_log(std::istream& is);

} // namespace georoute
