#pragma once

// Per-node routing memory and the forwarding policies: classical greedy,
// reactive deflection with blocked-sector advertisement, and the variant that
// steers packets away from an extrapolated forbidden sector.

#include "georoute/geometry.hpp"
#include "georoute/topology.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace georoute {

enum class Policy { kGreedy, kDeflection, kDeflectionOptimized };

std::string to_string(Policy p);
Policy parse_policy(const std::string& name);

struct RoutingConfig {
    int k = 3;
    /// Sectors whose minimum distances differ by at most this much may merge.
    double delta_d = 0.0;
    /// Extra angle added on each side of a forbidden sector, radians.
    double guard_angle = 0.0;
    Policy policy = Policy::kDeflection;
    /// When false, nodes remember exact blocked destinations only and never
    /// build or advertise sectors.
    bool sector_generalization = true;
    /// When false, all routing state is cleared before each flow.
    bool persist_knowledge = true;

    void validate() const;
};

/// Minimum arc width of a recorded sector is 2 * kMinSectorHalfWidth.
inline constexpr double kMinSectorHalfWidth = 1e-6;

/// What a node knows it cannot serve: exact destinations plus sectors whose
/// apex is the node's own position.
struct BlockedKnowledge {
    std::unordered_set<Point, PointHash> exact;
    std::vector<Sector> sectors;
};

using KnowledgePtr = std::shared_ptr<const BlockedKnowledge>;

/// True iff `dest` is an exact blocked destination or lies in one of the
/// sectors (apex = `owner`).
bool is_blocked_for(const BlockedKnowledge& k, Point owner, Point dest);
bool is_blocked_for(const KnowledgePtr& k, Point owner, Point dest);

struct NeighborView {
    NodeId id = 0;
    Point position;
};

/// Contents of a hello flooded in a k-hop scope: position, neighbor list and
/// the current blocked knowledge of its origin.
struct HelloRecord {
    Point position;
    std::span<const NodeId> neighbors;
    KnowledgePtr blocked;
};

class NodeState {
public:
    NodeState() = default;
    NodeState(NodeId self, Point position) : self_id(self), position(position) {}

    NodeId self_id = 0;
    Point position;

    std::unordered_set<Point, PointHash> blocked_exact;
    std::vector<Sector> blocked_sectors;

    /// Latest knowledge learned from each direct neighbor (backtracks, hellos).
    std::unordered_map<NodeId, KnowledgePtr> neighbor_blocked;
    /// Hellos received from nodes within k hops that have blocked state.
    std::unordered_map<NodeId, HelloRecord> khood_blocked;

    bool neighbor_is_blocked(const NeighborView& n, Point dest) const;

    /// Immutable copy of the node's own blocked state, as advertised.
    KnowledgePtr published() const { return published_; }
    void publish();

    void clear();

private:
    KnowledgePtr published_;
};

struct RoutingDecision {
    enum class Kind { kForward, kBacktrack, kDrop };

    Kind kind = Kind::kDrop;
    NodeId next = 0;
    std::vector<Sector> advertised;

    static RoutingDecision forward(NodeId n) { return {Kind::kForward, n, {}}; }
    static RoutingDecision backtrack(NodeId to, std::vector<Sector> sectors) {
        return {Kind::kBacktrack, to, std::move(sectors)};
    }
    static RoutingDecision drop() { return {}; }

    bool operator==(const RoutingDecision&) const = default;
};

struct ForbiddenSector {
    Sector sector;
    std::vector<NodeId> source_set;
};

/// Classical greedy: closest neighbor strictly closer to dest, else drop.
RoutingDecision greedy_next_hop(const NodeState& state, std::span<const NeighborView> neighbors, Point dest);

/// Closest eligible neighbor (strictly closer, not known-blocked); otherwise
/// the node records itself blocked and backtracks, or drops at the source.
RoutingDecision reactive_deflection(NodeState& state, std::span<const NeighborView> neighbors, Point dest,
                                    std::optional<NodeId> previous_hop, const RoutingConfig& cfg);

/// Same as reactive_deflection, but eligible neighbors outside `forbidden`
/// win; if all are inside, the one angularly nearest a bound is chosen.
RoutingDecision modified_reactive_deflection(NodeState& state, std::span<const NeighborView> neighbors, Point dest,
                                             std::optional<NodeId> previous_hop,
                                             const std::optional<ForbiddenSector>& forbidden,
                                             const RoutingConfig& cfg);

/// Dispatches on cfg.policy; computes the forbidden sector for the optimized
/// policy from the node's k-hop knowledge.
RoutingDecision decide(NodeState& state, std::span<const NeighborView> neighbors, Point dest,
                       std::optional<NodeId> previous_hop, const RoutingConfig& cfg);

/// Result of the blocked-direction rule before clamping.
struct BlockedArc {
    Sector sector;
    /// False when the destination's own direction was not provably blocked
    /// and the minimal sliver around it was used instead.
    bool derived = true;
};

/// Widest arc around the destination direction in which no neighbor can
/// make progress toward any point at distance >= d(self, dest). A neighbor
/// not known-blocked for dest is usable within π/2 of its bearing; a
/// known-blocked neighbor is usable only where its advertised sectors fail to
/// cover the part of the ray it would improve.
BlockedArc blocked_arc(const NodeState& state, std::span<const NeighborView> neighbors, Point dest);

/// Marks the node blocked for dest, adds the blocked sector and re-normalizes
/// the sector list. Returns the new (pre-merge) sector.
Sector record_blocked(NodeState& state, Point dest, std::span<const NeighborView> neighbors,
                      const RoutingConfig& cfg);

/// Extrapolates the void facing dest from the blocked nodes the state knows
/// of within its k-hop scope.
std::optional<ForbiddenSector> compute_forbidden_sector(const NodeState& state, Point dest, const RoutingConfig& cfg);

/// Smallest arc (by width) containing every angle; a single angle gives the
/// minimum sliver. Empty input is an error.
Sector minimal_covering_sector(std::span<const Angle> angles, double d_min);

/// True iff p is strictly nearer (angularly, seen from apex) to the bounds.
bool closer_to_sector_limits(const ForbiddenSector& f, Point apex, Point p, Point q);

/// Merges to a fixpoint; canonical order (by angle_min) first.
std::vector<Sector> merge_all(std::vector<Sector> sectors, double delta_d);
void merge_all(NodeState& state, double delta_d);

} // namespace georoute
