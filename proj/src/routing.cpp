#include "georoute/routing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace georoute {

std::string to_string(Policy p) {
    switch (p) {
    case Policy::kGreedy:
        return "greedy";
    case Policy::kDeflection:
        return "deflection";
    case Policy::kDeflectionOptimized:
        return "deflection_optimized";
    }
    return "?";
}

Policy parse_policy(const std::string& name) {
    if (name == "greedy")
        return Policy::kGreedy;
    if (name == "deflection")
        return Policy::kDeflection;
    if (name == "deflection_optimized")
        return Policy::kDeflectionOptimized;
    throw std::invalid_argument("unknown policy: " + name);
}

void RoutingConfig::validate() const {
    if (k < 1)
        throw std::invalid_argument("RoutingConfig: k must be at least 1");
    if (!(delta_d >= 0.0))
        throw std::invalid_argument("RoutingConfig: delta_d must be non-negative");
    if (!(guard_angle >= 0.0 && guard_angle <= std::numbers::pi / 4))
        throw std::invalid_argument("RoutingConfig: guard_angle must lie in [0, pi/4]");
}

bool is_blocked_for(const BlockedKnowledge& k, Point owner, Point dest) {
    if (k.exact.contains(dest))
        return true;
    if (k.sectors.empty() || dest == owner)
        return false;
    // same test as sector_contains, with the bearing computed once
    const double dist = euclid_dist(owner, dest);
    const Angle bearing = oriented_angle(owner, dest);
    return std::any_of(k.sectors.begin(), k.sectors.end(),
                       [&](const Sector& s) { return dist >= s.d_min() && s.arc_contains(bearing); });
}

bool is_blocked_for(const KnowledgePtr& k, Point owner, Point dest) {
    return k && is_blocked_for(*k, owner, dest);
}

bool NodeState::neighbor_is_blocked(const NeighborView& n, Point dest) const {
    const auto it = neighbor_blocked.find(n.id);
    return it != neighbor_blocked.end() && is_blocked_for(it->second, n.position, dest);
}

void NodeState::publish() {
    published_ = std::make_shared<const BlockedKnowledge>(BlockedKnowledge{blocked_exact, blocked_sectors});
}

void NodeState::clear() {
    blocked_exact.clear();
    blocked_sectors.clear();
    neighbor_blocked.clear();
    khood_blocked.clear();
    published_.reset();
}

// ---------------------------------------------------------------------------
// Sector lists

namespace {

bool canonical_less(const Sector& a, const Sector& b) {
    if (a.angle_min().radians() != b.angle_min().radians())
        return a.angle_min().radians() < b.angle_min().radians();
    if (a.width() != b.width())
        return a.width() < b.width();
    return a.d_min() < b.d_min();
}

// Adds `s` to an already merge-normalized list, keeping it normalized.
void insert_normalized(std::vector<Sector>& list, Sector s, double delta_d) {
    for (bool merged = true; merged;) {
        merged = false;
        for (auto it = list.begin(); it != list.end(); ++it) {
            if (auto m = try_merge(s, *it, delta_d)) {
                s = *m;
                list.erase(it);
                merged = true;
                break;
            }
        }
    }
    list.insert(std::upper_bound(list.begin(), list.end(), s, canonical_less), s);
}

} // namespace

std::vector<Sector> merge_all(std::vector<Sector> sectors, double delta_d) {
    std::sort(sectors.begin(), sectors.end(), canonical_less);
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 0; i < sectors.size() && !changed; ++i)
            for (std::size_t j = i + 1; j < sectors.size(); ++j)
                if (auto m = try_merge(sectors[i], sectors[j], delta_d)) {
                    sectors[i] = *m;
                    sectors.erase(sectors.begin() + static_cast<std::ptrdiff_t>(j));
                    std::sort(sectors.begin(), sectors.end(), canonical_less);
                    changed = true;
                    break;
                }
    }
    return sectors;
}

void merge_all(NodeState& state, double delta_d) {
    state.blocked_sectors = merge_all(std::move(state.blocked_sectors), delta_d);
}

// ---------------------------------------------------------------------------
// Blocked-sector construction

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;
// Angular step used to locate where a blocked neighbor's coverage ends.
constexpr double kCoverageStep = 0.005;

Point along(Point apex, Angle theta, double t) {
    return Point{apex.x + t * std::cos(theta.radians()), apex.y + t * std::sin(theta.radians())};
}

// Whether every point of the ray apex + t*u(theta), t >= t_min, that is closer
// to `owner` than to `apex` lies inside one of the owner's sectors.
bool ray_covered(const BlockedKnowledge& k, Point owner, Point apex, Angle theta, double t_min) {
    const double ux = std::cos(theta.radians());
    const double uy = std::sin(theta.radians());
    const double vx = owner.x - apex.x;
    const double vy = owner.y - apex.y;
    const double vu = vx * ux + vy * uy;
    if (vu <= 0.0)
        return true; // owner never improves on this ray
    const double v2 = vx * vx + vy * vy;
    const double t0 = std::max(t_min, v2 / (2.0 * vu));
    const Point p0 = along(apex, theta, t0);
    if (p0 == owner)
        return false;
    // closest approach of the ray portion to the owner
    const double nearest = t0 >= vu ? euclid_dist(owner, p0) : std::sqrt(std::max(0.0, v2 - vu * vu));
    const Angle a0 = oriented_angle(owner, p0);

    for (const Sector& s : k.sectors) {
        if (nearest < s.d_min())
            continue;
        if (s.is_full())
            return true;
        if (!s.arc_contains(a0) || !s.arc_contains(theta))
            continue;
        auto offset = [&](Angle a) {
            const double off = s.angle_min().ccw_to(a);
            return off >= kTwoPi - kArcEpsilon ? 0.0 : off;
        };
        // the swept bearings form the short arc a0 -> theta; it must be the
        // in-sector stretch between the two offsets
        if (std::abs(offset(a0) - offset(theta)) <= std::numbers::pi)
            return true;
    }
    return false;
}

// Distance (radians) from `theta_d` to the first direction, scanning in
// `sign` direction up to `limit`, where the ray stops being covered.
double coverage_extent(const BlockedKnowledge& k, Point owner, Point apex, Angle theta_d, double t_min, double sign,
                       double limit) {
    double covered = 0.0;
    for (double delta = kCoverageStep; delta < limit + kCoverageStep; delta += kCoverageStep) {
        const double probe = std::min(delta, limit);
        if (!ray_covered(k, owner, apex, theta_d.rotated(sign * probe), t_min)) {
            double lo = covered, hi = probe;
            for (int i = 0; i < 40; ++i) {
                const double mid = 0.5 * (lo + hi);
                if (ray_covered(k, owner, apex, theta_d.rotated(sign * mid), t_min))
                    lo = mid;
                else
                    hi = mid;
            }
            return lo;
        }
        covered = probe;
        if (probe >= limit)
            break;
    }
    return limit;
}

} // namespace

BlockedArc blocked_arc(const NodeState& state, std::span<const NeighborView> neighbors, Point dest) {
    const Point self = state.position;
    const Angle theta_d = oriented_angle(self, dest);
    const double d = euclid_dist(self, dest);
    const auto sliver = [&] {
        return BlockedArc{Sector::from_width(theta_d.rotated(-kMinSectorHalfWidth), 2 * kMinSectorHalfWidth, d),
                          false};
    };

    double ccw = kTwoPi;
    double cw = kTwoPi;
    std::vector<std::pair<const BlockedKnowledge*, Point>> blocked;

    for (const NeighborView& n : neighbors) {
        const auto it = state.neighbor_blocked.find(n.id);
        if (it != state.neighbor_blocked.end() && it->second && is_blocked_for(*it->second, n.position, dest)) {
            blocked.emplace_back(it->second.get(), n.position);
            continue;
        }
        // usable on the open half-circle of bearings around its own bearing
        const Angle phi = oriented_angle(self, n.position);
        if (theta_d.circular_distance(phi) < kHalfPi)
            return sliver();
        ccw = std::min(ccw, theta_d.ccw_to(phi.rotated(-kHalfPi)));
        cw = std::min(cw, phi.rotated(kHalfPi).ccw_to(theta_d));
    }

    for (const auto& [k, pos] : blocked) {
        if (!ray_covered(*k, pos, self, theta_d, d))
            return sliver();
        if (ccw + cw >= kTwoPi)
            ccw = std::min(ccw, kTwoPi - cw); // bound the scan
        ccw = coverage_extent(*k, pos, self, theta_d, d, +1.0, ccw);
        cw = coverage_extent(*k, pos, self, theta_d, d, -1.0, cw);
    }

    const double width = ccw + cw;
    if (width >= kTwoPi)
        return {Sector::full(d), true};
    if (width < 2 * kMinSectorHalfWidth)
        return {sliver().sector, true};
    return {Sector::from_width(theta_d.rotated(-cw), width, d), true};
}

Sector record_blocked(NodeState& state, Point dest, std::span<const NeighborView> neighbors,
                      const RoutingConfig& cfg) {
    const Sector s = blocked_arc(state, neighbors, dest).sector;
    state.blocked_exact.insert(dest);
    if (cfg.sector_generalization)
        insert_normalized(state.blocked_sectors, s, cfg.delta_d);
    state.publish();
    return s;
}

// ---------------------------------------------------------------------------
// Forwarding policies

namespace {

RoutingDecision become_blocked(NodeState& state, std::span<const NeighborView> neighbors, Point dest,
                               std::optional<NodeId> previous_hop, const RoutingConfig& cfg) {
    record_blocked(state, dest, neighbors, cfg);
    if (!previous_hop)
        return RoutingDecision::drop();
    return RoutingDecision::backtrack(*previous_hop, state.blocked_sectors);
}

} // namespace

RoutingDecision greedy_next_hop(const NodeState& state, std::span<const NeighborView> neighbors, Point dest) {
    double best = euclid_dist(state.position, dest);
    std::optional<NodeId> next;
    for (const NeighborView& n : neighbors) {
        const double dn = euclid_dist(n.position, dest);
        if (dn < best) {
            best = dn;
            next = n.id;
        }
    }
    return next ? RoutingDecision::forward(*next) : RoutingDecision::drop();
}

RoutingDecision reactive_deflection(NodeState& state, std::span<const NeighborView> neighbors, Point dest,
                                    std::optional<NodeId> previous_hop, const RoutingConfig& cfg) {
    return modified_reactive_deflection(state, neighbors, dest, previous_hop, std::nullopt, cfg);
}

RoutingDecision modified_reactive_deflection(NodeState& state, std::span<const NeighborView> neighbors, Point dest,
                                             std::optional<NodeId> previous_hop,
                                             const std::optional<ForbiddenSector>& forbidden,
                                             const RoutingConfig& cfg) {
    const double own = euclid_dist(state.position, dest);
    std::optional<NodeId> outside;
    double outside_dist = std::numeric_limits<double>::infinity();
    std::optional<NodeId> inside;
    double inside_bound_dist = std::numeric_limits<double>::infinity();

    for (const NeighborView& n : neighbors) {
        const double dn = euclid_dist(n.position, dest);
        if (!(dn < own) || state.neighbor_is_blocked(n, dest))
            continue;
        if (forbidden && sector_contains(forbidden->sector, state.position, n.position)) {
            const double b = angular_distance_to_bounds(forbidden->sector, oriented_angle(state.position, n.position));
            if (b < inside_bound_dist) {
                inside_bound_dist = b;
                inside = n.id;
            }
        } else if (dn < outside_dist) {
            outside_dist = dn;
            outside = n.id;
        }
    }
    if (outside)
        return RoutingDecision::forward(*outside);
    if (inside)
        return RoutingDecision::forward(*inside);
    return become_blocked(state, neighbors, dest, previous_hop, cfg);
}

RoutingDecision decide(NodeState& state, std::span<const NeighborView> neighbors, Point dest,
                       std::optional<NodeId> previous_hop, const RoutingConfig& cfg) {
    switch (cfg.policy) {
    case Policy::kGreedy:
        return greedy_next_hop(state, neighbors, dest);
    case Policy::kDeflection:
        return reactive_deflection(state, neighbors, dest, previous_hop, cfg);
    case Policy::kDeflectionOptimized:
        return modified_reactive_deflection(state, neighbors, dest, previous_hop,
                                            compute_forbidden_sector(state, dest, cfg), cfg);
    }
    return RoutingDecision::drop();
}

// ---------------------------------------------------------------------------
// Forbidden sector

Sector minimal_covering_sector(std::span<const Angle> angles, double d_min) {
    if (angles.empty())
        throw std::invalid_argument("minimal_covering_sector: no angles");
    std::vector<double> sorted;
    sorted.reserve(angles.size());
    for (Angle a : angles)
        sorted.push_back(a.radians());
    std::sort(sorted.begin(), sorted.end());
    // the arc is the complement of the largest gap between consecutive bearings
    double gap = kTwoPi - (sorted.back() - sorted.front());
    std::size_t start = 0;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        const double g = sorted[i] - sorted[i - 1];
        if (g > gap) {
            gap = g;
            start = i;
        }
    }
    const double width = kTwoPi - gap;
    if (width < 2 * kMinSectorHalfWidth)
        return Sector::from_width(Angle(sorted[start] - kMinSectorHalfWidth), 2 * kMinSectorHalfWidth, d_min);
    return Sector::from_width(Angle(sorted[start]), width, d_min);
}

std::optional<ForbiddenSector> compute_forbidden_sector(const NodeState& state, Point dest, const RoutingConfig& cfg) {
    const Point self = state.position;
    const Angle theta_d = oriented_angle(self, dest);
    auto qualifies = [&](NodeId id) -> const HelloRecord* {
        const auto it = state.khood_blocked.find(id);
        if (it == state.khood_blocked.end() || it->first == state.self_id || it->second.position == self)
            return nullptr;
        return is_blocked_for(it->second.blocked, it->second.position, dest) ? &it->second : nullptr;
    };

    // blocked node best aligned with the destination direction
    std::optional<NodeId> seed;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [id, rec] : state.khood_blocked) {
        if (!qualifies(id))
            continue;
        const double dev = theta_d.circular_distance(oriented_angle(self, rec.position));
        if (dev < best || (dev == best && id < *seed)) {
            best = dev;
            seed = id;
        }
    }
    if (!seed)
        return std::nullopt;

    // connected set of blocked nodes containing the seed
    std::vector<NodeId> members{*seed};
    std::unordered_set<NodeId> in_set{*seed};
    for (std::size_t head = 0; head < members.size(); ++head) {
        const HelloRecord* rec = qualifies(members[head]);
        for (NodeId nb : rec->neighbors)
            if (!in_set.contains(nb) && qualifies(nb)) {
                in_set.insert(nb);
                members.push_back(nb);
            }
    }
    std::sort(members.begin(), members.end());

    std::vector<Angle> bearings;
    double d_min = std::numeric_limits<double>::infinity();
    for (NodeId m : members) {
        const Point p = state.khood_blocked.at(m).position;
        bearings.push_back(oriented_angle(self, p));
        d_min = std::min(d_min, euclid_dist(self, p));
    }
    Sector arc = minimal_covering_sector(bearings, d_min);
    if (cfg.guard_angle > 0.0)
        arc = Sector::from_width(arc.angle_min().rotated(-cfg.guard_angle), arc.width() + 2 * cfg.guard_angle, d_min);
    return ForbiddenSector{arc, std::move(members)};
}

bool closer_to_sector_limits(const ForbiddenSector& f, Point apex, Point p, Point q) {
    return angular_distance_to_bounds(f.sector, oriented_angle(apex, p)) <
           angular_distance_to_bounds(f.sector, oriented_angle(apex, q));
}

} // namespace georoute
