#include "georoute/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <iostream>
#include <mutex>

namespace georoute {

std::size_t PointHash::operator()(const Point& p) const noexcept {
    auto h = std::bit_cast<std::uint64_t>(p.x + 0.0);
    const auto hy = std::bit_cast<std::uint64_t>(p.y + 0.0);
    h ^= hy + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
}

double euclid_dist(Point p, Point q) {
    return std::hypot(q.x - p.x, q.y - p.y);
}

double Angle::normalize(double radians) {
    if (radians >= 0.0 && radians < kTwoPi)
        return radians;
    double r = std::fmod(radians, kTwoPi);
    if (r < 0.0)
        r += kTwoPi;
    // fmod of a tiny negative value can round up to exactly 2π
    if (r >= kTwoPi)
        r = 0.0;
    return r;
}

double Angle::ccw_to(Angle to) const {
    return normalize(to.value_ - value_);
}

double Angle::circular_distance(Angle other) const {
    const double d = ccw_to(other);
    return std::min(d, kTwoPi - d);
}

Angle oriented_angle(Point origin, Point target) {
    if (origin == target)
        throw DegenerateInput("oriented_angle: coincident points");
    return Angle(std::atan2(target.y - origin.y, target.x - origin.x));
}

Sector Sector::from_bounds(Angle angle_min, Angle angle_max, double d_min) {
    const double width = angle_min.ccw_to(angle_max);
    if (width <= 0.0)
        throw std::invalid_argument("Sector: equal bounds are ambiguous, use Sector::full");
    return from_width(angle_min, width, d_min);
}

Sector Sector::from_width(Angle angle_min, double width, double d_min) {
    if (!(width > 0.0) || !(d_min >= 0.0) || !std::isfinite(d_min))
        throw std::invalid_argument("Sector: width must be positive and d_min non-negative");
    if (width >= kTwoPi)
        return full(d_min);
    return Sector(angle_min, width, d_min);
}

Sector Sector::full(double d_min) {
    if (!(d_min >= 0.0) || !std::isfinite(d_min))
        throw std::invalid_argument("Sector: d_min must be non-negative");
    return Sector(Angle(0.0), kTwoPi, d_min);
}

bool Sector::arc_contains(Angle a) const {
    if (is_full())
        return true;
    const double off = start_.ccw_to(a);
    // slack on both ends: just past the end, or just before the start
    return off <= width_ + kArcEpsilon || off >= kTwoPi - kArcEpsilon;
}

std::string Sector::to_string() const {
    char buf[96];
    std::snprintf(buf, sizeof buf, "[%.6f,%.6f) d>=%.6f", start_.radians(), width_, d_min_);
    return buf;
}

bool sector_contains(const Sector& s, Point apex, Point p) {
    if (p == apex) {
        if (s.d_min() == 0.0) {
            static std::once_flag once;
            std::call_once(once, [] {
                std::clog << "georoute: sector_contains queried at the apex itself; treated as outside\n";
            });
        }
        return false;
    }
    if (euclid_dist(apex, p) < s.d_min())
        return false;
    return s.arc_contains(oriented_angle(apex, p));
}

double angular_distance_to_bounds(const Sector& s, Angle a) {
    return std::min(a.circular_distance(s.angle_min()), a.circular_distance(s.angle_max()));
}

namespace {

// Union of arc b into arc a when b starts inside a (or at its end).
std::optional<Sector> extend_from(const Sector& a, const Sector& b, double d_min) {
    const double offset = a.angle_min().ccw_to(b.angle_min());
    if (offset > a.width() + kArcEpsilon && offset < kTwoPi - kArcEpsilon)
        return std::nullopt;
    // a start just "behind" a's start counts as offset 0
    const double rel = offset >= kTwoPi - kArcEpsilon ? 0.0 : offset;
    const double width = std::max(a.width(), rel + b.width());
    if (width >= kTwoPi - kArcEpsilon)
        return Sector::full(d_min);
    return Sector::from_width(a.angle_min(), width, d_min);
}

} // namespace

std::optional<Sector> try_merge(const Sector& s1, const Sector& s2, double delta_d) {
    if (std::abs(s1.d_min() - s2.d_min()) > delta_d)
        return std::nullopt;
    const double d_min = std::min(s1.d_min(), s2.d_min());
    if (s1.is_full() || s2.is_full())
        return Sector::full(d_min);

    auto a = extend_from(s1, s2, d_min);
    auto b = extend_from(s2, s1, d_min);
    if (a && b) {
        // both arcs start inside each other: union wraps, maybe to a full circle
        if (a->is_full() || b->is_full())
            return Sector::full(d_min);
        return a->width() <= b->width() ? a : b;
    }
    return a ? a : b;
}

} // namespace georoute
