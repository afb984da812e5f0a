#pragma once

// Planar primitives used by the routing layer: points, normalized angles and
// angular sectors with a minimum distance.

#include <cmath>
#include <compare>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace georoute {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Tolerance for arc-membership comparisons, in radians.
inline constexpr double kArcEpsilon = 1e-9;

class DegenerateInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
    friend auto operator<=>(const Point&, const Point&) = default;

    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

struct PointHash {
    std::size_t operator()(const Point& p) const noexcept;
};

double euclid_dist(Point p, Point q);

/// Angle in radians, always kept in [0, 2π).
class Angle {
public:
    constexpr Angle() = default;
    explicit Angle(double radians) : value_(normalize(radians)) {}

    double radians() const { return value_; }

    /// Counterclockwise distance from this angle to `to`, in [0, 2π).
    double ccw_to(Angle to) const;

    /// Shortest circular distance, in [0, π].
    double circular_distance(Angle other) const;

    Angle rotated(double delta) const { return Angle(value_ + delta); }

    friend bool operator==(const Angle&, const Angle&) = default;

    static double normalize(double radians);

private:
    double value_ = 0.0;
};

/// Angle of the vector origin -> target measured counterclockwise from +x.
/// Throws DegenerateInput when the points coincide.
Angle oriented_angle(Point origin, Point target);

/// Angular wedge plus minimum distance, relative to an apex supplied at query
/// time. Encoded as a start angle and a counterclockwise width in (0, 2π];
/// width 2π is the full circle ("blocked in all directions").
class Sector {
public:
    /// Directed arc from `angle_min` counterclockwise to `angle_max`. Equal
    /// bounds are rejected because they are ambiguous; use full() instead.
    static Sector from_bounds(Angle angle_min, Angle angle_max, double d_min);
    static Sector from_width(Angle angle_min, double width, double d_min);
    static Sector full(double d_min);

    Angle angle_min() const { return start_; }
    Angle angle_max() const { return start_.rotated(width_); }
    double width() const { return width_; }
    double d_min() const { return d_min_; }
    bool is_full() const { return width_ >= kTwoPi; }

    /// Arc-only membership (wrap-aware, with kArcEpsilon slack).
    bool arc_contains(Angle a) const;

    friend bool operator==(const Sector&, const Sector&) = default;

    std::string to_string() const;

private:
    Sector(Angle start, double width, double d_min) : start_(start), width_(width), d_min_(d_min) {}

    Angle start_;
    double width_ = kTwoPi;
    double d_min_ = 0.0;
};

/// Arc test plus distance test. A point coinciding with the apex is never
/// contained.
bool sector_contains(const Sector& s, Point apex, Point p);

/// Smallest circular distance from `a` to either arc bound.
double angular_distance_to_bounds(const Sector& s, Angle a);

/// Union of two overlapping or touching arcs whose minimum distances differ by
/// at most `delta_d`; nothing otherwise.
std::optional<Sector> try_merge(const Sector& s1, const Sector& s2, double delta_d);

} // namespace georoute
