#pragma once

#include <cmath>
#include <numbers>

#include "gtnav/errors.hpp"

namespace gtnav {

inline constexpr double kPi = std::numbers::pi;

/**
 * @brief 2D point/vector in meters, double precision.
 *
 * Plain value type; all arithmetic is non-mutating.
 */
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(const Vec2& r) const { return {x + r.x, y + r.y}; }
    constexpr Vec2 operator-(const Vec2& r) const { return {x - r.x, y - r.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr bool operator==(const Vec2& r) const { return x == r.x && y == r.y; }

    constexpr double dot(const Vec2& r) const { return x * r.x + y * r.y; }
    constexpr double norm_sq() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm_sq()); }

    bool is_finite() const { return std::isfinite(x) && std::isfinite(y); }
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }
inline double distance_sq(const Vec2& a, const Vec2& b) { return (a - b).norm_sq(); }

/// Wraps an angle to the canonical interval (-pi, pi].
inline double normalize_angle(double a) {
    double r = std::remainder(a, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

/// Signed wrapped difference a - b on (-pi, pi].
inline double angle_diff(double a, double b) { return normalize_angle(a - b); }

/// Direction of the ray from `from` to `to`; 0 for coincident points.
inline double bearing(const Vec2& from, const Vec2& to) {
    const Vec2 d = to - from;
    if (d.x == 0.0 && d.y == 0.0) return 0.0;
    return std::atan2(d.y, d.x);
}

/// Unit vector for a heading angle.
inline Vec2 heading_vector(double heading) { return {std::cos(heading), std::sin(heading)}; }

inline void require_finite(const Vec2& v, const char* what) {
    if (!v.is_finite()) throw DomainError(std::string(what) + ": non-finite vector");
}

inline void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw DomainError(std::string(what) + ": non-finite value");
}

} // namespace gtnav
