#pragma once

#include <cmath>
#include <numbers>

namespace vhft {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    double norm_xy() const { return std::hypot(x, y); }

    bool operator==(const Vec3&) const = default;
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

inline double distance_xy(const Vec3& a, const Vec3& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

/// Observer state: position in the local planar frame plus compass heading.
struct UavState {
    Vec3 pos;
    double heading = 0.0;  // rad, 0 = north (+y), increasing clockwise toward east (+x)
};

/// Wrap an angle into [0, 2*pi).
inline double wrap_two_pi(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0.0) a += kTwoPi;
    // fmod can return exactly 2*pi after the correction when a is a tiny negative number
    if (a >= kTwoPi) a = 0.0;
    return a;
}

/// Wrap an angle into [-pi, pi).
inline double wrap_pi(double a) {
    a = wrap_two_pi(a + kPi);
    return a - kPi;
}

/// Circular distance between two angles, in [0, pi].
inline double angular_distance(double a, double b) { return std::abs(wrap_pi(a - b)); }

/// Compass bearing from one point toward another: atan2(dx, dy) wrapped to [0, 2*pi).
/// North is 0, east is pi/2.
inline double compass_bearing(const Vec3& from, const Vec3& to) {
    return wrap_two_pi(std::atan2(to.x - from.x, to.y - from.y));
}

/// Unit displacement for a compass heading.
inline Vec3 heading_direction(double heading) { return {std::sin(heading), std::cos(heading), 0.0}; }

}  // namespace vhft
