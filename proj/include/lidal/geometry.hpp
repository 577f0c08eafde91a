#pragma once

#include <algorithm>
#include <cmath>

namespace lidal {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::sqrt(x * x + y * y); }
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    Vec3 normalized() const {
        const double n = norm();
        return n > 0.0 ? Vec3{x / n, y / n, z / n} : Vec3{};
    }
    Vec2 xy() const { return {x, y}; }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

/// Axis-aligned rectangle on the floor plane.
struct Rect {
    double x_min = 0.0, y_min = 0.0;
    double x_max = 0.0, y_max = 0.0;

    bool contains(const Vec2& p) const {
        return p.x >= x_min && p.x < x_max && p.y >= y_min && p.y < y_max;
    }
    Vec2 center() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }
    bool overlaps(const Rect& o) const {
        return x_min < o.x_max && o.x_min < x_max && y_min < o.y_max && o.y_min < y_max;
    }
};

/// Axis-aligned box. Overlap tests use open intervals, so touching faces do
/// not count as an intersection.
struct Box {
    Vec3 lo;
    Vec3 hi;

    Vec3 center() const { return (lo + hi) * 0.5; }
    Vec3 extent() const { return hi - lo; }

    bool contains(const Vec3& p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y &&
               p.z >= lo.z && p.z <= hi.z;
    }
    bool inside(const Box& outer) const {
        return lo.x >= outer.lo.x && lo.y >= outer.lo.y && lo.z >= outer.lo.z &&
               hi.x <= outer.hi.x && hi.y <= outer.hi.y && hi.z <= outer.hi.z;
    }
    bool intersects(const Box& o) const {
        return lo.x < o.hi.x && o.lo.x < hi.x && lo.y < o.hi.y && o.lo.y < hi.y &&
               lo.z < o.hi.z && o.lo.z < hi.z;
    }
    Vec3 closest_point(const Vec3& p) const {
        return {std::clamp(p.x, lo.x, hi.x), std::clamp(p.y, lo.y, hi.y),
                std::clamp(p.z, lo.z, hi.z)};
    }
    Rect footprint() const { return {lo.x, lo.y, hi.x, hi.y}; }
};

/// Slab test for the open segment (a, b) against a box. Endpoints that merely
/// touch the box surface do not count as hits.
bool segment_hits_box(const Vec3& a, const Vec3& b, const Box& box);

/// True when the 2D segment a-b crosses or touches the rectangle.
bool segment_hits_rect(const Vec2& a, const Vec2& b, const Rect& r);

}  // namespace lidal
