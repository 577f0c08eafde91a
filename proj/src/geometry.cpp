#include "lidal/geometry.hpp"

#include <limits>

namespace lidal {

bool segment_hits_box(const Vec3& a, const Vec3& b, const Box& box) {
    // Parametric slab test on p(t) = a + t*(b-a), t in (0,1).
    const Vec3 d = b - a;
    double t_enter = 0.0;
    double t_exit = 1.0;

    const double lo[3] = {box.lo.x, box.lo.y, box.lo.z};
    const double hi[3] = {box.hi.x, box.hi.y, box.hi.z};
    const double orig[3] = {a.x, a.y, a.z};
    const double dir[3] = {d.x, d.y, d.z};

    for (int axis = 0; axis < 3; ++axis) {
        if (std::abs(dir[axis]) < 1e-15) {
            if (orig[axis] <= lo[axis] || orig[axis] >= hi[axis]) return false;
            continue;
        }
        double t0 = (lo[axis] - orig[axis]) / dir[axis];
        double t1 = (hi[axis] - orig[axis]) / dir[axis];
        if (t0 > t1) std::swap(t0, t1);
        t_enter = std::max(t_enter, t0);
        t_exit = std::min(t_exit, t1);
        if (t_enter >= t_exit) return false;
    }
    // Require a strictly interior overlap so grazing contacts are ignored.
    const double eps = 1e-12;
    return t_exit - t_enter > eps && t_exit > eps && t_enter < 1.0 - eps;
}

bool segment_hits_rect(const Vec2& a, const Vec2& b, const Rect& r) {
    if (r.contains(a) || r.contains(b)) return true;
    const Vec2 d = b - a;
    double t_enter = 0.0;
    double t_exit = 1.0;
    const double lo[2] = {r.x_min, r.y_min};
    const double hi[2] = {r.x_max, r.y_max};
    const double orig[2] = {a.x, a.y};
    const double dir[2] = {d.x, d.y};
    for (int axis = 0; axis < 2; ++axis) {
        if (std::abs(dir[axis]) < 1e-15) {
            if (orig[axis] <= lo[axis] || orig[axis] >= hi[axis]) return false;
            continue;
        }
        double t0 = (lo[axis] - orig[axis]) / dir[axis];
        double t1 = (hi[axis] - orig[axis]) / dir[axis];
        if (t0 > t1) std::swap(t0, t1);
        t_enter = std::max(t_enter, t0);
        t_exit = std::min(t_exit, t1);
        if (t_enter > t_exit) return false;
    }
    return t_exit >= 0.0 && t_enter <= 1.0;
}

}  // namespace lidal
