#include "lidal/mobility.hpp"

#include <cmath>
#include <stdexcept>

namespace lidal {

bool position_feasible(const Scene& scene, const Vec2& p, double clearance) {
    if (p.x < clearance || p.x > scene.room.width - clearance || p.y < clearance ||
        p.y > scene.room.length - clearance) {
        return false;
    }
    for (const auto& obstacle : scene.obstacles) {
        const Rect fp = obstacle.box().footprint();
        if (p.x > fp.x_min - clearance && p.x < fp.x_max + clearance &&
            p.y > fp.y_min - clearance && p.y < fp.y_max + clearance) {
            return false;
        }
    }
    return true;
}

namespace {

bool segment_feasible(const Scene& scene, const Vec2& a, const Vec2& b, double clearance) {
    if (!position_feasible(scene, b, clearance)) return false;
    for (const auto& obstacle : scene.obstacles) {
        const Rect fp = obstacle.box().footprint();
        const Rect inflated{fp.x_min - clearance, fp.y_min - clearance, fp.x_max + clearance,
                            fp.y_max + clearance};
        if (segment_hits_rect(a, b, inflated)) return false;
    }
    return true;
}

}  // namespace

Pathway default_pathway(const Scene& scene, const MobilityParams& params) {
    Pathway pathway;
    const double margin = params.clearance + 0.26;
    // Seats: one point beside each desk, pushed toward the room center.
    const Vec2 room_center{scene.room.width / 2.0, scene.room.length / 2.0};
    for (const auto& obstacle : scene.obstacles) {
        if (obstacle.kind != ObstacleKind::desk) continue;
        const Rect fp = obstacle.box().footprint();
        const Vec2 c = fp.center();
        Vec2 toward = room_center - c;
        const double n = toward.norm();
        toward = n > 1e-9 ? toward * (1.0 / n) : Vec2{1.0, 0.0};
        const double half = 0.5 * std::max(fp.x_max - fp.x_min, fp.y_max - fp.y_min);
        Vec2 seat = c + toward * (half + margin);
        if (position_feasible(scene, seat, params.clearance)) pathway.waypoints.push_back(seat);
    }
    // Inset corners.
    const double inset = 0.7;
    const Vec2 corners[4] = {{inset, inset},
                             {scene.room.width - inset, inset},
                             {inset, scene.room.length - inset},
                             {scene.room.width - inset, scene.room.length - inset}};
    for (const auto& corner : corners) {
        if (static_cast<int>(pathway.waypoints.size()) >= 8) break;
        if (position_feasible(scene, corner, params.clearance)) pathway.waypoints.push_back(corner);
    }
    if (pathway.waypoints.size() < 2) {
        throw std::runtime_error("default_pathway: fewer than two feasible waypoints");
    }
    return pathway;
}

TrajectoryState init_trajectory(const Pathway& pathway, const Scene& scene,
                                const MobilityParams& params, Rng& rng) {
    if (pathway.waypoints.size() < 2) {
        throw std::invalid_argument("init_trajectory: pathway needs >= 2 waypoints");
    }
    const auto start = rng.uniform_index(pathway.waypoints.size());
    auto goal = rng.uniform_index(pathway.waypoints.size() - 1);
    if (goal >= start) ++goal;

    TrajectoryState state;
    state.position = pathway.waypoints[start];
    state.speed = params.speed;
    state.mode = MotionMode::walking;
    state.waypoint = static_cast<int>(goal);
    if (!position_feasible(scene, state.position, params.clearance)) {
        throw std::runtime_error("init_trajectory: infeasible start waypoint");
    }
    const Vec2 d = pathway.waypoints[goal] - state.position;
    state.heading = std::atan2(d.y, d.x);
    return state;
}

TrajectoryState step(const TrajectoryState& state, const Scene& scene, const Pathway& pathway,
                     const MobilityParams& params, double dt, Rng& rng) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
    TrajectoryState next = state;
    next.stuck = false;

    if (state.mode == MotionMode::nomadic) {
        next.dwell_remaining = state.dwell_remaining - dt;
        if (next.dwell_remaining <= 0.0) {
            next.dwell_remaining = 0.0;
            next.mode = MotionMode::walking;
            auto goal = rng.uniform_index(pathway.waypoints.size() - 1);
            if (goal >= static_cast<std::uint64_t>(state.waypoint)) ++goal;
            next.waypoint = static_cast<int>(goal);
        }
        return next;  // position holds still for the whole dwell step
    }

    const Vec2 goal = pathway.waypoints[state.waypoint];
    const Vec2 to_goal = goal - state.position;
    const double desired = std::atan2(to_goal.y, to_goal.x);
    const double jitter = deg_to_rad(params.heading_jitter_deg) * rng.gaussian();
    double heading = desired + jitter;

    const double step_len = state.speed * dt;
    auto try_move = [&](double angle) -> bool {
        const Vec2 target{state.position.x + step_len * std::cos(angle),
                          state.position.y + step_len * std::sin(angle)};
        if (!segment_feasible(scene, state.position, target, params.clearance)) return false;
        next.position = target;
        next.heading = angle;
        return true;
    };

    bool moved = try_move(heading);
    if (!moved) {
        // Uniform draw over the collision-free directions, probed on a
        // rotated 5-degree grid.
        const double offset = rng.uniform(0.0, 2.0 * kPi);
        std::vector<double> feasible_angles;
        for (int k = 0; k < 72; ++k) {
            const double angle = offset + k * (2.0 * kPi / 72.0);
            const Vec2 target{state.position.x + step_len * std::cos(angle),
                              state.position.y + step_len * std::sin(angle)};
            if (segment_feasible(scene, state.position, target, params.clearance)) {
                feasible_angles.push_back(angle);
            }
        }
        if (feasible_angles.empty()) {
            next.stuck = true;
            return next;
        }
        moved = try_move(feasible_angles[rng.uniform_index(feasible_angles.size())]);
        if (!moved) {
            next.stuck = true;
            return next;
        }
    }

    if (distance(next.position, goal) <= params.arrive_radius) {
        next.mode = MotionMode::nomadic;
        next.dwell_remaining = rng.uniform(params.dwell_min_s, params.dwell_max_s);
    }
    return next;
}

std::vector<TimedPosition> sample_trajectory(const Pathway& pathway, const Scene& scene,
                                             const MobilityParams& params, double duration_s,
                                             double rate_hz, std::uint64_t seed) {
    if (!(duration_s >= 0.0) || !(rate_hz > 0.0)) {
        throw std::invalid_argument("sample_trajectory: duration and rate must be positive");
    }
    const auto n = static_cast<std::size_t>(std::llround(duration_s * rate_hz));
    std::vector<TimedPosition> samples;
    samples.reserve(n);
    if (n == 0) return samples;

    Rng rng(Rng::mix(seed, 0x30b1ULL));
    TrajectoryState state = init_trajectory(pathway, scene, params, rng);
    const double dt = 1.0 / rate_hz;
    for (std::size_t k = 0; k < n; ++k) {
        samples.push_back({k * dt, state.position, state.mode});
        state = step(state, scene, pathway, params, dt, rng);
    }
    return samples;
}

}  // namespace lidal
