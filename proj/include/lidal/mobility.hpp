#pragma once

#include <cstdint>
#include <vector>

#include "lidal/rng.hpp"
#include "lidal/scene.hpp"

namespace lidal {

struct MobilityParams {
    double speed = 0.5;              // m/s
    double rate_hz = 5.0;            // snapshot rate; dt = 1/rate
    double heading_jitter_deg = 15.0;
    double dwell_min_s = 1.0;
    double dwell_max_s = 10.0;
    double clearance = 0.24;         // obstacle/wall inflation, half target width
    double arrive_radius = 0.12;     // waypoint arrival distance
};

/// Interesting locations the target walks between.
struct Pathway {
    std::vector<Vec2> waypoints;
};

/// Eight defaults: one seat beside each desk plus inset room corners,
/// validated collision-free for the scene.
Pathway default_pathway(const Scene& scene, const MobilityParams& params = {});

enum class MotionMode { walking, nomadic };

struct TrajectoryState {
    Vec2 position;
    double heading = 0.0;  // radians
    double speed = 0.5;
    MotionMode mode = MotionMode::walking;
    double dwell_remaining = 0.0;
    int waypoint = 0;      // current goal index
    bool stuck = false;
};

/// True when the point keeps `clearance` from every obstacle footprint and
/// from the walls.
bool position_feasible(const Scene& scene, const Vec2& p, double clearance);

/// Starts at a seeded random waypoint, walking toward a different one.
TrajectoryState init_trajectory(const Pathway& pathway, const Scene& scene,
                                const MobilityParams& params, Rng& rng);

/// One directed-random-walk step of dt seconds: head toward the waypoint with
/// Gaussian jitter, resample the heading uniformly over the collision-free
/// directions when the step would hit something, dwell on arrival, then pick
/// the next waypoint uniformly. Walking steps always cover exactly speed*dt.
TrajectoryState step(const TrajectoryState& state, const Scene& scene, const Pathway& pathway,
                     const MobilityParams& params, double dt, Rng& rng);

struct TimedPosition {
    double t = 0.0;
    Vec2 position;
    MotionMode mode = MotionMode::walking;
};

/// duration * rate positions sampled at the snapshot rate, deterministic
/// under the seed.
std::vector<TimedPosition> sample_trajectory(const Pathway& pathway, const Scene& scene,
                                             const MobilityParams& params, double duration_s,
                                             double rate_hz, std::uint64_t seed);

}  // namespace lidal
