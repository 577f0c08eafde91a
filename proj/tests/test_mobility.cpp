#include <doctest.h>

#include <cmath>

#include "lidal/mobility.hpp"

using namespace lidal;

namespace {

Scene open_room() {
    SceneConfig config;
    config.default_furniture = false;
    return build_scene(config);
}

Scene office() {
    SceneConfig config;
    return build_scene(config);
}

}  // namespace

TEST_CASE("a jitter-free step toward an eastern waypoint moves exactly 0.1 m") {
    const Scene scene = open_room();
    Pathway pathway{{{1.0, 4.0}, {3.0, 4.0}}};
    MobilityParams params;
    params.heading_jitter_deg = 0.0;

    TrajectoryState state;
    state.position = {1.0, 4.0};
    state.speed = 0.5;
    state.mode = MotionMode::walking;
    state.waypoint = 1;  // due east

    Rng rng(1);
    const TrajectoryState next = step(state, scene, pathway, params, 0.2, rng);
    CHECK(next.position.x == doctest::Approx(1.1).epsilon(1e-12));
    CHECK(next.position.y == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("heading into a wall resamples to a feasible direction") {
    const Scene scene = open_room();
    Pathway pathway{{{0.3, 4.0}, {3.7, 4.0}}};
    MobilityParams params;
    params.heading_jitter_deg = 0.0;

    TrajectoryState state;
    state.position = {0.25, 4.0};  // hugging the x=0 wall (clearance 0.24)
    state.speed = 0.5;
    state.mode = MotionMode::walking;
    state.waypoint = 0;  // goal sits behind the clearance margin

    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
        state = step(state, scene, pathway, params, 0.2, rng);
        CHECK(position_feasible(scene, state.position, params.clearance));
    }
}

TEST_CASE("sampled trajectories") {
    const Scene scene = office();
    const MobilityParams params;
    const Pathway pathway = default_pathway(scene, params);
    CHECK(pathway.waypoints.size() >= 2);
    CHECK(pathway.waypoints.size() <= 8);

    SUBCASE("five minutes at five hertz is 1500 snapshots") {
        const auto track = sample_trajectory(pathway, scene, params, 300.0, 5.0, 9);
        CHECK(track.size() == 1500);
        CHECK(track.back().t == doctest::Approx(1499 * 0.2));
    }

    SUBCASE("zero duration is empty") {
        CHECK(sample_trajectory(pathway, scene, params, 0.0, 5.0, 9).empty());
    }

    SUBCASE("same seed reproduces the trajectory exactly") {
        const auto a = sample_trajectory(pathway, scene, params, 60.0, 5.0, 4);
        const auto b = sample_trajectory(pathway, scene, params, 60.0, 5.0, 4);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].position.x == b[i].position.x);
            CHECK(a[i].position.y == b[i].position.y);
        }
    }

    SUBCASE("every sample is collision-free") {
        for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
            const auto track = sample_trajectory(pathway, scene, params, 120.0, 5.0, seed);
            for (const auto& sample : track) {
                CHECK(position_feasible(scene, sample.position, params.clearance));
            }
        }
    }

    SUBCASE("walking steps cover exactly speed/rate; dwell holds still") {
        const auto track = sample_trajectory(pathway, scene, params, 200.0, 5.0, 11);
        int walking_pairs = 0, dwell_pairs = 0;
        for (std::size_t i = 0; i + 1 < track.size(); ++i) {
            const double d = distance(track[i].position, track[i + 1].position);
            if (track[i].mode == MotionMode::walking && d > 0.0) {
                CHECK(d == doctest::Approx(0.1).epsilon(1e-9));
                ++walking_pairs;
            }
            if (track[i].mode == MotionMode::nomadic &&
                track[i + 1].mode == MotionMode::nomadic) {
                CHECK(d == doctest::Approx(0.0));
                ++dwell_pairs;
            }
        }
        CHECK(walking_pairs > 100);  // the run actually walks
        CHECK(dwell_pairs > 10);     // and actually pauses
    }
}

TEST_CASE("default pathway avoids the furniture") {
    const Scene scene = office();
    const MobilityParams params;
    const Pathway pathway = default_pathway(scene, params);
    for (const auto& wp : pathway.waypoints) {
        CHECK(position_feasible(scene, wp, params.clearance));
    }
}

TEST_CASE("step validates dt") {
    const Scene scene = open_room();
    Pathway pathway{{{1, 1}, {3, 3}}};
    TrajectoryState state;
    state.position = {2, 2};
    Rng rng(1);
    CHECK_THROWS(step(state, scene, pathway, MobilityParams{}, 0.0, rng));
}
