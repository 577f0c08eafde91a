#include <doctest.h>

#include <cmath>

#include "lidal/geometry.hpp"
#include "lidal/rng.hpp"

using namespace lidal;

TEST_CASE("segment-box intersection") {
    const Box box{{1, 1, 0}, {2, 2, 1}};

    CHECK(segment_hits_box({0, 1.5, 0.5}, {3, 1.5, 0.5}, box));
    CHECK(!segment_hits_box({0, 0, 0.5}, {3, 0, 0.5}, box));        // parallel miss
    CHECK(!segment_hits_box({0, 1.5, 0.5}, {0.9, 1.5, 0.5}, box));  // stops short
    CHECK(!segment_hits_box({0, 1, 0.5}, {3, 1, 0.5}, box));        // grazes a face plane

    // Endpoint on the surface, pointing away.
    CHECK(!segment_hits_box({1.5, 1.5, 1.0}, {1.5, 1.5, 3.0}, box));
    // Endpoint on the surface, passing through.
    CHECK(segment_hits_box({1.5, 1.5, 1.0}, {1.5, 1.5, -1.0}, box));
}

TEST_CASE("segment-rect intersection") {
    const Rect r{1, 1, 2, 2};
    CHECK(segment_hits_rect({0, 1.5}, {3, 1.5}, r));
    CHECK(!segment_hits_rect({0, 0}, {3, 0.5}, r));
    CHECK(segment_hits_rect({1.5, 1.5}, {1.6, 1.6}, r));  // fully inside
    CHECK(!segment_hits_rect({0, 1.5}, {0.5, 1.5}, r));
}

TEST_CASE("box containment and overlap") {
    const Box room{{0, 0, 0}, {4, 8, 3}};
    const Box inside{{1, 1, 0}, {2, 2, 1}};
    const Box poking{{3.5, 1, 0}, {4.5, 2, 1}};
    CHECK(inside.inside(room));
    CHECK(!poking.inside(room));

    const Box touching{{2, 1, 0}, {3, 2, 1}};  // shares the x=2 face with `inside`
    CHECK(!inside.intersects(touching));
    const Box overlapping{{1.5, 1.5, 0}, {2.5, 2.5, 1}};
    CHECK(inside.intersects(overlapping));

    CHECK(inside.closest_point({10, 1.5, 0.5}).x == doctest::Approx(2.0));
}

TEST_CASE("rng determinism and stream independence") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng c(42);
    Rng s0 = c.stream(0);
    Rng s1 = c.stream(1);
    CHECK(s0.next_u64() != s1.next_u64());

    // Same-seed gaussian sequences match bit for bit.
    Rng g1(7), g2(7);
    for (int i = 0; i < 50; ++i) {
        CHECK(g1.gaussian() == g2.gaussian());
    }
}

TEST_CASE("rng gaussian moments") {
    Rng rng(1234);
    const int n = 200000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.gaussian();
        sum += x;
        sum_sq += x * x;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("rng uniform bounds") {
    Rng rng(5);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}
