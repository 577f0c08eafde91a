#include <doctest.h>

#include <cmath>

#include "lidal/channel.hpp"
#include "lidal/rng.hpp"

using namespace lidal;

namespace {

/// Independent closed-form single-bounce gain for one patch, written from the
/// emitter cosine pattern and the diffuse re-emission integral.
double single_patch_gain_oracle(const Emitter& em, const Detector& det, const Patch& patch) {
    const Vec3 to_patch = patch.center - em.position;
    const double d1 = to_patch.norm();
    const double m = -std::log(2.0) / std::log(std::cos(deg_to_rad(em.semi_angle_deg)));
    const double cos_phi = to_patch.normalized().dot(em.axis());
    const double cos_in = (to_patch.normalized() * -1.0).dot(patch.normal);
    const double capture =
        (m + 1.0) / (2.0 * kPi * d1 * d1) * std::pow(cos_phi, m) * cos_in * patch.area;

    const Vec3 to_det = det.position - patch.center;
    const double d2 = to_det.norm();
    const double cos_out = to_det.normalized().dot(patch.normal);
    const double cos_psi = (to_det.normalized() * -1.0).dot(det.axis);
    const auto& cpc = std::get<CpcOptics>(det.optics);
    const double collect =
        cos_out / (kPi * d2 * d2) * det.area * cpc.gain() * cos_psi;
    return capture * patch.reflectivity * collect;
}

Scene empty_room(double width = 4.0, double length = 4.0, double height = 3.0,
                 double patch_size = 0.25) {
    SceneConfig config;
    config.default_furniture = false;
    config.room.width = width;
    config.room.length = length;
    config.room.height = height;
    config.patch_size = patch_size;
    return build_scene(config);
}

}  // namespace

TEST_CASE("lambertian order") {
    CHECK(lambertian_order(60.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lambertian_order(75.0) == doctest::Approx(0.5128).epsilon(1e-3));
    CHECK(lambertian_order(30.0) == doctest::Approx(4.8188).epsilon(1e-3));
    CHECK_THROWS(lambertian_order(0.0));
    CHECK_THROWS(lambertian_order(90.0));
    CHECK_THROWS(lambertian_order(-5.0));
}

TEST_CASE("slot count covers the round-trip room diagonal") {
    Room room;  // 8 x 4 x 3
    CHECK(slot_count_for_room(room) == 32);
    Room small{2.0, 2.0, 2.0, 0.8, 0.3, 0.8};
    // diagonal sqrt(12) = 3.464 m, round trip 23.1 ns -> 12 slots
    CHECK(slot_count_for_room(small) == 12);
}

TEST_CASE("single-patch path matches the closed-form oracle") {
    Emitter em;
    em.position = {0, 0, 2};
    em.semi_angle_deg = 60.0;  // m = 1
    Detector det;
    det.position = {0, 0, 2};

    Patch patch;
    patch.center = {0, 0, 0};
    patch.normal = {0, 0, 1};
    patch.area = 0.1;
    patch.reflectivity = 1.0;

    const Patch patches[1] = {patch};
    const auto contribs = trace_paths(patches, em, det, {});
    REQUIRE(contribs.size() == 1);
    CHECK(contribs[0].gain ==
          doctest::Approx(single_patch_gain_oracle(em, det, patch)).epsilon(1e-12));
    // Round trip 4 m -> 13.34 ns, bin 1334 at 0.01 ns bins.
    CHECK(contribs[0].delay == doctest::Approx(4.0 / kSpeedOfLight).epsilon(1e-12));
    CHECK(static_cast<int>(std::floor(contribs[0].delay / 0.01e-9)) == 1334);
}

TEST_CASE("acceptance gate zeroes a detector facing away from everything") {
    Emitter em;
    em.position = {2, 2, 2.5};
    Detector det;
    det.position = {2, 2, 2.5};
    std::get<CpcOptics>(det.optics).acceptance_semi_angle_deg = 0.1;

    const Scene scene = empty_room();
    const ImpulseResponse ir = impulse_response(scene, em, det, 1);
    // Only the sliver of floor inside the 0.1-degree cone can contribute.
    double total = ir.total_power();
    CHECK(total < 1e-9 * em.optical_power);
}

TEST_CASE("passivity: received power never exceeds transmitted power") {
    Rng rng(99);
    for (int trial = 0; trial < 5; ++trial) {
        SceneConfig config;
        config.default_furniture = false;
        config.room.width = rng.uniform(2.0, 5.0);
        config.room.length = rng.uniform(2.0, 6.0);
        config.room.height = rng.uniform(2.0, 3.5);
        config.room.rho_walls = config.room.rho_floor = config.room.rho_ceiling = 1.0;
        config.patch_size = 0.5;
        Scene scene = build_scene(config);

        Emitter em;
        em.position = {config.room.width / 2, config.room.length / 2, config.room.height - 0.01};
        Detector det;
        det.position = em.position;
        std::get<CpcOptics>(det.optics).acceptance_semi_angle_deg = 85.0;

        const ImpulseResponse one = impulse_response(scene, em, det, 1);
        CHECK(one.total_power() <= em.optical_power);
        const ImpulseResponse two = impulse_response(scene, em, det, 2);
        CHECK(two.total_power() <= em.optical_power);
        CHECK(two.total_power() >= one.total_power());
    }
}

TEST_CASE("patch-level reciprocity up to the aperture ratio") {
    // m = 1 emitters give the same cosine shape as the collection term, so a
    // position swap re-scales the gain by the aperture areas only.
    Patch patch;
    patch.center = {0, 0, 0};
    patch.normal = {0, 0, 1};
    patch.area = 0.05;
    patch.reflectivity = 0.7;

    const Vec3 a{0.6, 0.2, 1.8}, b{-0.4, -0.3, 2.2};
    Emitter em;
    em.semi_angle_deg = 60.0;
    Detector det;
    std::get<CpcOptics>(det.optics).acceptance_semi_angle_deg = 60.0;

    em.position = a;
    det.position = b;
    det.area = 20e-6;
    const Patch patches[1] = {patch};
    const auto forward = trace_paths(patches, em, det, {});

    em.position = b;
    det.position = a;
    det.area = 5e-6;
    const auto reverse = trace_paths(patches, em, det, {});

    REQUIRE(forward.size() == 1);
    REQUIRE(reverse.size() == 1);
    CHECK(forward[0].gain / reverse[0].gain == doctest::Approx(20e-6 / 5e-6).epsilon(1e-9));
}

TEST_CASE("received waveform is the rect convolution of the impulse response") {
    ImpulseResponse ir;
    ir.bins.assign(4000, 0.0);
    Emitter em;
    Detector det;

    SUBCASE("all-zero impulse response gives an all-zero waveform") {
        const Waveform w = received_waveform(ir, em, det);
        for (double s : w.samples) CHECK(s == 0.0);
        CHECK(static_cast<int>(w.samples.size()) == w.slot_count() * w.samples_per_slot());
    }

    SUBCASE("unit impulse becomes a rectangle of width tau") {
        ir.bins[500] = 2.5;  // at t = 5 ns
        const Waveform w = received_waveform(ir, em, det);
        // Active samples satisfy 5ns <= t < 7ns: indices 50..69.
        for (int s = 0; s < static_cast<int>(w.samples.size()); ++s) {
            const double expected = (s >= 50 && s < 70) ? det.responsivity * 2.5 : 0.0;
            CHECK(w.samples[s] == doctest::Approx(expected).epsilon(1e-12));
        }
    }

    SUBCASE("well-separated impulses give disjoint rectangles (brute-force oracle)") {
        ir.bins[100] = 1.0;
        ir.bins[700] = 3.0;  // 6 ns apart > tau
        const Waveform w = received_waveform(ir, em, det);
        for (std::size_t s = 0; s < w.samples.size(); ++s) {
            double oracle = 0.0;
            const double t = s * w.sample_period;
            for (std::size_t b = 0; b < ir.bins.size(); ++b) {
                const double tb = b * ir.bin_duration;
                if (t >= tb && t < tb + em.pulse_width) oracle += ir.bins[b];
            }
            CHECK(w.samples[s] == doctest::Approx(det.responsivity * oracle).epsilon(1e-12));
        }
    }

    SUBCASE("pulse width must divide into bins") {
        em.pulse_width = 2.0049e-9;
        CHECK_THROWS(received_waveform(ir, em, det));
    }
}

TEST_CASE("noise injection") {
    Detector det;
    Waveform w;
    w.samples.assign(1000000, 0.0);

    SUBCASE("zero noise density leaves the waveform unchanged") {
        det.noise_density = 0.0;
        const Waveform noisy = add_noise(w, det, 5e8, 1);
        for (double s : noisy.samples) CHECK(s == 0.0);
    }

    SUBCASE("sample standard deviation matches noise_density * sqrt(bandwidth)") {
        // 2.5 pA/sqrt(Hz) at 500 MHz -> 55.90 nA.
        const Waveform noisy = add_noise(w, det, 5e8, 77);
        double sum = 0.0, sum_sq = 0.0;
        for (double s : noisy.samples) {
            sum += s;
            sum_sq += s * s;
        }
        const double mean = sum / noisy.samples.size();
        const double sd = std::sqrt(sum_sq / noisy.samples.size() - mean * mean);
        CHECK(sd == doctest::Approx(2.5e-12 * std::sqrt(5e8)).epsilon(0.01));
    }

    SUBCASE("same seed reproduces the identical realization") {
        w.samples.assign(512, 0.0);
        const Waveform a = add_noise(w, det, 5e8, 42);
        const Waveform b = add_noise(w, det, 5e8, 42);
        for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i] == b.samples[i]);
    }

    SUBCASE("bandwidth must be positive") { CHECK_THROWS(add_noise(w, det, 0.0, 1)); }
}

TEST_CASE("slot energies") {
    Waveform w;
    w.samples.assign(60, 1.0);  // 3 slots x 20 samples

    SUBCASE("uniform samples aggregate to the per-slot count") {
        const SlotStats stats = slot_energies(w);
        REQUIRE(stats.aggregate.size() == 3);
        for (double a : stats.aggregate) CHECK(a == doctest::Approx(20.0));
        CHECK(stats.samples[1].size() == 20);
    }

    SUBCASE("a single nonzero sample lands in its slot only") {
        w.samples.assign(60, 0.0);
        w.samples[45] = 3.0;  // slot 2
        const SlotStats stats = slot_energies(w);
        CHECK(stats.aggregate[0] == 0.0);
        CHECK(stats.aggregate[1] == 0.0);
        CHECK(stats.aggregate[2] == doctest::Approx(3.0));
    }

    SUBCASE("random waveform matches an independent re-summation") {
        Rng rng(8);
        for (auto& s : w.samples) s = rng.uniform(-1.0, 1.0);
        const SlotStats stats = slot_energies(w);
        for (int k = 0; k < 3; ++k) {
            double oracle = 0.0;
            for (int i = 0; i < 20; ++i) oracle += std::abs(w.samples[k * 20 + i]);
            CHECK(stats.aggregate[k] == doctest::Approx(oracle).epsilon(1e-12));
        }
    }

    SUBCASE("length must divide into slots") {
        w.samples.assign(61, 0.0);
        CHECK_THROWS(slot_energies(w));
    }
}

TEST_CASE("cached channel equals the pure impulse response") {
    SceneConfig config;
    config.patch_size = 0.25;
    config.target_count = 2;
    config.seed = 11;
    const Scene scene = build_scene(config);
    Scene background = scene;
    background.targets.clear();

    Emitter em;
    em.position = {1, 1, 3};
    Detector det;
    det.position = {3, 3, 3};

    const CachedChannel cached(background, em, det);
    const ImpulseResponse fast = cached.compute(scene.targets);
    const ImpulseResponse slow = impulse_response(scene, em, det, 1);
    REQUIRE(fast.bins.size() == slow.bins.size());
    for (std::size_t b = 0; b < fast.bins.size(); ++b) {
        CHECK(fast.bins[b] == doctest::Approx(slow.bins[b]).epsilon(1e-12));
    }
}

TEST_CASE("two-bounce paths only add energy after the first bounce") {
    const Scene scene = empty_room(3.0, 3.0, 2.5, 0.5);
    Emitter em;
    em.position = {1.5, 1.5, 2.5};
    Detector det;
    det.position = {1.5, 1.5, 2.5};
    const ImpulseResponse one = impulse_response(scene, em, det, 1);
    const ImpulseResponse two = impulse_response(scene, em, det, 2);
    double extra = 0.0;
    for (std::size_t b = 0; b < one.bins.size(); ++b) extra += two.bins[b] - one.bins[b];
    CHECK(extra > 0.0);
    CHECK_THROWS(impulse_response(scene, em, det, 3));
}
