#include <doctest.h>

#include <cmath>

#include "lidal/distinguishers.hpp"
#include "lidal/rng.hpp"

using namespace lidal;

namespace {

Snapshot mimo_snapshot(int n_slots = 4, double fill = 0.0) {
    Snapshot snap;
    snap.kind = SnapshotKind::mimo_scan;
    Waveform w;
    w.samples.assign(static_cast<std::size_t>(n_slots) * w.samples_per_slot(), fill);
    snap.waveforms.push_back(w);
    return snap;
}

void set_slot(Snapshot& snap, int slot, double value) {
    const int per_slot = snap.waveforms[0].samples_per_slot();
    for (int i = 0; i < per_slot; ++i) {
        snap.waveforms[0].samples[static_cast<std::size_t>(slot) * per_slot + i] = value;
    }
}

Snapshot noisy_snapshot(int n_slots, double sigma, Rng& rng) {
    Snapshot snap = mimo_snapshot(n_slots);
    for (auto& s : snap.waveforms[0].samples) s = sigma * rng.gaussian();
    return snap;
}

}  // namespace

TEST_CASE("bsm on identical snapshots is silent") {
    const Snapshot a = mimo_snapshot(4, 0.25);
    const auto bits = bsm_detect(a, a, 1e-12);
    for (auto b : bits) CHECK(b == 0);
}

TEST_CASE("bsm flags departure and arrival slots") {
    Snapshot prev = mimo_snapshot(8);
    Snapshot curr = mimo_snapshot(8);
    set_slot(prev, 3, 1.0);
    set_slot(curr, 5, 1.0);
    const auto bits = bsm_detect(prev, curr, 0.5);
    for (int k = 0; k < 8; ++k) {
        CHECK(bits[k] == ((k == 3 || k == 5) ? 1 : 0));
    }
    // The statistic itself is the summed difference magnitude.
    const auto stat = bsm_statistic(prev, curr);
    CHECK(stat[3] == doctest::Approx(20.0));
    CHECK(stat[5] == doctest::Approx(20.0));
    CHECK(stat[0] == doctest::Approx(0.0));
}

TEST_CASE("bsm shape mismatch throws") {
    const Snapshot a = mimo_snapshot(4);
    const Snapshot b = mimo_snapshot(5);
    CHECK_THROWS(bsm_detect(a, b, 1.0));
}

TEST_CASE("difference of two noise snapshots doubles the variance") {
    Rng rng(17);
    const double sigma = 2.5e-12 * std::sqrt(5e8);
    const int n_slots = 5000;  // 100000 samples
    const Snapshot a = noisy_snapshot(n_slots, sigma, rng);
    const Snapshot b = noisy_snapshot(n_slots, sigma, rng);
    double sum = 0.0, sum_sq = 0.0;
    const auto& sa = a.waveforms[0].samples;
    const auto& sb = b.waveforms[0].samples;
    for (std::size_t i = 0; i < sa.size(); ++i) {
        const double d = sb[i] - sa[i];
        sum += d;
        sum_sq += d * d;
    }
    const double mean = sum / sa.size();
    const double var = sum_sq / sa.size() - mean * mean;
    CHECK(var == doctest::Approx(2.0 * sigma * sigma).epsilon(0.03));
}

TEST_CASE("ccm coefficients") {
    SUBCASE("identical window: all coefficients one, no bits") {
        Snapshot a = mimo_snapshot(4);
        Rng rng(3);
        for (auto& s : a.waveforms[0].samples) s = rng.uniform(0.0, 1.0);
        const Snapshot window[3] = {a, a, a};
        const auto coeffs = ccm_coefficients(a, a);
        for (double c : coeffs) CHECK(c == doctest::Approx(1.0));
        const auto bits = ccm_detect(window, 0.3);
        for (auto b : bits) CHECK(b == 0);
    }

    SUBCASE("sign flip drives the coefficient to -1") {
        Snapshot prev = mimo_snapshot(4);
        Snapshot curr = mimo_snapshot(4);
        Rng rng(4);
        const int per_slot = prev.waveforms[0].samples_per_slot();
        for (int i = 0; i < per_slot; ++i) {
            const double v = rng.uniform(0.5, 1.0);
            prev.waveforms[0].samples[2 * per_slot + i] = v;
            curr.waveforms[0].samples[2 * per_slot + i] = -v;
        }
        const auto coeffs = ccm_coefficients(prev, curr);
        CHECK(coeffs[2] == doctest::Approx(-1.0));
        const Snapshot window[2] = {prev, curr};
        const auto bits = ccm_detect(window, 0.3);
        CHECK(bits[2] == 1);
    }

    SUBCASE("zero-variance vectors count as unchanged") {
        const Snapshot a = mimo_snapshot(4, 0.7);  // constant => zero variance
        const auto coeffs = ccm_coefficients(a, a);
        for (double c : coeffs) CHECK(c == doctest::Approx(1.0));
    }

    SUBCASE("coefficients stay within [-1, 1] on random data") {
        Rng rng(5);
        for (int trial = 0; trial < 50; ++trial) {
            Snapshot a = noisy_snapshot(4, 1.0, rng);
            Snapshot b = noisy_snapshot(4, 1.0, rng);
            for (double c : ccm_coefficients(a, b)) {
                CHECK(c >= -1.0);
                CHECK(c <= 1.0);
            }
        }
    }

    SUBCASE("window shorter than two throws") {
        const Snapshot a = mimo_snapshot(4);
        CHECK_THROWS(ccm_detect(std::span<const Snapshot>(&a, 1), 0.3));
    }
}

TEST_CASE("stateful wrappers") {
    MotionDetectorParams params;
    params.noise_sigma = 1e-3;
    params.reference_blend = 0.05;

    SUBCASE("bsm detects a change against its calibrated reference") {
        BsmDistinguisher bsm(params);
        Snapshot background = mimo_snapshot(6);
        set_slot(background, 1, 0.5);  // furniture echo
        bsm.calibrate(0, background);

        Snapshot with_target = background;
        set_slot(with_target, 4, 0.4);
        const auto bits = bsm.detect(0, with_target);
        CHECK(bits[4] == 1);
        CHECK(bits[1] == 0);  // static furniture is subtracted away
    }

    SUBCASE("a long-stationary target is absorbed into the reference") {
        MotionDetectorParams fast = params;
        fast.reference_blend = 0.5;
        BsmDistinguisher bsm(fast);
        Snapshot background = mimo_snapshot(6);
        bsm.calibrate(0, background);
        Snapshot with_target = background;
        set_slot(with_target, 3, 0.4);
        CHECK(bsm.detect(0, with_target)[3] == 1);
        for (int repeat = 0; repeat < 10; ++repeat) bsm.detect(0, with_target);
        CHECK(bsm.detect(0, with_target)[3] == 0);  // reference has adapted
    }

    SUBCASE("ccm misses a target parked in a furniture slot") {
        CcmDistinguisher ccm(params);
        Snapshot background = mimo_snapshot(6);
        Rng rng(9);
        const int per_slot = background.waveforms[0].samples_per_slot();
        for (int i = 0; i < per_slot; ++i) {
            background.waveforms[0].samples[3 * per_slot + i] = rng.uniform(0.5, 1.5);
        }
        ccm.calibrate(0, background);
        // Small additive target in the same slot barely decorrelates it.
        Snapshot masked = background;
        for (int i = 0; i < per_slot; ++i) {
            masked.waveforms[0].samples[3 * per_slot + i] += 0.01;
        }
        const auto bits = ccm.detect(0, masked);
        CHECK(bits[3] == 0);
    }

    SUBCASE("ccm ignores noise-only slots via the energy gate") {
        CcmDistinguisher ccm(params);
        Rng rng(21);
        Snapshot background = noisy_snapshot(6, params.noise_sigma, rng);
        ccm.calibrate(0, background);
        const Snapshot later = noisy_snapshot(6, params.noise_sigma, rng);
        const auto bits = ccm.detect(0, later);
        for (auto b : bits) CHECK(b == 0);
    }

    SUBCASE("first detect of an uncalibrated stream seeds the reference") {
        BsmDistinguisher bsm(params);
        Snapshot snap = mimo_snapshot(4, 0.3);
        const auto bits = bsm.detect(7, snap);
        for (auto b : bits) CHECK(b == 0);
    }
}

TEST_CASE("miso snapshots are detected per pixel") {
    MotionDetectorParams params;
    params.noise_sigma = 1e-3;

    Snapshot group;
    group.kind = SnapshotKind::miso_group;
    for (int p = 0; p < 16; ++p) {
        Waveform w;
        w.samples.assign(100, 0.0);
        group.waveforms.push_back(w);
    }
    BsmDistinguisher bsm(params);
    bsm.calibrate(5, group);

    Snapshot changed = group;
    for (auto& s : changed.waveforms[9].samples) s = 0.2;
    const auto bits = bsm.detect(5, changed);
    REQUIRE(bits.size() == 16);
    for (int p = 0; p < 16; ++p) CHECK(bits[p] == (p == 9 ? 1 : 0));
}

TEST_CASE("pooling preserves totals and splits contiguously") {
    std::vector<double> samples(640);
    Rng rng(6);
    for (auto& s : samples) s = rng.uniform(0.0, 1.0);
    const auto pooled = pool_sums(samples, 34);
    REQUIRE(pooled.size() == 34);
    double total = 0.0, pooled_total = 0.0;
    for (double s : samples) total += s;
    for (double b : pooled) pooled_total += b;
    CHECK(pooled_total == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("ann detection thresholds strictly") {
    AnnModel model;
    model.kind = SnapshotKind::mimo_scan;
    model.mlp = make_mlp(20, 2, 1);
    model.input_scale = 1.0;
    model.output_threshold = 0.5;

    Snapshot snap = mimo_snapshot(1);  // 20 samples
    SUBCASE("output exactly at the threshold stays zero") {
        model.mlp.bias_out(0) = 0.5;
        CHECK(ann_detect(model, snap)[0] == 0);
    }
    SUBCASE("output above the threshold fires") {
        model.mlp.bias_out(0) = 0.500001;
        CHECK(ann_detect(model, snap)[0] == 1);
    }
    SUBCASE("layout mismatch throws") {
        Snapshot wrong = mimo_snapshot(2);
        CHECK_THROWS(ann_detect(model, wrong));
    }
}
