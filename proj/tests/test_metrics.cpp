#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lidal/metrics.hpp"
#include "lidal/rng.hpp"

using namespace lidal;

TEST_CASE("mape") {
    SUBCASE("exact estimates score zero") {
        const int actual[3] = {1, 2, 3};
        CHECK(mape(actual, actual) == doctest::Approx(0.0));
    }
    SUBCASE("hand arithmetic") {
        const int actual[2] = {2, 4};
        const int estimated[2] = {2, 3};
        CHECK(mape(actual, estimated) == doctest::Approx(12.5));
    }
    SUBCASE("random vectors match an independent loop") {
        Rng rng(3);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<int> actual(10), estimated(10);
            for (int i = 0; i < 10; ++i) {
                actual[i] = 1 + static_cast<int>(rng.uniform_index(15));
                estimated[i] = static_cast<int>(rng.uniform_index(18));
            }
            double oracle = 0.0;
            for (int i = 0; i < 10; ++i) {
                oracle += std::abs(actual[i] - estimated[i]) / static_cast<double>(actual[i]);
            }
            oracle *= 10.0;  // 100 / n
            CHECK(mape(actual, estimated) == doctest::Approx(oracle).epsilon(1e-12));
        }
    }
    SUBCASE("zero actual counts are rejected") {
        const int actual[2] = {0, 2};
        const int estimated[2] = {1, 2};
        CHECK_THROWS(mape(actual, estimated));
    }
    SUBCASE("length mismatch is rejected") {
        const int actual[2] = {1, 2};
        const int estimated[1] = {1};
        CHECK_THROWS(mape(actual, estimated));
    }
}

TEST_CASE("drmse") {
    SUBCASE("identical sets score zero") {
        const Vec2 pts[2] = {{1, 1}, {2, 3}};
        const auto r = drmse(pts, pts);
        CHECK(r.value == doctest::Approx(0.0));
        CHECK(r.matched == 2);
        CHECK(r.unmatched == 0);
    }
    SUBCASE("single 3-4-5 pair") {
        const Vec2 truth[1] = {{0, 0}};
        const Vec2 est[1] = {{0.3, 0.4}};
        CHECK(drmse(truth, est).value == doctest::Approx(0.5));
    }
    SUBCASE("two errors of 0.3 and 0.4 average in quadrature") {
        const Vec2 truth[2] = {{0, 0}, {5, 5}};
        const Vec2 est[2] = {{0.3, 0}, {5, 5.4}};
        CHECK(drmse(truth, est).value == doctest::Approx(std::sqrt(0.125)).epsilon(1e-12));
    }
    SUBCASE("count mismatch pairs the closest subset") {
        const Vec2 truth[2] = {{0, 0}, {5, 5}};
        const Vec2 est[1] = {{0.1, 0}};
        const auto r = drmse(truth, est);
        CHECK(r.matched == 1);
        CHECK(r.unmatched == 1);
        CHECK(r.value == doctest::Approx(0.1));
    }
    SUBCASE("empty estimates yield zero matched") {
        const Vec2 truth[1] = {{1, 1}};
        const auto r = drmse(truth, {});
        CHECK(r.matched == 0);
        CHECK(r.unmatched == 1);
    }
}

TEST_CASE("cdf") {
    SUBCASE("constant samples step at the constant") {
        const Cdf cdf(std::vector<double>(10, 2.5));
        CHECK(cdf.fraction_at(2.4) == doctest::Approx(0.0));
        CHECK(cdf.fraction_at(2.5) == doctest::Approx(1.0));
        CHECK(cdf.percentile(0.95) == doctest::Approx(2.5));
    }
    SUBCASE("1..100 puts the 95th percentile at 95") {
        std::vector<double> samples;
        for (int i = 1; i <= 100; ++i) samples.push_back(i);
        const Cdf cdf(samples);
        CHECK(cdf.percentile(0.95) == doctest::Approx(95.0));
        CHECK(cdf.percentile(1.0) == doctest::Approx(100.0));
        CHECK(cdf.fraction_at(50.0) == doctest::Approx(0.5));
    }
    SUBCASE("percentiles match a sort-and-index oracle and stay monotone") {
        Rng rng(8);
        std::vector<double> samples(333);
        for (auto& s : samples) s = rng.uniform(0.0, 10.0);
        const Cdf cdf(samples);
        std::vector<double> sorted = samples;
        std::sort(sorted.begin(), sorted.end());
        double prev = -1.0;
        for (double q : {0.05, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99}) {
            const auto rank = static_cast<std::size_t>(std::ceil(q * sorted.size()));
            CHECK(cdf.percentile(q) == doctest::Approx(sorted[rank - 1]));
            CHECK(cdf.percentile(q) >= prev);
            prev = cdf.percentile(q);
        }
    }
    SUBCASE("curve is non-decreasing and ends at one") {
        Rng rng(9);
        std::vector<double> samples(50);
        for (auto& s : samples) s = rng.uniform(0.0, 1.0);
        const auto curve = Cdf(samples).curve();
        CHECK(curve.back().second == doctest::Approx(1.0));
        for (std::size_t i = 1; i < curve.size(); ++i) {
            CHECK(curve[i].first >= curve[i - 1].first);
            CHECK(curve[i].second >= curve[i - 1].second);
        }
    }
    SUBCASE("empty and bad quantiles throw") {
        CHECK_THROWS(Cdf({}));
        const Cdf cdf(std::vector<double>{1.0});
        CHECK_THROWS(cdf.percentile(0.0));
        CHECK_THROWS(cdf.percentile(1.5));
    }
}
