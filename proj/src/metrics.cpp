#include "lidal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lidal {

double mape(std::span<const int> actual, std::span<const int> estimated) {
    if (actual.size() != estimated.size()) throw std::invalid_argument("mape: length mismatch");
    if (actual.empty()) throw std::invalid_argument("mape: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual[i] < 1) throw std::invalid_argument("mape: actual counts must be >= 1");
        sum += std::abs(actual[i] - estimated[i]) / static_cast<double>(actual[i]);
    }
    return 100.0 * sum / static_cast<double>(actual.size());
}

DrmseResult drmse(std::span<const Vec2> truth, std::span<const Vec2> estimated) {
    DrmseResult result;
    result.unmatched = std::abs(static_cast<int>(truth.size()) - static_cast<int>(estimated.size()));
    const int pairs = static_cast<int>(std::min(truth.size(), estimated.size()));
    if (pairs == 0) return result;

    std::vector<bool> used_truth(truth.size(), false), used_est(estimated.size(), false);
    double sum_sq = 0.0;
    for (int pair = 0; pair < pairs; ++pair) {
        double best = std::numeric_limits<double>::infinity();
        int bi = -1, bj = -1;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (used_truth[i]) continue;
            for (std::size_t j = 0; j < estimated.size(); ++j) {
                if (used_est[j]) continue;
                const double d = distance(truth[i], estimated[j]);
                if (d < best) {
                    best = d;
                    bi = static_cast<int>(i);
                    bj = static_cast<int>(j);
                }
            }
        }
        used_truth[bi] = used_est[bj] = true;
        sum_sq += best * best;
    }
    result.matched = pairs;
    result.value = std::sqrt(sum_sq / pairs);
    return result;
}

Cdf::Cdf(std::vector<double> samples) : sorted_(std::move(samples)) {
    if (sorted_.empty()) throw std::invalid_argument("Cdf: no samples");
    std::sort(sorted_.begin(), sorted_.end());
}

double Cdf::fraction_at(double x) const {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double Cdf::percentile(double q) const {
    if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("Cdf::percentile: q must be in (0,1]");
    const auto n = sorted_.size();
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    return sorted_[rank - 1];
}

std::vector<std::pair<double, double>> Cdf::curve() const {
    std::vector<std::pair<double, double>> points;
    points.reserve(sorted_.size());
    for (std::size_t i = 0; i < sorted_.size(); ++i) {
        points.emplace_back(sorted_[i], static_cast<double>(i + 1) / sorted_.size());
    }
    return points;
}

}  // namespace lidal
