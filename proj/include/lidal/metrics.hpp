#pragma once

#include <span>
#include <vector>

#include "lidal/geometry.hpp"

namespace lidal {

/// Mean absolute percentage error of counts: 100 * mean(|a_i - e_i| / a_i).
/// Every actual entry must be >= 1.
double mape(std::span<const int> actual, std::span<const int> estimated);

struct DrmseResult {
    double value = 0.0;  // sqrt(mean squared distance) over the matched pairs
    int matched = 0;
    int unmatched = 0;   // |count difference|
};

/// Pairs truth and estimates by greedy minimum-distance assignment, then
/// takes the root mean square of the matched distances. A count mismatch
/// matches min(count) pairs and reports the remainder.
DrmseResult drmse(std::span<const Vec2> truth, std::span<const Vec2> estimated);

/// Empirical distribution of error samples.
class Cdf {
public:
    explicit Cdf(std::vector<double> samples);

    /// Fraction of samples <= x.
    double fraction_at(double x) const;
    /// Smallest sample s with (rank of s) / n >= q; q in (0, 1].
    double percentile(double q) const;

    const std::vector<double>& sorted_samples() const { return sorted_; }
    /// (value, cumulative fraction) pairs, one per sample.
    std::vector<std::pair<double, double>> curve() const;

private:
    std::vector<double> sorted_;
};

}  // namespace lidal
