#pragma once

#include <span>
#include <vector>

namespace s3d::analysis {

/// 1-based ranks; tied values share the mean of the ranks they span.
[[nodiscard]] std::vector<double> fractional_ranks(std::span<const double> values);

/// Sample Pearson correlation on raw values.
/// Throws LengthMismatch for unequal lengths, DegenerateInput for n < 3 or
/// zero variance in either input.
[[nodiscard]] double plcc(std::span<const double> a, std::span<const double> b);

/// Pearson correlation of fractional ranks.
[[nodiscard]] double srocc(std::span<const double> a, std::span<const double> b);

/// Kendall tau-b, computed in O(n log n) (Knight's merge-sort method).
[[nodiscard]] double krocc(std::span<const double> a, std::span<const double> b);

/// sqrt(mean((a_i - b_i)^2)). Throws LengthMismatch for unequal or empty input.
[[nodiscard]] double rmse(std::span<const double> a, std::span<const double> b);

struct CorrelationReport {
    double srocc = 0.0;
    double plcc = 0.0;
    double krocc = 0.0;
    double rmse = 0.0;

    friend bool operator==(const CorrelationReport&, const CorrelationReport&) = default;
};

[[nodiscard]] CorrelationReport correlate(std::span<const double> a, std::span<const double> b);

}  // namespace s3d::analysis
