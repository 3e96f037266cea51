#include "s3d/analysis/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>

#include "s3d/analysis/error.hpp"

namespace s3d::analysis {

std::string_view to_string(AnalysisErrc code) noexcept {
    switch (code) {
    case AnalysisErrc::LengthMismatch: return "LengthMismatch";
    case AnalysisErrc::DegenerateInput: return "DegenerateInput";
    case AnalysisErrc::NoRatingsForStimulus: return "NoRatingsForStimulus";
    case AnalysisErrc::StimulusSetMismatch: return "StimulusSetMismatch";
    case AnalysisErrc::InvalidMatrix: return "InvalidMatrix";
    case AnalysisErrc::InvalidLatentModel: return "InvalidLatentModel";
    case AnalysisErrc::InvalidReport: return "InvalidReport";
    }
    return "Unknown";
}

AnalysisError::AnalysisError(AnalysisErrc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

namespace {

void require_correlation_input(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw AnalysisError(AnalysisErrc::LengthMismatch,
                            "lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
    }
    if (a.size() < 3) throw AnalysisError(AnalysisErrc::DegenerateInput, "need at least 3 values");
}

double pearson(std::span<const double> a, std::span<const double> b) {
    const auto n = static_cast<double>(a.size());
    const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) throw AnalysisError(AnalysisErrc::DegenerateInput, "zero variance");
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

/// Sum of t(t-1)/2 over runs of equal values in an already sorted range.
template <typename It, typename Eq>
std::int64_t tied_pairs(It first, It last, Eq equal) {
    std::int64_t total = 0;
    while (first != last) {
        It run = first;
        std::int64_t t = 0;
        while (run != last && equal(*run, *first)) {
            ++run;
            ++t;
        }
        total += t * (t - 1) / 2;
        first = run;
    }
    return total;
}

/// Stable merge sort of `v`, returning the number of inversions (swaps).
std::int64_t sort_counting_inversions(std::vector<double>& v, std::vector<double>& scratch, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::int64_t swaps = sort_counting_inversions(v, scratch, lo, mid) + sort_counting_inversions(v, scratch, mid, hi);
    std::size_t i = lo;
    std::size_t j = mid;
    std::size_t k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            swaps += static_cast<std::int64_t>(mid - i);
            scratch[k++] = v[j++];
        } else {
            scratch[k++] = v[i++];
        }
    }
    while (i < mid) scratch[k++] = v[i++];
    while (j < hi) scratch[k++] = v[j++];
    std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo), scratch.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return swaps;
}

}  // namespace

std::vector<double> fractional_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
        // positions i..j-1 hold equal values: ranks i+1..j, mean (i+1+j)/2
        const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
        i = j;
    }
    return ranks;
}

double plcc(std::span<const double> a, std::span<const double> b) {
    require_correlation_input(a, b);
    return pearson(a, b);
}

double srocc(std::span<const double> a, std::span<const double> b) {
    require_correlation_input(a, b);
    const auto ra = fractional_ranks(a);
    const auto rb = fractional_ranks(b);
    return pearson(ra, rb);
}

double krocc(std::span<const double> a, std::span<const double> b) {
    require_correlation_input(a, b);
    const std::size_t n = a.size();
    std::vector<std::pair<double, double>> pairs(n);
    for (std::size_t i = 0; i < n; ++i) pairs[i] = {a[i], b[i]};
    std::sort(pairs.begin(), pairs.end());

    const std::int64_t ties_a = tied_pairs(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) { return x.first == y.first; });
    const std::int64_t ties_joint = tied_pairs(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) { return x == y; });

    std::vector<double> by_b(n);
    for (std::size_t i = 0; i < n; ++i) by_b[i] = pairs[i].second;
    std::vector<double> scratch(n);
    const std::int64_t swaps = sort_counting_inversions(by_b, scratch, 0, n);
    const std::int64_t ties_b = tied_pairs(by_b.begin(), by_b.end(), [](double x, double y) { return x == y; });

    const auto total = static_cast<std::int64_t>(n * (n - 1) / 2);
    const std::int64_t untied_a = total - ties_a;
    const std::int64_t untied_b = total - ties_b;
    if (untied_a == 0 || untied_b == 0) throw AnalysisError(AnalysisErrc::DegenerateInput, "zero variance");
    // concordant - discordant = total - ties_a - ties_b + ties_joint - 2 * swaps
    const std::int64_t score = total - ties_a - ties_b + ties_joint - 2 * swaps;
    return std::clamp(static_cast<double>(score) / std::sqrt(static_cast<double>(untied_a) * static_cast<double>(untied_b)),
                      -1.0, 1.0);
}

double rmse(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) {
        throw AnalysisError(AnalysisErrc::LengthMismatch,
                            "lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(sum / static_cast<double>(a.size()));
}

CorrelationReport correlate(std::span<const double> a, std::span<const double> b) {
    return {srocc(a, b), plcc(a, b), krocc(a, b), rmse(a, b)};
}

}  // namespace s3d::analysis
