#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "s3d/session/results.hpp"

namespace s3d::analysis {

/// Both ratings a subject gave to one trap stimulus.
struct TrapPair {
    std::string stimulus_id;
    int first = 0;
    int repeat = 0;

    friend bool operator==(const TrapPair&, const TrapPair&) = default;
};

/// Ratings per (subject, stimulus). Only first showings are stored in
/// `scores`; repeat showings of trap stimuli live only in `trap_pairs` and
/// are used for screening.
struct RatingMatrix {
    std::vector<std::string> stimulus_ids;
    std::vector<std::string> subject_ids;
    /// scores[subject][stimulus]
    std::vector<std::vector<std::optional<int>>> scores;
    /// trap_pairs[subject]
    std::vector<std::vector<TrapPair>> trap_pairs;
    int rating_categories = 5;

    [[nodiscard]] std::optional<std::size_t> stimulus_index(std::string_view id) const;
    [[nodiscard]] std::optional<std::size_t> subject_index(std::string_view id) const;

    /// Rows/columns restricted to the named subjects, in the given order.
    [[nodiscard]] RatingMatrix select_subjects(std::span<const std::string> subjects) const;

    friend bool operator==(const RatingMatrix&, const RatingMatrix&) = default;
};

/// Throws AnalysisError{InvalidMatrix} on shape or range violations.
void validate_matrix(const RatingMatrix& matrix);

/// Groups result rows by participant. Stimulus ids are sorted; subjects
/// appear sorted by id. A repeat row pairs with the first showing of the same
/// stimulus for the same participant.
[[nodiscard]] RatingMatrix matrix_from_rows(std::span<const session::ResultRow> rows, int rating_categories);

/// Splits subjects by an explicit subject -> group map (groups 1 and 2).
/// Subjects missing from the map are an error.
[[nodiscard]] std::pair<RatingMatrix, RatingMatrix> split_groups(const RatingMatrix& matrix,
                                                                 const std::map<std::string, int>& groups);

}  // namespace s3d::analysis
