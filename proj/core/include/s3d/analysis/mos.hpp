#pragma once

#include <span>
#include <string>
#include <vector>

#include "s3d/analysis/metrics.hpp"
#include "s3d/analysis/ratings.hpp"
#include "s3d/session/manifest.hpp"

namespace s3d::analysis {

/// Ratings of one trap stimulus may differ by at most this much.
inline constexpr int kMaxTrapDifference = 2;

enum class SubjectStatus { Qualified, Rejected };

struct TrapViolation {
    TrapPair pair;
    int difference = 0;

    friend bool operator==(const TrapViolation&, const TrapViolation&) = default;
};

struct SubjectReport {
    std::string subject_id;
    SubjectStatus status = SubjectStatus::Qualified;
    std::vector<TrapViolation> violated_traps;

    friend bool operator==(const SubjectReport&, const SubjectReport&) = default;
};

/// A subject is rejected iff some trap pair differs by more than
/// kMaxTrapDifference. Reports follow matrix.subject_ids order.
[[nodiscard]] std::vector<SubjectReport> screen_subjects(const RatingMatrix& matrix);
[[nodiscard]] std::vector<std::string> qualified_subjects(std::span<const SubjectReport> reports);

struct MosEntry {
    std::string stimulus_id;
    double mos = 0.0;
    std::size_t n = 0;
    double normalized_mos = 0.0;

    friend bool operator==(const MosEntry&, const MosEntry&) = default;
};

struct MosTable {
    int rating_categories = 5;
    std::vector<MosEntry> entries;

    [[nodiscard]] const MosEntry* find(std::string_view stimulus_id) const;
    [[nodiscard]] std::vector<double> mos_values() const;
    [[nodiscard]] std::vector<double> normalized_values() const;

    friend bool operator==(const MosTable&, const MosTable&) = default;
};

/// Maps a MOS on a 1..K scale onto [0, 1] as (mos - 1) / (K - 1).
[[nodiscard]] double normalize_mos(double mos, int rating_categories);

/// Arithmetic mean of the qualified subjects' first-showing ratings.
/// Throws NoRatingsForStimulus if a stimulus has none.
[[nodiscard]] MosTable compute_mos(const RatingMatrix& matrix, std::span<const std::string> qualified);

struct GroupAnalysis {
    std::vector<SubjectReport> subjects;
    MosTable mos;
};

struct CrossValidation {
    GroupAnalysis group1;
    GroupAnalysis group2;
    CorrelationReport report;
};

/// Screens each group on its own, computes per-group normalized MOS and
/// compares them in stimulus-id order. Throws StimulusSetMismatch when the
/// groups did not rate the same stimuli.
[[nodiscard]] CrossValidation cross_validate(const RatingMatrix& group1, const RatingMatrix& group2);

/// Mean MOS per (geometry, attribute) parameter pair, averaged over sources.
struct ParameterCell {
    std::string geometry_param;
    std::string attribute_param;
    int geometry_ordinal = 0;
    int attribute_ordinal = 0;
    double mean_mos = 0.0;
    std::size_t stimuli = 0;

    friend bool operator==(const ParameterCell&, const ParameterCell&) = default;
};

/// Cells sorted by (attribute ordinal, geometry ordinal).
[[nodiscard]] std::vector<ParameterCell> mos_by_parameters(const MosTable& table, const session::Manifest& manifest);

}  // namespace s3d::analysis
