#include "s3d/analysis/ratings.hpp"

#include <algorithm>
#include <set>

#include "s3d/analysis/error.hpp"

namespace s3d::analysis {

namespace {

std::optional<std::size_t> index_of(const std::vector<std::string>& ids, std::string_view id) {
    const auto it = std::find(ids.begin(), ids.end(), id);
    if (it == ids.end()) return std::nullopt;
    return static_cast<std::size_t>(it - ids.begin());
}

[[noreturn]] void invalid(const std::string& what) { throw AnalysisError(AnalysisErrc::InvalidMatrix, what); }

}  // namespace

std::optional<std::size_t> RatingMatrix::stimulus_index(std::string_view id) const { return index_of(stimulus_ids, id); }
std::optional<std::size_t> RatingMatrix::subject_index(std::string_view id) const { return index_of(subject_ids, id); }

RatingMatrix RatingMatrix::select_subjects(std::span<const std::string> subjects) const {
    RatingMatrix out;
    out.stimulus_ids = stimulus_ids;
    out.rating_categories = rating_categories;
    for (const auto& id : subjects) {
        const auto s = subject_index(id);
        if (!s) invalid("unknown subject '" + id + "'");
        out.subject_ids.push_back(id);
        out.scores.push_back(scores[*s]);
        out.trap_pairs.push_back(trap_pairs[*s]);
    }
    return out;
}

void validate_matrix(const RatingMatrix& m) {
    if (m.rating_categories < 2) invalid("rating_categories must be >= 2");
    if (m.scores.size() != m.subject_ids.size() || m.trap_pairs.size() != m.subject_ids.size()) {
        invalid("per-subject rows do not match the subject list");
    }
    if (std::set<std::string>(m.subject_ids.begin(), m.subject_ids.end()).size() != m.subject_ids.size()) {
        invalid("duplicate subject ids");
    }
    if (std::set<std::string>(m.stimulus_ids.begin(), m.stimulus_ids.end()).size() != m.stimulus_ids.size()) {
        invalid("duplicate stimulus ids");
    }
    auto in_range = [&](int score) { return score >= 1 && score <= m.rating_categories; };
    for (std::size_t s = 0; s < m.subject_ids.size(); ++s) {
        if (m.scores[s].size() != m.stimulus_ids.size()) invalid("row of '" + m.subject_ids[s] + "' has the wrong width");
        for (const auto& score : m.scores[s]) {
            if (score && !in_range(*score)) invalid("score " + std::to_string(*score) + " out of range");
        }
        for (const auto& pair : m.trap_pairs[s]) {
            if (!in_range(pair.first) || !in_range(pair.repeat)) invalid("trap score out of range");
        }
    }
}

RatingMatrix matrix_from_rows(std::span<const session::ResultRow> rows, int rating_categories) {
    RatingMatrix m;
    m.rating_categories = rating_categories;
    std::set<std::string> stimuli;
    std::set<std::string> subjects;
    for (const auto& row : rows) {
        stimuli.insert(row.stimulus_id);
        subjects.insert(row.participant);
    }
    m.stimulus_ids.assign(stimuli.begin(), stimuli.end());
    m.subject_ids.assign(subjects.begin(), subjects.end());
    m.scores.assign(m.subject_ids.size(), std::vector<std::optional<int>>(m.stimulus_ids.size()));
    m.trap_pairs.resize(m.subject_ids.size());

    std::vector<const session::ResultRow*> ordered;
    for (const auto& row : rows) ordered.push_back(&row);
    // first showings before repeats, so pairing does not depend on row order
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto* a, const auto* b) { return !a->is_trap_repeat && b->is_trap_repeat; });

    for (const auto* row : ordered) {
        const std::size_t s = *m.subject_index(row->participant);
        const std::size_t t = *m.stimulus_index(row->stimulus_id);
        if (row->score < 1 || row->score > rating_categories) {
            invalid("participant '" + row->participant + "' rated '" + row->stimulus_id + "' " + std::to_string(row->score));
        }
        auto& cell = m.scores[s][t];
        if (!row->is_trap_repeat) {
            if (cell) invalid("participant '" + row->participant + "' rated '" + row->stimulus_id + "' twice");
            cell = row->score;
            continue;
        }
        if (!cell) invalid("repeat of '" + row->stimulus_id + "' without a first showing for '" + row->participant + "'");
        auto& pairs = m.trap_pairs[s];
        if (std::any_of(pairs.begin(), pairs.end(), [&](const TrapPair& p) { return p.stimulus_id == row->stimulus_id; })) {
            invalid("more than one repeat of '" + row->stimulus_id + "' for '" + row->participant + "'");
        }
        pairs.push_back({row->stimulus_id, *cell, row->score});
    }
    return m;
}

std::pair<RatingMatrix, RatingMatrix> split_groups(const RatingMatrix& matrix, const std::map<std::string, int>& groups) {
    std::vector<std::string> first;
    std::vector<std::string> second;
    for (const auto& subject : matrix.subject_ids) {
        const auto it = groups.find(subject);
        if (it == groups.end()) invalid("subject '" + subject + "' has no group assignment");
        if (it->second == 1) first.push_back(subject);
        else if (it->second == 2) second.push_back(subject);
        else invalid("subject '" + subject + "' assigned to group " + std::to_string(it->second) + "; expected 1 or 2");
    }
    return {matrix.select_subjects(first), matrix.select_subjects(second)};
}

}  // namespace s3d::analysis
