#include "s3d/analysis/mos.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>

#include "s3d/analysis/error.hpp"

namespace s3d::analysis {

std::vector<SubjectReport> screen_subjects(const RatingMatrix& matrix) {
    validate_matrix(matrix);
    std::vector<SubjectReport> reports;
    reports.reserve(matrix.subject_ids.size());
    for (std::size_t s = 0; s < matrix.subject_ids.size(); ++s) {
        SubjectReport report{matrix.subject_ids[s], SubjectStatus::Qualified, {}};
        for (const TrapPair& pair : matrix.trap_pairs[s]) {
            const int difference = std::abs(pair.first - pair.repeat);
            if (difference > kMaxTrapDifference) report.violated_traps.push_back({pair, difference});
        }
        if (!report.violated_traps.empty()) report.status = SubjectStatus::Rejected;
        reports.push_back(std::move(report));
    }
    return reports;
}

std::vector<std::string> qualified_subjects(std::span<const SubjectReport> reports) {
    std::vector<std::string> out;
    for (const auto& r : reports) {
        if (r.status == SubjectStatus::Qualified) out.push_back(r.subject_id);
    }
    return out;
}

const MosEntry* MosTable::find(std::string_view stimulus_id) const {
    for (const auto& e : entries) {
        if (e.stimulus_id == stimulus_id) return &e;
    }
    return nullptr;
}

std::vector<double> MosTable::mos_values() const {
    std::vector<double> out;
    for (const auto& e : entries) out.push_back(e.mos);
    return out;
}

std::vector<double> MosTable::normalized_values() const {
    std::vector<double> out;
    for (const auto& e : entries) out.push_back(e.normalized_mos);
    return out;
}

double normalize_mos(double mos, int rating_categories) {
    return (mos - 1.0) / static_cast<double>(rating_categories - 1);
}

MosTable compute_mos(const RatingMatrix& matrix, std::span<const std::string> qualified) {
    validate_matrix(matrix);
    std::vector<std::size_t> rows;
    for (const auto& id : qualified) {
        const auto s = matrix.subject_index(id);
        if (!s) throw AnalysisError(AnalysisErrc::InvalidMatrix, "unknown subject '" + id + "'");
        rows.push_back(*s);
    }
    MosTable table;
    table.rating_categories = matrix.rating_categories;
    for (std::size_t t = 0; t < matrix.stimulus_ids.size(); ++t) {
        long long sum = 0;
        std::size_t n = 0;
        for (std::size_t s : rows) {
            if (const auto& score = matrix.scores[s][t]) {
                sum += *score;
                ++n;
            }
        }
        if (n == 0) {
            throw AnalysisError(AnalysisErrc::NoRatingsForStimulus,
                                "no qualified ratings for '" + matrix.stimulus_ids[t] + "'");
        }
        const double mos = static_cast<double>(sum) / static_cast<double>(n);
        table.entries.push_back({matrix.stimulus_ids[t], mos, n, normalize_mos(mos, matrix.rating_categories)});
    }
    return table;
}

CrossValidation cross_validate(const RatingMatrix& group1, const RatingMatrix& group2) {
    const std::set<std::string> s1(group1.stimulus_ids.begin(), group1.stimulus_ids.end());
    const std::set<std::string> s2(group2.stimulus_ids.begin(), group2.stimulus_ids.end());
    if (s1 != s2) throw AnalysisError(AnalysisErrc::StimulusSetMismatch, "groups rated different stimulus sets");

    auto analyse = [](const RatingMatrix& group) {
        GroupAnalysis g;
        g.subjects = screen_subjects(group);
        g.mos = compute_mos(group, qualified_subjects(g.subjects));
        return g;
    };
    CrossValidation cv;
    cv.group1 = analyse(group1);
    cv.group2 = analyse(group2);

    std::vector<double> a;
    std::vector<double> b;
    for (const auto& id : s1) {
        a.push_back(cv.group1.mos.find(id)->normalized_mos);
        b.push_back(cv.group2.mos.find(id)->normalized_mos);
    }
    cv.report = correlate(a, b);
    return cv;
}

std::vector<ParameterCell> mos_by_parameters(const MosTable& table, const session::Manifest& manifest) {
    struct Acc {
        double sum = 0.0;
        std::size_t n = 0;
    };
    std::map<std::pair<std::string, std::string>, Acc> cells;
    for (const auto& entry : table.entries) {
        const auto* meta = manifest.find(entry.stimulus_id);
        if (!meta || meta->is_source() || !meta->geometry_param || !meta->attribute_param) continue;
        auto& acc = cells[{*meta->geometry_param, *meta->attribute_param}];
        acc.sum += entry.mos;
        ++acc.n;
    }
    std::vector<ParameterCell> out;
    for (const auto& [key, acc] : cells) {
        out.push_back({key.first, key.second, session::parameter_ordinal(key.first).value_or(0),
                       session::parameter_ordinal(key.second).value_or(0), acc.sum / static_cast<double>(acc.n), acc.n});
    }
    std::sort(out.begin(), out.end(), [](const ParameterCell& x, const ParameterCell& y) {
        return std::tie(x.attribute_ordinal, x.geometry_ordinal) < std::tie(y.attribute_ordinal, y.geometry_ordinal);
    });
    return out;
}

}  // namespace s3d::analysis
