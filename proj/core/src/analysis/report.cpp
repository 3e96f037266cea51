#include "s3d/analysis/report.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "s3d/analysis/error.hpp"
#include "s3d/session/results.hpp"

namespace s3d::analysis {

namespace {

using nlohmann::json;
using session::csv_field;

[[noreturn]] void invalid(const std::string& what) { throw AnalysisError(AnalysisErrc::InvalidReport, what); }

void expect_keys(const json& object, const std::set<std::string>& keys, const std::string& where) {
    if (!object.is_object()) invalid(where + " must be an object");
    for (const auto& key : keys) {
        if (!object.contains(key)) invalid(where + " lacks '" + key + "'");
    }
    for (const auto& [key, value] : object.items()) {
        if (!keys.contains(key)) invalid(where + " has unknown key '" + key + "'");
    }
}

double number(const json& value, const std::string& where) {
    if (!value.is_number()) invalid(where + " must be a number");
    return value.get<double>();
}

int integer(const json& value, const std::string& where) {
    if (!value.is_number_integer()) invalid(where + " must be an integer");
    return value.get<int>();
}

std::string text(const json& value, const std::string& where) {
    if (!value.is_string()) invalid(where + " must be a string");
    return value.get<std::string>();
}

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

std::string_view to_string(SubjectStatus status) noexcept {
    return status == SubjectStatus::Qualified ? "qualified" : "rejected";
}

json to_json(std::span<const SubjectReport> reports) {
    json subjects = json::array();
    for (const auto& r : reports) {
        json violations = json::array();
        for (const auto& v : r.violated_traps) {
            violations.push_back({{"stimulus_id", v.pair.stimulus_id},
                                  {"first", v.pair.first},
                                  {"repeat", v.pair.repeat},
                                  {"difference", v.difference}});
        }
        subjects.push_back({{"subject_id", r.subject_id}, {"status", to_string(r.status)}, {"violated_traps", violations}});
    }
    return {{"kind", "subject_reports"}, {"subjects", subjects}};
}

json to_json(const MosTable& table) {
    json entries = json::array();
    for (const auto& e : table.entries) {
        entries.push_back({{"stimulus_id", e.stimulus_id}, {"mos", e.mos}, {"n", e.n}, {"normalized_mos", e.normalized_mos}});
    }
    return {{"kind", "mos_table"}, {"rating_categories", table.rating_categories}, {"entries", entries}};
}

json to_json(const CorrelationReport& r) {
    return {{"kind", "correlation_report"}, {"srocc", r.srocc}, {"plcc", r.plcc}, {"krocc", r.krocc}, {"rmse", r.rmse}};
}

json to_json(std::span<const ParameterCell> cells) {
    json list = json::array();
    for (const auto& c : cells) {
        list.push_back({{"geometry_param", c.geometry_param},
                        {"attribute_param", c.attribute_param},
                        {"mean_mos", c.mean_mos},
                        {"stimuli", c.stimuli}});
    }
    return {{"kind", "parameter_grid"}, {"cells", list}};
}

std::vector<SubjectReport> subject_reports_from_json(const json& doc) {
    expect_keys(doc, {"kind", "subjects"}, "subject report");
    if (doc.at("kind") != "subject_reports") invalid("wrong kind for subject report");
    if (!doc.at("subjects").is_array()) invalid("'subjects' must be an array");
    std::vector<SubjectReport> out;
    for (const auto& s : doc.at("subjects")) {
        expect_keys(s, {"subject_id", "status", "violated_traps"}, "subject");
        SubjectReport r;
        r.subject_id = text(s.at("subject_id"), "subject_id");
        const auto status = text(s.at("status"), "status");
        if (status == "qualified") r.status = SubjectStatus::Qualified;
        else if (status == "rejected") r.status = SubjectStatus::Rejected;
        else invalid("unknown status '" + status + "'");
        if (!s.at("violated_traps").is_array()) invalid("'violated_traps' must be an array");
        for (const auto& v : s.at("violated_traps")) {
            expect_keys(v, {"stimulus_id", "first", "repeat", "difference"}, "violation");
            TrapViolation tv{{text(v.at("stimulus_id"), "stimulus_id"), integer(v.at("first"), "first"),
                              integer(v.at("repeat"), "repeat")},
                             integer(v.at("difference"), "difference")};
            if (tv.difference != std::abs(tv.pair.first - tv.pair.repeat) || tv.difference <= kMaxTrapDifference) {
                invalid("inconsistent trap violation for '" + tv.pair.stimulus_id + "'");
            }
            r.violated_traps.push_back(std::move(tv));
        }
        if ((r.status == SubjectStatus::Rejected) != !r.violated_traps.empty()) {
            invalid("status of '" + r.subject_id + "' disagrees with its violations");
        }
        out.push_back(std::move(r));
    }
    return out;
}

MosTable mos_table_from_json(const json& doc) {
    expect_keys(doc, {"kind", "rating_categories", "entries"}, "MOS table");
    if (doc.at("kind") != "mos_table") invalid("wrong kind for MOS table");
    MosTable table;
    table.rating_categories = integer(doc.at("rating_categories"), "rating_categories");
    if (table.rating_categories < 2) invalid("rating_categories must be >= 2");
    if (!doc.at("entries").is_array()) invalid("'entries' must be an array");
    for (const auto& e : doc.at("entries")) {
        expect_keys(e, {"stimulus_id", "mos", "n", "normalized_mos"}, "MOS entry");
        MosEntry entry;
        entry.stimulus_id = text(e.at("stimulus_id"), "stimulus_id");
        entry.mos = number(e.at("mos"), "mos");
        const int n = integer(e.at("n"), "n");
        if (n < 1) invalid("'n' must be >= 1");
        entry.n = static_cast<std::size_t>(n);
        entry.normalized_mos = number(e.at("normalized_mos"), "normalized_mos");
        if (entry.mos < 1.0 || entry.mos > table.rating_categories) invalid("mos outside the rating scale");
        if (std::abs(entry.normalized_mos - normalize_mos(entry.mos, table.rating_categories)) > 1e-12) {
            invalid("normalized_mos inconsistent with mos for '" + entry.stimulus_id + "'");
        }
        table.entries.push_back(std::move(entry));
    }
    return table;
}

CorrelationReport correlation_from_json(const json& doc) {
    expect_keys(doc, {"kind", "srocc", "plcc", "krocc", "rmse"}, "correlation report");
    if (doc.at("kind") != "correlation_report") invalid("wrong kind for correlation report");
    CorrelationReport r{number(doc.at("srocc"), "srocc"), number(doc.at("plcc"), "plcc"), number(doc.at("krocc"), "krocc"),
                        number(doc.at("rmse"), "rmse")};
    for (double c : {r.srocc, r.plcc, r.krocc}) {
        if (!(c >= -1.0 && c <= 1.0)) invalid("correlation outside [-1, 1]");
    }
    if (!(r.rmse >= 0.0)) invalid("rmse must be nonnegative");
    return r;
}

void write_csv(std::ostream& out, std::span<const SubjectReport> reports) {
    out << "subject_id,status,violated_traps\n";
    for (const auto& r : reports) {
        std::string traps;
        for (const auto& v : r.violated_traps) {
            if (!traps.empty()) traps += ';';
            traps += v.pair.stimulus_id + ':' + std::to_string(v.pair.first) + '/' + std::to_string(v.pair.repeat);
        }
        out << csv_field(r.subject_id) << ',' << to_string(r.status) << ',' << csv_field(traps) << '\n';
    }
}

void write_csv(std::ostream& out, const MosTable& table) {
    out << "stimulus_id,mos,n,normalized_mos\n";
    for (const auto& e : table.entries) {
        out << csv_field(e.stimulus_id) << ',' << format_double(e.mos) << ',' << e.n << ',' << format_double(e.normalized_mos)
            << '\n';
    }
}

void write_csv(std::ostream& out, const CorrelationReport& r) {
    out << "srocc,plcc,krocc,rmse\n";
    out << format_double(r.srocc) << ',' << format_double(r.plcc) << ',' << format_double(r.krocc) << ','
        << format_double(r.rmse) << '\n';
}

void write_csv(std::ostream& out, std::span<const ParameterCell> cells) {
    out << "geometry_param,attribute_param,mean_mos,stimuli\n";
    for (const auto& c : cells) {
        out << csv_field(c.geometry_param) << ',' << csv_field(c.attribute_param) << ',' << format_double(c.mean_mos) << ','
            << c.stimuli << '\n';
    }
}

}  // namespace s3d::analysis
