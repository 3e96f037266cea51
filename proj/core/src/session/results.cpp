#include "s3d/session/results.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace s3d::session {

std::vector<ResultRow> result_rows(const SessionState& state, const Manifest& manifest) {
    std::vector<ResultRow> rows;
    rows.reserve(state.judgments.size());
    for (const Judgment& j : state.judgments) {
        const Trial& trial = state.playlist.trials.at(j.trial_index);
        const StimulusMeta* meta = manifest.find(j.stimulus_id);
        ResultRow row;
        row.participant = j.participant_name;
        row.trial_index = j.trial_index;
        row.stimulus_id = j.stimulus_id;
        row.source_id = trial.reference_id;
        if (meta) {
            row.geometry_param = meta->geometry_param.value_or("");
            row.attribute_param = meta->attribute_param.value_or("");
        }
        row.is_trap_repeat = trial.is_trap_repeat;
        row.score = j.score;
        row.view_time_ms = j.view_time_ms;
        row.timestamp = j.wall_clock;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string csv_field(std::string_view value) {
    if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                current += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                current += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current += c;
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

void write_results_csv(std::ostream& out, std::span<const ResultRow> rows) {
    out << kResultsCsvHeader << '\n';
    for (const ResultRow& r : rows) {
        out << csv_field(r.participant) << ',' << r.trial_index << ',' << csv_field(r.stimulus_id) << ','
            << csv_field(r.source_id) << ',' << csv_field(r.geometry_param) << ',' << csv_field(r.attribute_param) << ','
            << (r.is_trap_repeat ? "true" : "false") << ',' << r.score << ',' << r.view_time_ms << ','
            << csv_field(r.timestamp) << '\n';
    }
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("results CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kResultsCsvHeader) throw std::runtime_error("results CSV header mismatch");
    std::vector<ResultRow> rows;
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 10) throw std::runtime_error("results CSV line " + std::to_string(number) + ": expected 10 fields");
        try {
            ResultRow r;
            r.participant = f[0];
            r.trial_index = std::stoull(f[1]);
            r.stimulus_id = f[2];
            r.source_id = f[3];
            r.geometry_param = f[4];
            r.attribute_param = f[5];
            if (f[6] == "true" || f[6] == "1") r.is_trap_repeat = true;
            else if (f[6] == "false" || f[6] == "0") r.is_trap_repeat = false;
            else throw std::invalid_argument("is_trap_repeat");
            r.score = std::stoi(f[7]);
            r.view_time_ms = std::stoull(f[8]);
            r.timestamp = f[9];
            rows.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw std::runtime_error("results CSV line " + std::to_string(number) + ": bad value");
        }
    }
    return rows;
}

std::vector<ResultRow> read_journal_rows(const std::filesystem::path& journal_path) {
    std::ifstream in(journal_path);
    if (!in) throw std::runtime_error("cannot open journal " + journal_path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);

    std::vector<ResultRow> rows;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(lines[i]);
        } catch (const nlohmann::json::parse_error&) {
            if (i + 1 == lines.size()) break;
            throw std::runtime_error(journal_path.string() + ": corrupt record at line " + std::to_string(i + 1));
        }
        if (record.value("type", "") == "header") continue;
        try {
            ResultRow r;
            r.participant = record.at("participant").get<std::string>();
            r.trial_index = record.at("trial_index").get<std::size_t>();
            r.stimulus_id = record.at("stimulus_id").get<std::string>();
            r.source_id = record.at("reference_id").get<std::string>();
            r.is_trap_repeat = record.at("is_trap_repeat").get<bool>();
            r.score = record.at("score").get<int>();
            r.view_time_ms = record.at("view_time_ms").get<std::uint64_t>();
            r.timestamp = record.at("wall_clock").get<std::string>();
            rows.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(journal_path.string() + ": bad record at line " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return rows;
}

std::vector<ResultRow> load_result_rows(const std::filesystem::path& path) {
    if (path.extension() == ".csv") {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open " + path.string());
        return read_results_csv(in);
    }
    return read_journal_rows(path);
}

}  // namespace s3d::session
