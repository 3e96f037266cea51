#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "s3d/session/manifest.hpp"
#include "s3d/session/session.hpp"

namespace s3d::session {

/// One row of the final results export; also the common input format of the
/// analysis tools.
struct ResultRow {
    std::string participant;
    std::size_t trial_index = 0;
    std::string stimulus_id;
    std::string source_id;
    std::string geometry_param;
    std::string attribute_param;
    bool is_trap_repeat = false;
    int score = 0;
    std::uint64_t view_time_ms = 0;
    std::string timestamp;

    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

inline constexpr std::string_view kResultsCsvHeader =
    "participant,trial_index,stimulus_id,source_id,geometry_param,attribute_param,is_trap_repeat,score,view_time_ms,timestamp";

[[nodiscard]] std::vector<ResultRow> result_rows(const SessionState& state, const Manifest& manifest);

void write_results_csv(std::ostream& out, std::span<const ResultRow> rows);
/// Throws std::runtime_error on a header mismatch or malformed row.
[[nodiscard]] std::vector<ResultRow> read_results_csv(std::istream& in);

/// Reads judgments straight from a session journal, without needing the
/// manifest. Parameter columns stay empty. A torn final record is ignored.
[[nodiscard]] std::vector<ResultRow> read_journal_rows(const std::filesystem::path& journal_path);

/// Loads rows from a journal (*.jsonl) or a results export (*.csv).
[[nodiscard]] std::vector<ResultRow> load_result_rows(const std::filesystem::path& path);

/// RFC 4180 field quoting.
[[nodiscard]] std::string csv_field(std::string_view value);
[[nodiscard]] std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace s3d::session
