#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "s3d/analysis/metrics.hpp"
#include "s3d/analysis/mos.hpp"

namespace s3d::analysis {

// JSON renderings. Each *_from_json is also the schema validator for its
// document and throws AnalysisError{InvalidReport} on any deviation.

[[nodiscard]] nlohmann::json to_json(std::span<const SubjectReport> reports);
[[nodiscard]] nlohmann::json to_json(const MosTable& table);
[[nodiscard]] nlohmann::json to_json(const CorrelationReport& report);
[[nodiscard]] nlohmann::json to_json(std::span<const ParameterCell> cells);

[[nodiscard]] std::vector<SubjectReport> subject_reports_from_json(const nlohmann::json& json);
[[nodiscard]] MosTable mos_table_from_json(const nlohmann::json& json);
[[nodiscard]] CorrelationReport correlation_from_json(const nlohmann::json& json);

void write_csv(std::ostream& out, std::span<const SubjectReport> reports);
void write_csv(std::ostream& out, const MosTable& table);
void write_csv(std::ostream& out, const CorrelationReport& report);
void write_csv(std::ostream& out, std::span<const ParameterCell> cells);

[[nodiscard]] std::string_view to_string(SubjectStatus status) noexcept;

}  // namespace s3d::analysis
