#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace s3d::analysis {

enum class AnalysisErrc {
    LengthMismatch,
    DegenerateInput,
    NoRatingsForStimulus,
    StimulusSetMismatch,
    InvalidMatrix,
    InvalidLatentModel,
    InvalidReport,
};

[[nodiscard]] std::string_view to_string(AnalysisErrc code) noexcept;

class AnalysisError : public std::runtime_error {
public:
    AnalysisError(AnalysisErrc code, const std::string& message);
    [[nodiscard]] AnalysisErrc code() const noexcept { return code_; }

private:
    AnalysisErrc code_;
};

}  // namespace s3d::analysis
