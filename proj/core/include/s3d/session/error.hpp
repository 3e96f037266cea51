#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace s3d::session {

enum class SessionErrc {
    InvalidManifest,
    InvalidConfig,
    EmptyManifest,
    TrapsExceedStimuli,
    OutOfOrderTrial,
    DuplicateJudgment,
    ScoreOutOfRange,
    StimulusMismatch,
    JournalWriteFailure,
    DigestMismatch,
    CorruptJournal,
};

[[nodiscard]] std::string_view to_string(SessionErrc code) noexcept;

class SessionError : public std::runtime_error {
public:
    SessionError(SessionErrc code, const std::string& message, std::vector<std::string> issues = {});

    [[nodiscard]] SessionErrc code() const noexcept { return code_; }
    /// Every individual violation, for schema-style errors.
    [[nodiscard]] const std::vector<std::string>& issues() const noexcept { return issues_; }

private:
    SessionErrc code_;
    std::vector<std::string> issues_;
};

}  // namespace s3d::session
