#include "s3d/session/error.hpp"

namespace s3d::session {

std::string_view to_string(SessionErrc code) noexcept {
    switch (code) {
    case SessionErrc::InvalidManifest: return "InvalidManifest";
    case SessionErrc::InvalidConfig: return "InvalidConfig";
    case SessionErrc::EmptyManifest: return "EmptyManifest";
    case SessionErrc::TrapsExceedStimuli: return "TrapsExceedStimuli";
    case SessionErrc::OutOfOrderTrial: return "OutOfOrderTrial";
    case SessionErrc::DuplicateJudgment: return "DuplicateJudgment";
    case SessionErrc::ScoreOutOfRange: return "ScoreOutOfRange";
    case SessionErrc::StimulusMismatch: return "StimulusMismatch";
    case SessionErrc::JournalWriteFailure: return "JournalWriteFailure";
    case SessionErrc::DigestMismatch: return "DigestMismatch";
    case SessionErrc::CorruptJournal: return "CorruptJournal";
    }
    return "Unknown";
}

namespace {

std::string compose(SessionErrc code, const std::string& message, const std::vector<std::string>& issues) {
    std::string text = std::string(to_string(code)) + ": " + message;
    for (const auto& issue : issues) text += "\n  - " + issue;
    return text;
}

}  // namespace

SessionError::SessionError(SessionErrc code, const std::string& message, std::vector<std::string> issues)
    : std::runtime_error(compose(code, message, issues)), code_(code), issues_(std::move(issues)) {}

}  // namespace s3d::session
