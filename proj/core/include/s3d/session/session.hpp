#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "s3d/session/config.hpp"
#include "s3d/session/manifest.hpp"
#include "s3d/session/playlist.hpp"

namespace s3d::session {

struct Judgment {
    std::size_t trial_index = 0;
    std::string stimulus_id;
    int score = 0;
    std::uint64_t view_time_ms = 0;
    /// ISO-8601 UTC timestamp, e.g. "2026-10-16T09:30:00.250Z".
    std::string wall_clock;
    std::string participant_name;

    friend bool operator==(const Judgment&, const Judgment&) = default;
};

struct SessionState {
    Playlist playlist;
    int rating_categories = 5;
    std::string participant_name;
    std::set<std::size_t> completed;
    /// In trial order; judgments[i].trial_index == i.
    std::vector<Judgment> judgments;
    std::filesystem::path journal_path;

    /// Smallest incomplete trial index, or empty when the session is finished.
    [[nodiscard]] std::optional<std::size_t> next_trial() const;
    [[nodiscard]] bool finished() const { return !next_trial().has_value(); }

    friend bool operator==(const SessionState&, const SessionState&) = default;
};

[[nodiscard]] SessionState fresh_state(Playlist playlist, const ExperimentConfig& config,
                                       std::filesystem::path journal_path = {});

/// Pure transition: validates `judgment` against the state and returns the
/// advanced state. Throws SessionError with DuplicateJudgment,
/// OutOfOrderTrial, StimulusMismatch or ScoreOutOfRange.
[[nodiscard]] SessionState apply_judgment(SessionState state, const Judgment& judgment);

// Journal: JSON lines. The first line is a header record, each further line
// one judgment. Keys are sorted, so records are canonical.
[[nodiscard]] nlohmann::json journal_header(const SessionState& state);
[[nodiscard]] nlohmann::json journal_record(const SessionState& state, const Judgment& judgment);

/// Destination for journal lines. append() must return only after the line
/// is durable, and throw SessionError{JournalWriteFailure} otherwise.
class JournalSink {
public:
    virtual ~JournalSink() = default;
    virtual void append(std::string_view line) = 0;
};

/// Appends to a file with O_APPEND and fsyncs after every record.
class FileJournalSink final : public JournalSink {
public:
    explicit FileJournalSink(const std::filesystem::path& path);
    ~FileJournalSink() override;
    FileJournalSink(const FileJournalSink&) = delete;
    FileJournalSink& operator=(const FileJournalSink&) = delete;

    void append(std::string_view line) override;

private:
    int fd_ = -1;
    std::filesystem::path path_;
};

struct ResumeResult {
    SessionState state;
    std::vector<std::string> warnings;
    /// Bytes of the journal holding complete records; anything beyond is a
    /// torn trailing record.
    std::uintmax_t valid_bytes = 0;
};

/// Rebuilds the session from its journal by replaying every record over a
/// freshly built playlist. Throws DigestMismatch when manifest or config
/// changed, CorruptJournal on damage other than a torn final record.
[[nodiscard]] ResumeResult resume_session(const std::filesystem::path& journal_path, const Manifest& manifest,
                                          const ExperimentConfig& config);

/// `<result_path>/<participant>.journal.jsonl`, with unsafe characters replaced.
[[nodiscard]] std::filesystem::path default_journal_path(const ExperimentConfig& config);

/// A live, journaled session: the single writer of its SessionState.
class Session {
public:
    /// Resumes from `journal_path` when it exists (trimming a torn final
    /// record), otherwise starts fresh and writes the journal header.
    static Session open(const Manifest& manifest, const ExperimentConfig& config,
                        const std::filesystem::path& journal_path);

    Session(SessionState state, std::unique_ptr<JournalSink> sink, std::vector<std::string> warnings = {});

    /// Journals the judgment durably, then advances. On any error the state
    /// is left unchanged; after a journal failure every later call fails too.
    const SessionState& record(const Judgment& judgment);

    [[nodiscard]] const SessionState& state() const noexcept { return state_; }
    [[nodiscard]] const std::vector<std::string>& warnings() const noexcept { return warnings_; }
    [[nodiscard]] bool halted() const noexcept { return halted_; }

private:
    SessionState state_;
    std::unique_ptr<JournalSink> sink_;
    std::vector<std::string> warnings_;
    bool halted_ = false;
};

/// Current UTC time in the Judgment::wall_clock format.
[[nodiscard]] std::string utc_timestamp_now();

}  // namespace s3d::session
