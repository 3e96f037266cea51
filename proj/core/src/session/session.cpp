#include "s3d/session/session.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include "s3d/session/error.hpp"

namespace s3d::session {

namespace {

constexpr std::string_view kJournalFormat = "s3d-journal";
constexpr int kJournalVersion = 1;

[[noreturn]] void corrupt(const std::string& what, std::size_t line) {
    throw SessionError(SessionErrc::CorruptJournal, "journal line " + std::to_string(line) + ": " + what);
}

Judgment judgment_from_record(const nlohmann::json& j) {
    Judgment out;
    out.trial_index = j.at("trial_index").get<std::size_t>();
    out.stimulus_id = j.at("stimulus_id").get<std::string>();
    out.score = j.at("score").get<int>();
    out.view_time_ms = j.at("view_time_ms").get<std::uint64_t>();
    out.wall_clock = j.at("wall_clock").get<std::string>();
    out.participant_name = j.at("participant").get<std::string>();
    return out;
}

}  // namespace

std::optional<std::size_t> SessionState::next_trial() const {
    // completed is always a prefix {0..k-1} because judgments are accepted in order
    const std::size_t k = completed.size();
    if (k >= playlist.trials.size()) return std::nullopt;
    return k;
}

SessionState fresh_state(Playlist playlist, const ExperimentConfig& config, std::filesystem::path journal_path) {
    SessionState state;
    state.playlist = std::move(playlist);
    state.rating_categories = config.rating_categories;
    state.participant_name = config.participant_name;
    state.journal_path = std::move(journal_path);
    return state;
}

SessionState apply_judgment(SessionState state, const Judgment& judgment) {
    const std::size_t index = judgment.trial_index;
    if (state.completed.contains(index)) {
        throw SessionError(SessionErrc::DuplicateJudgment, "trial " + std::to_string(index) + " is already rated");
    }
    const auto next = state.next_trial();
    if (!next || index != *next) {
        throw SessionError(SessionErrc::OutOfOrderTrial,
                           "judgment for trial " + std::to_string(index) + " but the current trial is " +
                               (next ? std::to_string(*next) : std::string("none (session finished)")));
    }
    const Trial& trial = state.playlist.trials[index];
    if (judgment.stimulus_id != trial.stimulus_id) {
        throw SessionError(SessionErrc::StimulusMismatch, "trial " + std::to_string(index) + " shows '" +
                                                              trial.stimulus_id + "', not '" + judgment.stimulus_id + "'");
    }
    if (judgment.score < 1 || judgment.score > state.rating_categories) {
        throw SessionError(SessionErrc::ScoreOutOfRange, "score " + std::to_string(judgment.score) + " outside [1, " +
                                                             std::to_string(state.rating_categories) + "]");
    }
    state.completed.insert(index);
    state.judgments.push_back(judgment);
    return state;
}

nlohmann::json journal_header(const SessionState& state) {
    return {
        {"type", "header"},
        {"format", kJournalFormat},
        {"version", kJournalVersion},
        {"config_digest", state.playlist.config_digest},
        {"participant", state.participant_name},
        {"rating_categories", state.rating_categories},
        {"seed", state.playlist.seed},
        {"trial_count", state.playlist.trials.size()},
    };
}

nlohmann::json journal_record(const SessionState& state, const Judgment& judgment) {
    const Trial& trial = state.playlist.trials.at(judgment.trial_index);
    return {
        {"type", "judgment"},
        {"trial_index", judgment.trial_index},
        {"stimulus_id", judgment.stimulus_id},
        {"reference_id", trial.reference_id},
        {"is_trap_repeat", trial.is_trap_repeat},
        {"trap_group", trial.trap_group ? nlohmann::json(*trial.trap_group) : nlohmann::json(nullptr)},
        {"score", judgment.score},
        {"view_time_ms", judgment.view_time_ms},
        {"wall_clock", judgment.wall_clock},
        {"participant", judgment.participant_name},
    };
}

FileJournalSink::FileJournalSink(const std::filesystem::path& path) : path_(path) {
    fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) {
        throw SessionError(SessionErrc::JournalWriteFailure, "cannot open journal " + path.string() + ": " + std::strerror(errno));
    }
}

FileJournalSink::~FileJournalSink() {
    if (fd_ >= 0) ::close(fd_);
}

void FileJournalSink::append(std::string_view line) {
    std::string record(line);
    record.push_back('\n');
    const char* data = record.data();
    std::size_t left = record.size();
    while (left > 0) {
        const ssize_t n = ::write(fd_, data, left);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) {
            throw SessionError(SessionErrc::JournalWriteFailure,
                               "write to " + path_.string() + " failed: " + std::strerror(errno));
        }
        data += n;
        left -= static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0) {
        throw SessionError(SessionErrc::JournalWriteFailure, "fsync of " + path_.string() + " failed: " + std::strerror(errno));
    }
}

ResumeResult resume_session(const std::filesystem::path& journal_path, const Manifest& manifest,
                            const ExperimentConfig& config) {
    std::ifstream in(journal_path, std::ios::binary);
    if (!in) throw SessionError(SessionErrc::CorruptJournal, "cannot open journal " + journal_path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    ResumeResult result;
    result.state = fresh_state(build_playlist(manifest, config), config, journal_path);

    struct Line {
        std::string_view text;
        std::size_t end = 0;  // offset just past the newline
        bool terminated = false;
    };
    std::vector<Line> lines;
    for (std::size_t pos = 0; pos < text.size();) {
        const std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) {
            lines.push_back({std::string_view(text).substr(pos), text.size(), false});
            break;
        }
        lines.push_back({std::string_view(text).substr(pos, nl - pos), nl + 1, true});
        pos = nl + 1;
    }

    if (lines.empty() || !lines.front().terminated) {
        if (!lines.empty()) result.warnings.push_back("discarded torn journal header");
        return result;
    }

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(lines.front().text);
    } catch (const nlohmann::json::parse_error&) {
        corrupt("unreadable header", 1);
    }
    if (!header.is_object() || header.value("type", "") != "header" || header.value("format", "") != kJournalFormat) {
        corrupt("not a journal header", 1);
    }
    if (header.value("version", 0) != kJournalVersion) corrupt("unsupported journal version", 1);
    const std::string digest = header.value("config_digest", "");
    if (digest != result.state.playlist.config_digest) {
        throw SessionError(SessionErrc::DigestMismatch, "journal " + journal_path.string() +
                                                            " was written for a different manifest or config (digest " +
                                                            digest + ", expected " + result.state.playlist.config_digest + ")");
    }
    result.valid_bytes = lines.front().end;

    for (std::size_t i = 1; i < lines.size(); ++i) {
        const Line& line = lines[i];
        const bool last = i + 1 == lines.size();
        nlohmann::json record;
        bool parsed = line.terminated;
        if (parsed) {
            try {
                record = nlohmann::json::parse(line.text);
            } catch (const nlohmann::json::parse_error&) {
                parsed = false;
            }
        }
        if (!parsed) {
            if (last) {
                result.warnings.push_back("discarded torn trailing journal record at line " + std::to_string(i + 1));
                break;
            }
            corrupt("unreadable record", i + 1);
        }
        try {
            if (record.at("type") != "judgment") corrupt("unexpected record type", i + 1);
            const Judgment judgment = judgment_from_record(record);
            const nlohmann::json expected = journal_record(result.state, judgment);
            if (judgment.trial_index < result.state.playlist.trials.size() &&
                (record.at("is_trap_repeat") != expected.at("is_trap_repeat") ||
                 record.at("trap_group") != expected.at("trap_group") ||
                 record.at("reference_id") != expected.at("reference_id"))) {
                corrupt("record disagrees with the playlist", i + 1);
            }
            result.state = apply_judgment(std::move(result.state), judgment);
        } catch (const nlohmann::json::exception& e) {
            corrupt(std::string("bad record: ") + e.what(), i + 1);
        } catch (const std::out_of_range&) {
            corrupt("trial index outside the playlist", i + 1);
        } catch (const SessionError& e) {
            if (e.code() == SessionErrc::CorruptJournal) throw;
            corrupt(std::string("record cannot be replayed: ") + e.what(), i + 1);
        }
        result.valid_bytes = line.end;
    }
    return result;
}

std::filesystem::path default_journal_path(const ExperimentConfig& config) {
    std::string name;
    for (char c : config.participant_name) {
        const bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
        name.push_back(safe ? c : '_');
    }
    return config.result_path / (name + ".journal.jsonl");
}

Session Session::open(const Manifest& manifest, const ExperimentConfig& config, const std::filesystem::path& journal_path) {
    std::error_code ec;
    if (journal_path.has_parent_path()) std::filesystem::create_directories(journal_path.parent_path(), ec);

    if (std::filesystem::exists(journal_path) && std::filesystem::file_size(journal_path) > 0) {
        ResumeResult resumed = resume_session(journal_path, manifest, config);
        if (resumed.valid_bytes != std::filesystem::file_size(journal_path)) {
            std::filesystem::resize_file(journal_path, resumed.valid_bytes);
        }
        auto sink = std::make_unique<FileJournalSink>(journal_path);
        if (resumed.valid_bytes == 0) sink->append(journal_header(resumed.state).dump());
        return Session(std::move(resumed.state), std::move(sink), std::move(resumed.warnings));
    }

    SessionState state = fresh_state(build_playlist(manifest, config), config, journal_path);
    auto sink = std::make_unique<FileJournalSink>(journal_path);
    sink->append(journal_header(state).dump());
    std::vector<std::string> warnings = state.playlist.warnings;
    return Session(std::move(state), std::move(sink), std::move(warnings));
}

Session::Session(SessionState state, std::unique_ptr<JournalSink> sink, std::vector<std::string> warnings)
    : state_(std::move(state)), sink_(std::move(sink)), warnings_(std::move(warnings)) {}

const SessionState& Session::record(const Judgment& judgment) {
    if (halted_) throw SessionError(SessionErrc::JournalWriteFailure, "session halted after a journal write failure");
    SessionState next = apply_judgment(state_, judgment);
    try {
        sink_->append(journal_record(state_, judgment).dump());
    } catch (const SessionError&) {
        halted_ = true;
        throw;
    }
    state_ = std::move(next);
    return state_;
}

std::string utc_timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    const std::time_t seconds = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&seconds, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[40];
    std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
    return out;
}

}  // namespace s3d::session
