#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "s3d/session/config.hpp"
#include "s3d/session/manifest.hpp"

namespace s3d::session {

struct Trial {
    std::size_t index = 0;
    std::string stimulus_id;
    std::string reference_id;
    bool is_trap_repeat = false;
    /// Shared by both showings of a trap stimulus.
    std::optional<int> trap_group;

    friend bool operator==(const Trial&, const Trial&) = default;
};

struct Playlist {
    std::vector<Trial> trials;
    std::uint64_t seed = 0;
    std::string config_digest;
    /// Constraints that had to be relaxed while ordering.
    std::vector<std::string> warnings;

    [[nodiscard]] std::size_t size() const noexcept { return trials.size(); }

    friend bool operator==(const Playlist& a, const Playlist& b) {
        return a.trials == b.trials && a.seed == b.seed && a.config_digest == b.config_digest;
    }
};

inline constexpr int kMaxOrderingAttempts = 1000;

/// SHA-256 over the canonical JSON of the resolved config and manifest.
[[nodiscard]] std::string config_digest(const Manifest& manifest, const ExperimentConfig& config);

/// Trap stimuli per source: the explicit config list when given, otherwise
/// alternately the most and least compressed variants of each source.
[[nodiscard]] std::vector<std::string> select_traps(const Manifest& manifest, const ExperimentConfig& config);

/// Builds the presentation order. Every impaired stimulus appears once and
/// each trap stimulus appears a second time at least kMinTrapSeparation
/// trials after its first showing. Adjacent trials avoid sharing a source
/// when such an order is found within kMaxOrderingAttempts attempts.
/// Deterministic in (manifest, config); manifest entry order is irrelevant.
[[nodiscard]] Playlist build_playlist(const Manifest& manifest, const ExperimentConfig& config);

}  // namespace s3d::session
