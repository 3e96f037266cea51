#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace s3d::session {

enum class DisplayMode { Simultaneous, Sequential };
enum class RenderingMode { Points, Surfaces };

struct Background {
    enum class Preset { Dark, Light, Custom };
    Preset preset = Preset::Dark;
    std::array<std::uint8_t, 3> rgb{18, 18, 18};

    static Background dark() { return {Preset::Dark, {18, 18, 18}}; }
    static Background light() { return {Preset::Light, {235, 235, 235}}; }
    static Background custom(std::uint8_t r, std::uint8_t g, std::uint8_t b) { return {Preset::Custom, {r, g, b}}; }

    friend bool operator==(const Background&, const Background&) = default;
};

inline constexpr int kMinTrapSeparation = 5;

struct ExperimentConfig {
    std::string participant_name = "participant";
    std::filesystem::path result_path = "results";
    double viewing_time_s = 20.0;
    bool timer_enabled = true;
    int rating_categories = 5;
    DisplayMode display_mode = DisplayMode::Simultaneous;
    RenderingMode rendering_mode = RenderingMode::Points;
    double model_scale = 1.0;
    double point_size_px = 2.0;
    /// Unset means "derive from participant_name" (see effective_seed).
    std::optional<std::uint64_t> display_order_seed;
    Background background;
    int traps_per_source = 2;
    /// Explicit trap stimuli; replaces the default most/least-compressed pick.
    std::vector<std::string> trap_stimuli;

    /// The seed actually used for display order: display_order_seed when
    /// set, otherwise a hash of the participant name, so every participant
    /// gets their own deterministic order.
    [[nodiscard]] std::uint64_t effective_seed() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

[[nodiscard]] std::vector<std::string> check_config(const ExperimentConfig& config);

/// Missing keys take their defaults. Unknown keys, wrong types and range
/// violations are all reported together via SessionError{InvalidConfig}.
[[nodiscard]] ExperimentConfig config_from_json(const nlohmann::json& json);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

/// Fully resolved config, every key present.
[[nodiscard]] nlohmann::json config_to_json(const ExperimentConfig& config);

[[nodiscard]] std::string_view to_string(DisplayMode mode) noexcept;
[[nodiscard]] std::string_view to_string(RenderingMode mode) noexcept;
[[nodiscard]] nlohmann::json background_to_json(const Background& background);

}  // namespace s3d::session
