#include "s3d/session/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "s3d/common/hash.hpp"
#include "s3d/session/error.hpp"

namespace s3d::session {

namespace {

class FieldReader {
public:
    FieldReader(const nlohmann::json& json, std::vector<std::string>& issues) : json_(json), issues_(issues) {}

    template <typename T>
    void read(const char* key, T& target, const char* expected) {
        if (!json_.contains(key) || json_.at(key).is_null()) return;
        const auto& value = json_.at(key);
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!value.is_boolean()) throw std::invalid_argument("type");
            } else if constexpr (std::is_integral_v<T>) {
                if (!value.is_number_integer()) throw std::invalid_argument("type");
            } else if constexpr (std::is_floating_point_v<T>) {
                if (!value.is_number()) throw std::invalid_argument("type");
            } else {
                if (!value.is_string()) throw std::invalid_argument("type");
            }
            target = value.get<T>();
        } catch (const std::exception&) {
            issues_.push_back(std::string("'") + key + "' must be " + expected);
        }
    }

private:
    const nlohmann::json& json_;
    std::vector<std::string>& issues_;
};

std::optional<Background> background_from_json(const nlohmann::json& value) {
    if (value.is_string()) {
        if (value == "dark") return Background::dark();
        if (value == "light") return Background::light();
        return std::nullopt;
    }
    const nlohmann::json* rgb = &value;
    if (value.is_object()) {
        if (value.size() != 1 || !value.contains("custom")) return std::nullopt;
        rgb = &value.at("custom");
    }
    if (!rgb->is_array() || rgb->size() != 3) return std::nullopt;
    std::array<std::uint8_t, 3> channels{};
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& c = (*rgb)[i];
        if (!c.is_number_integer() || c.get<std::int64_t>() < 0 || c.get<std::int64_t>() > 255) return std::nullopt;
        channels[i] = static_cast<std::uint8_t>(c.get<int>());
    }
    return Background::custom(channels[0], channels[1], channels[2]);
}

}  // namespace

std::string_view to_string(DisplayMode mode) noexcept {
    return mode == DisplayMode::Simultaneous ? "simultaneous" : "sequential";
}

std::string_view to_string(RenderingMode mode) noexcept {
    return mode == RenderingMode::Points ? "points" : "surfaces";
}

nlohmann::json background_to_json(const Background& background) {
    switch (background.preset) {
    case Background::Preset::Dark: return "dark";
    case Background::Preset::Light: return "light";
    case Background::Preset::Custom: break;
    }
    return {{"custom", {background.rgb[0], background.rgb[1], background.rgb[2]}}};
}

std::uint64_t ExperimentConfig::effective_seed() const {
    if (display_order_seed) return *display_order_seed;
    const std::string digest = sha256_hex("display-order:" + participant_name);
    return std::stoull(digest.substr(0, 16), nullptr, 16);
}

std::vector<std::string> check_config(const ExperimentConfig& c) {
    std::vector<std::string> issues;
    if (c.participant_name.empty()) issues.push_back("'participant_name' must not be empty");
    if (c.result_path.empty()) issues.push_back("'result_path' must not be empty");
    if (!(c.viewing_time_s > 0.0) || !std::isfinite(c.viewing_time_s) || c.viewing_time_s > 3600.0) {
        issues.push_back("'viewing_time_s' must be in (0, 3600]");
    }
    if (c.rating_categories < 2 || c.rating_categories > 100) issues.push_back("'rating_categories' must be in [2, 100]");
    if (!(c.model_scale > 0.0) || !std::isfinite(c.model_scale) || c.model_scale > 100.0) {
        issues.push_back("'model_scale' must be in (0, 100]");
    }
    if (!(c.point_size_px > 0.0) || !std::isfinite(c.point_size_px) || c.point_size_px > 64.0) {
        issues.push_back("'point_size_px' must be in (0, 64]");
    }
    if (c.traps_per_source < 0) issues.push_back("'traps_per_source' must be >= 0");
    std::set<std::string> unique(c.trap_stimuli.begin(), c.trap_stimuli.end());
    if (unique.size() != c.trap_stimuli.size()) issues.push_back("'trap_stimuli' contains duplicates");
    return issues;
}

ExperimentConfig config_from_json(const nlohmann::json& json) {
    std::vector<std::string> issues;
    ExperimentConfig c;
    if (!json.is_object()) {
        throw SessionError(SessionErrc::InvalidConfig, "config must be a JSON object");
    }
    static const std::set<std::string> kKnown = {
        "participant_name", "result_path", "viewing_time_s", "timer_enabled", "rating_categories", "display_mode",
        "rendering_mode", "model_scale", "point_size_px", "display_order_seed", "background", "traps_per_source",
        "trap_stimuli"};
    for (const auto& [key, value] : json.items()) {
        if (!kKnown.contains(key)) issues.push_back("unknown config key '" + key + "'");
    }

    FieldReader reader(json, issues);
    reader.read("participant_name", c.participant_name, "a string");
    std::string result_path = c.result_path.string();
    reader.read("result_path", result_path, "a string");
    c.result_path = result_path;
    reader.read("viewing_time_s", c.viewing_time_s, "a number");
    reader.read("timer_enabled", c.timer_enabled, "a boolean");
    reader.read("rating_categories", c.rating_categories, "an integer");
    reader.read("model_scale", c.model_scale, "a number");
    reader.read("point_size_px", c.point_size_px, "a number");
    reader.read("traps_per_source", c.traps_per_source, "an integer");

    std::string mode = std::string(to_string(c.display_mode));
    reader.read("display_mode", mode, "a string");
    if (mode == "simultaneous") c.display_mode = DisplayMode::Simultaneous;
    else if (mode == "sequential") c.display_mode = DisplayMode::Sequential;
    else issues.push_back("'display_mode' must be \"simultaneous\" or \"sequential\"");

    std::string rendering = std::string(to_string(c.rendering_mode));
    reader.read("rendering_mode", rendering, "a string");
    if (rendering == "points") c.rendering_mode = RenderingMode::Points;
    else if (rendering == "surfaces") c.rendering_mode = RenderingMode::Surfaces;
    else issues.push_back("'rendering_mode' must be \"points\" or \"surfaces\"");

    if (json.contains("display_order_seed") && !json.at("display_order_seed").is_null()) {
        const auto& seed = json.at("display_order_seed");
        if (seed.is_number_unsigned()) {
            c.display_order_seed = seed.get<std::uint64_t>();
        } else if (seed.is_number_integer() && seed.get<std::int64_t>() >= 0) {
            c.display_order_seed = static_cast<std::uint64_t>(seed.get<std::int64_t>());
        } else {
            issues.push_back("'display_order_seed' must be a non-negative 64-bit integer");
        }
    }
    if (json.contains("background")) {
        if (auto bg = background_from_json(json.at("background"))) c.background = *bg;
        else issues.push_back("'background' must be \"dark\", \"light\", [r,g,b] or {\"custom\": [r,g,b]}");
    }
    if (json.contains("trap_stimuli")) {
        const auto& traps = json.at("trap_stimuli");
        bool ok = traps.is_array();
        if (ok) {
            for (const auto& t : traps) {
                if (!t.is_string()) {
                    ok = false;
                    break;
                }
                c.trap_stimuli.push_back(t.get<std::string>());
            }
        }
        if (!ok) issues.push_back("'trap_stimuli' must be an array of stimulus ids");
    }

    for (auto& issue : check_config(c)) {
        if (std::find(issues.begin(), issues.end(), issue) == issues.end()) issues.push_back(std::move(issue));
    }
    if (!issues.empty()) throw SessionError(SessionErrc::InvalidConfig, "config is invalid", std::move(issues));
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SessionError(SessionErrc::InvalidConfig, "cannot open config " + path.string());
    try {
        return config_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw SessionError(SessionErrc::InvalidConfig, path.string() + ": " + e.what());
    }
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
    return {
        {"participant_name", c.participant_name},
        {"result_path", c.result_path.generic_string()},
        {"viewing_time_s", c.viewing_time_s},
        {"timer_enabled", c.timer_enabled},
        {"rating_categories", c.rating_categories},
        {"display_mode", to_string(c.display_mode)},
        {"rendering_mode", to_string(c.rendering_mode)},
        {"model_scale", c.model_scale},
        {"point_size_px", c.point_size_px},
        {"display_order_seed", c.effective_seed()},
        {"background", background_to_json(c.background)},
        {"traps_per_source", c.traps_per_source},
        {"trap_stimuli", c.trap_stimuli},
    };
}

}  // namespace s3d::session
