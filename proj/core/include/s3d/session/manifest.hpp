#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace s3d::session {

/// One entry of the stimulus manifest. A source (pristine reference) is an
/// entry whose `source_id` equals its own `id`; it carries no compression
/// parameters. Impaired entries name their source and carry ordinal
/// parameter labels such as "r1".."r6", where a smaller ordinal means
/// stronger compression.
struct StimulusMeta {
    std::string id;
    std::string source_id;
    std::optional<std::string> geometry_param;
    std::optional<std::string> attribute_param;
    std::string asset_path;
    std::optional<std::string> content_hash;

    [[nodiscard]] bool is_source() const noexcept { return id == source_id; }

    friend bool operator==(const StimulusMeta&, const StimulusMeta&) = default;
};

using ParamCombination = std::pair<std::string, std::string>;

struct Manifest {
    std::vector<StimulusMeta> stimuli;
    /// Optional declared (geometry, attribute) grid every source must cover.
    std::optional<std::vector<ParamCombination>> combinations;
    /// Directory that relative asset paths resolve against.
    std::filesystem::path base_dir;

    [[nodiscard]] const StimulusMeta* find(std::string_view id) const;
    /// Sources sorted by id.
    [[nodiscard]] std::vector<const StimulusMeta*> sources() const;
    /// Impaired stimuli sorted by id.
    [[nodiscard]] std::vector<const StimulusMeta*> impaired() const;
    [[nodiscard]] std::filesystem::path resolve(const StimulusMeta& stimulus) const;
};

/// Trailing integer of a parameter label ("r5" -> 5). Empty if there is none.
[[nodiscard]] std::optional<int> parameter_ordinal(std::string_view label);

/// Schema and referential checks; returns every violation found.
[[nodiscard]] std::vector<std::string> check_manifest(const Manifest& manifest);

/// Accepts either a JSON array of stimuli or an object with "stimuli" and an
/// optional "combinations" list of [geometry, attribute] pairs. Throws
/// SessionError{InvalidManifest} listing every violation.
[[nodiscard]] Manifest manifest_from_json(const nlohmann::json& json, std::filesystem::path base_dir = {});
[[nodiscard]] Manifest load_manifest(const std::filesystem::path& path);

/// Canonical form: stimuli sorted by id, then rendered as an array (or an
/// object when combinations are declared).
[[nodiscard]] nlohmann::json manifest_to_json(const Manifest& manifest);

}  // namespace s3d::session
