#include "s3d/session/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>

#include "s3d/session/error.hpp"

namespace s3d::session {

namespace {

std::vector<const StimulusMeta*> sorted_if(const std::vector<StimulusMeta>& stimuli, bool want_sources) {
    std::vector<const StimulusMeta*> out;
    for (const auto& s : stimuli) {
        if (s.is_source() == want_sources) out.push_back(&s);
    }
    std::sort(out.begin(), out.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
    return out;
}

std::optional<std::string> optional_string(const nlohmann::json& entry, const char* key, const std::string& where,
                                           std::vector<std::string>& issues) {
    if (!entry.contains(key) || entry.at(key).is_null()) return std::nullopt;
    if (!entry.at(key).is_string()) {
        issues.push_back(where + ": '" + key + "' must be a string");
        return std::nullopt;
    }
    return entry.at(key).get<std::string>();
}

StimulusMeta stimulus_from_json(const nlohmann::json& entry, std::size_t index, std::vector<std::string>& issues) {
    const std::string where = "stimulus[" + std::to_string(index) + "]";
    StimulusMeta s;
    if (!entry.is_object()) {
        issues.push_back(where + ": must be an object");
        return s;
    }
    static const std::set<std::string> kKnown = {"id", "source_id", "geometry_param", "attribute_param", "asset_path",
                                                 "content_hash"};
    for (const auto& [key, value] : entry.items()) {
        if (!kKnown.contains(key)) issues.push_back(where + ": unknown key '" + key + "'");
    }
    auto id = optional_string(entry, "id", where, issues);
    auto source = optional_string(entry, "source_id", where, issues);
    auto asset = optional_string(entry, "asset_path", where, issues);
    if (!id || id->empty()) issues.push_back(where + ": missing 'id'");
    if (!source || source->empty()) issues.push_back(where + ": missing 'source_id'");
    if (!asset || asset->empty()) issues.push_back(where + ": missing 'asset_path'");
    s.id = id.value_or("");
    s.source_id = source.value_or("");
    s.asset_path = asset.value_or("");
    s.geometry_param = optional_string(entry, "geometry_param", where, issues);
    s.attribute_param = optional_string(entry, "attribute_param", where, issues);
    s.content_hash = optional_string(entry, "content_hash", where, issues);
    return s;
}

nlohmann::json stimulus_to_json(const StimulusMeta& s) {
    nlohmann::json j = {{"id", s.id}, {"source_id", s.source_id}, {"asset_path", s.asset_path}};
    if (s.geometry_param) j["geometry_param"] = *s.geometry_param;
    if (s.attribute_param) j["attribute_param"] = *s.attribute_param;
    if (s.content_hash) j["content_hash"] = *s.content_hash;
    return j;
}

}  // namespace

const StimulusMeta* Manifest::find(std::string_view id) const {
    for (const auto& s : stimuli) {
        if (s.id == id) return &s;
    }
    return nullptr;
}

std::vector<const StimulusMeta*> Manifest::sources() const { return sorted_if(stimuli, true); }
std::vector<const StimulusMeta*> Manifest::impaired() const { return sorted_if(stimuli, false); }

std::filesystem::path Manifest::resolve(const StimulusMeta& stimulus) const {
    const std::filesystem::path p(stimulus.asset_path);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

std::optional<int> parameter_ordinal(std::string_view label) {
    std::size_t start = label.size();
    while (start > 0 && label[start - 1] >= '0' && label[start - 1] <= '9') --start;
    if (start == label.size()) return std::nullopt;
    int value = 0;
    const auto [ptr, ec] = std::from_chars(label.data() + start, label.data() + label.size(), value);
    if (ec != std::errc{}) return std::nullopt;
    return value;
}

std::vector<std::string> check_manifest(const Manifest& manifest) {
    std::vector<std::string> issues;
    std::map<std::string, int> seen;
    for (const auto& s : manifest.stimuli) ++seen[s.id];
    for (const auto& [id, count] : seen) {
        if (count > 1) issues.push_back("duplicate stimulus id '" + id + "'");
    }

    std::map<std::string, std::set<ParamCombination>> combos_by_source;
    for (const auto& s : manifest.stimuli) {
        if (s.id.empty()) continue;
        if (s.is_source()) {
            if (s.geometry_param || s.attribute_param) {
                issues.push_back("source '" + s.id + "' must not carry compression parameters");
            }
            combos_by_source.try_emplace(s.id);
            continue;
        }
        const StimulusMeta* source = manifest.find(s.source_id);
        if (!source) {
            issues.push_back("stimulus '" + s.id + "' references unknown source '" + s.source_id + "'");
        } else if (!source->is_source()) {
            issues.push_back("stimulus '" + s.id + "' references '" + s.source_id + "', which is not a source");
        }
        if (!s.geometry_param || !s.attribute_param) {
            issues.push_back("impaired stimulus '" + s.id + "' needs geometry_param and attribute_param");
            continue;
        }
        if (!parameter_ordinal(*s.geometry_param)) {
            issues.push_back("stimulus '" + s.id + "': geometry_param '" + *s.geometry_param + "' has no ordinal");
        }
        if (!parameter_ordinal(*s.attribute_param)) {
            issues.push_back("stimulus '" + s.id + "': attribute_param '" + *s.attribute_param + "' has no ordinal");
        }
        const ParamCombination combo{*s.geometry_param, *s.attribute_param};
        if (!combos_by_source[s.source_id].insert(combo).second) {
            issues.push_back("source '" + s.source_id + "' has more than one stimulus with parameters (" + combo.first +
                             ", " + combo.second + ")");
        }
    }

    if (manifest.combinations) {
        const std::set<ParamCombination> declared(manifest.combinations->begin(), manifest.combinations->end());
        if (declared.size() != manifest.combinations->size()) issues.push_back("declared combinations contain duplicates");
        for (const auto& [source, combos] : combos_by_source) {
            for (const auto& c : combos) {
                if (!declared.contains(c)) {
                    issues.push_back("source '" + source + "' uses undeclared combination (" + c.first + ", " + c.second + ")");
                }
            }
            for (const auto& c : declared) {
                if (!combos.contains(c)) {
                    issues.push_back("source '" + source + "' lacks declared combination (" + c.first + ", " + c.second + ")");
                }
            }
        }
    }
    return issues;
}

Manifest manifest_from_json(const nlohmann::json& json, std::filesystem::path base_dir) {
    std::vector<std::string> issues;
    Manifest manifest;
    manifest.base_dir = std::move(base_dir);

    const nlohmann::json* list = nullptr;
    if (json.is_array()) {
        list = &json;
    } else if (json.is_object()) {
        for (const auto& [key, value] : json.items()) {
            if (key != "stimuli" && key != "combinations") issues.push_back("unknown manifest key '" + key + "'");
        }
        if (json.contains("stimuli") && json.at("stimuli").is_array()) {
            list = &json.at("stimuli");
        } else {
            issues.push_back("manifest object needs a 'stimuli' array");
        }
        if (json.contains("combinations")) {
            const auto& combos = json.at("combinations");
            std::vector<ParamCombination> parsed;
            bool ok = combos.is_array();
            if (ok) {
                for (const auto& c : combos) {
                    if (!c.is_array() || c.size() != 2 || !c[0].is_string() || !c[1].is_string()) {
                        ok = false;
                        break;
                    }
                    parsed.emplace_back(c[0].get<std::string>(), c[1].get<std::string>());
                }
            }
            if (ok) manifest.combinations = std::move(parsed);
            else issues.push_back("'combinations' must be an array of [geometry, attribute] string pairs");
        }
    } else {
        issues.push_back("manifest must be a JSON array or object");
    }

    if (list) {
        for (std::size_t i = 0; i < list->size(); ++i) manifest.stimuli.push_back(stimulus_from_json((*list)[i], i, issues));
    }
    if (issues.empty()) issues = check_manifest(manifest);
    if (!issues.empty()) throw SessionError(SessionErrc::InvalidManifest, "manifest is invalid", std::move(issues));
    return manifest;
}

Manifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SessionError(SessionErrc::InvalidManifest, "cannot open manifest " + path.string());
    nlohmann::json json;
    try {
        json = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw SessionError(SessionErrc::InvalidManifest, path.string() + ": " + e.what());
    }
    return manifest_from_json(json, path.parent_path());
}

nlohmann::json manifest_to_json(const Manifest& manifest) {
    std::vector<const StimulusMeta*> sorted;
    for (const auto& s : manifest.stimuli) sorted.push_back(&s);
    std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
    nlohmann::json list = nlohmann::json::array();
    for (const auto* s : sorted) list.push_back(stimulus_to_json(*s));
    if (!manifest.combinations) return list;
    nlohmann::json combos = nlohmann::json::array();
    for (const auto& [g, a] : *manifest.combinations) combos.push_back({g, a});
    return {{"combinations", combos}, {"stimuli", list}};
}

}  // namespace s3d::session
