#include "s3d/session/playlist.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "s3d/common/hash.hpp"
#include "s3d/session/error.hpp"
#include "s3d/session/rng.hpp"

namespace s3d::session {

namespace {

using Groups = std::map<std::string, std::vector<const StimulusMeta*>>;

/// Impaired stimuli keyed by source id; every source appears, possibly empty.
Groups group_by_source(const Manifest& manifest) {
    Groups groups;
    for (const auto* source : manifest.sources()) groups[source->id];
    for (const auto* s : manifest.impaired()) groups[s->source_id].push_back(s);
    return groups;
}

/// Ascending = more compressed first.
auto compression_key(const StimulusMeta& s) {
    const int g = parameter_ordinal(s.geometry_param.value_or("")).value_or(0);
    const int a = parameter_ordinal(s.attribute_param.value_or("")).value_or(0);
    return std::make_tuple(g + a, g, a, s.id);
}

void check_capacity(const Manifest& manifest, const ExperimentConfig& config, const Groups& groups) {
    if (manifest.sources().empty() || manifest.impaired().empty()) {
        throw SessionError(SessionErrc::EmptyManifest, "manifest needs at least one source with an impaired stimulus");
    }
    std::vector<std::string> issues;
    for (const auto& [source, members] : groups) {
        if (static_cast<std::size_t>(config.traps_per_source) > members.size()) {
            issues.push_back("source '" + source + "' has " + std::to_string(members.size()) +
                             " impaired stimuli but traps_per_source is " + std::to_string(config.traps_per_source));
        }
    }
    if (!issues.empty()) {
        throw SessionError(SessionErrc::TrapsExceedStimuli, "not enough stimuli for the requested traps", std::move(issues));
    }
}

struct Item {
    const StimulusMeta* stimulus = nullptr;
    bool repeat = false;
    std::optional<int> trap_group;
};

/// One ordering attempt: a Fisher-Yates pass in which slot t is filled by a
/// uniform pick among the remaining items that are currently allowed there.
/// With no constraints this is exactly the textbook shuffle.
bool try_order(std::vector<Item>& items, Xoshiro256& rng, bool avoid_adjacent_source, std::size_t trap_count) {
    std::vector<std::optional<std::size_t>> first_slot(trap_count);
    std::vector<std::size_t> eligible;
    eligible.reserve(items.size());
    for (std::size_t t = 0; t < items.size(); ++t) {
        eligible.clear();
        for (std::size_t j = t; j < items.size(); ++j) {
            const Item& item = items[j];
            if (item.repeat) {
                const auto& first = first_slot[static_cast<std::size_t>(*item.trap_group)];
                if (!first || t - *first < static_cast<std::size_t>(kMinTrapSeparation)) continue;
            }
            if (avoid_adjacent_source && t > 0 && item.stimulus->source_id == items[t - 1].stimulus->source_id) continue;
            eligible.push_back(j);
        }
        if (eligible.empty()) return false;
        const std::size_t pick = eligible[rng.below(eligible.size())];
        std::swap(items[t], items[pick]);
        if (items[t].trap_group && !items[t].repeat) first_slot[static_cast<std::size_t>(*items[t].trap_group)] = t;
    }
    return true;
}

/// True when no arrangement can keep same-source trials apart.
bool adjacency_impossible(const std::vector<Item>& items) {
    std::map<std::string, std::size_t> counts;
    std::size_t largest = 0;
    for (const auto& item : items) largest = std::max(largest, ++counts[item.stimulus->source_id]);
    return largest > (items.size() + 1) / 2;
}

}  // namespace

std::string config_digest(const Manifest& manifest, const ExperimentConfig& config) {
    const nlohmann::json doc = {{"config", config_to_json(config)}, {"manifest", manifest_to_json(manifest)}};
    return sha256_hex(doc.dump());
}

std::vector<std::string> select_traps(const Manifest& manifest, const ExperimentConfig& config) {
    const Groups groups = group_by_source(manifest);
    check_capacity(manifest, config, groups);
    std::vector<std::string> traps;

    if (!config.trap_stimuli.empty()) {
        std::vector<std::string> issues;
        std::map<std::string, int> per_source;
        for (const auto& id : config.trap_stimuli) {
            const StimulusMeta* s = manifest.find(id);
            if (!s || s->is_source()) {
                issues.push_back("trap stimulus '" + id + "' is not an impaired stimulus in the manifest");
                continue;
            }
            ++per_source[s->source_id];
            traps.push_back(id);
        }
        for (const auto& [source, members] : groups) {
            const int n = per_source.count(source) ? per_source.at(source) : 0;
            if (n != config.traps_per_source) {
                issues.push_back("source '" + source + "' has " + std::to_string(n) + " listed traps, expected " +
                                 std::to_string(config.traps_per_source));
            }
        }
        if (!issues.empty()) throw SessionError(SessionErrc::InvalidConfig, "trap_stimuli is inconsistent", std::move(issues));
        std::sort(traps.begin(), traps.end());
        return traps;
    }

    for (const auto& [source, members] : groups) {
        std::vector<const StimulusMeta*> ordered = members;
        std::sort(ordered.begin(), ordered.end(),
                  [](const auto* a, const auto* b) { return compression_key(*a) < compression_key(*b); });
        std::size_t lo = 0;
        std::size_t hi = ordered.size();
        for (int k = 0; k < config.traps_per_source; ++k) {
            traps.push_back(k % 2 == 0 ? ordered[lo++]->id : ordered[--hi]->id);
        }
    }
    std::sort(traps.begin(), traps.end());
    return traps;
}

Playlist build_playlist(const Manifest& manifest, const ExperimentConfig& config) {
    const std::vector<std::string> traps = select_traps(manifest, config);

    std::vector<Item> canonical;
    for (const auto* s : manifest.impaired()) {
        Item item{s, false, std::nullopt};
        if (auto it = std::lower_bound(traps.begin(), traps.end(), s->id); it != traps.end() && *it == s->id) {
            item.trap_group = static_cast<int>(it - traps.begin());
        }
        canonical.push_back(item);
    }
    for (std::size_t g = 0; g < traps.size(); ++g) {
        canonical.push_back({manifest.find(traps[g]), true, static_cast<int>(g)});
    }

    Playlist playlist;
    playlist.seed = config.effective_seed();
    playlist.config_digest = config_digest(manifest, config);
    Xoshiro256 rng(playlist.seed);

    std::vector<Item> items;
    bool placed = false;
    bool avoid_adjacent = !adjacency_impossible(canonical);
    if (!avoid_adjacent) {
        playlist.warnings.push_back("one source dominates the playlist; adjacent trials may share a source");
    }
    for (int pass = 0; pass < 2 && !placed; ++pass) {
        for (int attempt = 0; attempt < kMaxOrderingAttempts && !placed; ++attempt) {
            items = canonical;
            placed = try_order(items, rng, avoid_adjacent, traps.size());
        }
        if (!placed && avoid_adjacent) {
            playlist.warnings.push_back("no order without adjacent same-source trials found in " +
                                        std::to_string(kMaxOrderingAttempts) + " attempts; constraint dropped");
            avoid_adjacent = false;
        } else if (!placed) {
            break;
        }
    }
    if (!placed) {
        // Too few trials to honour the separation: shuffle first showings, then
        // append repeats, which gives each trap the largest separation available.
        playlist.warnings.push_back("playlist too short for a trap separation of " + std::to_string(kMinTrapSeparation) +
                                    " trials; repeats appended at the end");
        items.assign(canonical.begin(), canonical.begin() + static_cast<std::ptrdiff_t>(manifest.impaired().size()));
        for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[rng.below(i)]);
        items.insert(items.end(), canonical.begin() + static_cast<std::ptrdiff_t>(items.size()), canonical.end());
    }

    playlist.trials.reserve(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        const Item& item = items[i];
        playlist.trials.push_back({i, item.stimulus->id, item.stimulus->source_id, item.repeat, item.trap_group});
    }
    return playlist;
}

}  // namespace s3d::session
