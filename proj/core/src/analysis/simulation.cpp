#include "s3d/analysis/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "s3d/analysis/error.hpp"
#include "s3d/session/playlist.hpp"
#include "s3d/session/rng.hpp"

namespace s3d::analysis {

namespace {

/// Rank fraction in [0, 1] of each ordinal among the distinct ordinals seen.
std::map<int, double> rank_fractions(const std::set<int>& ordinals) {
    std::map<int, double> out;
    const double denom = ordinals.size() > 1 ? static_cast<double>(ordinals.size() - 1) : 1.0;
    double k = 0.0;
    for (int o : ordinals) out[o] = ordinals.size() > 1 ? k++ / denom : 1.0;
    return out;
}

int ordinal(const std::optional<std::string>& label) { return session::parameter_ordinal(label.value_or("")).value_or(0); }

}  // namespace

LatentModel ordinal_latent_model(const session::Manifest& manifest, int rating_categories, OrdinalModelParams params) {
    std::set<int> geometry;
    std::set<int> attribute;
    for (const auto* s : manifest.impaired()) {
        geometry.insert(ordinal(s->geometry_param));
        attribute.insert(ordinal(s->attribute_param));
    }
    const auto sources = manifest.sources();
    std::map<std::string, double> offsets;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        const double frac = sources.size() > 1 ? static_cast<double>(i) / static_cast<double>(sources.size() - 1) : 0.5;
        offsets[sources[i]->id] = (frac - 0.5) * params.source_spread;
    }
    auto g_frac = rank_fractions(geometry);
    auto a_frac = rank_fractions(attribute);
    const double top = static_cast<double>(rating_categories);
    return [=](const session::StimulusMeta& s) {
        const auto g = g_frac.find(ordinal(s.geometry_param));
        const auto a = a_frac.find(ordinal(s.attribute_param));
        const double gf = g != g_frac.end() ? g->second : 1.0;
        const double af = a != a_frac.end() ? a->second : 1.0;
        const auto off = offsets.find(s.source_id);
        const double base = 1.0 + (top - 1.0) * (params.geometry_weight * gf + (1.0 - params.geometry_weight) * af);
        return std::clamp(base + (off != offsets.end() ? off->second : 0.0), 1.0, top);
    };
}

void check_latent_model(const session::Manifest& manifest, const LatentModel& latent, int rating_categories) {
    const auto impaired = manifest.impaired();
    for (const auto* s : impaired) {
        const double q = latent(*s);
        if (!(q >= 1.0 && q <= rating_categories)) {
            throw AnalysisError(AnalysisErrc::InvalidLatentModel, "latent quality of '" + s->id + "' outside the scale");
        }
    }
    for (const auto* x : impaired) {
        for (const auto* y : impaired) {
            if (x->source_id != y->source_id) continue;
            const bool dominated = ordinal(x->geometry_param) <= ordinal(y->geometry_param) &&
                                   ordinal(x->attribute_param) <= ordinal(y->attribute_param);
            if (dominated && latent(*x) > latent(*y)) {
                throw AnalysisError(AnalysisErrc::InvalidLatentModel,
                                    "latent quality decreases from '" + x->id + "' to milder '" + y->id + "'");
            }
        }
    }
}

RatingMatrix simulate_raters(const session::Manifest& manifest, const session::ExperimentConfig& config,
                             const LatentModel& latent, std::size_t n_subjects, double noise_sd, std::uint64_t seed,
                             const std::string& prefix) {
    check_latent_model(manifest, latent, config.rating_categories);
    const auto impaired = manifest.impaired();
    std::map<std::string, double> quality;
    for (const auto* s : impaired) quality[s->id] = latent(*s);

    std::vector<session::ResultRow> rows;
    for (std::size_t i = 0; i < n_subjects; ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "%s-%03zu", prefix.c_str(), i + 1);
        session::ExperimentConfig subject_config = config;
        subject_config.participant_name = name;
        subject_config.display_order_seed = session::derive_seed(seed, 2 * i);
        const session::Playlist playlist = session::build_playlist(manifest, subject_config);
        session::Xoshiro256 noise(session::derive_seed(seed, 2 * i + 1));

        for (const auto& trial : playlist.trials) {
            const double draw = quality.at(trial.stimulus_id) + noise_sd * noise.gaussian();
            const int score = static_cast<int>(std::clamp<long>(std::lround(draw), 1, config.rating_categories));
            session::ResultRow row;
            row.participant = name;
            row.trial_index = trial.index;
            row.stimulus_id = trial.stimulus_id;
            row.source_id = trial.reference_id;
            row.is_trap_repeat = trial.is_trap_repeat;
            row.score = score;
            rows.push_back(std::move(row));
        }
    }
    return matrix_from_rows(rows, config.rating_categories);
}

session::Manifest compression_grid_manifest(std::size_t sources) {
    static const std::vector<session::ParamCombination> kGrid = {
        {"r5", "r6"}, {"r5", "r3"}, {"r5", "r2"}, {"r5", "r1"}, {"r2", "r6"}, {"r2", "r3"}, {"r1", "r6"}, {"r1", "r1"},
    };
    session::Manifest manifest;
    manifest.combinations = kGrid;
    for (std::size_t s = 0; s < sources; ++s) {
        char source_id[32];
        std::snprintf(source_id, sizeof source_id, "src%02zu", s + 1);
        manifest.stimuli.push_back({source_id, source_id, std::nullopt, std::nullopt, std::string(source_id) + ".ply", std::nullopt});
        for (const auto& [g, a] : kGrid) {
            const std::string id = std::string(source_id) + "_g" + g + "_a" + a;
            manifest.stimuli.push_back({id, source_id, g, a, id + ".ply", std::nullopt});
        }
    }
    return manifest;
}

}  // namespace s3d::analysis
