#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "s3d/analysis/ratings.hpp"
#include "s3d/session/config.hpp"
#include "s3d/session/manifest.hpp"

namespace s3d::analysis {

/// True quality of an impaired stimulus on the 1..K rating scale.
using LatentModel = std::function<double(const session::StimulusMeta&)>;

struct OrdinalModelParams {
    /// Share of the quality range driven by the geometry parameter; the rest
    /// follows the attribute parameter.
    double geometry_weight = 0.6;
    /// Total spread of per-source content offsets, in rating units. Sources
    /// are offset evenly across [-spread/2, +spread/2] by id order.
    double source_spread = 0.6;
};

/// Latent quality rising linearly with the rank of each parameter ordinal
/// among the ordinals present in the manifest, clamped to [1, K]. Monotone
/// nondecreasing in both ordinals by construction.
[[nodiscard]] LatentModel ordinal_latent_model(const session::Manifest& manifest, int rating_categories,
                                               OrdinalModelParams params = {});

/// Throws InvalidLatentModel if any value leaves [1, K] or the model is not
/// monotone nondecreasing in geometry and attribute ordinals per source.
void check_latent_model(const session::Manifest& manifest, const LatentModel& latent, int rating_categories);

/// Synthetic subjects named `<prefix>-NNN`. Subject i sees its own playlist
/// (display seed derived from `seed` and i) and rates each trial as
/// clamp(round(latent + N(0, noise_sd)), 1, K), repeats included.
[[nodiscard]] RatingMatrix simulate_raters(const session::Manifest& manifest, const session::ExperimentConfig& config,
                                           const LatentModel& latent, std::size_t n_subjects, double noise_sd,
                                           std::uint64_t seed, const std::string& prefix = "sim");

/// Five sources crossed with the eight (geometry, attribute) settings
/// {r5,r2,r1} x {r6,r3,r2,r1} used for compressed point-cloud studies:
/// (r5: r6 r3 r2 r1), (r2: r6 r3), (r1: r6 r1). Asset paths are placeholders.
[[nodiscard]] session::Manifest compression_grid_manifest(std::size_t sources = 5);

}  // namespace s3d::analysis
