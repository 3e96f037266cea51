#include <doctest.h>

#include <algorithm>
#include <random>

#include "s3d/analysis/simulation.hpp"
#include "s3d/session/error.hpp"
#include "s3d/session/playlist.hpp"
#include "support/playlist_checks.hpp"

using namespace s3d::session;
using s3d::analysis::compression_grid_manifest;
using s3d::testing::playlist_violations;
using s3d::testing::random_manifest;

namespace {

ExperimentConfig seeded(std::uint64_t seed, int traps = 2) {
    ExperimentConfig c;
    c.display_order_seed = seed;
    c.traps_per_source = traps;
    return c;
}

SessionErrc error_code(const Manifest& m, const ExperimentConfig& c) {
    try {
        (void)build_playlist(m, c);
    } catch (const SessionError& e) {
        return e.code();
    }
    FAIL("expected SessionError");
    return SessionErrc::InvalidConfig;
}

}  // namespace

TEST_CASE("the five-source compression design gives 50 trials") {
    const auto m = compression_grid_manifest(5);
    const auto p = build_playlist(m, seeded(1));
    CHECK(p.size() == 50);
    CHECK(playlist_violations(m, seeded(1), p).empty());
    CHECK(p.warnings.empty());
    for (std::size_t i = 1; i < p.size(); ++i) CHECK(p.trials[i].reference_id != p.trials[i - 1].reference_id);
}

TEST_CASE("default traps are the most and least compressed variant per source") {
    const auto m = compression_grid_manifest(2);
    const auto traps = select_traps(m, seeded(1));
    CHECK(traps == std::vector<std::string>{"src01_gr1_ar1", "src01_gr5_ar6", "src02_gr1_ar1", "src02_gr5_ar6"});
    auto c = seeded(1, 3);
    CHECK(select_traps(m, c).size() == 6);
}

TEST_CASE("explicit trap lists override the default and are checked") {
    const auto m = compression_grid_manifest(2);
    auto c = seeded(3);
    c.trap_stimuli = {"src01_gr2_ar3", "src01_gr5_ar2", "src02_gr2_ar6", "src02_gr5_ar1"};
    const auto p = build_playlist(m, c);
    CHECK(playlist_violations(m, c, p).empty());
    for (const auto& t : p.trials) {
        if (t.is_trap_repeat) CHECK(std::find(c.trap_stimuli.begin(), c.trap_stimuli.end(), t.stimulus_id) != c.trap_stimuli.end());
    }
    c.trap_stimuli = {"src01_gr2_ar3", "src01_gr5_ar2", "src01_gr1_ar1", "src02_gr2_ar6"};
    CHECK(error_code(m, c) == SessionErrc::InvalidConfig);
    c.trap_stimuli = {"src01", "src01_gr5_ar2", "src02_gr2_ar6", "src02_gr5_ar1"};
    CHECK(error_code(m, c) == SessionErrc::InvalidConfig);
}

TEST_CASE("same inputs give the same playlist; manifest order is irrelevant") {
    const auto m = compression_grid_manifest(5);
    auto shuffled = m;
    std::mt19937_64 rng(5);
    std::shuffle(shuffled.stimuli.begin(), shuffled.stimuli.end(), rng);
    CHECK(build_playlist(m, seeded(9)) == build_playlist(m, seeded(9)));
    CHECK(build_playlist(shuffled, seeded(9)) == build_playlist(m, seeded(9)));
    CHECK(build_playlist(m, seeded(9)).trials != build_playlist(m, seeded(10)).trials);
}

TEST_CASE("different participants get different orders by default") {
    const auto m = compression_grid_manifest(5);
    ExperimentConfig a, b;
    a.participant_name = "p01";
    b.participant_name = "p02";
    CHECK(build_playlist(m, a).trials != build_playlist(m, b).trials);
}

TEST_CASE("random manifests satisfy every playlist property") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 60; ++i) {
        const int traps = static_cast<int>(rng() % 4);
        const auto m = random_manifest(rng, traps);
        const auto c = seeded(rng(), traps);
        const auto p = build_playlist(m, c);
        const auto v = playlist_violations(m, c, p);
        CHECK_MESSAGE(v.empty(), (v.empty() ? "" : v.front()));
    }
}

TEST_CASE("capacity errors") {
    Manifest empty;
    CHECK(error_code(empty, seeded(1)) == SessionErrc::EmptyManifest);
    auto m = compression_grid_manifest(1);
    CHECK(error_code(m, seeded(1, 9)) == SessionErrc::TrapsExceedStimuli);
    m.stimuli.push_back({"lonely", "lonely", std::nullopt, std::nullopt, "l.ply", std::nullopt});
    CHECK(error_code(m, seeded(1, 1)) == SessionErrc::TrapsExceedStimuli);
}

TEST_CASE("a dominant source relaxes adjacency with a warning") {
    Manifest m;
    m.stimuli.push_back({"a", "a", std::nullopt, std::nullopt, "a.ply", std::nullopt});
    m.stimuli.push_back({"b", "b", std::nullopt, std::nullopt, "b.ply", std::nullopt});
    for (int i = 1; i <= 8; ++i) {
        m.stimuli.push_back({"a" + std::to_string(i), "a", "r" + std::to_string(i), "r1", "x.ply", std::nullopt});
    }
    m.stimuli.push_back({"b1", "b", "r1", "r1", "y.ply", std::nullopt});
    const auto c = seeded(4, 1);
    const auto p = build_playlist(m, c);
    CHECK(playlist_violations(m, c, p).empty());
    CHECK_FALSE(p.warnings.empty());
}

TEST_CASE("too few trials for the trap separation falls back with a warning") {
    Manifest m;
    m.stimuli.push_back({"a", "a", std::nullopt, std::nullopt, "a.ply", std::nullopt});
    m.stimuli.push_back({"a1", "a", "r1", "r1", "x.ply", std::nullopt});
    m.stimuli.push_back({"a2", "a", "r2", "r1", "x.ply", std::nullopt});
    const auto p = build_playlist(m, seeded(1, 1));
    CHECK(p.size() == 3);
    CHECK(p.trials.back().is_trap_repeat);
    CHECK_FALSE(p.warnings.empty());
}

TEST_CASE("config digest changes with config and manifest content") {
    const auto m = compression_grid_manifest(2);
    auto c = seeded(1);
    const auto d = config_digest(m, c);
    CHECK(d.size() == 64);
    c.viewing_time_s = 10;
    CHECK(config_digest(m, c) != d);
    auto m2 = m;
    m2.stimuli[0].asset_path = "other.ply";
    CHECK(config_digest(m2, seeded(1)) != d);
}
