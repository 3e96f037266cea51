// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.
// Runs without a viewer bundle; the service serves its placeholder page.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "s3d/analysis/error.hpp"
#include "s3d/analysis/metrics.hpp"
#include "s3d/analysis/mos.hpp"
#include "s3d/analysis/simulation.hpp"
#include "s3d/asset/io.hpp"
#include "s3d/asset/packed.hpp"
#include "s3d/common/hash.hpp"
#include "s3d/service/server.hpp"
#include "s3d/session/playlist.hpp"
#include "s3d/session/rng.hpp"
#include "s3d/session/session.hpp"
#include "support/fixtures.hpp"
#include "support/http_client.hpp"
#include "support/oracles.hpp"
#include "support/playlist_checks.hpp"
#include "support/scripted.hpp"

namespace fs = std::filesystem;
using namespace s3d;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 4) {
    std::ostringstream out;
    out.precision(precision);
    out << v;
    return out.str();
}

// ---------------------------------------------------------------- metrics

Outcome metrics_against_oracles() {
    const auto start = Clock::now();
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> length(5, 10);
    std::uniform_int_distribution<int> value(1, 5);
    constexpr double kTol = 1e-12;

    int compared = 0;
    int degenerate = 0;
    double worst = 0.0;
    std::vector<std::string> failures;
    for (int c = 0; compared < 1000; ++c) {
        const int n = length(rng);
        std::vector<double> a(n), b(n);
        for (int i = 0; i < n; ++i) {
            a[i] = value(rng);
            b[i] = value(rng);
        }
        const bool constant = std::all_of(a.begin(), a.end(), [&](double x) { return x == a[0]; }) ||
                              std::all_of(b.begin(), b.end(), [&](double x) { return x == b[0]; });
        const double r = analysis::rmse(a, b);
        const double dr = std::abs(r - testing::oracle_rmse(a, b));
        worst = std::max(worst, dr);
        if (dr > kTol) failures.push_back("rmse case " + std::to_string(c));

        if (constant) {
            // Correlation is undefined; the library must say so rather than guess.
            ++degenerate;
            for (auto* fn : {&analysis::srocc, &analysis::plcc, &analysis::krocc}) {
                try {
                    (void)fn(a, b);
                    failures.push_back("case " + std::to_string(c) + " accepted a constant vector");
                } catch (const analysis::AnalysisError& e) {
                    if (e.code() != analysis::AnalysisErrc::DegenerateInput) failures.push_back("wrong error");
                }
            }
            continue;
        }
        const double ds = std::abs(analysis::srocc(a, b) - testing::oracle_spearman(a, b));
        const double dp = std::abs(analysis::plcc(a, b) - testing::oracle_pearson(a, b));
        const double k = analysis::krocc(a, b);
        const double dk = std::abs(k - testing::oracle_kendall_tau_b(a, b));
        const double dc = std::abs(k - testing::tau_b_from_counts(testing::count_pairs(a, b)));
        worst = std::max({worst, ds, dp, dk, dc});
        if (ds > kTol) failures.push_back("srocc case " + std::to_string(c));
        if (dp > kTol) failures.push_back("plcc case " + std::to_string(c));
        if (dk > kTol || dc > kTol) failures.push_back("krocc case " + std::to_string(c));
        ++compared;
    }
    const double elapsed = seconds_since(start);
    Outcome o;
    o.pass = failures.empty() && elapsed < 5.0;
    o.detail = std::to_string(compared) + " cases compared, " + std::to_string(degenerate) +
               " constant cases rejected, max |diff| " + fmt(worst, 3) + ", " + fmt(elapsed, 3) + " s";
    if (!failures.empty()) o.detail += "; first failure: " + failures.front();
    return o;
}

// -------------------------------------------------------------- screening

Outcome screening_exhaustive() {
    int wrong = 0;
    for (int a = 1; a <= 5; ++a) {
        for (int b = 1; b <= 5; ++b) {
            analysis::RatingMatrix m;
            m.stimulus_ids = {"x"};
            m.subject_ids = {"s"};
            m.scores = {{a}};
            m.trap_pairs = {{{"x", a, b}}};
            const auto report = analysis::screen_subjects(m).at(0);
            const bool rejected = report.status == analysis::SubjectStatus::Rejected;
            if (rejected != (std::abs(a - b) > 2)) ++wrong;
        }
    }
    return {wrong == 0, "25 pairs, " + std::to_string(wrong) + " misclassified"};
}

// --------------------------------------------------------------- playlist

struct PlaylistCase {
    session::Manifest manifest;
    session::ExperimentConfig config;
};

std::vector<PlaylistCase> playlist_cases() {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> traps(0, 3);
    std::vector<PlaylistCase> cases;
    for (int i = 0; i < 200; ++i) {
        const int t = traps(rng);
        PlaylistCase c{testing::random_manifest(rng, t), {}};
        c.config.participant_name = "p" + std::to_string(i);
        c.config.traps_per_source = t;
        c.config.display_order_seed = rng();
        cases.push_back(std::move(c));
    }
    return cases;
}

std::string playlist_digest(const session::Playlist& p) {
    std::string text;
    for (const auto& t : p.trials) {
        text += std::to_string(t.index) + ":" + t.stimulus_id + ":" + t.reference_id + ":" +
                (t.is_trap_repeat ? "r" : "f") + ":" + (t.trap_group ? std::to_string(*t.trap_group) : "-") + "\n";
    }
    return sha256_hex(text);
}

/// Child mode: one digest per case on stdout.
int print_playlist_digests() {
    for (const auto& c : playlist_cases()) std::cout << playlist_digest(session::build_playlist(c.manifest, c.config)) << '\n';
    return 0;
}

std::vector<std::string> child_digests() {
    std::vector<std::string> lines;
    const std::string command = "'" + fs::read_symlink("/proc/self/exe").string() + "' --playlist-digest";
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(command.c_str(), "r"), pclose);
    if (!pipe) return lines;
    std::array<char, 128> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe.get())) {
        std::string line(buf.data());
        while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

Outcome playlist_properties() {
    const auto start = Clock::now();
    std::vector<std::string> digests;
    std::vector<std::string> failures;
    std::size_t trials = 0;
    for (std::size_t i = 0; const auto& c : playlist_cases()) {
        const auto p = session::build_playlist(c.manifest, c.config);
        trials += p.size();
        for (const auto& v : testing::playlist_violations(c.manifest, c.config, p)) {
            failures.push_back("case " + std::to_string(i) + ": " + v);
        }
        digests.push_back(playlist_digest(p));
        ++i;
    }
    const auto first = child_digests();
    const auto second = child_digests();
    const bool deterministic = first.size() == digests.size() && first == second && first == digests;
    const double elapsed = seconds_since(start);

    Outcome o;
    o.pass = failures.empty() && deterministic && elapsed < 10.0;
    o.detail = "200 cases, " + std::to_string(trials) + " trials, " + std::to_string(failures.size()) +
               " violations, two child processes " + (deterministic ? "agree" : "DISAGREE") + ", " + fmt(elapsed, 3) + " s";
    if (!failures.empty()) o.detail += "; first: " + failures.front();
    return o;
}

// ----------------------------------------------------------------- resume

std::vector<std::string> journal_lines(const fs::path& path) {
    std::ifstream in(path);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
}

Outcome resume_everywhere() {
    testing::TempDir dir;
    const auto manifest = analysis::compression_grid_manifest(5);
    session::ExperimentConfig config;
    config.participant_name = "resume";
    config.result_path = dir.path();

    auto run_to_end = [](session::Session& s) {
        while (auto next = s.state().next_trial()) s.record(testing::scripted_judgment(s.state(), *next));
    };

    const auto full_path = dir / "full.jsonl";
    auto full = session::Session::open(manifest, config, full_path);
    run_to_end(full);
    const auto expected = full.state();
    const auto expected_lines = journal_lines(full_path);
    const std::size_t n = expected.playlist.size();

    int mismatches = 0;
    for (std::size_t k = 0; k <= n; ++k) {
        const auto path = dir / ("cut" + std::to_string(k) + ".jsonl");
        {
            auto s = session::Session::open(manifest, config, path);
            for (std::size_t i = 0; i < k; ++i) s.record(testing::scripted_judgment(s.state(), i));
        }
        auto resumed = session::Session::open(manifest, config, path);
        const bool resumed_at_k = resumed.state().completed.size() == k;
        run_to_end(resumed);
        auto got = resumed.state();
        got.journal_path = expected.journal_path;
        if (!resumed_at_k || !(got == expected) || got.completed != expected.completed ||
            journal_lines(path) != expected_lines) {
            ++mismatches;
        }
    }
    Outcome o;
    o.pass = n == 50 && mismatches == 0;
    o.detail = std::to_string(n) + "-trial design, " + std::to_string(n + 1) + " interruption points, " +
               std::to_string(mismatches) + " mismatches";
    return o;
}

// ------------------------------------------------------------- round trip

double relative_error(double got, double want) {
    const double scale = std::max(1.0, std::abs(want));
    return std::abs(got - want) / scale;
}

Outcome round_trips() {
    std::mt19937_64 rng(5);
    int binary_bad = 0, packed_bad = 0, ascii_bad = 0, norm_bad = 0;
    double worst_ascii = 0.0, worst_edge = 0.0, worst_center = 0.0;
    for (int i = 0; i < 100; ++i) {
        const testing::RandomModelSpec spec{.mesh = i % 2 == 0, .colors = i % 3 != 0, .normals = i % 4 < 2};
        const auto model = testing::random_model(rng, spec);

        const auto bin = asset::write_ply(model, asset::PlyEncoding::BinaryLittleEndian);
        const auto bin_back = asset::parse_ply(bin);
        if (asset::write_ply(bin_back, asset::PlyEncoding::BinaryLittleEndian) != bin || !(bin_back == model)) ++binary_bad;

        const auto container = asset::encode_container(asset::pack_geometry(model));
        const auto unpacked = asset::unpack_geometry(asset::decode_container(container));
        if (asset::encode_container(asset::pack_geometry(unpacked)) != container) ++packed_bad;

        auto wide = testing::random_model(rng, {.mesh = spec.mesh, .colors = spec.colors, .normals = spec.normals,
                                                .float_exact = false});
        const auto text = asset::parse_ply(asset::write_ply(wide, asset::PlyEncoding::Ascii));
        bool ok = text.positions.size() == wide.positions.size() && text.faces == wide.faces && text.colors == wide.colors;
        for (std::size_t v = 0; ok && v < wide.positions.size(); ++v) {
            const auto& p = text.positions[v];
            const auto& q = wide.positions[v];
            worst_ascii = std::max({worst_ascii, relative_error(p.x, q.x), relative_error(p.y, q.y), relative_error(p.z, q.z)});
        }
        if (!ok || worst_ascii > 1e-6) ++ascii_bad;

        const auto bounds = asset::compute_bounds(asset::normalize_model(wide));
        const auto c = bounds.center();
        worst_edge = std::max(worst_edge, std::abs(bounds.longest_edge() - 1.0));
        worst_center = std::max({worst_center, std::abs(c.x), std::abs(c.y), std::abs(c.z)});
        if (std::abs(bounds.longest_edge() - 1.0) > 1e-6 || std::abs(c.x) > 1e-6 || std::abs(c.y) > 1e-6 ||
            std::abs(c.z) > 1e-6) {
            ++norm_bad;
        }
    }
    Outcome o;
    o.pass = binary_bad + packed_bad + ascii_bad + norm_bad == 0;
    o.detail = "100 models: binary PLY " + std::to_string(binary_bad) + " / packed " + std::to_string(packed_bad) +
               " byte mismatches, ascii max rel err " + fmt(worst_ascii, 3) + ", normalized edge err " +
               fmt(worst_edge, 3) + ", center err " + fmt(worst_center, 3);
    return o;
}

// ------------------------------------------------------------- simulation

Outcome simulation_recovers_design() {
    const auto start = Clock::now();
    const auto manifest = analysis::compression_grid_manifest(5);
    session::ExperimentConfig config;
    const auto latent = analysis::ordinal_latent_model(manifest, config.rating_categories);

    int monotone_failures = 0;
    int within_bounds = 0;
    double min_srocc = 1.0, max_rmse = 0.0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto g1 = analysis::simulate_raters(manifest, config, latent, 19, 0.5, session::derive_seed(seed, 1), "g1");
        const auto g2 = analysis::simulate_raters(manifest, config, latent, 19, 0.5, session::derive_seed(seed, 2), "g2");
        const auto cv = analysis::cross_validate(g1, g2);

        for (const auto* table : {&cv.group1.mos, &cv.group2.mos}) {
            const auto cells = analysis::mos_by_parameters(*table, manifest);
            // Cells are sorted by (attribute, geometry); within one attribute a
            // lower geometry ordinal means stronger compression and lower MOS.
            for (std::size_t i = 1; i < cells.size(); ++i) {
                if (cells[i].attribute_ordinal == cells[i - 1].attribute_ordinal &&
                    !(cells[i - 1].mean_mos < cells[i].mean_mos)) {
                    ++monotone_failures;
                }
            }
        }
        min_srocc = std::min(min_srocc, cv.report.srocc);
        max_rmse = std::max(max_rmse, cv.report.rmse);
        if (cv.report.srocc >= 0.93 && cv.report.rmse <= 0.08) ++within_bounds;
    }
    const double elapsed = seconds_since(start);
    Outcome o;
    o.pass = monotone_failures == 0 && within_bounds >= 95 && elapsed < 60.0;
    o.detail = "100 seeds: " + std::to_string(monotone_failures) + " monotonicity breaks, " +
               std::to_string(within_bounds) + "/100 within bounds (min srocc " + fmt(min_srocc) + ", max rmse " +
               fmt(max_rmse) + "), " + fmt(elapsed, 3) + " s";
    return o;
}

// --------------------------------------------------------------- headless

Outcome runs_without_viewer() {
    testing::TempDir dir;
    const auto manifest = testing::materialize(analysis::compression_grid_manifest(1), dir.path());
    session::ExperimentConfig config;
    config.participant_name = "headless";
    config.result_path = dir / "results";
    service::ServerOptions options;
    options.port = 0;
    options.journal_path = dir / "headless.jsonl";

    service::ExperimentServer server(manifest, config, options);
    server.start();
    const auto app = testing::get(server.port(), "/app/");
    nlohmann::json info;
    bool geometry_ok = false;
    {
        testing::WsClient ws(server.port());
        ws.send("hello", {{"client", "acceptance"}});
        info = ws.read();
        const auto begin = ws.read();
        if (begin.is_object() && begin.value("type", "") == "trial_begin") {
            const std::string url = begin["payload"]["impaired_asset_url"];
            const auto geom = testing::get(server.port(), url);
            geometry_ok = geom.status == 200 && url == "/geom/" + sha256_hex(geom.body);
        }
    }
    server.stop();

    Outcome o;
    o.pass = app.status == 200 && info.is_object() && info.value("type", "") == "session_info" && geometry_ok;
    o.detail = std::string("no viewer bundle; /app/ -> ") + std::to_string(app.status) + ", session handshake " +
               (info.is_object() ? info.value("type", "?") : "closed") + ", geometry " +
               (geometry_ok ? "hash-verified" : "FAILED");
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1 && std::string_view(argv[1]) == "--playlist-digest") return print_playlist_digests();

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"1 metrics match independent oracles", metrics_against_oracles},
        {"2 trap screening rejects |diff| > 2", screening_exhaustive},
        {"3 playlist invariants and determinism", playlist_properties},
        {"4 resume at every trial boundary", resume_everywhere},
        {"5 geometry round trips and normalization", round_trips},
        {"6 simulated study recovers the design", simulation_recovers_design},
        {"7 service runs without a viewer build", runs_without_viewer},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << " | " << o.detail << std::endl;
    }
    std::cout << (failed == 0 ? "ALL PASS" : std::to_string(failed) + " FAILED") << std::endl;
    return failed == 0 ? 0 : 1;
}
