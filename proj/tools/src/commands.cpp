#include "s3d/cli/commands.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "s3d/analysis/error.hpp"
#include "s3d/analysis/mos.hpp"
#include "s3d/analysis/ratings.hpp"
#include "s3d/analysis/report.hpp"
#include "s3d/analysis/simulation.hpp"
#include "s3d/asset/error.hpp"
#include "s3d/asset/io.hpp"
#include "s3d/asset/packed.hpp"
#include "s3d/common/hash.hpp"
#include "s3d/service/asset_catalog.hpp"
#include "s3d/service/error.hpp"
#include "s3d/service/server.hpp"
#include "s3d/session/config.hpp"
#include "s3d/session/error.hpp"
#include "s3d/session/manifest.hpp"
#include "s3d/session/playlist.hpp"
#include "s3d/session/results.hpp"
#include "s3d/session/rng.hpp"

namespace s3d::cli {

namespace fs = std::filesystem;

namespace {

CommandOutcome start(std::string_view command) {
    CommandOutcome outcome;
    outcome.report["command"] = command;
    return outcome;
}

CommandOutcome& finish(CommandOutcome& outcome) {
    outcome.report["exit_code"] = outcome.exit_code;
    outcome.report["messages"] = outcome.messages;
    return outcome;
}

CommandOutcome& fail(CommandOutcome& outcome, int code, std::string message) {
    outcome.exit_code = std::max(outcome.exit_code, code);
    outcome.messages.push_back(std::move(message));
    return outcome;
}

bool is_validation_error(session::SessionErrc code) {
    switch (code) {
        case session::SessionErrc::InvalidManifest:
        case session::SessionErrc::InvalidConfig:
        case session::SessionErrc::EmptyManifest:
        case session::SessionErrc::TrapsExceedStimuli:
        case session::SessionErrc::DigestMismatch:
        case session::SessionErrc::CorruptJournal:
            return true;
        default:
            return false;
    }
}

/// Runs `body`, mapping exceptions onto exit codes: input problems are
/// validation failures (1), everything else is a runtime error (2).
template <typename Body>
CommandOutcome guarded(std::string_view command, Body&& body) {
    CommandOutcome outcome = start(command);
    try {
        body(outcome);
    } catch (const session::SessionError& e) {
        fail(outcome, is_validation_error(e.code()) ? kExitValidation : kExitRuntime, e.what());
    } catch (const service::ServiceError& e) {
        const bool input = e.code() == service::ServiceErrc::AssetMissing || e.code() == service::ServiceErrc::AssetInvalid;
        fail(outcome, input ? kExitValidation : kExitRuntime, e.what());
        if (!e.details().empty()) outcome.report["missing"] = e.details();
    } catch (const asset::AssetError& e) {
        fail(outcome, kExitValidation, e.what());
    } catch (const analysis::AnalysisError& e) {
        fail(outcome, kExitValidation, std::string(analysis::to_string(e.code())) + ": " + e.what());
    } catch (const std::exception& e) {
        fail(outcome, kExitRuntime, e.what());
    }
    return finish(outcome);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot create " + path.string());
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

template <typename T>
std::string csv_text(const T& value) {
    std::ostringstream out;
    analysis::write_csv(out, value);
    return out.str();
}

/// Writes `<stem>.json` and `<stem>.csv`; returns both paths.
template <typename T>
std::vector<std::string> write_report(const fs::path& dir, const std::string& stem, const T& value) {
    const auto json_path = dir / (stem + ".json");
    const auto csv_path = dir / (stem + ".csv");
    write_text(json_path, json_text(analysis::to_json(value)));
    write_text(csv_path, csv_text(value));
    return {json_path.string(), csv_path.string()};
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

session::ExperimentConfig resolve_config(const std::optional<fs::path>& path, std::optional<std::uint64_t> seed) {
    session::ExperimentConfig config = path ? session::load_config(*path) : session::ExperimentConfig{};
    if (seed) config.display_order_seed = *seed;
    return config;
}

void append_outputs(nlohmann::json& report, const std::vector<std::string>& paths) {
    for (const auto& p : paths) report["outputs"].push_back(p);
}

}  // namespace

std::map<std::string, int> load_group_map(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open group map " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw std::runtime_error(path.string() + ": group map must be an object of subject -> 1|2");
    std::map<std::string, int> groups;
    for (const auto& [subject, group] : j.items()) {
        if (!group.is_number_integer() || (group.get<int>() != 1 && group.get<int>() != 2)) {
            throw std::runtime_error(path.string() + ": group of '" + subject + "' must be 1 or 2");
        }
        groups[subject] = group.get<int>();
    }
    return groups;
}

CommandOutcome cmd_preprocess(const PreprocessOptions& options) {
    return guarded("preprocess", [&](CommandOutcome& outcome) {
        if (!fs::is_directory(options.input_dir)) {
            fail(outcome, kExitValidation, "input directory " + options.input_dir.string() + " does not exist");
            return;
        }
        std::vector<fs::path> inputs;
        for (const auto& entry : fs::directory_iterator(options.input_dir)) {
            const auto ext = lower(entry.path().extension().string());
            if (entry.is_regular_file() && (ext == ".ply" || ext == ".obj")) inputs.push_back(entry.path());
        }
        std::sort(inputs.begin(), inputs.end());
        if (inputs.empty()) {
            fail(outcome, kExitValidation, "no models found in " + options.input_dir.string());
            return;
        }
        fs::create_directories(options.output_dir);

        session::Manifest manifest;
        std::set<std::string> stems;
        outcome.report["outputs"] = nlohmann::json::array();
        outcome.report["failures"] = nlohmann::json::array();
        for (const auto& input : inputs) {
            const std::string stem = input.stem().string();
            try {
                if (!stems.insert(stem).second) throw std::runtime_error("another model already uses the name '" + stem + "'");
                const auto model = asset::normalize_model(asset::load_model(input));
                const auto ply = asset::write_ply(model, asset::PlyEncoding::BinaryLittleEndian, asset::PlyScalar::Float32);
                const auto packed = asset::encode_container(asset::pack_geometry(model));
                const auto ply_path = options.output_dir / (stem + ".ply");
                const auto packed_path = options.output_dir / (stem + ".p3dg");
                asset::write_file(ply_path, ply);
                asset::write_file(packed_path, packed);
                const std::string hash = sha256_hex(std::span<const std::byte>(packed));

                session::StimulusMeta meta;
                meta.id = stem;
                meta.source_id = stem;
                meta.asset_path = packed_path.filename().string();
                meta.content_hash = hash;
                manifest.stimuli.push_back(meta);
                outcome.report["outputs"].push_back({{"id", stem},
                                                     {"input", input.string()},
                                                     {"ply", ply_path.string()},
                                                     {"packed", packed_path.string()},
                                                     {"content_hash", hash},
                                                     {"point_count", model.positions.size()},
                                                     {"face_count", model.faces.size()}});
            } catch (const std::exception& e) {
                outcome.report["failures"].push_back({{"input", input.string()}, {"error", e.what()}});
                fail(outcome, kExitValidation, input.string() + ": " + e.what());
            }
        }
        if (!manifest.stimuli.empty()) {
            const auto manifest_path = options.output_dir / "manifest.json";
            write_text(manifest_path, json_text(session::manifest_to_json(manifest)));
            outcome.report["manifest"] = manifest_path.string();
        }
        outcome.messages.push_back("normalized " + std::to_string(manifest.stimuli.size()) + " of " +
                                   std::to_string(inputs.size()) + " model(s) into " + options.output_dir.string());
    });
}

CommandOutcome cmd_validate(const ValidateOptions& options) {
    return guarded("validate", [&](CommandOutcome& outcome) {
        // Collect manifest and config problems together before stopping.
        std::optional<session::Manifest> manifest;
        std::optional<session::ExperimentConfig> config;
        std::vector<std::string> issues;
        try {
            manifest = session::load_manifest(options.manifest);
        } catch (const session::SessionError& e) {
            if (e.issues().empty()) issues.push_back(e.what());
            for (const auto& i : e.issues()) issues.push_back("manifest: " + i);
        }
        try {
            config = resolve_config(options.config, options.seed);
        } catch (const session::SessionError& e) {
            if (e.issues().empty()) issues.push_back(e.what());
            for (const auto& i : e.issues()) issues.push_back("config: " + i);
        }
        if (manifest) {
            std::vector<std::string> missing;
            for (const auto& s : manifest->stimuli) {
                const auto path = manifest->resolve(s);
                if (!fs::is_regular_file(path)) missing.push_back(path.string());
            }
            for (const auto& m : missing) issues.push_back("missing asset: " + m);
            outcome.report["missing"] = missing;
            if (missing.empty()) (void)service::AssetCatalog::build(*manifest, 0);
        }
        outcome.report["issues"] = issues;
        if (!issues.empty()) {
            for (auto& i : issues) fail(outcome, kExitValidation, std::move(i));
            return;
        }
        const auto playlist = session::build_playlist(*manifest, *config);
        outcome.report["trial_count"] = playlist.size();
        outcome.report["config_digest"] = playlist.config_digest;
        outcome.report["seed"] = playlist.seed;
        outcome.report["warnings"] = playlist.warnings;
        for (const auto& w : playlist.warnings) outcome.messages.push_back("warning: " + w);
        outcome.messages.push_back(std::to_string(playlist.size()) + " trials");
    });
}

CommandOutcome cmd_serve(const ServeOptions& options, const std::function<void(std::uint16_t)>& on_ready) {
    return guarded("serve", [&](CommandOutcome& outcome) {
        const auto manifest = session::load_manifest(options.manifest);
        const auto config = resolve_config(options.config, options.seed);
        service::ServerOptions server_options;
        server_options.address = options.address;
        server_options.port = options.port;
        server_options.app_dir = options.app_dir;
        server_options.journal_path = options.journal.empty() ? session::default_journal_path(config) : options.journal;

        service::ExperimentServer server(manifest, config, server_options);
        for (const auto& w : server.warnings()) outcome.messages.push_back("warning: " + w);
        server.start();
        if (on_ready) on_ready(server.port());
        server.wait_for_signal();

        const auto state = server.state_snapshot();
        auto csv_path = server_options.journal_path;
        csv_path.replace_extension().replace_extension(".csv");
        std::ostringstream csv;
        session::write_results_csv(csv, session::result_rows(state, manifest));
        write_text(csv_path, csv.str());

        outcome.report["port"] = server.port();
        outcome.report["journal"] = server_options.journal_path.string();
        outcome.report["results"] = csv_path.string();
        outcome.report["completed_trials"] = state.completed.size();
        outcome.report["trial_count"] = state.playlist.size();
        outcome.messages.push_back(std::to_string(state.completed.size()) + " of " +
                                   std::to_string(state.playlist.size()) + " trials rated; results in " +
                                   csv_path.string());
    });
}

CommandOutcome cmd_analyze(const AnalyzeOptions& options) {
    return guarded("analyze", [&](CommandOutcome& outcome) {
        if (options.inputs.empty()) {
            fail(outcome, kExitValidation, "no result files given");
            return;
        }
        std::vector<session::ResultRow> rows;
        for (const auto& input : options.inputs) {
            auto part = session::load_result_rows(input);
            rows.insert(rows.end(), part.begin(), part.end());
        }
        const auto matrix = analysis::matrix_from_rows(rows, options.rating_categories);
        std::optional<session::Manifest> manifest;
        if (options.manifest) manifest = session::load_manifest(*options.manifest);

        fs::create_directories(options.output_dir);
        outcome.report["outputs"] = nlohmann::json::array();
        outcome.report["subjects"] = matrix.subject_ids.size();
        outcome.report["stimuli"] = matrix.stimulus_ids.size();

        auto emit_group = [&](const analysis::GroupAnalysis& group, const std::string& suffix) {
            append_outputs(outcome.report, write_report(options.output_dir, "subject_reports" + suffix, group.subjects));
            append_outputs(outcome.report, write_report(options.output_dir, "mos" + suffix, group.mos));
            if (manifest) {
                const auto cells = analysis::mos_by_parameters(group.mos, *manifest);
                append_outputs(outcome.report, write_report(options.output_dir, "parameter_grid" + suffix, cells));
            }
            const auto rejected = std::count_if(group.subjects.begin(), group.subjects.end(), [](const auto& r) {
                return r.status == analysis::SubjectStatus::Rejected;
            });
            outcome.messages.push_back("group" + suffix + ": " + std::to_string(group.subjects.size()) + " subject(s), " +
                                       std::to_string(rejected) + " rejected");
        };

        if (!options.groups) {
            analysis::GroupAnalysis group;
            group.subjects = analysis::screen_subjects(matrix);
            group.mos = analysis::compute_mos(matrix, analysis::qualified_subjects(group.subjects));
            emit_group(group, "");
            return;
        }
        const auto [g1, g2] = analysis::split_groups(matrix, load_group_map(*options.groups));
        const auto cv = analysis::cross_validate(g1, g2);
        emit_group(cv.group1, "_group1");
        emit_group(cv.group2, "_group2");
        append_outputs(outcome.report, write_report(options.output_dir, "correlation", cv.report));
        outcome.report["correlation"] = analysis::to_json(cv.report);
        std::ostringstream line;
        line.precision(4);
        line << "srocc " << cv.report.srocc << ", plcc " << cv.report.plcc << ", krocc " << cv.report.krocc
             << ", rmse " << cv.report.rmse;
        outcome.messages.push_back(line.str());
    });
}

CommandOutcome cmd_simulate(const SimulateOptions& options) {
    return guarded("simulate", [&](CommandOutcome& outcome) {
        const auto manifest = options.manifest ? session::load_manifest(*options.manifest)
                                               : analysis::compression_grid_manifest(options.sources);
        const auto config = resolve_config(options.config, std::nullopt);
        const auto latent = analysis::ordinal_latent_model(manifest, config.rating_categories);
        analysis::check_latent_model(manifest, latent, config.rating_categories);

        const auto g1 = analysis::simulate_raters(manifest, config, latent, options.subjects_per_group, options.noise_sd,
                                                  session::derive_seed(options.seed, 1), "g1");
        const auto g2 = analysis::simulate_raters(manifest, config, latent, options.subjects_per_group, options.noise_sd,
                                                  session::derive_seed(options.seed, 2), "g2");
        const auto cv = analysis::cross_validate(g1, g2);

        fs::create_directories(options.output_dir);
        outcome.report["outputs"] = nlohmann::json::array();
        append_outputs(outcome.report, write_report(options.output_dir, "subject_reports_group1", cv.group1.subjects));
        append_outputs(outcome.report, write_report(options.output_dir, "subject_reports_group2", cv.group2.subjects));
        append_outputs(outcome.report, write_report(options.output_dir, "mos_group1", cv.group1.mos));
        append_outputs(outcome.report, write_report(options.output_dir, "mos_group2", cv.group2.mos));
        const auto cells = analysis::mos_by_parameters(cv.group1.mos, manifest);
        append_outputs(outcome.report, write_report(options.output_dir, "parameter_grid_group1", cells));
        append_outputs(outcome.report, write_report(options.output_dir, "correlation", cv.report));
        outcome.report["seed"] = options.seed;
        outcome.report["correlation"] = analysis::to_json(cv.report);
        std::ostringstream line;
        line.precision(4);
        line << "simulated 2 x " << options.subjects_per_group << " subjects over " << g1.stimulus_ids.size()
             << " stimuli: srocc " << cv.report.srocc << ", plcc " << cv.report.plcc << ", krocc " << cv.report.krocc
             << ", rmse " << cv.report.rmse;
        outcome.messages.push_back(line.str());
    });
}

}  // namespace s3d::cli
