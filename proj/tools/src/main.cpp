#include <iostream>

#include <CLI11.hpp>

#include "s3d/cli/commands.hpp"

namespace {

int emit(const s3d::cli::CommandOutcome& outcome, bool json) {
    if (json) {
        std::cout << outcome.report.dump(2) << "\n";
    } else {
        auto& out = outcome.exit_code == s3d::cli::kExitOk ? std::cout : std::cerr;
        for (const auto& m : outcome.messages) out << m << "\n";
    }
    return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"s3d: subjective quality experiments on 3D stimuli"};
    app.require_subcommand(1);
    bool json = false;
    app.add_flag("--json", json, "Print the machine-readable report instead of text");

    s3d::cli::PreprocessOptions pre;
    auto* preprocess = app.add_subcommand("preprocess", "Normalize and pack every model in a directory");
    preprocess->add_option("input", pre.input_dir, "Directory of .ply/.obj models")->required();
    preprocess->add_option("--out", pre.output_dir, "Output directory")->required();

    s3d::cli::ValidateOptions val;
    auto* validate = app.add_subcommand("validate", "Check a manifest and config and build the playlist");
    validate->add_option("--manifest", val.manifest, "Stimulus manifest (JSON)")->required()->check(CLI::ExistingFile);
    validate->add_option("--config", val.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
    validate->add_option("--seed", val.seed, "Display order seed");

    s3d::cli::ServeOptions srv;
    auto* serve = app.add_subcommand("serve", "Run the experiment server until interrupted");
    serve->add_option("--manifest", srv.manifest, "Stimulus manifest (JSON)")->required()->check(CLI::ExistingFile);
    serve->add_option("--config", srv.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
    serve->add_option("--seed", srv.seed, "Display order seed");
    serve->add_option("--address", srv.address, "Listen address")->capture_default_str();
    serve->add_option("--port", srv.port, "Listen port, 0 for any")->capture_default_str();
    serve->add_option("--app-dir", srv.app_dir, "Viewer bundle served under /app/")->check(CLI::ExistingDirectory);
    serve->add_option("--journal", srv.journal, "Journal path (default: <result_path>/<participant>.journal.jsonl)");

    s3d::cli::AnalyzeOptions ana;
    auto* analyze = app.add_subcommand("analyze", "Screen subjects, compute MOS and cross-validate groups");
    analyze->add_option("inputs", ana.inputs, "Journals (.jsonl) or result CSVs")->required()->check(CLI::ExistingFile);
    analyze->add_option("--groups", ana.groups, "JSON map of subject to group 1 or 2")->check(CLI::ExistingFile);
    analyze->add_option("--manifest", ana.manifest, "Manifest, for the per-parameter MOS grid")->check(CLI::ExistingFile);
    analyze->add_option("--categories", ana.rating_categories, "Rating categories")->capture_default_str();
    analyze->add_option("--out", ana.output_dir, "Output directory")->capture_default_str();

    s3d::cli::SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "Simulate two rater groups and analyze them");
    simulate->add_option("--seed", sim.seed, "Simulation seed")->required();
    simulate->add_option("--subjects", sim.subjects_per_group, "Subjects per group")->capture_default_str();
    simulate->add_option("--noise", sim.noise_sd, "Rating noise standard deviation")->capture_default_str();
    simulate->add_option("--sources", sim.sources, "Sources in the built-in design")->capture_default_str();
    simulate->add_option("--manifest", sim.manifest, "Manifest instead of the built-in design")->check(CLI::ExistingFile);
    simulate->add_option("--config", sim.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
    simulate->add_option("--out", sim.output_dir, "Output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : s3d::cli::kExitRuntime;
    }

    if (*preprocess) return emit(s3d::cli::cmd_preprocess(pre), json);
    if (*validate) return emit(s3d::cli::cmd_validate(val), json);
    if (*serve) {
        return emit(s3d::cli::cmd_serve(srv, [json](std::uint16_t port) {
                        if (!json) std::cout << "listening on port " << port << std::endl;
                    }),
                    json);
    }
    if (*analyze) return emit(s3d::cli::cmd_analyze(ana), json);
    return emit(s3d::cli::cmd_simulate(sim), json);
}
