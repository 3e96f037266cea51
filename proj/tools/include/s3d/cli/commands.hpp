#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace s3d::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

struct CommandOutcome {
    int exit_code = kExitOk;
    /// Lines for a human reader.
    std::vector<std::string> messages;
    /// Machine-readable summary: {"command", "exit_code", "messages", ...}.
    nlohmann::json report = nlohmann::json::object();
};

struct PreprocessOptions {
    std::filesystem::path input_dir;
    std::filesystem::path output_dir;
};

/// Normalizes every .ply/.obj model in input_dir (not recursive) and writes
/// `<stem>.ply` (binary, float32) and `<stem>.p3dg` plus manifest.json.
CommandOutcome cmd_preprocess(const PreprocessOptions& options);

struct ValidateOptions {
    std::filesystem::path manifest;
    std::optional<std::filesystem::path> config;
    std::optional<std::uint64_t> seed;
};

CommandOutcome cmd_validate(const ValidateOptions& options);

struct ServeOptions {
    std::filesystem::path manifest;
    std::optional<std::filesystem::path> config;
    std::optional<std::uint64_t> seed;
    std::string address = "127.0.0.1";
    std::uint16_t port = 8080;
    std::filesystem::path app_dir;
    std::filesystem::path journal;
};

/// Runs until SIGINT/SIGTERM. `on_ready` receives the bound port.
CommandOutcome cmd_serve(const ServeOptions& options, const std::function<void(std::uint16_t)>& on_ready = {});

struct AnalyzeOptions {
    /// Journals (*.jsonl) or result CSVs (*.csv).
    std::vector<std::filesystem::path> inputs;
    /// JSON object {"<subject>": 1 | 2}; when absent all subjects form one group.
    std::optional<std::filesystem::path> groups;
    std::optional<std::filesystem::path> manifest;
    int rating_categories = 5;
    std::filesystem::path output_dir = "analysis";
};

CommandOutcome cmd_analyze(const AnalyzeOptions& options);

struct SimulateOptions {
    std::uint64_t seed = 0;
    std::size_t subjects_per_group = 19;
    double noise_sd = 0.5;
    std::size_t sources = 5;
    std::optional<std::filesystem::path> manifest;
    std::optional<std::filesystem::path> config;
    std::filesystem::path output_dir = "simulation";
};

CommandOutcome cmd_simulate(const SimulateOptions& options);

/// Reads a subject -> group map. Throws std::runtime_error on bad input.
[[nodiscard]] std::map<std::string, int> load_group_map(const std::filesystem::path& path);

}  // namespace s3d::cli
