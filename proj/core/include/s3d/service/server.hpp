#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "s3d/service/controller.hpp"
#include "s3d/session/config.hpp"
#include "s3d/session/manifest.hpp"

namespace s3d::service {

struct ServerOptions {
    std::string address = "127.0.0.1";
    /// 0 picks an ephemeral port; see ExperimentServer::port().
    std::uint16_t port = 8080;
    /// Directory served under /app/. When empty a placeholder page is served.
    std::filesystem::path app_dir;
    /// Defaults to default_journal_path(config).
    std::filesystem::path journal_path;
    std::size_t cache_entries = AssetCatalog::kDefaultCacheEntries;
    unsigned io_threads = 2;
    Clocks clocks;
};

/// HTTP and WebSocket front end on one port:
///   GET /app/*         static viewer bundle
///   GET /geom/<hash>   packed geometry, immutable
///   WS  /session       session protocol
/// Construction validates assets, opens (or resumes) the journal and binds
/// the port; the server stops when destroyed.
class ExperimentServer {
public:
    ExperimentServer(const session::Manifest& manifest, const session::ExperimentConfig& config,
                     ServerOptions options = {});
    ~ExperimentServer();
    ExperimentServer(const ExperimentServer&) = delete;
    ExperimentServer& operator=(const ExperimentServer&) = delete;

    void start();
    void stop();
    /// Blocks until stop() is called from another thread or a signal arrives.
    void wait_for_signal();

    [[nodiscard]] std::uint16_t port() const;
    [[nodiscard]] const std::vector<std::string>& warnings() const;

    /// Snapshot of the session state, taken on the session strand.
    [[nodiscard]] session::SessionState state_snapshot() const;

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
};

/// MIME type for a static file name.
[[nodiscard]] std::string_view mime_type(std::string_view path);

}  // namespace s3d::service
