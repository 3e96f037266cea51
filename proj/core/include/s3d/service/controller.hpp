#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "s3d/service/asset_catalog.hpp"
#include "s3d/service/protocol.hpp"
#include "s3d/session/config.hpp"
#include "s3d/session/manifest.hpp"
#include "s3d/session/session.hpp"
#include "s3d/session/timer.hpp"

namespace s3d::service {

using ConnectionId = std::uint64_t;

struct Clocks {
    std::function<session::TrialTimer::Clock::time_point()> steady = [] { return session::TrialTimer::Clock::now(); };
    std::function<std::string()> wall = [] { return session::utc_timestamp_now(); };
};

/// Frames to send back on the connection, in order. `close` asks the
/// transport to close the connection after sending them.
struct Reply {
    std::vector<std::string> frames;
    bool close = false;
};

/// Transport-independent session endpoint. One connection at a time may
/// drive the session; a reconnect picks up at the current trial. Not thread
/// safe: the transport serializes calls.
class SessionController {
public:
    SessionController(session::Session session, session::ExperimentConfig config, const AssetCatalog& catalog,
                      Clocks clocks = {});

    Reply connect(ConnectionId connection);
    void disconnect(ConnectionId connection);
    Reply receive(ConnectionId connection, std::string_view frame);

    [[nodiscard]] const session::SessionState& state() const noexcept { return session_.state(); }
    [[nodiscard]] bool halted() const noexcept { return session_.halted(); }
    [[nodiscard]] std::optional<ConnectionId> active_connection() const noexcept { return active_; }
    /// Trials whose on-screen countdown the viewer reported as expired.
    [[nodiscard]] const std::vector<std::size_t>& expired_trials() const noexcept { return expired_trials_; }

    [[nodiscard]] TrialDescriptor describe(std::size_t trial_index) const;

private:
    void handle_hello(Reply& reply);
    void handle_rating(Reply& reply, const nlohmann::json& payload);
    void handle_timer_ack(Reply& reply, const nlohmann::json& payload);
    void push_current(Reply& reply);
    [[nodiscard]] nlohmann::json session_info() const;

    session::Session session_;
    session::ExperimentConfig config_;
    const AssetCatalog& catalog_;
    Clocks clocks_;
    session::TimerPolicy policy_;

    std::optional<ConnectionId> active_;
    bool greeted_ = false;
    /// Timer of the trial currently on screen; keeps running across reconnects.
    std::optional<std::pair<std::size_t, session::TrialTimer>> timer_;
    std::vector<std::size_t> expired_trials_;
};

}  // namespace s3d::service
