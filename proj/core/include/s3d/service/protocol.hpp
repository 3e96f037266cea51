#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "s3d/session/config.hpp"

namespace s3d::service {

inline constexpr int kProtocolVersion = 1;

enum class MessageType {
    Hello,            // client -> server
    SessionInfo,      // server -> client
    TrialBegin,       // server -> client
    TimerExpiredAck,  // client -> server: the countdown of the current trial ran out on screen
    RatingSubmit,     // client -> server
    TrialAck,         // server -> client
    SessionComplete,  // server -> client
    Error,            // server -> client
    Telemetry,        // client -> server, optional, never answered
};

[[nodiscard]] std::string_view to_string(MessageType type) noexcept;
[[nodiscard]] std::optional<MessageType> message_type_from_string(std::string_view name) noexcept;

/// Every frame on the session channel is one canonical JSON object
/// {"payload": {...}, "protocol_version": 1, "type": "<name>"}.
struct WireMessage {
    MessageType type = MessageType::Error;
    nlohmann::json payload = nlohmann::json::object();
    int protocol_version = kProtocolVersion;
};

/// Wire error codes carried in error payloads as {"code": ..., "message": ...}.
namespace wire_error {
inline constexpr std::string_view kMalformedMessage = "MalformedMessage";
inline constexpr std::string_view kUnknownMessageType = "UnknownMessageType";
inline constexpr std::string_view kUnsupportedProtocolVersion = "UnsupportedProtocolVersion";
inline constexpr std::string_view kUnexpectedMessage = "UnexpectedMessage";
inline constexpr std::string_view kHelloRequired = "HelloRequired";
inline constexpr std::string_view kSessionOccupied = "SessionOccupied";
inline constexpr std::string_view kSessionHalted = "SessionHalted";
}  // namespace wire_error

class ProtocolError : public std::runtime_error {
public:
    ProtocolError(std::string_view code, const std::string& message)
        : std::runtime_error(message), code_(code) {}
    [[nodiscard]] const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

[[nodiscard]] std::string encode(const WireMessage& message);

/// Throws ProtocolError for non-JSON text, a missing or unknown type, or a
/// protocol_version other than kProtocolVersion.
[[nodiscard]] WireMessage decode(std::string_view text);

[[nodiscard]] WireMessage make_error(std::string_view code, const std::string& message,
                                     std::optional<std::size_t> trial_index = std::nullopt);

/// What the viewer needs to present one trial.
struct TrialDescriptor {
    std::size_t trial_index = 0;
    std::size_t trial_count = 0;
    std::string reference_asset_url;
    std::string impaired_asset_url;
    session::DisplayMode display_mode = session::DisplayMode::Simultaneous;
    session::RenderingMode rendering_mode = session::RenderingMode::Points;
    session::Background background;
    double viewing_time_s = 20.0;
    bool timer_enabled = true;
    int rating_categories = 5;
    double point_size_px = 2.0;
    double model_scale = 1.0;
};

[[nodiscard]] nlohmann::json to_json(const TrialDescriptor& descriptor);

}  // namespace s3d::service
