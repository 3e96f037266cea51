#include "s3d/service/protocol.hpp"

#include <array>
#include <utility>

namespace s3d::service {

namespace {

constexpr std::array<std::pair<MessageType, std::string_view>, 9> kNames = {{
    {MessageType::Hello, "hello"},
    {MessageType::SessionInfo, "session_info"},
    {MessageType::TrialBegin, "trial_begin"},
    {MessageType::TimerExpiredAck, "timer_expired_ack"},
    {MessageType::RatingSubmit, "rating_submit"},
    {MessageType::TrialAck, "trial_ack"},
    {MessageType::SessionComplete, "session_complete"},
    {MessageType::Error, "error"},
    {MessageType::Telemetry, "telemetry"},
}};

}  // namespace

std::string_view to_string(MessageType type) noexcept {
    for (const auto& [t, name] : kNames) {
        if (t == type) return name;
    }
    return "unknown";
}

std::optional<MessageType> message_type_from_string(std::string_view name) noexcept {
    for (const auto& [t, n] : kNames) {
        if (n == name) return t;
    }
    return std::nullopt;
}

std::string encode(const WireMessage& message) {
    const nlohmann::json j = {
        {"type", to_string(message.type)},
        {"protocol_version", message.protocol_version},
        {"payload", message.payload},
    };
    return j.dump();
}

WireMessage decode(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
        throw ProtocolError(wire_error::kMalformedMessage, "frame is not valid JSON");
    }
    if (!j.is_object()) throw ProtocolError(wire_error::kMalformedMessage, "frame must be a JSON object");
    if (!j.contains("protocol_version") || !j.at("protocol_version").is_number_integer()) {
        throw ProtocolError(wire_error::kMalformedMessage, "frame lacks an integer protocol_version");
    }
    const int version = j.at("protocol_version").get<int>();
    if (version != kProtocolVersion) {
        throw ProtocolError(wire_error::kUnsupportedProtocolVersion,
                            "protocol_version " + std::to_string(version) + " is not supported; expected " +
                                std::to_string(kProtocolVersion));
    }
    if (!j.contains("type") || !j.at("type").is_string()) {
        throw ProtocolError(wire_error::kMalformedMessage, "frame lacks a string type");
    }
    const auto type = message_type_from_string(j.at("type").get<std::string>());
    if (!type) throw ProtocolError(wire_error::kUnknownMessageType, "unknown message type '" + j.at("type").get<std::string>() + "'");

    WireMessage message;
    message.type = *type;
    message.protocol_version = version;
    if (j.contains("payload") && !j.at("payload").is_null()) {
        if (!j.at("payload").is_object()) throw ProtocolError(wire_error::kMalformedMessage, "payload must be an object");
        message.payload = j.at("payload");
    }
    return message;
}

WireMessage make_error(std::string_view code, const std::string& message, std::optional<std::size_t> trial_index) {
    WireMessage error;
    error.type = MessageType::Error;
    error.payload = {{"code", code}, {"message", message}};
    if (trial_index) error.payload["trial_index"] = *trial_index;
    return error;
}

nlohmann::json to_json(const TrialDescriptor& d) {
    return {
        {"trial_index", d.trial_index},
        {"trial_count", d.trial_count},
        {"reference_asset_url", d.reference_asset_url},
        {"impaired_asset_url", d.impaired_asset_url},
        {"display_mode", session::to_string(d.display_mode)},
        {"rendering_mode", session::to_string(d.rendering_mode)},
        {"background", {{"preset", session::background_to_json(d.background)}, {"rgb", d.background.rgb}}},
        {"viewing_time_s", d.viewing_time_s},
        {"timer_enabled", d.timer_enabled},
        {"rating_categories", d.rating_categories},
        {"point_size_px", d.point_size_px},
        {"model_scale", d.model_scale},
    };
}

}  // namespace s3d::service
