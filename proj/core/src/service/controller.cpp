#include "s3d/service/controller.hpp"

#include <utility>

#include "s3d/session/error.hpp"

namespace s3d::service {

namespace {

void push(Reply& reply, MessageType type, nlohmann::json payload) {
    WireMessage message;
    message.type = type;
    message.payload = std::move(payload);
    reply.frames.push_back(encode(message));
}

void push_error(Reply& reply, std::string_view code, const std::string& message,
                std::optional<std::size_t> trial_index = std::nullopt) {
    reply.frames.push_back(encode(make_error(code, message, trial_index)));
}

std::optional<std::size_t> index_field(const nlohmann::json& payload) {
    const auto it = payload.find("trial_index");
    if (it == payload.end() || !it->is_number_unsigned()) return std::nullopt;
    return it->get<std::size_t>();
}

}  // namespace

SessionController::SessionController(session::Session session, session::ExperimentConfig config,
                                     const AssetCatalog& catalog, Clocks clocks)
    : session_(std::move(session)),
      config_(std::move(config)),
      catalog_(catalog),
      clocks_(std::move(clocks)),
      policy_(session::timer_contract(config_)) {}

Reply SessionController::connect(ConnectionId connection) {
    Reply reply;
    if (active_ && *active_ != connection) {
        push_error(reply, wire_error::kSessionOccupied, "session occupied");
        reply.close = true;
        return reply;
    }
    active_ = connection;
    greeted_ = false;
    return reply;
}

void SessionController::disconnect(ConnectionId connection) {
    if (active_ == connection) {
        active_.reset();
        greeted_ = false;
    }
}

Reply SessionController::receive(ConnectionId connection, std::string_view frame) {
    Reply reply;
    if (active_ != connection) {
        push_error(reply, wire_error::kSessionOccupied, "session occupied");
        reply.close = true;
        return reply;
    }
    WireMessage message;
    try {
        message = decode(frame);
    } catch (const ProtocolError& e) {
        push_error(reply, e.code(), e.what());
        return reply;
    }

    switch (message.type) {
        case MessageType::Hello:
            handle_hello(reply);
            break;
        case MessageType::RatingSubmit:
            if (!greeted_) {
                push_error(reply, wire_error::kHelloRequired, "send hello before rating_submit");
                break;
            }
            handle_rating(reply, message.payload);
            break;
        case MessageType::TimerExpiredAck:
            if (!greeted_) {
                push_error(reply, wire_error::kHelloRequired, "send hello before timer_expired_ack");
                break;
            }
            handle_timer_ack(reply, message.payload);
            break;
        case MessageType::Telemetry:
            break;
        default:
            push_error(reply, wire_error::kUnexpectedMessage,
                       "'" + std::string(to_string(message.type)) + "' is not accepted from clients");
            break;
    }
    return reply;
}

nlohmann::json SessionController::session_info() const {
    const auto& s = session_.state();
    return {
        {"participant_name", s.participant_name},
        {"trial_count", s.playlist.size()},
        {"completed_count", s.completed.size()},
        {"rating_categories", s.rating_categories},
        {"config_digest", s.playlist.config_digest},
        {"halted", session_.halted()},
    };
}

TrialDescriptor SessionController::describe(std::size_t trial_index) const {
    const auto& trial = session_.state().playlist.trials.at(trial_index);
    TrialDescriptor d;
    d.trial_index = trial_index;
    d.trial_count = session_.state().playlist.size();
    d.reference_asset_url = catalog_.url_for(trial.reference_id);
    d.impaired_asset_url = catalog_.url_for(trial.stimulus_id);
    d.display_mode = config_.display_mode;
    d.rendering_mode = config_.rendering_mode;
    d.background = config_.background;
    d.viewing_time_s = config_.viewing_time_s;
    d.timer_enabled = config_.timer_enabled;
    d.rating_categories = config_.rating_categories;
    d.point_size_px = config_.point_size_px;
    d.model_scale = config_.model_scale;
    return d;
}

void SessionController::push_current(Reply& reply) {
    const auto next = session_.state().next_trial();
    if (!next) {
        push(reply, MessageType::SessionComplete,
             {{"trial_count", session_.state().playlist.size()},
              {"journal_path", session_.state().journal_path.string()}});
        return;
    }
    if (!timer_ || timer_->first != *next) timer_.emplace(*next, session::TrialTimer(policy_, clocks_.steady()));
    push(reply, MessageType::TrialBegin, to_json(describe(*next)));
}

void SessionController::handle_hello(Reply& reply) {
    greeted_ = true;
    push(reply, MessageType::SessionInfo, session_info());
    if (session_.halted()) {
        push_error(reply, wire_error::kSessionHalted, "the journal could not be written; the session is halted");
        return;
    }
    push_current(reply);
}

void SessionController::handle_rating(Reply& reply, const nlohmann::json& payload) {
    const auto index = index_field(payload);
    const auto score_it = payload.find("score");
    if (!index || score_it == payload.end() || !score_it->is_number_integer()) {
        push_error(reply, wire_error::kMalformedMessage,
                   "rating_submit needs a non-negative integer trial_index and an integer score");
        return;
    }
    if (session_.halted()) {
        push_error(reply, wire_error::kSessionHalted, "the journal could not be written; the session is halted", index);
        return;
    }
    const int score = score_it->get<int>();
    const auto& state = session_.state();

    // A resubmission of an already journaled rating is answered again, so a
    // client that lost the ack can continue; a different score is refused.
    if (state.completed.count(*index) != 0 && state.judgments.at(*index).score == score) {
        push(reply, MessageType::TrialAck, {{"trial_index", *index}, {"score", score}, {"duplicate", true}});
        push_current(reply);
        return;
    }

    session::Judgment judgment;
    judgment.trial_index = *index;
    judgment.score = score;
    judgment.participant_name = state.participant_name;
    judgment.wall_clock = clocks_.wall();
    if (*index < state.playlist.size()) judgment.stimulus_id = state.playlist.trials[*index].stimulus_id;
    if (const auto it = payload.find("stimulus_id"); it != payload.end() && it->is_string()) {
        judgment.stimulus_id = it->get<std::string>();
    }
    if (const auto it = payload.find("view_time_ms"); it != payload.end() && it->is_number_unsigned()) {
        judgment.view_time_ms = it->get<std::uint64_t>();
    } else if (timer_ && timer_->first == *index) {
        judgment.view_time_ms = timer_->second.view_time_ms(clocks_.steady());
    }

    try {
        session_.record(judgment);
    } catch (const session::SessionError& e) {
        push_error(reply, session::to_string(e.code()), e.what(), index);
        return;
    }
    push(reply, MessageType::TrialAck, {{"trial_index", *index}, {"score", score}, {"duplicate", false}});
    push_current(reply);
}

void SessionController::handle_timer_ack(Reply& reply, const nlohmann::json& payload) {
    const auto index = index_field(payload);
    if (!index) {
        push_error(reply, wire_error::kMalformedMessage, "timer_expired_ack needs a non-negative integer trial_index");
        return;
    }
    const auto next = session_.state().next_trial();
    if (!next || *next != *index) {
        push_error(reply, std::string(session::to_string(session::SessionErrc::OutOfOrderTrial)),
                   "timer_expired_ack for trial " + std::to_string(*index) + " which is not on screen", index);
        return;
    }
    if (expired_trials_.empty() || expired_trials_.back() != *index) expired_trials_.push_back(*index);
}

}  // namespace s3d::service
