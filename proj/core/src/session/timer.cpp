#include "s3d/session/timer.hpp"

#include <algorithm>
#include <cmath>

namespace s3d::session {

TimerPolicy timer_contract(const ExperimentConfig& config) {
    TimerPolicy policy;
    policy.countdown = std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(config.viewing_time_s * 1000.0)));
    policy.enabled = config.timer_enabled;
    return policy;
}

std::chrono::milliseconds TrialTimer::elapsed(Clock::time_point now) const {
    return std::max(std::chrono::milliseconds{0}, std::chrono::duration_cast<std::chrono::milliseconds>(now - start_));
}

std::chrono::milliseconds TrialTimer::remaining(Clock::time_point now) const {
    return std::max(std::chrono::milliseconds{0}, policy_.countdown - elapsed(now));
}

bool TrialTimer::expired(Clock::time_point now) const { return policy_.enabled && elapsed(now) >= policy_.countdown; }

bool TrialTimer::poll_expiry(Clock::time_point now) {
    if (expiry_signalled_ || !expired(now)) return false;
    expiry_signalled_ = true;
    return true;
}

std::uint64_t TrialTimer::view_time_ms(Clock::time_point now) const {
    return static_cast<std::uint64_t>(elapsed(now).count());
}

}  // namespace s3d::session
