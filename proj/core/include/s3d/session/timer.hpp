#pragma once

#include <chrono>
#include <cstdint>

#include "s3d/session/config.hpp"

namespace s3d::session {

/// Per-trial timing rules. The countdown is advisory: expiry is signalled
/// once, and ratings are accepted both before and after it.
struct TimerPolicy {
    std::chrono::milliseconds countdown{0};
    bool enabled = true;
    bool rating_allowed_before_expiry = true;
    bool rating_allowed_after_expiry = true;
};

[[nodiscard]] TimerPolicy timer_contract(const ExperimentConfig& config);

class TrialTimer {
public:
    using Clock = std::chrono::steady_clock;

    TrialTimer(TimerPolicy policy, Clock::time_point start) : policy_(policy), start_(start) {}

    [[nodiscard]] std::chrono::milliseconds elapsed(Clock::time_point now) const;
    [[nodiscard]] std::chrono::milliseconds remaining(Clock::time_point now) const;
    [[nodiscard]] bool expired(Clock::time_point now) const;

    /// Returns true exactly once: on the first poll at or after expiry.
    bool poll_expiry(Clock::time_point now);

    /// Elapsed viewing time to store in Judgment::view_time_ms.
    [[nodiscard]] std::uint64_t view_time_ms(Clock::time_point now) const;

    [[nodiscard]] const TimerPolicy& policy() const noexcept { return policy_; }

private:
    TimerPolicy policy_;
    Clock::time_point start_;
    bool expiry_signalled_ = false;
};

}  // namespace s3d::session
