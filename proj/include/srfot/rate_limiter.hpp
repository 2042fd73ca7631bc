#pragma once

#include <chrono>
#include <deque>
#include <mutex>

namespace srfot {

// Sliding 60s window: at most `requests_per_minute` admissions in any window.
// 0 disables limiting.
class RateLimiter {
public:
    using Clock = std::chrono::steady_clock;

    explicit RateLimiter(int requests_per_minute) : rpm_(requests_per_minute) {}

    // Blocks until a slot is free, then records the admission.
    void acquire();

    // Core step, separated for deterministic testing: either records an
    // admission at `now` and returns zero, or returns the wait before the
    // next slot opens.
    Clock::duration admit_or_delay(Clock::time_point now);

private:
    int rpm_;
    std::mutex mu_;
    std::deque<Clock::time_point> window_;
};

}  // namespace srfot
