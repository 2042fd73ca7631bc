#include "srfot/rate_limiter.hpp"

#include <thread>

namespace srfot {

void RateLimiter::acquire() {
    while (true) {
        Clock::duration delay = admit_or_delay(Clock::now());
        if (delay == Clock::duration::zero()) return;
        std::this_thread::sleep_for(delay);
    }
}

RateLimiter::Clock::duration RateLimiter::admit_or_delay(Clock::time_point now) {
    if (rpm_ <= 0) return Clock::duration::zero();
    constexpr auto kWindow = std::chrono::seconds(60);
    std::lock_guard lock(mu_);
    while (!window_.empty() && now - window_.front() >= kWindow) window_.pop_front();
    if (window_.size() < static_cast<std::size_t>(rpm_)) {
        window_.push_back(now);
        return Clock::duration::zero();
    }
    return window_.front() + kWindow - now;
}

}  // namespace srfot
