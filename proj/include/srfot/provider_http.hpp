#pragma once

#include <atomic>
#include <memory>
#include <optional>

#include "srfot/cache.hpp"
#include "srfot/provider.hpp"
#include "srfot/rate_limiter.hpp"

namespace srfot {

// OpenAI-compatible chat-completions client (POST, bearer auth, messages
// array) with exponential-backoff retry, a shared rate limiter and a
// write-through response cache. Safe to share across workers.
class HttpProvider : public Provider {
public:
    explicit HttpProvider(ProviderConfig cfg);
    ~HttpProvider() override;

    CompletionResult complete(const CompletionRequest& req) override;

    struct Stats {
        std::size_t http_calls = 0;
        std::size_t cache_hits = 0;
    };
    Stats stats() const;

    const ResponseCache& cache() const { return cache_; }

private:
    CompletionResult perform(const CompletionRequest& req);
    std::string request_body(const CompletionRequest& req) const;
    std::string api_key() const;

    ProviderConfig cfg_;
    ResponseCache cache_;
    RateLimiter limiter_;
    std::atomic<std::size_t> http_calls_{0};
    std::atomic<std::size_t> cache_hits_{0};
};

}  // namespace srfot
