#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "srfot/core.hpp"

namespace srfot {

struct ProviderConfig {
    std::string endpoint_url;  // base URL, e.g. https://api.openai.com/v1
    std::string model_id;
    std::string api_key_env = "OPENAI_API_KEY";  // env var NAME; never the secret itself
    int timeout_s = 60;
    int max_retries = 3;
    int requests_per_minute = 0;  // 0 = unlimited
    int retry_base_ms = 1000;     // exponential backoff base, factor 2, jittered
    bool temperature_only = false;  // DeepSeek-style: drop top_p from requests
    std::filesystem::path cache_dir = "cache";
};

// Throws ConfigError when timeouts/retry budgets are out of range.
void validate(const ProviderConfig& cfg);

struct Message {
    std::string role;  // system | user | assistant
    std::string content;

    bool operator==(const Message&) const = default;
};

struct CompletionRequest {
    std::vector<Message> messages;
    SamplingParams params;
    int sample_index = 0;
    // Routing metadata (instance_id, stage); keys the replay provider and
    // transcript records, not part of the wire payload.
    std::map<std::string, std::string> meta;
};

enum class FinishReason { Stop, Length, Error };

std::string_view to_string(FinishReason r);

struct CompletionResult {
    std::string text;
    FinishReason finish_reason = FinishReason::Stop;
    int prompt_tokens = 0;
    int completion_tokens = 0;
    bool cached = false;
};

// 256-bit content hash over (model_id, params, messages, sample_index).
class CacheKey {
public:
    static CacheKey compute(const std::string& model_id, const CompletionRequest& req);

    const std::string& hex() const { return hex_; }

    bool operator==(const CacheKey&) const = default;

private:
    std::string hex_;  // 64 lowercase hex chars
};

class Provider {
public:
    virtual ~Provider() = default;
    virtual CompletionResult complete(const CompletionRequest& req) = 0;
};

}  // namespace srfot
