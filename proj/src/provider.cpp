#include "srfot/provider.hpp"

#include <openssl/evp.h>

#include <nlohmann/json.hpp>

namespace srfot {

using nlohmann::json;

void validate(const ProviderConfig& cfg) {
    if (cfg.timeout_s <= 0) throw ConfigError("provider timeout_s must be > 0");
    if (cfg.max_retries < 0) throw ConfigError("provider max_retries must be >= 0");
    if (cfg.requests_per_minute < 0) throw ConfigError("requests_per_minute must be >= 0");
    if (cfg.retry_base_ms <= 0) throw ConfigError("retry_base_ms must be > 0");
    if (cfg.model_id.empty()) throw ConfigError("provider model_id is empty");
}

std::string_view to_string(FinishReason r) {
    switch (r) {
        case FinishReason::Stop: return "stop";
        case FinishReason::Length: return "length";
        case FinishReason::Error: return "error";
    }
    return "error";
}

CacheKey CacheKey::compute(const std::string& model_id, const CompletionRequest& req) {
    json messages = json::array();
    for (const auto& m : req.messages) {
        messages.push_back(json{{"role", m.role}, {"content", m.content}});
    }
    // Canonical digest input: nlohmann objects serialize with sorted keys and
    // shortest round-trip doubles, so equal requests hash identically.
    json canon{
        {"model", model_id},
        {"messages", std::move(messages)},
        {"temperature", req.params.temperature},
        {"top_p", req.params.top_p},
        {"n_samples", req.params.n_samples},
        {"max_tokens", req.params.max_tokens},
        {"sample_index", req.sample_index},
    };
    const std::string payload = canon.dump();

    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digest_len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    EVP_DigestUpdate(ctx, payload.data(), payload.size());
    EVP_DigestFinal_ex(ctx, digest, &digest_len);
    EVP_MD_CTX_free(ctx);

    static constexpr char kHex[] = "0123456789abcdef";
    CacheKey key;
    key.hex_.reserve(digest_len * 2);
    for (unsigned int i = 0; i < digest_len; ++i) {
        key.hex_.push_back(kHex[digest[i] >> 4]);
        key.hex_.push_back(kHex[digest[i] & 0xf]);
    }
    return key;
}

}  // namespace srfot
