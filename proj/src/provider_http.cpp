#include "srfot/provider_http.hpp"

#include <chrono>
#include <cstdlib>
#include <random>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace srfot {

using nlohmann::json;

namespace {

struct SplitUrl {
    std::string host;  // scheme://host[:port]
    std::string path;  // leading path prefix, possibly empty
};

SplitUrl split_endpoint(const std::string& url) {
    std::size_t scheme = url.find("://");
    if (scheme == std::string::npos) {
        throw ConfigError("endpoint_url must start with http:// or https://: " + url);
    }
    std::size_t slash = url.find('/', scheme + 3);
    SplitUrl out;
    if (slash == std::string::npos) {
        out.host = url;
    } else {
        out.host = url.substr(0, slash);
        out.path = url.substr(slash);
        while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
    }
    return out;
}

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::chrono::milliseconds backoff_delay(int attempt, int base_ms) {
    double factor = static_cast<double>(1u << std::min(attempt, 16));
    double full = static_cast<double>(base_ms) * factor;
    full = std::min(full, 60'000.0);
    thread_local std::mt19937 rng{std::random_device{}()};
    std::uniform_real_distribution<double> jitter(0.5, 1.0);
    return std::chrono::milliseconds(static_cast<long>(full * jitter(rng)));
}

bool transport_is_timeout(httplib::Error e) {
    return e == httplib::Error::ConnectionTimeout || e == httplib::Error::Read ||
           e == httplib::Error::Write;
}

CompletionResult parse_completion(const std::string& body) {
    json payload;
    try {
        payload = json::parse(body);
    } catch (const json::exception& ex) {
        throw ProviderError(ProviderError::Code::MalformedResponse,
                            std::string("unparseable completion response: ") + ex.what());
    }
    if (!payload.contains("choices") || !payload.at("choices").is_array() ||
        payload.at("choices").empty()) {
        throw ProviderError(ProviderError::Code::MalformedResponse,
                            "completion response has no choices");
    }
    const json& choice = payload.at("choices").at(0);
    if (!choice.contains("message") || !choice.at("message").contains("content") ||
        !choice.at("message").at("content").is_string()) {
        throw ProviderError(ProviderError::Code::MalformedResponse,
                            "completion response missing message content");
    }
    CompletionResult result;
    result.text = choice.at("message").at("content").get<std::string>();
    std::string reason = choice.value("finish_reason", "stop");
    if (reason == "stop") {
        result.finish_reason = FinishReason::Stop;
    } else if (reason == "length") {
        result.finish_reason = FinishReason::Length;
    } else {
        result.finish_reason = FinishReason::Error;
    }
    if (result.finish_reason == FinishReason::Stop && result.text.empty()) {
        throw ProviderError(ProviderError::Code::MalformedResponse,
                            "finish_reason=stop with empty completion text");
    }
    if (payload.contains("usage") && payload.at("usage").is_object()) {
        result.prompt_tokens = payload.at("usage").value("prompt_tokens", 0);
        result.completion_tokens = payload.at("usage").value("completion_tokens", 0);
    }
    return result;
}

}  // namespace

HttpProvider::HttpProvider(ProviderConfig cfg)
    : cfg_(std::move(cfg)), cache_(cfg_.cache_dir), limiter_(cfg_.requests_per_minute) {
    validate(cfg_);
}

HttpProvider::~HttpProvider() = default;

std::string HttpProvider::api_key() const {
    if (cfg_.api_key_env.empty()) return {};
    const char* value = std::getenv(cfg_.api_key_env.c_str());
    if (!value || !*value) {
        throw ProviderError(ProviderError::Code::AuthError,
                            "environment variable " + cfg_.api_key_env + " is not set");
    }
    return value;
}

std::string HttpProvider::request_body(const CompletionRequest& req) const {
    json messages = json::array();
    for (const auto& m : req.messages) {
        messages.push_back(json{{"role", m.role}, {"content", m.content}});
    }
    json body{
        {"model", cfg_.model_id},
        {"messages", std::move(messages)},
        {"temperature", req.params.temperature},
        {"max_tokens", req.params.max_tokens},
    };
    if (!cfg_.temperature_only) body["top_p"] = req.params.top_p;
    return body.dump();
}

CompletionResult HttpProvider::complete(const CompletionRequest& req) {
    if (req.messages.empty()) throw ConfigError("completion request has no messages");
    bool has_user = false;
    for (const auto& m : req.messages) {
        if (m.content.empty()) throw ConfigError("completion request has empty message content");
        has_user = has_user || m.role == "user";
    }
    if (!has_user) throw ConfigError("completion request needs at least one user message");

    CacheKey key = CacheKey::compute(cfg_.model_id, req);
    if (auto hit = cache_.lookup(key)) {
        cache_hits_.fetch_add(1);
        return *hit;
    }
    CompletionResult result = perform(req);
    cache_.store(key, result, cfg_.model_id);
    return result;
}

CompletionResult HttpProvider::perform(const CompletionRequest& req) {
    const SplitUrl url = split_endpoint(cfg_.endpoint_url);
    std::string path = url.path;
    if (!ends_with(path, "/chat/completions")) path += "/chat/completions";

    const std::string body = request_body(req);
    const std::string key = api_key();

    httplib::Client client(url.host);
    client.set_connection_timeout(cfg_.timeout_s, 0);
    client.set_read_timeout(cfg_.timeout_s, 0);
    client.set_write_timeout(cfg_.timeout_s, 0);
    httplib::Headers headers;
    if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

    ProviderError last_error(ProviderError::Code::Transport, "no attempt made");
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(backoff_delay(attempt - 1, cfg_.retry_base_ms));
        limiter_.acquire();
        http_calls_.fetch_add(1);
        httplib::Result res = client.Post(path, headers, body, "application/json");
        if (!res) {
            auto code = transport_is_timeout(res.error()) ? ProviderError::Code::Timeout
                                                          : ProviderError::Code::Transport;
            last_error = ProviderError(code, "transport failure: " + httplib::to_string(res.error()));
            continue;
        }
        if (res->status == 401 || res->status == 403) {
            throw ProviderError(ProviderError::Code::AuthError,
                                "authentication rejected (HTTP " + std::to_string(res->status) + ")");
        }
        if (res->status == 429) {
            last_error = ProviderError(ProviderError::Code::RateLimited,
                                       "rate limited by server (HTTP 429)");
            continue;
        }
        if (res->status >= 500 || res->status == 408) {
            last_error = ProviderError(ProviderError::Code::Transport,
                                       "server error (HTTP " + std::to_string(res->status) + ")");
            continue;
        }
        if (res->status != 200) {
            throw ProviderError(ProviderError::Code::Transport,
                                "unexpected HTTP " + std::to_string(res->status) + ": " +
                                    res->body.substr(0, 200));
        }
        return parse_completion(res->body);
    }
    throw last_error;
}

HttpProvider::Stats HttpProvider::stats() const {
    return Stats{http_calls_.load(), cache_hits_.load()};
}

}  // namespace srfot
