#include "srfot/cache.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "srfot/error.hpp"

namespace srfot {

using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void atomic_write(const std::filesystem::path& target, const std::string& content) {
    static std::atomic<unsigned> counter{0};
    std::ostringstream suffix;
    suffix << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id()) << "."
           << counter.fetch_add(1);
    std::filesystem::path tmp = target;
    tmp += suffix.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

FinishReason finish_reason_from_string(const std::string& s) {
    if (s == "stop") return FinishReason::Stop;
    if (s == "length") return FinishReason::Length;
    return FinishReason::Error;
}

}  // namespace

ResponseCache::ResponseCache(std::filesystem::path root) : root_(std::move(root)) {}

std::filesystem::path ResponseCache::entry_dir(const CacheKey& key) const {
    return root_ / key.hex().substr(0, 2);
}

std::optional<CompletionResult> ResponseCache::lookup(const CacheKey& key) const {
    std::filesystem::path dir = entry_dir(key);
    std::filesystem::path text_path = dir / (key.hex() + ".txt");
    std::filesystem::path meta_path = dir / (key.hex() + ".json");
    std::error_code ec;
    if (!std::filesystem::exists(text_path, ec) || !std::filesystem::exists(meta_path, ec)) {
        return std::nullopt;
    }
    CompletionResult result;
    result.text = slurp(text_path);
    try {
        json meta = json::parse(slurp(meta_path));
        result.finish_reason = finish_reason_from_string(meta.value("finish_reason", "stop"));
        result.prompt_tokens = meta.value("prompt_tokens", 0);
        result.completion_tokens = meta.value("completion_tokens", 0);
    } catch (const json::exception&) {
        return std::nullopt;  // torn or stale sidecar: treat as a miss
    }
    result.cached = true;
    return result;
}

void ResponseCache::store(const CacheKey& key, const CompletionResult& result,
                          const std::string& model_id) const {
    std::filesystem::path dir = entry_dir(key);
    std::filesystem::create_directories(dir);
    json meta{
        {"model", model_id},
        {"finish_reason", std::string(to_string(result.finish_reason))},
        {"prompt_tokens", result.prompt_tokens},
        {"completion_tokens", result.completion_tokens},
    };
    atomic_write(dir / (key.hex() + ".txt"), result.text);
    atomic_write(dir / (key.hex() + ".json"), meta.dump());
}

ResponseCache::Stats ResponseCache::stats() const {
    Stats s;
    std::error_code ec;
    if (!std::filesystem::exists(root_, ec)) return s;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root_, ec)) {
        if (!entry.is_regular_file()) continue;
        if (entry.path().extension() == ".txt") ++s.entries;
        s.bytes += entry.file_size();
    }
    return s;
}

std::size_t ResponseCache::clear() const {
    Stats before = stats();
    std::error_code ec;
    std::filesystem::remove_all(root_, ec);
    return before.entries;
}

}  // namespace srfot
