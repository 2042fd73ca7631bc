#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "srfot/provider.hpp"

namespace srfot {

// Content-addressed completion store: <root>/<first2 hex>/<digest>.txt holds
// the completion text, a .json sidecar holds finish reason, usage and model.
// Writes go through a temp file and an atomic rename, so concurrent workers
// may race on the same key without corrupting entries.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path root);

    std::optional<CompletionResult> lookup(const CacheKey& key) const;
    void store(const CacheKey& key, const CompletionResult& result,
               const std::string& model_id) const;

    struct Stats {
        std::size_t entries = 0;
        std::uintmax_t bytes = 0;
    };
    Stats stats() const;
    std::size_t clear() const;  // returns entries removed

    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path entry_dir(const CacheKey& key) const;

    std::filesystem::path root_;
};

}  // namespace srfot
