#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <tuple>

#include "srfot/provider.hpp"

namespace srfot {

// Deterministic scripted completion source for offline runs and tests.
// Script: JSON Lines {instance_id, stage, sample_index, text} — an optional
// "error" field makes the entry fail instead of answering. Read-only after
// load; lookups key on the request's meta (instance_id, stage) + sample_index.
class ReplayProvider : public Provider {
public:
    static std::unique_ptr<ReplayProvider> load(const std::filesystem::path& script);

    CompletionResult complete(const CompletionRequest& req) override;

    std::size_t size() const { return entries_.size(); }
    std::size_t calls() const { return calls_.load(); }

private:
    struct Entry {
        std::string text;
        std::string error;  // empty = succeed
    };
    using Key = std::tuple<std::string, std::string, int>;

    std::map<Key, Entry> entries_;
    std::atomic<std::size_t> calls_{0};
};

}  // namespace srfot
