#include "srfot/replay.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace srfot {

using nlohmann::json;

std::unique_ptr<ReplayProvider> ReplayProvider::load(const std::filesystem::path& script) {
    std::ifstream in(script);
    if (!in) {
        throw DataError(DataError::Code::FileMissing, "replay script missing: " + script.string());
    }
    auto provider = std::make_unique<ReplayProvider>();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& ex) {
            throw DataError(DataError::Code::SchemaMismatch,
                            script.string() + ":" + std::to_string(lineno) + ": " + ex.what());
        }
        Key key{j.at("instance_id").get<std::string>(), j.at("stage").get<std::string>(),
                j.at("sample_index").get<int>()};
        Entry entry;
        entry.text = j.value("text", "");
        entry.error = j.value("error", "");
        provider->entries_[std::move(key)] = std::move(entry);
    }
    return provider;
}

CompletionResult ReplayProvider::complete(const CompletionRequest& req) {
    calls_.fetch_add(1);
    auto instance_it = req.meta.find("instance_id");
    auto stage_it = req.meta.find("stage");
    if (instance_it == req.meta.end() || stage_it == req.meta.end()) {
        throw ProviderError(ProviderError::Code::MissingScriptEntry,
                            "replay lookup needs instance_id and stage metadata");
    }
    Key key{instance_it->second, stage_it->second, req.sample_index};
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        throw ProviderError(ProviderError::Code::MissingScriptEntry,
                            "no replay entry for (" + instance_it->second + ", " +
                                stage_it->second + ", " + std::to_string(req.sample_index) + ")");
    }
    if (!it->second.error.empty()) {
        auto code = it->second.error == "timeout" ? ProviderError::Code::Timeout
                                                  : ProviderError::Code::Transport;
        throw ProviderError(code, "scripted failure: " + it->second.error);
    }
    CompletionResult result;
    result.text = it->second.text;
    result.finish_reason = FinishReason::Stop;
    return result;
}

}  // namespace srfot
