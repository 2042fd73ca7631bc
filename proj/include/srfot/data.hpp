#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "srfot/core.hpp"

namespace srfot {

struct DatasetDescriptor {
    std::string id;     // scienceqa | strategyqa | boolq
    std::string split;  // test | train | dev
    std::filesystem::path source_path;
    std::optional<long> expected_count;
    bool strict = false;  // strict: a count mismatch throws instead of warning
};

// Paper-replication defaults: split and instance count per dataset.
std::string paper_split(const std::string& dataset_id);
long paper_expected_count(const std::string& dataset_id);

// Always filled in by the loaders; a count mismatch is never silent.
struct LoadReport {
    std::string dataset_id;
    std::size_t loaded = 0;
    std::optional<long> expected;
    std::size_t skipped_image = 0;          // scienceqa: multimodal items dropped
    std::size_t skipped_other_split = 0;
    std::size_t label_overflow = 0;         // options beyond label 'E'
    bool count_matches() const { return !expected || static_cast<long>(loaded) == *expected; }
    long delta() const { return expected ? static_cast<long>(loaded) - *expected : 0; }
    std::string summary() const;
};

// Official-distribution loaders. Every returned instance has passed
// validate_instance; ids are unique; ordering is stable for a given file.
std::vector<TaskInstance> load_scienceqa(const DatasetDescriptor& desc, LoadReport* report = nullptr);
std::vector<TaskInstance> load_strategyqa(const DatasetDescriptor& desc, LoadReport* report = nullptr);
std::vector<TaskInstance> load_boolq(const DatasetDescriptor& desc, LoadReport* report = nullptr);
std::vector<TaskInstance> load_dataset(const DatasetDescriptor& desc, LoadReport* report = nullptr);

// Normalized JSON Lines schema the engine runs on:
// {id, question, context, options:[{label,text}], answer_space, gold, subject, grade}
void write_normalized(const std::vector<TaskInstance>& instances,
                      const std::filesystem::path& out);
std::vector<TaskInstance> load_normalized(const std::filesystem::path& path);

std::string instance_to_jsonl(const TaskInstance& inst);
TaskInstance instance_from_jsonl(const std::string& line);

}  // namespace srfot
