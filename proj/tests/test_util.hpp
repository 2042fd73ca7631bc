#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "srfot/core.hpp"

namespace testutil {

// Fresh scratch directory under the binary's SRFOT_TEST_TMP root.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const char* root = std::getenv("SRFOT_TEST_TMP");
    std::filesystem::path base = root ? root : std::filesystem::temp_directory_path() / "srfot";
    std::filesystem::path dir = base / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline srfot::TaskInstance mc_instance(std::string id, std::string question,
                                       std::vector<std::string> options, char gold,
                                       std::string context = "") {
    srfot::TaskInstance inst;
    inst.id = std::move(id);
    inst.question = std::move(question);
    inst.context = std::move(context);
    for (std::size_t i = 0; i < options.size(); ++i) {
        inst.options.push_back(srfot::Option{static_cast<char>('A' + i), std::move(options[i])});
    }
    inst.answer_space = srfot::AnswerSpace::MultipleChoice;
    inst.gold = srfot::AnswerKey::option(gold);
    return inst;
}

inline srfot::TaskInstance bool_instance(std::string id, std::string question, bool gold,
                                         std::string context = "") {
    srfot::TaskInstance inst;
    inst.id = std::move(id);
    inst.question = std::move(question);
    inst.context = std::move(context);
    inst.answer_space = srfot::AnswerSpace::Boolean;
    inst.gold = srfot::AnswerKey::boolean(gold);
    return inst;
}

}  // namespace testutil
