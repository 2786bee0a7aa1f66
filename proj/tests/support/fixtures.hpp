#pragma once

#include <stdlib.h>

#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "pbp/corpus.hpp"
#include "pbp/provider.hpp"

namespace pbp::testing {

inline const std::filesystem::path kDataDir = PBP_TEST_DATA_DIR;

class TempDir {
public:
    TempDir() {
        std::string tmpl = (std::filesystem::temp_directory_path() / "pbp-test-XXXXXX").string();
        if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Every example text has exactly `words` words; ids are "<prefix>-<class>-<i>".
inline std::vector<LabeledExample> synthetic_examples(const TaskSpec& task, std::size_t per_class,
                                                      const std::string& prefix, std::size_t words = 6) {
    std::vector<LabeledExample> out;
    for (std::size_t i = 0; i < per_class; ++i) {
        for (std::size_t c = 0; c < task.num_classes(); ++c) {
            std::string text = task.labels()[c];
            for (std::size_t w = 1; w < words; ++w) text += " w" + std::to_string((i * 7 + w) % 97);
            out.push_back({prefix + "-" + std::to_string(c) + "-" + std::to_string(i), text, static_cast<ClassIndex>(c)});
        }
    }
    return out;
}

inline Dataset synthetic_dataset(const std::string& task_name, std::size_t train_per_class,
                                 std::size_t test_per_class, std::size_t words = 6) {
    TaskSpec task = builtin_task(task_name);
    auto train = synthetic_examples(task, train_per_class, "tr", words);
    auto test = synthetic_examples(task, test_per_class, "te", words);
    return Dataset{std::move(task), std::move(train), std::move(test)};
}

inline AgentSpec scripted_agent(const std::string& id, std::set<AgentRole> roles, std::size_t max_input_tokens = 100000) {
    AgentSpec a;
    a.agent_id = id;
    a.backend = BackendType::scripted;
    a.model_name = id + "-model";
    a.roles = std::move(roles);
    a.max_input_tokens = max_input_tokens;
    return a;
}

inline void add_scripted(Provider& p, const std::string& id, std::set<AgentRole> roles, std::vector<ScriptRule> rules,
                         std::string fallback, std::size_t max_input_tokens = 100000) {
    p.add_agent(scripted_agent(id, std::move(roles), max_input_tokens));
    p.register_script(id, std::move(rules), std::move(fallback));
}

inline ScriptRule contains(std::string pattern, std::string response) {
    return {ScriptRule::Match::contains, std::move(pattern), std::move(response)};
}

inline ScriptRule regex(std::string pattern, std::string response) {
    return {ScriptRule::Match::regex, std::move(pattern), std::move(response)};
}

/// Copies the toy example run (config, splits, principle) into `dir`.
inline void copy_toy_run(const std::filesystem::path& dir) {
    for (const char* f : {"config.json", "train.jsonl", "test.jsonl", "principle.txt"}) {
        std::filesystem::copy_file(kDataDir / "toy" / f, dir / f, std::filesystem::copy_options::overwrite_existing);
    }
}

}  // namespace pbp::testing
