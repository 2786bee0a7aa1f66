#include "pbp/corpus.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <unordered_set>

#include "pbp/error.hpp"

namespace pbp {

using nlohmann::json;

TaskSpec::TaskSpec(std::string name, std::vector<std::string> labels, std::vector<std::string> label_words,
                   std::string template_family)
    : name_(std::move(name)),
      labels_(std::move(labels)),
      label_words_(std::move(label_words)),
      template_family_(std::move(template_family)) {
    if (labels_.size() < 2) throw DataError("task '" + name_ + "' needs at least two classes");
    if (label_words_.size() != labels_.size()) {
        throw DataError("task '" + name_ + "': label word map must cover exactly the label space");
    }
    std::set<std::string> seen;
    for (const auto& w : label_words_) {
        std::string key = to_lower(trim(w));
        if (key.empty()) throw DataError("task '" + name_ + "': empty label word");
        if (!seen.insert(key).second) throw DataError("task '" + name_ + "': duplicate label word '" + w + "'");
    }
}

const std::string& TaskSpec::render_label_word(ClassIndex label) const {
    if (label < 0 || static_cast<std::size_t>(label) >= label_words_.size()) {
        throw DataError("label " + std::to_string(label) + " out of range for task '" + name_ + "'");
    }
    return label_words_[static_cast<std::size_t>(label)];
}

std::optional<ClassIndex> TaskSpec::word_to_label(std::string_view word) const {
    const std::string key = to_lower(trim(word));
    for (std::size_t i = 0; i < label_words_.size(); ++i) {
        if (to_lower(label_words_[i]) == key) return static_cast<ClassIndex>(i);
    }
    return std::nullopt;
}

TaskSpec load_task_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open task file " + path.string());
    json j;
    try {
        j = json::parse(in);
        auto labels = j.at("labels").get<std::vector<std::string>>();
        std::vector<std::string> words(labels.size());
        std::vector<bool> covered(labels.size(), false);
        for (const auto& [word, idx] : j.at("label_words").items()) {
            int i = idx.get<int>();
            if (i < 0 || static_cast<std::size_t>(i) >= labels.size() || covered[static_cast<std::size_t>(i)]) {
                throw DataError("task file " + path.string() + ": label_words is not a bijection onto labels");
            }
            covered[static_cast<std::size_t>(i)] = true;
            words[static_cast<std::size_t>(i)] = word;
        }
        for (bool c : covered) {
            if (!c) throw DataError("task file " + path.string() + ": label_words does not cover every label");
        }
        return TaskSpec(j.at("name").get<std::string>(), std::move(labels), std::move(words),
                        j.at("template_family").get<std::string>());
    } catch (const json::exception& e) {
        throw DataError("task file " + path.string() + ": " + e.what());
    }
}

TaskSpec builtin_task(std::string_view name) {
    if (name == "irony2018") return TaskSpec("irony2018", {"not_ironic", "ironic"}, {"no", "yes"}, "irony");
    if (name == "emotion20") {
        return TaskSpec("emotion20", {"anger", "joy", "optimism", "sadness"}, {"anger", "joy", "optimism", "sadness"},
                        "emotion4");
    }
    if (name == "financial") {
        return TaskSpec("financial", {"negative", "positive", "neutral"}, {"negative", "positive", "neutral"},
                        "financial3");
    }
    if (name == "binary-product") {
        return TaskSpec("binary-product", {"not_a", "a"}, {"no", "yes"}, "binary-product");
    }
    throw DataError("unknown built-in task '" + std::string(name) + "'");
}

std::vector<std::string> builtin_task_names() { return {"irony2018", "emotion20", "financial", "binary-product"}; }

std::vector<LabeledExample> load_split(const std::filesystem::path& path, const TaskSpec& task) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file " + path.string());
    std::vector<LabeledExample> out;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string where = path.filename().string() + ":" + std::to_string(line_no);
        LabeledExample ex;
        try {
            json j = json::parse(line);
            ex.id = j.at("id").get<std::string>();
            ex.text = j.at("text").get<std::string>();
            ex.label = j.at("label").get<int>();
        } catch (const json::exception& e) {
            throw DataError("malformed record at " + where + ": " + e.what());
        }
        if (ex.label < 0 || static_cast<std::size_t>(ex.label) >= task.num_classes()) {
            throw DataError("record '" + ex.id + "' at " + where + " has unknown label " + std::to_string(ex.label) +
                            " for task '" + task.name() + "'");
        }
        if (trim(ex.text).empty()) throw DataError("record '" + ex.id + "' at " + where + " has empty text");
        if (!ids.insert(ex.id).second) throw DataError("duplicate id '" + ex.id + "' at " + where);
        out.push_back(std::move(ex));
    }
    return out;
}

void validate_dataset(const Dataset& dataset) {
    std::unordered_set<std::string> train_ids;
    auto check = [&](const std::vector<LabeledExample>& split, const char* name, std::unordered_set<std::string>& ids) {
        for (const auto& ex : split) {
            if (ex.label < 0 || static_cast<std::size_t>(ex.label) >= dataset.task.num_classes()) {
                throw DataError(std::string(name) + " record '" + ex.id + "' has unknown label " +
                                std::to_string(ex.label));
            }
            if (trim(ex.text).empty()) throw DataError(std::string(name) + " record '" + ex.id + "' has empty text");
            if (!ids.insert(ex.id).second) throw DataError(std::string(name) + " has duplicate id '" + ex.id + "'");
        }
    };
    check(dataset.train, "train", train_ids);
    std::unordered_set<std::string> test_ids;
    check(dataset.test, "test", test_ids);
    for (const auto& id : test_ids) {
        if (train_ids.count(id)) throw DataError("id '" + id + "' appears in both train and test splits");
    }
}

Dataset load_dataset(const std::filesystem::path& train_path, const std::filesystem::path& test_path, TaskSpec task) {
    auto train = load_split(train_path, task);
    auto test = load_split(test_path, task);
    Dataset ds{std::move(task), std::move(train), std::move(test)};
    validate_dataset(ds);
    return ds;
}

}  // namespace pbp
