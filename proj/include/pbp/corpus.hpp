#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pbp/common.hpp"

namespace pbp {

using ClassIndex = int;

struct LabeledExample {
    std::string id;
    std::string text;
    ClassIndex label = 0;

    bool operator==(const LabeledExample&) const = default;
};

/// A classification task: ordered label space, the answer word for each
/// class, and the prompt family used to talk about it.
class TaskSpec {
public:
    /// Validates that `label_words` is a bijection onto [0, labels.size()) and
    /// that there are at least two classes. Throws DataError otherwise.
    TaskSpec(std::string name, std::vector<std::string> labels, std::vector<std::string> label_words,
             std::string template_family);

    const std::string& name() const { return name_; }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& template_family() const { return template_family_; }
    std::size_t num_classes() const { return labels_.size(); }

    /// Answer word for a class. Throws DataError when out of range.
    const std::string& render_label_word(ClassIndex label) const;

    /// Case-insensitive inverse of render_label_word; nullopt means Unmapped.
    std::optional<ClassIndex> word_to_label(std::string_view word) const;

    /// Label words in class-index order.
    const std::vector<std::string>& label_words() const { return label_words_; }

private:
    std::string name_;
    std::vector<std::string> labels_;
    std::vector<std::string> label_words_;
    std::string template_family_;
};

/// Reads the JSON task file: {name, labels, label_words: {word: index}, template_family}.
TaskSpec load_task_spec(const std::filesystem::path& path);

/// Built-in tasks: "irony2018", "emotion20", "financial", "binary-product".
TaskSpec builtin_task(std::string_view name);
std::vector<std::string> builtin_task_names();

enum class Split { train, test };

struct Dataset {
    TaskSpec task;
    std::vector<LabeledExample> train;
    std::vector<LabeledExample> test;

    const std::vector<LabeledExample>& split(Split s) const { return s == Split::train ? train : test; }
};

/// Loads one JSONL split (`id`, `text`, `label` per line) and validates it
/// against the task. Errors carry the file name and 1-based line number.
std::vector<LabeledExample> load_split(const std::filesystem::path& path, const TaskSpec& task);

/// Loads both splits and checks they are disjoint by id.
Dataset load_dataset(const std::filesystem::path& train_path, const std::filesystem::path& test_path, TaskSpec task);

/// Validates an in-memory dataset (labels in range, non-empty text, unique ids, disjoint splits).
void validate_dataset(const Dataset& dataset);

struct DemoSet {
    std::vector<LabeledExample> examples;
    bool include_labels = false;
    std::size_t n = 0;
    Seed seed = 0;
    bool stratified = false;
};

/// Seeded sampling without replacement. Unstratified draws n examples from the
/// split; stratified draws n per class and interleaves them in label order
/// (c0, c1, ..., c0, c1, ...). Throws DataError on n == 0 or too few examples.
DemoSet sample_demonstrations(const Dataset& dataset, Split split, std::size_t n, bool include_labels,
                              bool stratified, Seed seed);

}  // namespace pbp
