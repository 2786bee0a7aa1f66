#include <algorithm>
#include <cctype>

#include "pbp/classify.hpp"

namespace pbp {

namespace {

std::vector<std::string> words(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c >= 0x80) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

bool contains_run(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
    if (needle.empty() || needle.size() > hay.size()) return false;
    return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

}  // namespace

std::optional<ClassIndex> parse_answer(std::string_view raw, const TaskSpec& task) {
    const auto output = words(raw);
    const auto& label_words = task.label_words();

    for (std::size_t i = 0; i < label_words.size(); ++i) {
        if (output == words(label_words[i])) return static_cast<ClassIndex>(i);
    }
    std::optional<ClassIndex> found;
    for (std::size_t i = 0; i < label_words.size(); ++i) {
        if (contains_run(output, words(label_words[i]))) {
            if (found) return std::nullopt;
            found = static_cast<ClassIndex>(i);
        }
    }
    return found;
}

}  // namespace pbp
