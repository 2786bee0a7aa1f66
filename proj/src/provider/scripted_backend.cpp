#include "pbp/error.hpp"
#include "pbp/provider.hpp"

namespace pbp {

ScriptedBackend::ScriptedBackend(std::vector<ScriptRule> rules, std::string fallback)
    : rules_(std::move(rules)), fallback_(std::move(fallback)) {
    compiled_.reserve(rules_.size());
    for (const auto& r : rules_) {
        if (r.match == ScriptRule::Match::regex) {
            try {
                compiled_.emplace_back(std::regex(r.pattern, std::regex::ECMAScript));
            } catch (const std::regex_error& e) {
                throw ConfigError("invalid script regex '" + r.pattern + "': " + e.what());
            }
        } else {
            compiled_.emplace_back(std::nullopt);
        }
    }
}

BackendReply ScriptedBackend::send(const AgentSpec&, const CompletionRequest& request) {
    for (std::size_t i = 0; i < rules_.size(); ++i) {
        const auto& r = rules_[i];
        bool hit = r.match == ScriptRule::Match::contains ? request.prompt.find(r.pattern) != std::string::npos
                                                          : std::regex_search(request.prompt, *compiled_[i]);
        if (hit) return {r.response, std::nullopt};
    }
    return {fallback_, std::nullopt};
}

}  // namespace pbp
