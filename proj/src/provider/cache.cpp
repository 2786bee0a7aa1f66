#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>
#include <thread>

#include "pbp/error.hpp"
#include "pbp/provider.hpp"

namespace pbp {

using nlohmann::json;

namespace {

json params_json(const SamplingParams& p) {
    json j = {{"temperature", p.temperature}, {"top_p", p.top_p}, {"max_output_tokens", p.max_output_tokens}};
    j["seed"] = p.seed ? json(*p.seed) : json(nullptr);
    return j;
}

}  // namespace

std::string cache_key(const AgentSpec& agent, const CompletionRequest& request) {
    json j = {
        {"agent_id", request.agent_id},
        {"model", agent.model_name},
        {"prompt", request.prompt},
        {"params", params_json(request.params)},
    };
    return sha256_hex(j.dump());
}

ResponseCache::ResponseCache(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {
    if (dir_) std::filesystem::create_directories(*dir_);
}

std::optional<BackendReply> ResponseCache::get(const std::string& digest) const {
    if (!dir_) {
        std::lock_guard lock(mu_);
        auto it = memory_.find(digest);
        if (it == memory_.end()) return std::nullopt;
        return it->second;
    }
    std::ifstream in(*dir_ / (digest + ".json"));
    if (!in) return std::nullopt;
    try {
        json j = json::parse(in);
        const auto& r = j.at("response");
        BackendReply reply{r.at("text").get<std::string>(), std::nullopt};
        if (r.contains("input_tokens") && !r["input_tokens"].is_null()) {
            reply.input_tokens = r["input_tokens"].get<std::size_t>();
        }
        return reply;
    } catch (const json::exception&) {
        // A torn or foreign file is treated as a miss and rewritten on the next put.
        return std::nullopt;
    }
}

void ResponseCache::put(const std::string& digest, const AgentSpec& agent, const CompletionRequest& request,
                        const BackendReply& reply) {
    if (!dir_) {
        std::lock_guard lock(mu_);
        memory_[digest] = reply;
        return;
    }
    json j;
    j["digest"] = digest;
    j["request"] = {{"agent_id", request.agent_id},
                    {"model", agent.model_name},
                    {"prompt", request.prompt},
                    {"params", params_json(request.params)}};
    j["response"] = {{"text", reply.text}};
    j["response"]["input_tokens"] = reply.input_tokens ? json(*reply.input_tokens) : json(nullptr);

    std::ostringstream tmp_name;
    tmp_name << digest << ".json.tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id()) << '.'
             << std::random_device{}();
    auto tmp = *dir_ / tmp_name.str();
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw ProviderError("cannot write cache entry " + tmp.string());
        out << j.dump(2) << '\n';
    }
    // rename() is atomic; concurrent writers of one digest carry identical content.
    std::filesystem::rename(tmp, *dir_ / (digest + ".json"));
}

}  // namespace pbp
