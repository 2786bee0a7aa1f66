#include <httplib.h>

#include <cctype>
#include <cstdlib>
#include <json.hpp>
#include <regex>

#include "pbp/error.hpp"
#include "pbp/provider.hpp"

namespace pbp {

using nlohmann::json;

namespace {

struct Url {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

Url parse_url(const std::string& endpoint) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(endpoint, m, re)) throw ConfigError("invalid endpoint URL '" + endpoint + "'");
    return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

json build_body(const AgentSpec& agent, const CompletionRequest& req) {
    json messages = json::array({{{"role", "user"}, {"content", req.prompt}}});
    json body = {
        {"model", agent.model_name},
        {"messages", messages},
        {"temperature", req.params.temperature},
        {"top_p", req.params.top_p},
        {"max_tokens", req.params.max_output_tokens},
    };
    if (agent.api_style == "openai" && req.params.seed) body["seed"] = *req.params.seed;
    return body;
}

BackendReply parse_body(const AgentSpec& agent, const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw BackendRefusalError("agent '" + agent.agent_id + "': response is not JSON: " + e.what());
    }
    BackendReply reply;
    try {
        if (agent.api_style == "anthropic") {
            for (const auto& block : j.at("content")) {
                if (block.value("type", "text") == "text") reply.text += block.at("text").get<std::string>();
            }
            if (j.contains("usage")) reply.input_tokens = j["usage"].value("input_tokens", std::size_t{0});
        } else {
            const auto& content = j.at("choices").at(0).at("message").at("content");
            reply.text = content.is_null() ? std::string() : content.get<std::string>();
            if (j.contains("usage")) reply.input_tokens = j["usage"].value("prompt_tokens", std::size_t{0});
        }
    } catch (const json::exception& e) {
        throw BackendRefusalError("agent '" + agent.agent_id + "': unexpected response shape: " + e.what());
    }
    return reply;
}

}  // namespace

std::string HttpBackend::credential_env_var(std::string_view agent_id) {
    std::string name = "PF_APIKEY_";
    for (char c : agent_id) {
        name.push_back(std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : '_');
    }
    return name;
}

BackendReply HttpBackend::send(const AgentSpec& agent, const CompletionRequest& request) {
    if (agent.api_style != "openai" && agent.api_style != "anthropic") {
        throw ConfigError("agent '" + agent.agent_id + "': unknown api_style '" + agent.api_style + "'");
    }
    Url url = parse_url(agent.endpoint);
    httplib::Client client(url.origin);
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(std::chrono::seconds(agent.timeout_seconds));
    client.set_write_timeout(std::chrono::seconds(agent.timeout_seconds));

    httplib::Headers headers;
    const char* key = std::getenv(credential_env_var(agent.agent_id).c_str());
    if (agent.api_style == "anthropic") {
        if (key) headers.emplace("x-api-key", key);
        headers.emplace("anthropic-version", "2023-06-01");
    } else if (key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    auto result = client.Post(url.path, headers, build_body(agent, request).dump(), "application/json");
    if (!result) {
        throw TransportError("agent '" + agent.agent_id + "': " + httplib::to_string(result.error()), true);
    }
    const int status = result->status;
    if (status == 429 || status >= 500) {
        throw TransportError("agent '" + agent.agent_id + "': HTTP " + std::to_string(status), true);
    }
    if (status < 200 || status >= 300) {
        throw BackendRefusalError("agent '" + agent.agent_id + "': HTTP " + std::to_string(status) + ": " +
                                  result->body.substr(0, 500));
    }
    return parse_body(agent, result->body);
}

}  // namespace pbp
