#include <algorithm>
#include <cmath>
#include <thread>

#include "pbp/error.hpp"
#include "pbp/provider.hpp"

namespace pbp {

void SamplingParams::validate() const {
    if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
    if (!(top_p > 0.0 && top_p <= 1.0)) throw ConfigError("top_p must be in (0, 1]");
    if (max_output_tokens == 0) throw ConfigError("max_output_tokens must be positive");
}

std::string_view to_string(AgentRole role) {
    switch (role) {
        case AgentRole::generator: return "generator";
        case AgentRole::finalizer: return "finalizer";
        case AgentRole::classifier: return "classifier";
    }
    return "?";
}

AgentRole agent_role_from_string(std::string_view s) {
    for (auto r : {AgentRole::generator, AgentRole::finalizer, AgentRole::classifier}) {
        if (to_string(r) == s) return r;
    }
    throw ConfigError("unknown agent role '" + std::string(s) + "'");
}

struct Provider::AgentSlot {
    AgentSpec spec;
    std::unique_ptr<Backend> backend;
    std::unique_ptr<std::counting_semaphore<1024>> in_flight;
};

Provider::Provider(ProviderOptions options)
    : options_(std::move(options)), cache_(options_.caching ? options_.cache_dir : std::nullopt) {
    if (!options_.estimator) options_.estimator = std::make_shared<SegmentingEstimator>();
}

Provider::~Provider() = default;

void Provider::add_agent(AgentSpec agent, std::unique_ptr<Backend> backend) {
    if (agent.agent_id.empty()) throw ConfigError("agent_id must be non-empty");
    if (agents_.count(agent.agent_id)) throw ConfigError("duplicate agent_id '" + agent.agent_id + "'");
    if (agent.max_input_tokens == 0) throw ConfigError("agent '" + agent.agent_id + "': max_input_tokens must be > 0");
    if (agent.backend == BackendType::http) {
        if (options_.offline) throw ConfigError("agent '" + agent.agent_id + "' uses HTTP but offline mode is set");
        if (agent.endpoint.empty()) throw ConfigError("agent '" + agent.agent_id + "' has no endpoint");
        if (!backend) backend = std::make_unique<HttpBackend>();
    }
    auto slot = std::make_unique<AgentSlot>();
    std::size_t limit = std::clamp<std::size_t>(agent.max_in_flight, 1, 1024);
    slot->in_flight = std::make_unique<std::counting_semaphore<1024>>(static_cast<std::ptrdiff_t>(limit));
    slot->spec = std::move(agent);
    slot->backend = std::move(backend);
    std::string id = slot->spec.agent_id;
    agents_.emplace(std::move(id), std::move(slot));
}

void Provider::register_script(const std::string& agent_id, std::vector<ScriptRule> rules, std::string fallback) {
    auto& s = slot(agent_id);
    if (s.spec.backend != BackendType::scripted) {
        throw ConfigError("register_script: agent '" + agent_id + "' is not a scripted agent");
    }
    if (s.backend) throw ConfigError("register_script: agent '" + agent_id + "' already has a script");
    s.backend = std::make_unique<ScriptedBackend>(std::move(rules), std::move(fallback));
}

Provider::AgentSlot& Provider::slot(std::string_view agent_id) const {
    auto it = agents_.find(agent_id);
    if (it == agents_.end()) throw ConfigError("unknown agent '" + std::string(agent_id) + "'");
    return *it->second;
}

bool Provider::has_agent(std::string_view agent_id) const { return agents_.find(agent_id) != agents_.end(); }

const AgentSpec& Provider::agent(std::string_view agent_id) const { return slot(agent_id).spec; }

std::vector<std::string> Provider::agent_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : agents_) out.push_back(id);
    return out;
}

void Provider::set_call_hook(std::function<void(const AgentSpec&, const CompletionRequest&)> hook) {
    hook_ = std::move(hook);
}

CompletionResponse Provider::complete(const CompletionRequest& request) {
    auto& s = slot(request.agent_id);
    const AgentSpec& agent = s.spec;

    const std::size_t estimate = options_.estimator->count(request.prompt);
    if (estimate > agent.max_input_tokens) throw TooLongError(agent.agent_id, estimate, agent.max_input_tokens);
    request.params.validate();

    const std::string digest = cache_key(agent, request);
    if (options_.caching) {
        if (auto hit = cache_.get(digest)) {
            ledger_.append(digest, agent.agent_id, request.purpose, true);
            return {hit->text, hit->input_tokens, 0.0, true};
        }
    }
    if (!s.backend) throw ConfigError("agent '" + agent.agent_id + "' has no backend (missing script?)");

    s.in_flight->acquire();
    struct Release {
        std::counting_semaphore<1024>& sem;
        ~Release() { sem.release(); }
    } release{*s.in_flight};

    const auto start = std::chrono::steady_clock::now();
    BackendReply reply;
    for (int attempt = 0;; ++attempt) {
        try {
            if (hook_) hook_(agent, request);
            reply = s.backend->send(agent, request);
            break;
        } catch (const TransportError& e) {
            if (!e.retryable() || attempt >= options_.retry.max_retries) {
                throw TransportError(e.what() + std::string(" (after ") + std::to_string(attempt + 1) + " attempts)",
                                     false);
            }
            auto delay = std::chrono::duration<double, std::milli>(options_.retry.base_delay) *
                         std::pow(options_.retry.multiplier, attempt);
            std::this_thread::sleep_for(std::chrono::duration_cast<std::chrono::milliseconds>(delay));
        }
    }
    const double latency =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    backend_calls_.fetch_add(1);
    if (options_.caching) cache_.put(digest, agent, request, reply);
    ledger_.append(digest, agent.agent_id, request.purpose, false);
    return {std::move(reply.text), reply.input_tokens, latency, false};
}

}  // namespace pbp
