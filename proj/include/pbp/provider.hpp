#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <semaphore>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pbp/common.hpp"
#include "pbp/prompt.hpp"

namespace pbp {

struct SamplingParams {
    double temperature = 0.2;
    double top_p = 0.9;
    std::size_t max_output_tokens = 1024;
    std::optional<Seed> seed;

    /// temperature >= 0, top_p in (0, 1]. Throws ConfigError.
    void validate() const;
};

enum class BackendType { http, scripted };
enum class AgentRole { generator, finalizer, classifier };

std::string_view to_string(AgentRole role);
AgentRole agent_role_from_string(std::string_view s);

struct AgentSpec {
    std::string agent_id;
    BackendType backend = BackendType::scripted;
    std::string model_name;
    std::string endpoint;              // http only, full URL of the completion route
    std::string api_style = "openai";  // request/response mapper: "openai" | "anthropic"
    std::set<AgentRole> roles;
    std::size_t max_input_tokens = 4096;
    std::size_t max_in_flight = 4;
    int timeout_seconds = 120;

    bool has_role(AgentRole r) const { return roles.count(r) > 0; }
};

enum class Purpose { generation, ranking, consolidation, classification, stepback_1, stepback_2 };

std::string_view to_string(Purpose p);
Purpose purpose_from_string(std::string_view s);

/// True for the per-example classification stage (classification and both stepback steps).
bool is_classification_stage(Purpose p);

struct CompletionRequest {
    std::string agent_id;
    std::string prompt;
    SamplingParams params;
    Purpose purpose = Purpose::classification;
};

struct CompletionResponse {
    std::string text;
    std::optional<std::size_t> input_tokens;
    double latency_ms = 0.0;
    bool cache_hit = false;
};

/// Content digest over (agent_id, model_name, prompt, sampling params). The
/// purpose tag is deliberately not part of the key.
std::string cache_key(const AgentSpec& agent, const CompletionRequest& request);

// --- ledger -----------------------------------------------------------------

struct LedgerEntry {
    std::size_t seq = 0;
    std::string digest;
    std::string agent_id;
    Purpose purpose = Purpose::classification;
    bool cache_hit = false;
};

/// Append-only record of completed logical calls. Appends are serialised and
/// numbered, so the recorded order is a total order even under concurrency.
class CallLedger {
public:
    void append(std::string digest, std::string agent_id, Purpose purpose, bool cache_hit);
    std::vector<LedgerEntry> entries() const;
    std::size_t size() const;
    std::size_t count(Purpose p) const;
    std::map<Purpose, std::size_t> counts() const;
    void clear();

    void write_csv(const std::filesystem::path& path) const;
    static std::vector<LedgerEntry> read_csv(const std::filesystem::path& path);

private:
    mutable std::mutex mu_;
    std::vector<LedgerEntry> entries_;
};

// --- backends ---------------------------------------------------------------

struct BackendReply {
    std::string text;
    std::optional<std::size_t> input_tokens;
};

class Backend {
public:
    virtual ~Backend() = default;
    /// Throws TransportError (retryable or not) or BackendRefusalError.
    virtual BackendReply send(const AgentSpec& agent, const CompletionRequest& request) = 0;
};

struct ScriptRule {
    enum class Match { contains, regex };
    Match match = Match::contains;
    std::string pattern;
    std::string response;
};

/// Answers with the response of the first rule whose pattern matches the prompt,
/// or the fallback. Pure: the same prompt always yields the same text.
class ScriptedBackend final : public Backend {
public:
    ScriptedBackend(std::vector<ScriptRule> rules, std::string fallback);
    BackendReply send(const AgentSpec& agent, const CompletionRequest& request) override;

private:
    std::vector<ScriptRule> rules_;
    std::vector<std::optional<std::regex>> compiled_;
    std::string fallback_;
};

/// Chat-completion over HTTP(S). The api_style of the agent selects the
/// request/response mapping; the key comes from PF_APIKEY_<AGENT_ID>.
class HttpBackend final : public Backend {
public:
    BackendReply send(const AgentSpec& agent, const CompletionRequest& request) override;

    /// Environment variable consulted for an agent's credential.
    static std::string credential_env_var(std::string_view agent_id);
};

// --- cache ------------------------------------------------------------------

/// Content-addressed response cache. With a directory, entries live in
/// `<dir>/<digest>.json` (request echo + response); without one, in memory.
class ResponseCache {
public:
    explicit ResponseCache(std::optional<std::filesystem::path> dir = std::nullopt);

    std::optional<BackendReply> get(const std::string& digest) const;
    void put(const std::string& digest, const AgentSpec& agent, const CompletionRequest& request,
             const BackendReply& reply);
    const std::optional<std::filesystem::path>& dir() const { return dir_; }

private:
    std::optional<std::filesystem::path> dir_;
    mutable std::mutex mu_;
    std::map<std::string, BackendReply> memory_;
};

// --- provider ---------------------------------------------------------------

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds base_delay{200};
    double multiplier = 2.0;
};

struct ProviderOptions {
    RetryPolicy retry;
    bool caching = true;
    bool offline = false;  // refuse to register http agents
    std::optional<std::filesystem::path> cache_dir;
    std::shared_ptr<const TokenEstimator> estimator;  // defaults to SegmentingEstimator
};

class Provider {
public:
    explicit Provider(ProviderOptions options = {});
    ~Provider();
    Provider(const Provider&) = delete;
    Provider& operator=(const Provider&) = delete;

    /// Adds an agent. http agents get an HttpBackend unless one is supplied;
    /// scripted agents need register_script (or an explicit backend).
    void add_agent(AgentSpec agent, std::unique_ptr<Backend> backend = nullptr);

    /// Attaches a scripted rule list to a scripted agent. Registering twice throws.
    void register_script(const std::string& agent_id, std::vector<ScriptRule> rules, std::string fallback);

    bool has_agent(std::string_view agent_id) const;
    const AgentSpec& agent(std::string_view agent_id) const;
    std::vector<std::string> agent_ids() const;

    /// Pre-flight token check, cache lookup, backend call with retry, ledger append.
    CompletionResponse complete(const CompletionRequest& request);

    CallLedger& ledger() { return ledger_; }
    const CallLedger& ledger() const { return ledger_; }

    /// Backend invocations that returned successfully (cache hits excluded).
    std::size_t backend_calls() const { return backend_calls_.load(); }

    /// Invoked before every backend attempt; tests use it to inject interruptions.
    void set_call_hook(std::function<void(const AgentSpec&, const CompletionRequest&)> hook);

    const TokenEstimator& estimator() const { return *options_.estimator; }
    const ProviderOptions& options() const { return options_; }

private:
    struct AgentSlot;
    AgentSlot& slot(std::string_view agent_id) const;

    ProviderOptions options_;
    ResponseCache cache_;
    CallLedger ledger_;
    std::map<std::string, std::unique_ptr<AgentSlot>, std::less<>> agents_;
    std::atomic<std::size_t> backend_calls_{0};
    std::function<void(const AgentSpec&, const CompletionRequest&)> hook_;
};

}  // namespace pbp
