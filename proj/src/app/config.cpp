#include "pbp/app/config.hpp"

#include <fstream>
#include <set>

#include "pbp/error.hpp"

namespace pbp::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

const json& require(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("config is missing '") + key + "'");
    return j.at(key);
}

AgentConfig parse_agent(const json& a) {
    AgentConfig out;
    auto& s = out.spec;
    s.agent_id = get_or<std::string>(a, "id", "");
    if (s.agent_id.empty()) throw ConfigError("agent entry without 'id'");
    const auto backend = get_or<std::string>(a, "backend", "scripted");
    if (backend == "scripted") {
        s.backend = BackendType::scripted;
    } else if (backend == "http") {
        s.backend = BackendType::http;
    } else {
        throw ConfigError("agent '" + s.agent_id + "': unknown backend '" + backend + "'");
    }
    s.model_name = get_or<std::string>(a, "model", s.agent_id);
    s.endpoint = get_or<std::string>(a, "endpoint", "");
    s.api_style = get_or<std::string>(a, "api_style", "openai");
    for (const auto& r : get_or<std::vector<std::string>>(a, "roles", {})) s.roles.insert(agent_role_from_string(r));
    if (s.roles.empty()) throw ConfigError("agent '" + s.agent_id + "' has no roles");
    s.max_input_tokens = get_or<std::size_t>(a, "max_input_tokens", s.max_input_tokens);
    s.max_in_flight = get_or<std::size_t>(a, "max_in_flight", s.max_in_flight);
    s.timeout_seconds = get_or<int>(a, "timeout_seconds", s.timeout_seconds);
    if (s.backend == BackendType::http && s.endpoint.empty()) {
        throw ConfigError("http agent '" + s.agent_id + "' needs an 'endpoint'");
    }
    if (a.contains("script")) {
        const auto& sc = a.at("script");
        out.fallback = get_or<std::string>(sc, "fallback", "");
        for (const auto& r : get_or<json>(sc, "rules", json::array())) {
            ScriptRule rule;
            if (r.contains("contains")) {
                rule.match = ScriptRule::Match::contains;
                rule.pattern = r.at("contains").get<std::string>();
            } else if (r.contains("regex")) {
                rule.match = ScriptRule::Match::regex;
                rule.pattern = r.at("regex").get<std::string>();
            } else {
                throw ConfigError("agent '" + s.agent_id + "': script rule needs 'contains' or 'regex'");
            }
            rule.response = get_or<std::string>(r, "response", "");
            out.rules.push_back(std::move(rule));
        }
    } else if (s.backend == BackendType::scripted) {
        throw ConfigError("scripted agent '" + s.agent_id + "' needs a 'script'");
    }
    return out;
}

const std::vector<std::string> kDefaultStrategies = {
    "vanilla", "cot", "stepback", "fewshot:1", "principle_single", "principle_multi:ranking",
    "principle_multi:consolidation", "principle_multi:random"};

}  // namespace

const AgentConfig& RunConfig::agent(const std::string& id) const {
    for (const auto& a : agents) {
        if (a.spec.agent_id == id) return a;
    }
    throw ConfigError("unknown agent '" + id + "'");
}

RunConfig load_config(const fs::path& path, const ConfigOverrides& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path.string() + ": " + e.what());
    }
    RunConfig c = parse_config(j, fs::absolute(path).parent_path(), overrides);
    c.config_path = fs::absolute(path);
    return c;
}

RunConfig parse_config(const json& j, const fs::path& base_dir, const ConfigOverrides& overrides) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig c;
    c.raw = j;

    const auto& task = require(j, "task");
    if (task.is_string()) {
        c.builtin_task = task.get<std::string>();
    } else if (task.is_object() && task.contains("file")) {
        c.task_file = resolve(base_dir, task.at("file").get<std::string>());
    } else {
        throw ConfigError("'task' must be a built-in task name or {\"file\": path}");
    }
    const auto& ds = require(j, "dataset");
    c.train_path = resolve(base_dir, require(ds, "train").get<std::string>());
    c.test_path = resolve(base_dir, require(ds, "test").get<std::string>());

    for (const auto& a : require(j, "agents")) c.agents.push_back(parse_agent(a));

    c.run_seed = overrides.seed.value_or(get_or<Seed>(j, "seed", 0));
    if (j.contains("seeds")) {
        c.seeds = get_or<std::vector<Seed>>(j, "seeds", {});
    } else {
        const auto n = get_or<std::size_t>(j, "num_seeds", 5);
        for (std::size_t i = 0; i < n; ++i) c.seeds.push_back(c.run_seed + i);
    }

    const json gen = get_or<json>(j, "generation", json::object());
    if (gen.contains("agents")) {
        c.grid.agents = get_or<std::vector<std::string>>(gen, "agents", {});
    } else {
        for (const auto& a : c.agents) {
            if (a.spec.has_role(AgentRole::generator)) c.grid.agents.push_back(a.spec.agent_id);
        }
    }
    c.grid.demo_counts = get_or<std::vector<std::size_t>>(gen, "demo_counts", c.grid.demo_counts);
    c.grid.label_flags = get_or<std::vector<bool>>(gen, "label_flags", c.grid.label_flags);
    c.grid.run_seed = c.run_seed;

    const json cons = get_or<json>(j, "consolidation", json::object());
    c.consolidation.finalizers = get_or<std::vector<std::string>>(cons, "finalizers", {});
    if (c.consolidation.finalizers.empty()) {
        for (const auto& a : c.agents) {
            if (a.spec.has_role(AgentRole::finalizer)) c.consolidation.finalizers.push_back(a.spec.agent_id);
        }
    }
    c.consolidation.finalizer = get_or<std::string>(
        cons, "finalizer", c.consolidation.finalizers.empty() ? std::string() : c.consolidation.finalizers.front());
    c.consolidation.top_k = get_or<std::size_t>(cons, "top_k", c.consolidation.top_k);

    c.classifier = get_or<std::string>(j, "classifier", "");
    if (c.classifier.empty()) {
        for (const auto& a : c.agents) {
            if (a.spec.has_role(AgentRole::classifier)) {
                c.classifier = a.spec.agent_id;
                break;
            }
        }
    }
    for (const auto& s : get_or<std::vector<std::string>>(j, "strategies", kDefaultStrategies)) {
        c.strategies.push_back(StrategySpec::parse(s));
    }

    const json sp = get_or<json>(j, "sampling", json::object());
    c.sampling.temperature = get_or<double>(sp, "temperature", c.sampling.temperature);
    c.sampling.top_p = get_or<double>(sp, "top_p", c.sampling.top_p);
    c.sampling.max_output_tokens = get_or<std::size_t>(sp, "max_output_tokens", c.sampling.max_output_tokens);
    c.sampling.validate();

    const json rt = get_or<json>(j, "retry", json::object());
    c.retry.max_retries = get_or<int>(rt, "max_retries", c.retry.max_retries);
    c.retry.base_delay = std::chrono::milliseconds(get_or<long>(rt, "base_delay_ms", c.retry.base_delay.count()));
    c.retry.multiplier = get_or<double>(rt, "multiplier", c.retry.multiplier);

    c.concurrency = get_or<std::size_t>(j, "concurrency", c.concurrency);
    for (const auto& t : get_or<std::vector<std::string>>(j, "templates", {})) {
        c.template_files.push_back(resolve(base_dir, t));
    }
    if (j.contains("estimator")) {
        const auto& e = j.at("estimator");
        c.estimator = EstimatorConfig{require(e, "id").get<std::string>(), require(e, "command").get<std::string>()};
    }
    const json tp = get_or<json>(j, "token_profile", json::object());
    c.token_ns = get_or<std::vector<std::size_t>>(tp, "fewshot_ns", c.token_ns);

    c.out_dir = overrides.out_dir ? fs::absolute(*overrides.out_dir)
                                  : resolve(base_dir, get_or<std::string>(j, "out_dir", "."));
    c.cache_dir = overrides.cache_dir ? fs::absolute(*overrides.cache_dir)
                                      : (j.contains("cache_dir") ? resolve(base_dir, j.at("cache_dir").get<std::string>())
                                                                 : c.out_dir / "cache");
    validate_config(c);
    return c;
}

void validate_config(const RunConfig& c) {
    std::set<std::string> ids;
    for (const auto& a : c.agents) {
        if (!ids.insert(a.spec.agent_id).second) throw ConfigError("duplicate agent id '" + a.spec.agent_id + "'");
    }
    auto need = [&](const std::string& id, AgentRole role, const char* what) {
        if (id.empty()) throw ConfigError(std::string("no ") + what + " agent configured");
        const auto& a = c.agent(id);
        if (!a.spec.has_role(role)) {
            throw ConfigError("agent '" + id + "' is used as " + what + " but lacks the " +
                              std::string(to_string(role)) + " role");
        }
    };
    if (c.grid.agents.empty()) throw ConfigError("no generator agents configured");
    for (const auto& g : c.grid.agents) need(g, AgentRole::generator, "generator");
    for (const auto& f : c.consolidation.finalizers) need(f, AgentRole::finalizer, "finalizer");
    if (!c.consolidation.finalizer.empty()) need(c.consolidation.finalizer, AgentRole::finalizer, "finalizer");
    if (c.consolidation.top_k == 0) throw ConfigError("consolidation.top_k must be positive");
    need(c.classifier, AgentRole::classifier, "classifier");
    if (c.seeds.empty()) throw ConfigError("at least one classification seed is required");
    if (c.grid.demo_counts.empty() || c.grid.label_flags.empty()) throw ConfigError("generation grid is empty");
    if (c.concurrency == 0) throw ConfigError("concurrency must be positive");
    if (c.retry.max_retries < 0 || c.retry.multiplier < 1.0) throw ConfigError("invalid retry policy");
    std::set<std::string> labels;
    for (const auto& s : c.strategies) {
        if (!labels.insert(s.label()).second) throw ConfigError("strategy '" + s.label() + "' listed twice");
    }
}

}  // namespace pbp::app
