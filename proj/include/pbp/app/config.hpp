#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pbp/classify.hpp"
#include "pbp/principle.hpp"
#include "pbp/provider.hpp"

namespace pbp::app {

struct AgentConfig {
    AgentSpec spec;
    std::vector<ScriptRule> rules;  // scripted only
    std::string fallback;
};

struct ConsolidationConfig {
    std::vector<std::string> finalizers;  // ranking
    std::string finalizer;                // consolidation and the multi-agent ablation cells
    std::size_t top_k = 5;
};

struct EstimatorConfig {
    std::string id;
    std::string command;
};

/// Parsed run configuration. Relative paths are resolved against the config
/// file's directory.
struct RunConfig {
    std::filesystem::path config_path;
    nlohmann::json raw;  // as loaded, used for the run digest

    std::optional<std::string> builtin_task;
    std::optional<std::filesystem::path> task_file;
    std::filesystem::path train_path;
    std::filesystem::path test_path;

    std::vector<AgentConfig> agents;
    GenerationGrid grid;  // run_seed mirrors `run_seed`
    ConsolidationConfig consolidation;
    std::string classifier;
    std::vector<StrategySpec> strategies;
    std::vector<Seed> seeds;
    Seed run_seed = 0;

    SamplingParams sampling;
    RetryPolicy retry;
    std::size_t concurrency = 4;
    std::vector<std::filesystem::path> template_files;
    std::optional<EstimatorConfig> estimator;
    std::vector<std::size_t> token_ns{1, 2, 4, 8};

    std::filesystem::path out_dir;
    std::filesystem::path cache_dir;

    const AgentConfig& agent(const std::string& id) const;
};

struct ConfigOverrides {
    std::optional<Seed> seed;
    std::optional<std::filesystem::path> cache_dir;
    std::optional<std::filesystem::path> out_dir;
};

/// Throws ConfigError with the offending key on any validation failure.
RunConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir,
                       const ConfigOverrides& overrides = {});

/// Roster references, roles and seeds. Called by parse_config.
void validate_config(const RunConfig& config);

}  // namespace pbp::app
