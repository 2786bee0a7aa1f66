#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pbp/app/config.hpp"
#include "pbp/classify.hpp"
#include "pbp/error.hpp"
#include "pbp/eval.hpp"
#include "pbp/principle.hpp"

namespace pbp::app {

/// Thrown after artifacts were written when some records, lists or cells failed.
class PartialResultError : public Error {
public:
    using Error::Error;
};

struct PipelineOptions {
    bool offline = false;
};

struct EvaluationBundle {
    std::vector<EvalReport> reports;
    DeltaTable deltas;
};

/// One command invocation against a run directory. Holds the run lock for its
/// lifetime. Layout:
///   <out>/runs/<run_id>/{candidates.json, rankings.json, principle.<s>.json,
///                        <strategy>/<seed>.jsonl, ledger.<stage>.csv,
///                        failures.json, manifest.json}
///   <out>/reports/<run_id>/{deltas.csv, tokens.csv, ablation.csv, report.json}
class Pipeline {
public:
    Pipeline(RunConfig config, PipelineOptions options = {});
    ~Pipeline();
    Pipeline(const Pipeline&) = delete;
    Pipeline& operator=(const Pipeline&) = delete;

    const std::string& run_id() const { return run_id_; }
    const std::filesystem::path& run_dir() const { return run_dir_; }
    const std::filesystem::path& report_dir() const { return report_dir_; }
    const RunConfig& config() const { return config_; }
    const Dataset& dataset() const { return dataset_; }
    Provider& provider() { return *provider_; }

    std::vector<PrincipleCandidate> generate();
    FinalPrinciple consolidate(ConsolidationStrategy strategy);
    FinalPrinciple import_principle(const std::filesystem::path& file);
    std::vector<RunResult> classify(const StrategySpec& strategy);
    /// `include` lists report.json files of other runs whose evaluations join the delta table.
    EvaluationBundle evaluate(const std::vector<std::filesystem::path>& include = {});
    TokenProfile tokens();
    AblationReport ablate();
    /// generate, the three consolidations, every configured strategy, evaluate, tokens.
    void run_all();

    std::vector<PrincipleCandidate> load_candidates() const;
    FinalPrinciple load_principle(ConsolidationStrategy strategy) const;
    std::vector<RankedList> load_rankings() const;
    std::optional<RunResult> load_run(const std::string& strategy_label, Seed seed) const;

    std::filesystem::path principle_path(ConsolidationStrategy strategy) const;
    std::filesystem::path run_path(const std::string& strategy_label, Seed seed) const;
    std::filesystem::path ledger_path(const std::string& stage) const;

private:
    template <typename Fn>
    auto stage(const std::string& name, bool keeps_ledger, Fn&& fn);
    void record_failures(const std::string& stage, const std::vector<std::string>& messages);
    void update_report(const std::string& section, nlohmann::json value);
    void write_manifest();
    StageContext context();

    RunConfig config_;
    PipelineOptions options_;
    Dataset dataset_;
    TemplateRegistry templates_;
    std::unique_ptr<Provider> provider_;
    std::string run_id_;
    std::string config_digest_;
    std::filesystem::path run_dir_;
    std::filesystem::path report_dir_;
    int lock_fd_ = -1;
};

/// Content address of a run: configuration (minus output locations) plus the
/// digests of the task, dataset and template files it reads.
std::string compute_run_id(const RunConfig& config, const Dataset& dataset);

}  // namespace pbp::app
