#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pbp/classify.hpp"
#include "pbp/context.hpp"
#include "pbp/corpus.hpp"
#include "pbp/principle.hpp"

namespace pbp {

// --- macro-F1 -----------------------------------------------------------------

struct ClassScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct ClassScores {
    std::vector<ClassScore> per_class;  // indexed by ClassIndex, full label space
    double macro_f1 = 0.0;
    std::size_t unparsed = 0;
};

/// An Unparsed prediction (nullopt) matches no class: a false negative for the
/// gold class and a false positive for none.
ClassScores macro_f1(const std::vector<ClassIndex>& gold, const std::vector<std::optional<ClassIndex>>& predicted,
                     std::size_t num_classes);

/// Scores a run against the test split. Throws EvalError on duplicate, unknown
/// or missing example ids.
ClassScores macro_f1(const RunResult& run, const Dataset& dataset);

// --- seed aggregation ---------------------------------------------------------

struct SeedScore {
    std::string strategy;
    Seed seed = 0;
    ClassScores scores;
    double mean_prompt_tokens = 0.0;
    std::size_t too_long = 0;
    std::size_t failed = 0;
};

SeedScore score_run(const RunResult& run, const Dataset& dataset);

struct EvalReport {
    std::string strategy;
    std::vector<SeedScore> per_seed;
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation; 0 for a single seed
    bool single_seed = false;
    std::size_t unparsed_count = 0;
    double mean_prompt_tokens = 0.0;
};

/// Throws EvalError when empty or when strategies differ.
EvalReport aggregate_seeds(std::vector<SeedScore> per_seed);

EvalReport evaluate_runs(const std::vector<RunResult>& runs, const Dataset& dataset);

// --- delta table --------------------------------------------------------------

/// Percentage points of `score` over `baseline`.
double delta_points(double score, double baseline);

struct DeltaTable {
    std::vector<std::string> datasets;    // columns
    std::vector<std::string> strategies;  // rows, baseline first
    std::map<std::string, std::map<std::string, double>> cells;  // strategy -> dataset -> delta
    std::map<std::string, double> avg;                           // mean over the datasets present in the row

    std::optional<double> cell(const std::string& strategy, const std::string& dataset) const;

    /// "method,<datasets...>,AVG"; cells "%.2f", absent cells "NA".
    std::string to_csv() const;
};

/// `reports` maps dataset name to that dataset's EvalReports. Every dataset
/// needs a report for `baseline`; throws EvalError otherwise.
DeltaTable delta_table(const std::map<std::string, std::vector<EvalReport>>& reports,
                       const std::string& baseline = "vanilla");

// --- token profile ------------------------------------------------------------

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares. R^2 is 1 when every y is equal.
LinearFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

struct TokenProfileRow {
    std::string strategy;
    std::optional<std::size_t> n;  // demos per class, fewshot only
    double mean_tokens = 0.0;
};

struct TokenProfile {
    std::string estimator_id;
    std::vector<TokenProfileRow> rows;
    LinearFit fewshot_fit;                  // mean tokens against n
    std::optional<double> principle_tokens; // mean of the principle-conditioned prompt
    std::optional<std::size_t> crossover_n; // smallest profiled n whose fewshot mean reaches the principle mean
    std::optional<double> equivalent_n;     // n at which the fitted line meets the principle mean
    std::vector<std::size_t> skipped_ns;    // too few train examples per class

    std::string to_csv() const;
};

/// Mean prompt tokens over the test split for fewshot at each n, for every
/// strategy in `others`, and for the principle prompt when `principle` is set.
TokenProfile token_profile(const Dataset& dataset, const TemplateRegistry& templates, const TokenEstimator& estimator,
                           const std::optional<std::string>& principle, Seed seed,
                           const std::vector<std::size_t>& fewshot_ns = {1, 2, 4, 8},
                           const std::vector<StrategySpec>& others = {});

// --- ablation -----------------------------------------------------------------

enum class AgentMode { single, multi };

std::string_view to_string(AgentMode m);

struct AblationCell {
    AgentMode mode = AgentMode::single;
    std::size_t n = 0;
    bool labels = true;
    std::optional<EvalReport> report;  // nullopt marks a gap
    std::string error;
};

struct AblationReport {
    std::vector<AblationCell> cells;

    bool complete() const;
    /// "agent_mode,n,labels,macro_f1,std,status"
    std::string to_csv() const;
};

struct AblationConfig {
    std::vector<std::size_t> demo_counts{4, 8, 16};
    std::vector<bool> label_flags{true, false};
    std::string classifier_id;
    std::string finalizer_id;                   // multi mode consolidation
    std::vector<PrincipleCandidate> candidates; // multi mode pool, filtered by provenance per cell
    std::vector<Seed> seeds;
    Seed run_seed = 0;
};

/// Cells in order: mode (single, multi), then demo count, then label flag.
/// Single cells let the classifier write its own principle from n demos;
/// multi cells consolidate the candidates generated at (n, label flag).
/// A failed cell is recorded as a gap and the grid carries on.
AblationReport ablation_grid(const Dataset& dataset, const AblationConfig& config, StageContext& ctx);

}  // namespace pbp
