#include <fmt/format.h>

#include "pbp/error.hpp"
#include "pbp/eval.hpp"

namespace pbp {

std::string_view to_string(AgentMode m) { return m == AgentMode::single ? "single" : "multi"; }

bool AblationReport::complete() const {
    for (const auto& c : cells) {
        if (!c.report) return false;
    }
    return true;
}

std::string AblationReport::to_csv() const {
    std::string out = "agent_mode,n,labels,macro_f1,std,status\n";
    for (const auto& c : cells) {
        out += fmt::format("{},{},{},", to_string(c.mode), c.n, c.labels ? "with" : "without");
        if (c.report) {
            out += fmt::format("{:.4f},{:.4f},ok\n", c.report->mean, c.report->std);
        } else {
            out += "NA,NA,gap\n";
        }
    }
    return out;
}

namespace {

EvalReport run_cell(const Dataset& dataset, const AblationConfig& config, AgentMode mode, std::size_t n, bool labels,
                    StageContext& ctx) {
    StrategySpec strategy;
    if (mode == AgentMode::single) {
        strategy.kind = StrategyKind::principle_single;
        strategy.single_demo_count = n;
        strategy.single_include_labels = labels;
    } else {
        std::vector<PrincipleCandidate> pool;
        for (const auto& c : config.candidates) {
            if (c.provenance.n_demos == n && c.provenance.labels_included == labels) pool.push_back(c);
        }
        if (pool.empty()) throw StageError("no candidates were generated for this cell");
        strategy.kind = StrategyKind::principle_multi;
        strategy.consolidation = ConsolidationStrategy::consolidation;
        strategy.principle = consolidate_llm(pool, config.finalizer_id, dataset, ctx, config.run_seed).text;
    }
    return evaluate_runs(run_strategy(dataset, strategy, config.classifier_id, config.seeds, ctx), dataset);
}

}  // namespace

AblationReport ablation_grid(const Dataset& dataset, const AblationConfig& config, StageContext& ctx) {
    if (config.seeds.empty()) throw ConfigError("ablation: at least one seed is required");
    AblationReport report;
    for (AgentMode mode : {AgentMode::single, AgentMode::multi}) {
        for (std::size_t n : config.demo_counts) {
            for (bool labels : config.label_flags) {
                AblationCell cell{mode, n, labels, std::nullopt, {}};
                try {
                    cell.report = run_cell(dataset, config, mode, n, labels, ctx);
                } catch (const Error& e) {
                    cell.error = e.what();
                    log_warning(fmt::format("ablation cell ({}, n={}, labels={}) failed: {}", to_string(mode), n,
                                            labels ? "with" : "without", e.what()));
                }
                report.cells.push_back(std::move(cell));
            }
        }
    }
    return report;
}

}  // namespace pbp
