#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pbp/context.hpp"
#include "pbp/corpus.hpp"
#include "pbp/principle.hpp"

namespace pbp {

enum class StrategyKind { vanilla, fewshot, cot, stepback, principle_single, principle_multi, principle_human };

std::string_view to_string(StrategyKind k);

struct StrategySpec {
    StrategyKind kind = StrategyKind::vanilla;
    std::size_t n_per_class = 0;                         // fewshot only
    std::optional<ConsolidationStrategy> consolidation;  // principle_multi only
    std::optional<std::string> principle;                // bound text for principle_* kinds
    std::size_t single_demo_count = 4;                   // principle_single
    bool single_include_labels = true;                   // principle_single

    /// "vanilla", "cot", "stepback", "fewshot:2", "principle_single",
    /// "principle_multi:consolidation", "principle_human".
    static StrategySpec parse(std::string_view text);

    /// Stable name used for directories and report rows, e.g. "fewshot-n2",
    /// "principle_multi-ranking".
    std::string label() const;

    /// Parameters present iff the kind needs them. Throws ConfigError.
    /// `require_principle` also demands bound text for principle_multi/human.
    void validate(bool require_principle = false) const;

    bool needs_principle_artifact() const {
        return kind == StrategyKind::principle_multi || kind == StrategyKind::principle_human;
    }
};

struct PredictionRecord {
    std::string example_id;
    std::string raw_output;
    std::optional<ClassIndex> parsed;  // nullopt = Unparsed
    TokenEstimate prompt_tokens;
    std::size_t calls_used = 0;
    bool too_long = false;
    std::string error;

    bool operator==(const PredictionRecord&) const = default;
};

struct RunResult {
    std::string strategy;  // StrategySpec::label()
    Seed seed = 0;
    std::optional<std::string> principle;  // the principle text bound into every prompt, if any
    std::vector<PredictionRecord> records;
};

/// Lowercases and strips punctuation/whitespace; an exact label-word match
/// wins, otherwise exactly one label word occurring as a word in the output.
/// Anything else is Unparsed (nullopt).
std::optional<ClassIndex> parse_answer(std::string_view raw, const TaskSpec& task);

/// Builds the kind-specific prompt(s), calls the classifier, parses the answer.
/// A TooLong pre-flight yields an Unparsed record flagged too_long.
/// principle_* kinds need `strategy.principle` bound.
PredictionRecord classify_one(const LabeledExample& example, const Dataset& dataset, const StrategySpec& strategy,
                              const std::string& classifier_id, Seed seed, StageContext& ctx);

/// Prompt for one example without calling anything (used by token profiling).
/// Stepback returns the first-step prompt.
std::string build_prompt(const LabeledExample& example, const Dataset& dataset, const StrategySpec& strategy,
                         Seed seed, const TemplateRegistry& templates);

/// One RunResult per seed over the test split. principle_single first asks the
/// classifier for its own principle (one generation call per seed). Per-example
/// failures are recorded; only a run where every record failed throws.
std::vector<RunResult> run_strategy(const Dataset& dataset, const StrategySpec& strategy,
                                    const std::string& classifier_id, const std::vector<Seed>& seeds,
                                    StageContext& ctx);

}  // namespace pbp
