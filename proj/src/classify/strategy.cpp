#include <fmt/format.h>

#include "pbp/classify.hpp"
#include "pbp/error.hpp"

namespace pbp {

namespace {

constexpr std::uint64_t kFewshotStream = 0xF5;
constexpr std::uint64_t kSingleAgentStream = 0x51;

StrategyKind kind_from_string(std::string_view s) {
    for (auto k : {StrategyKind::vanilla, StrategyKind::fewshot, StrategyKind::cot, StrategyKind::stepback,
                   StrategyKind::principle_single, StrategyKind::principle_multi, StrategyKind::principle_human}) {
        if (to_string(k) == s) return k;
    }
    throw ConfigError("unknown strategy kind '" + std::string(s) + "'");
}

Bindings base_bindings(const LabeledExample& example, const TaskSpec& task) {
    return {{"input", example.text}, {"label_words", format_label_words(task)}};
}

}  // namespace

std::string_view to_string(StrategyKind k) {
    switch (k) {
        case StrategyKind::vanilla: return "vanilla";
        case StrategyKind::fewshot: return "fewshot";
        case StrategyKind::cot: return "cot";
        case StrategyKind::stepback: return "stepback";
        case StrategyKind::principle_single: return "principle_single";
        case StrategyKind::principle_multi: return "principle_multi";
        case StrategyKind::principle_human: return "principle_human";
    }
    return "?";
}

StrategySpec StrategySpec::parse(std::string_view text) {
    StrategySpec s;
    std::string_view head = text, param;
    if (auto colon = text.find(':'); colon != std::string_view::npos) {
        head = text.substr(0, colon);
        param = text.substr(colon + 1);
    }
    s.kind = kind_from_string(head);
    if (s.kind == StrategyKind::fewshot) {
        if (param.empty()) throw ConfigError("fewshot strategy needs a per-class count, e.g. 'fewshot:2'");
        try {
            s.n_per_class = std::stoul(std::string(param));
        } catch (const std::exception&) {
            throw ConfigError("invalid fewshot count in '" + std::string(text) + "'");
        }
    } else if (s.kind == StrategyKind::principle_multi) {
        s.consolidation = param.empty() ? ConsolidationStrategy::consolidation
                                        : consolidation_strategy_from_string(param);
    } else if (!param.empty()) {
        throw ConfigError("strategy '" + std::string(head) + "' takes no parameter");
    }
    s.validate();
    return s;
}

std::string StrategySpec::label() const {
    switch (kind) {
        case StrategyKind::fewshot: return fmt::format("fewshot-n{}", n_per_class);
        case StrategyKind::principle_multi:
            return fmt::format("principle_multi-{}", to_string(consolidation.value_or(ConsolidationStrategy::consolidation)));
        default: return std::string(to_string(kind));
    }
}

void StrategySpec::validate(bool require_principle) const {
    const bool is_fewshot = kind == StrategyKind::fewshot;
    if (is_fewshot != (n_per_class > 0)) {
        throw ConfigError("strategy " + std::string(to_string(kind)) +
                          (is_fewshot ? ": n_per_class must be positive" : ": n_per_class is only valid for fewshot"));
    }
    const bool is_multi = kind == StrategyKind::principle_multi;
    if (is_multi != consolidation.has_value()) {
        throw ConfigError("strategy " + std::string(to_string(kind)) +
                          (is_multi ? ": consolidation strategy required" : ": consolidation strategy not allowed"));
    }
    const bool takes_principle = kind == StrategyKind::principle_multi || kind == StrategyKind::principle_human ||
                                 kind == StrategyKind::principle_single;
    if (!takes_principle && principle) {
        throw ConfigError("strategy " + std::string(to_string(kind)) + " does not take a principle");
    }
    if (require_principle && needs_principle_artifact() && !principle) {
        throw MissingArtifactError("missing principle artifact for strategy " + label());
    }
    if (kind == StrategyKind::principle_single && single_demo_count == 0) {
        throw ConfigError("principle_single: demo count must be positive");
    }
}

std::string build_prompt(const LabeledExample& example, const Dataset& dataset, const StrategySpec& strategy,
                         Seed seed, const TemplateRegistry& templates) {
    const auto& family = dataset.task.template_family();
    Bindings b = base_bindings(example, dataset.task);
    switch (strategy.kind) {
        case StrategyKind::vanilla: return render(templates.get(family, TemplateKind::vanilla), b);
        case StrategyKind::cot: return render(templates.get(family, TemplateKind::cot), b);
        case StrategyKind::stepback: return render(templates.get(family, TemplateKind::stepback_q), b);
        case StrategyKind::fewshot: {
            DemoSet demos = sample_demonstrations(dataset, Split::train, strategy.n_per_class, true, true,
                                                  derive_seed(seed, kFewshotStream));
            b["demos"] = format_demos(demos, dataset.task);
            return render(templates.get(family, TemplateKind::fewshot), b);
        }
        case StrategyKind::principle_single:
        case StrategyKind::principle_multi:
        case StrategyKind::principle_human:
            if (!strategy.principle) throw MissingArtifactError("missing principle artifact for strategy " + strategy.label());
            b["principle"] = *strategy.principle;
            return render(templates.get(family, TemplateKind::classification), b);
    }
    throw ConfigError("unhandled strategy kind");
}

PredictionRecord classify_one(const LabeledExample& example, const Dataset& dataset, const StrategySpec& strategy,
                              const std::string& classifier_id, Seed seed, StageContext& ctx) {
    PredictionRecord rec;
    rec.example_id = example.id;
    rec.prompt_tokens.estimator_id = ctx.provider.estimator().id();

    auto call = [&](const std::string& prompt, Purpose purpose) -> std::optional<std::string> {
        rec.prompt_tokens.count += ctx.provider.estimator().count(prompt);
        CompletionRequest req{classifier_id, prompt, ctx.sampling, purpose};
        req.params.seed = seed;
        try {
            auto resp = ctx.provider.complete(req);
            ++rec.calls_used;
            return std::move(resp.text);
        } catch (const TooLongError& e) {
            rec.too_long = true;
            rec.error = e.what();
            return std::nullopt;
        }
    };

    const std::string first_prompt = build_prompt(example, dataset, strategy, seed, ctx.templates);
    std::optional<std::string> answer;
    if (strategy.kind == StrategyKind::stepback) {
        auto abstraction = call(first_prompt, Purpose::stepback_1);
        if (abstraction) {
            Bindings b = base_bindings(example, dataset.task);
            b["principle"] = trim(*abstraction);
            answer = call(render(ctx.templates.get(dataset.task.template_family(), TemplateKind::stepback_a), b),
                          Purpose::stepback_2);
        }
    } else {
        answer = call(first_prompt, Purpose::classification);
    }
    if (answer) {
        rec.raw_output = std::move(*answer);
        rec.parsed = parse_answer(rec.raw_output, dataset.task);
    }
    return rec;
}

std::vector<RunResult> run_strategy(const Dataset& dataset, const StrategySpec& strategy,
                                    const std::string& classifier_id, const std::vector<Seed>& seeds,
                                    StageContext& ctx) {
    if (seeds.empty()) throw ConfigError("run_strategy: at least one seed is required");
    strategy.validate(true);
    if (dataset.test.empty()) throw DataError("run_strategy: test split is empty");

    std::vector<RunResult> results;
    for (Seed seed : seeds) {
        StrategySpec bound = strategy;
        if (strategy.kind == StrategyKind::principle_single) {
            auto cand = generate_single_principle(classifier_id, dataset, strategy.single_demo_count,
                                                  strategy.single_include_labels,
                                                  derive_seed(seed, kSingleAgentStream), ctx);
            bound.principle = cand.text;
        }
        RunResult run{strategy.label(), seed, bound.principle, std::vector<PredictionRecord>(dataset.test.size())};
        parallel_for(dataset.test.size(), ctx.concurrency, [&](std::size_t i) {
            const auto& ex = dataset.test[i];
            try {
                run.records[i] = classify_one(ex, dataset, bound, classifier_id, seed, ctx);
            } catch (const ProviderError& e) {
                PredictionRecord rec;
                rec.example_id = ex.id;
                rec.prompt_tokens.estimator_id = ctx.provider.estimator().id();
                rec.error = e.what();
                run.records[i] = std::move(rec);
            }
        });
        std::size_t failed = 0;
        for (const auto& r : run.records) failed += !r.error.empty() && !r.too_long;
        if (failed == run.records.size()) {
            throw StageError(fmt::format("strategy {} seed {}: every example failed (first error: {})", run.strategy,
                                         seed, run.records.front().error));
        }
        results.push_back(std::move(run));
    }
    return results;
}

}  // namespace pbp
