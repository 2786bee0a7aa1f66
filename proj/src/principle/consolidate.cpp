#include "pbp/error.hpp"
#include "pbp/principle.hpp"

namespace pbp {

std::string_view to_string(ConsolidationStrategy s) {
    switch (s) {
        case ConsolidationStrategy::ranking: return "ranking";
        case ConsolidationStrategy::consolidation: return "consolidation";
        case ConsolidationStrategy::random: return "random";
        case ConsolidationStrategy::human: return "human";
    }
    return "?";
}

ConsolidationStrategy consolidation_strategy_from_string(std::string_view s) {
    for (auto c : {ConsolidationStrategy::ranking, ConsolidationStrategy::consolidation, ConsolidationStrategy::random,
                   ConsolidationStrategy::human}) {
        if (to_string(c) == s) return c;
    }
    throw ConfigError("unknown consolidation strategy '" + std::string(s) + "'");
}

FinalPrinciple consolidate_llm(const std::vector<PrincipleCandidate>& candidates, const std::string& finalizer_id,
                               const Dataset& dataset, StageContext& ctx, Seed seed) {
    if (candidates.empty()) throw StageError("consolidation: no candidates");
    if (!ctx.provider.agent(finalizer_id).has_role(AgentRole::finalizer)) {
        throw ConfigError("agent '" + finalizer_id + "' lacks the finalizer role");
    }
    ConsolidationAudit audit;
    audit.finalizer_id = finalizer_id;
    std::vector<LabeledText> items;
    for (const auto& c : candidates) {
        items.push_back({c.candidate_id, c.text});
        audit.source_ids.push_back(c.candidate_id);
    }
    const auto& tmpl = ctx.templates.get(dataset.task.template_family(), TemplateKind::consolidation);
    const std::string prompt =
        render(tmpl, {{"candidates", format_candidates(items)}, {"label_words", format_label_words(dataset.task)}});
    CompletionRequest req{finalizer_id, prompt, ctx.sampling, Purpose::consolidation};
    req.params.seed = seed;
    try {
        audit.raw_response = ctx.provider.complete(req).text;
    } catch (const ProviderError& e) {
        throw StageError("consolidation call to '" + finalizer_id + "' failed: " + e.what());
    }
    std::string text;
    try {
        text = extract_principle(audit.raw_response);
    } catch (const StageError&) {
        throw StageError("consolidation by '" + finalizer_id + "' returned no principle text");
    }
    return {std::move(text), ConsolidationStrategy::consolidation, std::move(audit)};
}

FinalPrinciple consolidate_random(const std::vector<PrincipleCandidate>& candidates, Seed seed) {
    if (candidates.empty()) throw StageError("random selection: no candidates");
    DeterministicRng rng(seed);
    const auto& pick = candidates[static_cast<std::size_t>(rng.below(candidates.size()))];
    return {pick.text, ConsolidationStrategy::random, RandomAudit{seed, pick.candidate_id}};
}

FinalPrinciple human_principle(std::string text, std::string source) {
    std::string trimmed = trim(text);
    if (trimmed.empty()) throw StageError("human principle from '" + source + "' is empty");
    return {std::move(trimmed), ConsolidationStrategy::human, HumanAudit{std::move(source)}};
}

}  // namespace pbp
