#include <fmt/format.h>

#include "pbp/error.hpp"
#include "pbp/principle.hpp"

namespace pbp {

namespace {

std::string cell_name(const std::string& agent, std::size_t n, bool labels) {
    return fmt::format("(agent={}, n={}, labels={})", agent, n, labels ? "with" : "without");
}

PrincipleCandidate request_principle(const std::string& agent_id, const Dataset& dataset, const DemoSet& demos,
                                     Seed seed, StageContext& ctx, std::string candidate_id) {
    const std::string where = cell_name(agent_id, demos.n, demos.include_labels);
    const auto& tmpl = ctx.templates.get(dataset.task.template_family(), TemplateKind::generation);
    const std::string prompt = render(tmpl, {{"demos", format_demos(demos, dataset.task)},
                                             {"label_words", format_label_words(dataset.task)}});
    CompletionRequest req{agent_id, prompt, ctx.sampling, Purpose::generation};
    req.params.seed = seed;
    CompletionResponse resp;
    try {
        resp = ctx.provider.complete(req);
    } catch (const ProviderError& e) {
        throw StageError("generation cell " + where + " failed: " + e.what());
    }
    PrincipleCandidate cand{std::move(candidate_id), {}, {agent_id, demos.n, demos.include_labels}, resp.text};
    try {
        cand.text = extract_principle(resp.text);
    } catch (const StageError&) {
        throw StageError("generation cell " + where + " returned no principle text");
    }
    return cand;
}

}  // namespace

std::vector<PrincipleCandidate> generate_candidates(const GenerationGrid& grid, const Dataset& dataset,
                                                   StageContext& ctx) {
    if (grid.agents.empty() || grid.demo_counts.empty() || grid.label_flags.empty()) {
        throw StageError("generation grid has an empty axis");
    }
    for (const auto& a : grid.agents) {
        if (!ctx.provider.agent(a).has_role(AgentRole::generator)) {
            throw ConfigError("agent '" + a + "' lacks the generator role");
        }
    }

    // One shared DemoSet per (demo count, label flag) pair.
    std::vector<DemoSet> demo_sets;
    for (std::size_t ni = 0; ni < grid.demo_counts.size(); ++ni) {
        for (std::size_t fi = 0; fi < grid.label_flags.size(); ++fi) {
            const std::size_t cell = ni * grid.label_flags.size() + fi;
            demo_sets.push_back(sample_demonstrations(dataset, Split::train, grid.demo_counts[ni],
                                                      grid.label_flags[fi], false, derive_seed(grid.run_seed, cell)));
        }
    }

    const std::size_t per_cell = grid.agents.size();
    std::vector<PrincipleCandidate> out(grid.expected_count());
    parallel_for(out.size(), ctx.concurrency, [&](std::size_t i) {
        const DemoSet& demos = demo_sets[i / per_cell];
        const std::string& agent = grid.agents[i % per_cell];
        out[i] = request_principle(agent, dataset, demos, grid.run_seed, ctx, "P" + std::to_string(i + 1));
    });
    return out;
}

PrincipleCandidate generate_single_principle(const std::string& agent_id, const Dataset& dataset, std::size_t n,
                                             bool include_labels, Seed seed, StageContext& ctx,
                                             std::string candidate_id) {
    DemoSet demos = sample_demonstrations(dataset, Split::train, n, include_labels, false, seed);
    return request_principle(agent_id, dataset, demos, seed, ctx, std::move(candidate_id));
}

}  // namespace pbp
