#include <fmt/format.h>

#include <regex>
#include <set>
#include <unordered_set>

#include "pbp/error.hpp"
#include "pbp/principle.hpp"

namespace pbp {

namespace {

const std::regex& chain_regex() {
    static const std::regex re(
        R"((?:\b[Pp]\d+\b|\b[A-Z]\b)(?:\s*>\s*(?:\b[Pp]\d+\b|\b[A-Z]\b))+)");
    return re;
}

const std::regex& token_regex() {
    static const std::regex re(R"(\b[Pp]\d+\b|\b[A-Z]\b)");
    return re;
}

const std::regex& p_token_regex() {
    static const std::regex re(R"(\b[Pp]\d+\b)");
    return re;
}

std::vector<std::string> tokens_in(const std::string& s, const std::regex& re) {
    std::vector<std::string> out;
    for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
        out.push_back(it->str());
    }
    return out;
}

constexpr std::uint64_t kOrderStream = 0x0A0;
constexpr std::uint64_t kRankingDemoStream = 0x0D0;
constexpr std::size_t kRankingDemoCount = 2;

}  // namespace

std::optional<std::vector<std::string>> parse_ranking(std::string_view raw, const std::vector<std::string>& universe) {
    const std::string text(raw);

    // Longest "X > Y > ..." chain wins; earlier chains win ties.
    std::vector<std::string> tokens;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), chain_regex()); it != std::sregex_iterator(); ++it) {
        auto chain = tokens_in(it->str(), token_regex());
        if (chain.size() > tokens.size()) tokens = std::move(chain);
    }
    // No chain: accept bare P-labels in order of appearance (single winner, numbered list).
    if (tokens.empty()) tokens = tokens_in(text, p_token_regex());

    const std::unordered_set<std::string> known(universe.begin(), universe.end());
    std::vector<std::string> ids;
    std::unordered_set<std::string> seen;
    for (const auto& tok : tokens) {
        std::string id;
        if (tok.size() == 1) {
            std::size_t pos = static_cast<std::size_t>(tok[0] - 'A');
            if (pos >= universe.size()) continue;
            id = universe[pos];
        } else {
            id = "P" + tok.substr(1);
            if (!known.count(id)) continue;
        }
        if (seen.insert(id).second) ids.push_back(std::move(id));
    }
    if (ids.empty()) return std::nullopt;
    return ids;
}

std::string format_ranking(const std::vector<std::string>& ids) {
    std::string out;
    for (const auto& id : ids) {
        if (!out.empty()) out += " > ";
        out += id;
    }
    return out;
}

double VoteTally::mean_rank(const std::string& id) const {
    auto v = votes.find(id);
    if (v == votes.end() || v->second == 0) return 0.0;
    return static_cast<double>(rank_sum.at(id)) / static_cast<double>(v->second);
}

VoteTally tally_votes(const std::vector<RankedList>& lists, std::size_t top_k) {
    if (top_k == 0) throw StageError("top_k must be positive");
    VoteTally tally;
    for (const auto& list : lists) {
        if (!list.parsed) continue;
        ++tally.ballots;
        const std::size_t k = std::min(top_k, list.ids.size());
        for (std::size_t pos = 0; pos < k; ++pos) {
            ++tally.votes[list.ids[pos]];
            tally.rank_sum[list.ids[pos]] += pos + 1;
        }
    }
    if (tally.ballots == 0) throw StageError("no ranking list could be parsed");

    // votes is ordered by id, so a strict comparison keeps the lexicographically smaller id on full ties.
    const std::string* best = nullptr;
    for (const auto& [id, v] : tally.votes) {
        if (!best) {
            best = &id;
            continue;
        }
        const std::size_t bv = tally.votes[*best];
        if (v != bv) {
            if (v > bv) best = &id;
            continue;
        }
        // mean rank comparison without division: sum_a / v < sum_b / v  <=>  sum_a < sum_b (equal votes)
        if (tally.rank_sum[id] < tally.rank_sum[*best]) best = &id;
    }
    tally.winner = *best;
    return tally;
}

std::pair<std::vector<std::string>, std::vector<std::string>> ranking_orders(const std::vector<std::string>& ids,
                                                                             Seed seed) {
    std::vector<std::string> first = ids;
    DeterministicRng rng0(derive_seed(seed, kOrderStream));
    rng0.shuffle(first);
    std::vector<std::string> second = ids;
    for (std::uint64_t attempt = 1;; ++attempt) {
        second = ids;
        DeterministicRng rng1(derive_seed(seed, kOrderStream + attempt));
        rng1.shuffle(second);
        if (ids.size() < 2 || second != first) break;
    }
    return {std::move(first), std::move(second)};
}

RankingOutcome consolidate_ranking(const std::vector<PrincipleCandidate>& candidates,
                                   const std::vector<std::string>& finalizers, const Dataset& dataset,
                                   std::size_t top_k, Seed seed, StageContext& ctx) {
    if (candidates.empty()) throw StageError("ranking: no candidates");
    if (finalizers.empty()) throw StageError("ranking: no finalizer agents");
    for (const auto& f : finalizers) {
        if (!ctx.provider.agent(f).has_role(AgentRole::finalizer)) {
            throw ConfigError("agent '" + f + "' lacks the finalizer role");
        }
    }

    std::map<std::string, const PrincipleCandidate*> by_id;
    std::vector<std::string> ids;
    for (const auto& c : candidates) {
        by_id[c.candidate_id] = &c;
        ids.push_back(c.candidate_id);
    }
    const auto [order0, order1] = ranking_orders(ids, seed);
    const DemoSet demos = sample_demonstrations(dataset, Split::train, kRankingDemoCount, true, false,
                                                derive_seed(seed, kRankingDemoStream));
    const std::string demo_text = format_demos(demos, dataset.task);
    const auto& tmpl = ctx.templates.get(dataset.task.template_family(), TemplateKind::ranking);

    std::vector<RankedList> lists(finalizers.size() * 4);
    parallel_for(lists.size(), ctx.concurrency, [&](std::size_t i) {
        RankedList& list = lists[i];
        list.finalizer_id = finalizers[i / 4];
        list.order_permutation = static_cast<int>((i % 4) / 2);
        list.demos_included = (i % 2) == 0;
        list.presented_order = list.order_permutation == 0 ? order0 : order1;

        std::vector<LabeledText> shown;
        for (const auto& id : list.presented_order) shown.push_back({id, by_id.at(id)->text});
        const std::string prompt = render(tmpl, {{"candidates", format_candidates(shown)},
                                                 {"demos", list.demos_included ? demo_text : std::string()},
                                                 {"label_words", format_label_words(dataset.task)}});
        CompletionRequest req{list.finalizer_id, prompt, ctx.sampling, Purpose::ranking};
        req.params.seed = seed;
        try {
            list.raw_response = ctx.provider.complete(req).text;
        } catch (const ProviderError& e) {
            throw StageError(fmt::format("ranking call (finalizer={}, order={}, demos={}) failed: {}",
                                         list.finalizer_id, list.order_permutation,
                                         list.demos_included ? "with" : "without", e.what()));
        }
        if (auto parsed = parse_ranking(list.raw_response, list.presented_order)) {
            list.ids = std::move(*parsed);
            list.parsed = true;
        }
    });

    RankingAudit audit;
    audit.top_k = top_k;
    audit.lists_total = lists.size();
    for (std::size_t i = 0; i < lists.size(); ++i) {
        if (!lists[i].parsed) {
            audit.skipped_lists.push_back(i);
            log_warning(fmt::format("ranking list {} from '{}' is unparseable; skipped", i, lists[i].finalizer_id));
        }
    }
    audit.tally = tally_votes(lists, top_k);
    FinalPrinciple fp{by_id.at(audit.tally.winner)->text, ConsolidationStrategy::ranking, std::move(audit)};
    return {std::move(fp), std::move(lists)};
}

}  // namespace pbp
