#include <gtest/gtest.h>

#include <map>
#include <set>

#include "fixtures.hpp"
#include "pbp/error.hpp"
#include "pbp/principle.hpp"

namespace pbp {
namespace {

using testing::add_scripted;
using testing::contains;

using Ids = std::vector<std::string>;

TEST(ExtractPrinciple, TakesTextAfterTheLastHeader) {
    EXPECT_EQ(extract_principle("Analysis: the first is ironic.\n\nKey Principles:\n1. Contrast.\n2. Hashtags."),
              "1. Contrast.\n2. Hashtags.");
    EXPECT_EQ(extract_principle("**Principles:** look for contrast"), "look for contrast");
    EXPECT_EQ(extract_principle("### Key principles\n- a\n- b\n"), "- a\n- b");
    EXPECT_EQ(extract_principle("Principles:\nold\nKey principles:\nnew"), "new");
}

TEST(ExtractPrinciple, EnumeratedItemsAreNotHeaders) {
    EXPECT_EQ(extract_principle("Key principles:\nPrinciple 1: contrast\nPrinciple 2: tone"),
              "Principle 1: contrast\nPrinciple 2: tone");
}

TEST(ExtractPrinciple, WholeResponseWithoutHeaderAndEmptyIsAnError) {
    EXPECT_EQ(extract_principle("  just a rule  \n"), "just a rule");
    EXPECT_THROW(extract_principle("Key principles:\n  \n"), StageError);
    EXPECT_THROW(extract_principle("   "), StageError);
}

TEST(ParseRanking, LetterAndPFormats) {
    const Ids universe{"P4", "P2", "P9"};
    EXPECT_EQ(parse_ranking("A > C > B", universe), (Ids{"P4", "P9", "P2"}));
    EXPECT_EQ(parse_ranking("P9 > P4 > P2", universe), (Ids{"P9", "P4", "P2"}));
    EXPECT_EQ(parse_ranking("p2>p9", universe), (Ids{"P2", "P9"}));
}

TEST(ParseRanking, DuplicatesUnknownsAndProse) {
    const Ids universe{"P1", "P2", "P3", "P4"};
    EXPECT_EQ(parse_ranking("P3 > P1 > P3 > P2", universe), (Ids{"P3", "P1", "P2"}));
    EXPECT_EQ(parse_ranking("P3 > P17 > P1", universe), (Ids{"P3", "P1"}));
    EXPECT_EQ(parse_ranking("After careful thought, my ranking is: B > D > A. I hope this helps!", universe),
              (Ids{"P2", "P4", "P1"}));
    EXPECT_EQ(parse_ranking("Draft: A > B\nFinal answer: C > A > D > B", universe), (Ids{"P3", "P1", "P4", "P2"}));
    EXPECT_EQ(parse_ranking("The best principle is P4.", universe), (Ids{"P4"}));
    EXPECT_EQ(parse_ranking("I cannot rank these.", universe), std::nullopt);
    EXPECT_EQ(parse_ranking("", universe), std::nullopt);
}

TEST(FormatRanking, RoundTrips) {
    const Ids ids{"P3", "P1", "P2"};
    EXPECT_EQ(format_ranking(ids), "P3 > P1 > P2");
    EXPECT_EQ(parse_ranking(format_ranking(ids), ids), ids);
}

RankedList ballot(Ids ids) {
    RankedList l;
    l.ids = std::move(ids);
    l.parsed = true;
    return l;
}

TEST(TallyVotes, MostVotesWins) {
    const auto t = tally_votes({ballot({"P1", "P2"}), ballot({"P2", "P3"}), ballot({"P3", "P2"})}, 2);
    EXPECT_EQ(t.winner, "P2");
    EXPECT_EQ(t.votes.at("P2"), 3u);
    EXPECT_EQ(t.rank_sum.at("P2"), 5u);
    EXPECT_EQ(t.ballots, 3u);
    EXPECT_DOUBLE_EQ(t.mean_rank("P2"), 5.0 / 3.0);
}

TEST(TallyVotes, TieBrokenByMeanRankThenId) {
    // P1 and P2 both have two votes; P2 has the better mean rank.
    EXPECT_EQ(tally_votes({ballot({"P2", "P1"}), ballot({"P2", "P1"})}, 2).winner, "P2");
    // Full tie: lexicographically smaller id.
    EXPECT_EQ(tally_votes({ballot({"P2", "P1"}), ballot({"P1", "P2"})}, 2).winner, "P1");
    // Only the top-k positions vote.
    EXPECT_EQ(tally_votes({ballot({"P5", "P1", "P2"}), ballot({"P6", "P1", "P2"}), ballot({"P5", "P2"})}, 1).winner,
              "P5");
}

TEST(TallyVotes, SkipsUnparsedAndRequiresABallot) {
    RankedList junk;
    EXPECT_EQ(tally_votes({junk, ballot({"P3"})}, 5).ballots, 1u);
    EXPECT_THROW(tally_votes({junk}, 5), StageError);
    EXPECT_THROW(tally_votes({ballot({"P1"})}, 0), StageError);
}

TEST(RankingOrders, DistinctPermutationsOfTheIds) {
    Ids ids{"P1", "P2"};
    for (Seed s = 0; s < 50; ++s) {
        auto [a, b] = ranking_orders(ids, s);
        EXPECT_NE(a, b);
        std::sort(a.begin(), a.end());
        EXPECT_EQ(a, ids);
    }
    const auto [x, y] = ranking_orders({"P1"}, 3);
    EXPECT_EQ(x, y);
}

struct Roster {
    Provider provider;
    TemplateRegistry templates = TemplateRegistry::with_builtins();
    StageContext ctx{provider, templates, SamplingParams{}, 4};
};

std::vector<std::string> add_generators(Roster& r, std::size_t n) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) {
        ids.push_back("gen" + std::to_string(i));
        add_scripted(r.provider, ids.back(), {AgentRole::generator}, {},
                     "Thinking...\nKey principles:\n1. rule from " + ids.back());
    }
    return ids;
}

TEST(GenerateCandidates, GridCardinalityAndProvenance) {
    Roster r;
    const auto ds = testing::synthetic_dataset("irony2018", 10, 2);
    GenerationGrid grid;
    grid.agents = add_generators(r, 6);
    grid.run_seed = 5;
    const auto cands = generate_candidates(grid, ds, r.ctx);
    ASSERT_EQ(cands.size(), 36u);
    std::set<std::tuple<std::string, std::size_t, bool>> cells;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        EXPECT_EQ(cands[i].candidate_id, "P" + std::to_string(i + 1));
        cells.insert({cands[i].provenance.agent_id, cands[i].provenance.n_demos, cands[i].provenance.labels_included});
        EXPECT_EQ(cands[i].text, "1. rule from " + cands[i].provenance.agent_id);
    }
    EXPECT_EQ(cells.size(), 36u);
    // demo count outermost, then label flag, then agent
    EXPECT_EQ(cands[0].provenance, (Provenance{"gen0", 4, true}));
    EXPECT_EQ(cands[6].provenance, (Provenance{"gen0", 4, false}));
    EXPECT_EQ(cands[12].provenance, (Provenance{"gen0", 8, true}));
    EXPECT_EQ(r.provider.ledger().count(Purpose::generation), 36u);
}

TEST(GenerateCandidates, AgentsInACellShareDemos) {
    Roster r;
    const auto ds = testing::synthetic_dataset("irony2018", 10, 2);
    GenerationGrid grid;
    grid.agents = add_generators(r, 3);
    grid.demo_counts = {4};
    std::vector<std::string> prompts;
    std::mutex mu;
    r.provider.set_call_hook([&](const AgentSpec&, const CompletionRequest& req) {
        std::lock_guard lock(mu);
        prompts.push_back(req.prompt);
    });
    generate_candidates(grid, ds, r.ctx);
    ASSERT_EQ(prompts.size(), 6u);
    std::map<bool, std::set<std::string>> by_flag;
    for (const auto& p : prompts) by_flag[p.find("Answer:") != std::string::npos].insert(p);
    EXPECT_EQ(by_flag[true].size(), 1u);
    EXPECT_EQ(by_flag[false].size(), 1u);
}

TEST(GenerateCandidates, FailedCellIsNamed) {
    Roster r;
    const auto ds = testing::synthetic_dataset("irony2018", 10, 2);
    add_scripted(r.provider, "g", {AgentRole::generator}, {}, "   ");
    GenerationGrid grid;
    grid.agents = {"g"};
    grid.demo_counts = {4};
    grid.label_flags = {true};
    try {
        generate_candidates(grid, ds, r.ctx);
        FAIL();
    } catch (const StageError& e) {
        EXPECT_NE(std::string(e.what()).find("agent=g, n=4, labels=with"), std::string::npos) << e.what();
    }
    add_scripted(r.provider, "c", {AgentRole::classifier}, {}, "x");
    grid.agents = {"c"};
    EXPECT_THROW(generate_candidates(grid, ds, r.ctx), ConfigError);
}

std::vector<PrincipleCandidate> make_candidates(std::size_t n) {
    std::vector<PrincipleCandidate> out;
    for (std::size_t i = 1; i <= n; ++i) out.push_back({"P" + std::to_string(i), "text " + std::to_string(i), {}, ""});
    return out;
}

TEST(ConsolidateRanking, SixteenCallsAndVote) {
    Roster r;
    const auto ds = testing::synthetic_dataset("irony2018", 10, 2);
    std::vector<std::string> fins;
    for (int i = 0; i < 4; ++i) {
        fins.push_back("fin" + std::to_string(i));
        add_scripted(r.provider, fins.back(), {AgentRole::finalizer}, {}, "Ranking: P3 > P1 > P2");
    }
    const auto out = consolidate_ranking(make_candidates(5), fins, ds, 2, 11, r.ctx);
    EXPECT_EQ(out.lists.size(), 16u);
    EXPECT_EQ(r.provider.ledger().count(Purpose::ranking), 16u);
    EXPECT_EQ(out.principle.text, "text 3");
    const auto& audit = std::get<RankingAudit>(out.principle.audit);
    EXPECT_EQ(audit.tally, tally_votes(out.lists, 2));
    std::map<std::tuple<std::string, int, bool>, int> variants;
    for (const auto& l : out.lists) ++variants[{l.finalizer_id, l.order_permutation, l.demos_included}];
    EXPECT_EQ(variants.size(), 16u);
}

TEST(ConsolidateRanking, UnparseableListsAreSkipped) {
    Roster r;
    set_warnings_enabled(false);
    const auto ds = testing::synthetic_dataset("irony2018", 10, 2);
    add_scripted(r.provider, "good", {AgentRole::finalizer}, {}, "P2 > P1");
    add_scripted(r.provider, "bad", {AgentRole::finalizer}, {}, "no idea");
    const auto out = consolidate_ranking(make_candidates(3), {"good", "bad"}, ds, 5, 1, r.ctx);
    const auto& audit = std::get<RankingAudit>(out.principle.audit);
    EXPECT_EQ(audit.skipped_lists, (std::vector<std::size_t>{4, 5, 6, 7}));
    EXPECT_EQ(audit.tally.winner, "P2");
    EXPECT_THROW(consolidate_ranking(make_candidates(3), {"bad"}, ds, 5, 1, r.ctx), StageError);
    set_warnings_enabled(true);
}

TEST(ConsolidateRanking, LettersFollowEachPresentedOrder) {
    Roster r;
    const auto ds = testing::synthetic_dataset("irony2018", 10, 2);
    add_scripted(r.provider, "f", {AgentRole::finalizer}, {}, "A > B");
    const auto out = consolidate_ranking(make_candidates(4), {"f"}, ds, 1, 2, r.ctx);
    for (const auto& l : out.lists) {
        ASSERT_TRUE(l.parsed);
        EXPECT_EQ(l.ids, (Ids{l.presented_order[0], l.presented_order[1]}));
    }
}

TEST(ConsolidateLlm, SingleCallWithEveryCandidate) {
    Roster r;
    const auto ds = testing::synthetic_dataset("irony2018", 10, 2);
    std::string seen;
    add_scripted(r.provider, "f", {AgentRole::finalizer}, {}, "Here you go.\nKey principles:\n- merged");
    r.provider.set_call_hook([&](const AgentSpec&, const CompletionRequest& req) { seen = req.prompt; });
    const auto fp = consolidate_llm(make_candidates(3), "f", ds, r.ctx);
    EXPECT_EQ(fp.text, "- merged");
    EXPECT_EQ(r.provider.ledger().count(Purpose::consolidation), 1u);
    for (int i = 1; i <= 3; ++i) EXPECT_NE(seen.find("P" + std::to_string(i) + ": text"), std::string::npos);
    EXPECT_EQ(std::get<ConsolidationAudit>(fp.audit).source_ids, (Ids{"P1", "P2", "P3"}));
}

TEST(ConsolidateRandom, UniformOverThirtySixCandidates) {
    const auto cands = make_candidates(36);
    std::map<std::string, int> hits;
    for (Seed s = 0; s < 10000; ++s) ++hits[std::get<RandomAudit>(consolidate_random(cands, s).audit).chosen_id];
    ASSERT_EQ(hits.size(), 36u);
    const double expected = 10000.0 / 36.0;
    for (const auto& [id, n] : hits) {
        EXPECT_GT(n, expected * 0.8) << id;
        EXPECT_LT(n, expected * 1.2) << id;
    }
    EXPECT_EQ(consolidate_random(cands, 7).text, consolidate_random(cands, 7).text);
}

TEST(HumanPrinciple, TrimsAndRejectsEmpty) {
    const auto fp = human_principle("  rule \n", "sop.txt");
    EXPECT_EQ(fp.text, "rule");
    EXPECT_EQ(fp.strategy, ConsolidationStrategy::human);
    EXPECT_THROW(human_principle(" \n", "x"), StageError);
}

}  // namespace
}  // namespace pbp
