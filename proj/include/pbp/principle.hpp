#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "pbp/context.hpp"
#include "pbp/corpus.hpp"

namespace pbp {

struct Provenance {
    std::string agent_id;
    std::size_t n_demos = 0;
    bool labels_included = false;

    bool operator==(const Provenance&) const = default;
};

struct PrincipleCandidate {
    std::string candidate_id;  // "P<i>", 1-based in grid order
    std::string text;          // principle section only
    Provenance provenance;
    std::string raw_response;
};

/// demo count x label flag x agent. Cells are enumerated demo count outermost,
/// then label flag, then agent, and candidate ids follow that order.
struct GenerationGrid {
    std::vector<std::string> agents;
    std::vector<std::size_t> demo_counts{4, 8, 16};
    std::vector<bool> label_flags{true, false};
    Seed run_seed = 0;

    std::size_t expected_count() const { return agents.size() * demo_counts.size() * label_flags.size(); }
};

/// One candidate per grid cell. All agents in a (demo count, label flag) cell
/// see the same DemoSet, sampled from the train split with a seed derived from
/// the run seed and the cell index. Throws StageError naming the failed cell.
std::vector<PrincipleCandidate> generate_candidates(const GenerationGrid& grid, const Dataset& dataset,
                                                   StageContext& ctx);

/// Asks a single agent for a principle from `n` unstratified train demos.
PrincipleCandidate generate_single_principle(const std::string& agent_id, const Dataset& dataset, std::size_t n,
                                             bool include_labels, Seed seed, StageContext& ctx,
                                             std::string candidate_id = "P1");

/// Drops the analysis part of a generation response: returns the text after the
/// last principle-section header line, or the whole trimmed response when no
/// header is present. Throws StageError when the result is empty.
std::string extract_principle(std::string_view raw_response);

// --- ranking ----------------------------------------------------------------

/// Ordered candidate ids parsed from a ranking answer, or nullopt (Unparseable).
/// Accepts "P3 > P17" and letter chains "A > C" (letters index `universe`
/// positionally). Duplicates keep their first occurrence; ids outside the
/// universe are dropped.
std::optional<std::vector<std::string>> parse_ranking(std::string_view raw, const std::vector<std::string>& universe);

std::string format_ranking(const std::vector<std::string>& ids);

struct RankedList {
    std::string finalizer_id;
    int order_permutation = 0;  // 0 or 1
    bool demos_included = false;
    std::vector<std::string> presented_order;
    std::vector<std::string> ids;  // empty when unparseable
    bool parsed = false;
    std::string raw_response;
};

struct VoteTally {
    std::map<std::string, std::size_t> votes;
    std::map<std::string, std::size_t> rank_sum;  // 1-based positions summed over ballots
    std::size_t ballots = 0;
    std::string winner;

    double mean_rank(const std::string& id) const;
    bool operator==(const VoteTally&) const = default;
};

/// Pools the top-k of every parsed list as equal ballots. Winner: most votes,
/// then lower mean rank, then lexicographically smaller id. Throws StageError
/// when no list parsed.
VoteTally tally_votes(const std::vector<RankedList>& lists, std::size_t top_k);

/// The two presentation orders shared by every finalizer; distinct whenever
/// more than one candidate exists.
std::pair<std::vector<std::string>, std::vector<std::string>> ranking_orders(const std::vector<std::string>& ids,
                                                                             Seed seed);

// --- final principle --------------------------------------------------------

enum class ConsolidationStrategy { ranking, consolidation, random, human };

std::string_view to_string(ConsolidationStrategy s);
ConsolidationStrategy consolidation_strategy_from_string(std::string_view s);

struct RankingAudit {
    VoteTally tally;
    std::size_t top_k = 5;
    std::size_t lists_total = 0;
    std::vector<std::size_t> skipped_lists;
};

struct ConsolidationAudit {
    std::string finalizer_id;
    std::vector<std::string> source_ids;
    std::string raw_response;
};

struct RandomAudit {
    Seed seed = 0;
    std::string chosen_id;
};

struct HumanAudit {
    std::string source;
};

using PrincipleAudit = std::variant<RankingAudit, ConsolidationAudit, RandomAudit, HumanAudit>;

struct FinalPrinciple {
    std::string text;
    ConsolidationStrategy strategy = ConsolidationStrategy::consolidation;
    PrincipleAudit audit;
};

struct RankingOutcome {
    FinalPrinciple principle;
    std::vector<RankedList> lists;
};

/// |finalizers| x 4 listwise ranking calls (two orders x with/without two
/// labelled demos), aggregated by pooled majority vote. Unparseable lists are
/// skipped with a warning; all of them failing is an error.
RankingOutcome consolidate_ranking(const std::vector<PrincipleCandidate>& candidates,
                                   const std::vector<std::string>& finalizers, const Dataset& dataset,
                                   std::size_t top_k, Seed seed, StageContext& ctx);

/// One consolidation call over every candidate.
FinalPrinciple consolidate_llm(const std::vector<PrincipleCandidate>& candidates, const std::string& finalizer_id,
                               const Dataset& dataset, StageContext& ctx, Seed seed = 0);

/// Uniform seeded pick; no provider calls.
FinalPrinciple consolidate_random(const std::vector<PrincipleCandidate>& candidates, Seed seed);

/// Wraps a human-authored principle so it can flow through classification.
FinalPrinciple human_principle(std::string text, std::string source);

}  // namespace pbp
