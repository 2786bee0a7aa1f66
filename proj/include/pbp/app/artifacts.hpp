#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pbp/classify.hpp"
#include "pbp/eval.hpp"
#include "pbp/principle.hpp"

namespace pbp::app {

/// Writes through a sibling temp file and rename, so readers never see a torn file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Pretty-printed with sorted keys and a trailing newline.
std::string dump_json(const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

nlohmann::json to_json(const PrincipleCandidate& c);  // raw response stored as its digest
PrincipleCandidate candidate_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RankedList& l);
RankedList ranked_list_from_json(const nlohmann::json& j);

nlohmann::json to_json(const VoteTally& t);
VoteTally vote_tally_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FinalPrinciple& p);
FinalPrinciple final_principle_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PredictionRecord& r);
PredictionRecord prediction_from_json(const nlohmann::json& j);

/// One PredictionRecord per line.
std::string to_jsonl(const RunResult& run);
RunResult run_result_from_jsonl(const std::string& text, std::string strategy, Seed seed);

nlohmann::json to_json(const SeedScore& s);
SeedScore seed_score_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EvalReport& r);
EvalReport eval_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TokenProfile& p);
nlohmann::json to_json(const AblationReport& r);

}  // namespace pbp::app
