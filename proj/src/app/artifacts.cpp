#include "pbp/app/artifacts.hpp"

#include <fstream>
#include <sstream>

#include "pbp/error.hpp"

namespace pbp::app {

namespace fs = std::filesystem;
using nlohmann::json;

void write_file_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw Error("cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

json read_json(const fs::path& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw MissingArtifactError("corrupt artifact " + path.string() + ": " + e.what());
    }
}

json to_json(const PrincipleCandidate& c) {
    return {{"id", c.candidate_id},
            {"text", c.text},
            {"provenance",
             {{"agent_id", c.provenance.agent_id},
              {"n_demos", c.provenance.n_demos},
              {"labels_included", c.provenance.labels_included}}},
            {"raw_response_sha256", sha256_hex(c.raw_response)}};
}

PrincipleCandidate candidate_from_json(const json& j) {
    PrincipleCandidate c;
    c.candidate_id = j.at("id").get<std::string>();
    c.text = j.at("text").get<std::string>();
    const auto& p = j.at("provenance");
    c.provenance = {p.at("agent_id").get<std::string>(), p.at("n_demos").get<std::size_t>(),
                    p.at("labels_included").get<bool>()};
    return c;
}

json to_json(const RankedList& l) {
    return {{"finalizer_id", l.finalizer_id},   {"order_permutation", l.order_permutation},
            {"demos_included", l.demos_included}, {"presented_order", l.presented_order},
            {"ids", l.ids},                     {"parsed", l.parsed},
            {"raw_response", l.raw_response}};
}

RankedList ranked_list_from_json(const json& j) {
    RankedList l;
    l.finalizer_id = j.at("finalizer_id").get<std::string>();
    l.order_permutation = j.at("order_permutation").get<int>();
    l.demos_included = j.at("demos_included").get<bool>();
    l.presented_order = j.at("presented_order").get<std::vector<std::string>>();
    l.ids = j.at("ids").get<std::vector<std::string>>();
    l.parsed = j.at("parsed").get<bool>();
    l.raw_response = j.at("raw_response").get<std::string>();
    return l;
}

json to_json(const VoteTally& t) {
    return {{"votes", t.votes}, {"rank_sum", t.rank_sum}, {"ballots", t.ballots}, {"winner", t.winner}};
}

VoteTally vote_tally_from_json(const json& j) {
    VoteTally t;
    t.votes = j.at("votes").get<std::map<std::string, std::size_t>>();
    t.rank_sum = j.at("rank_sum").get<std::map<std::string, std::size_t>>();
    t.ballots = j.at("ballots").get<std::size_t>();
    t.winner = j.at("winner").get<std::string>();
    return t;
}

namespace {

struct AuditToJson {
    json operator()(const RankingAudit& a) const {
        return {{"tally", to_json(a.tally)},
                {"top_k", a.top_k},
                {"lists_total", a.lists_total},
                {"skipped_lists", a.skipped_lists}};
    }
    json operator()(const ConsolidationAudit& a) const {
        return {{"finalizer_id", a.finalizer_id}, {"source_ids", a.source_ids}, {"raw_response", a.raw_response}};
    }
    json operator()(const RandomAudit& a) const { return {{"seed", a.seed}, {"chosen_id", a.chosen_id}}; }
    json operator()(const HumanAudit& a) const { return {{"source", a.source}}; }
};

}  // namespace

json to_json(const FinalPrinciple& p) {
    return {{"strategy", std::string(to_string(p.strategy))},
            {"text", p.text},
            {"audit", std::visit(AuditToJson{}, p.audit)}};
}

FinalPrinciple final_principle_from_json(const json& j) {
    FinalPrinciple p;
    p.strategy = consolidation_strategy_from_string(j.at("strategy").get<std::string>());
    p.text = j.at("text").get<std::string>();
    const auto& a = j.at("audit");
    switch (p.strategy) {
        case ConsolidationStrategy::ranking:
            p.audit = RankingAudit{vote_tally_from_json(a.at("tally")), a.at("top_k").get<std::size_t>(),
                                   a.at("lists_total").get<std::size_t>(),
                                   a.at("skipped_lists").get<std::vector<std::size_t>>()};
            break;
        case ConsolidationStrategy::consolidation:
            p.audit = ConsolidationAudit{a.at("finalizer_id").get<std::string>(),
                                         a.at("source_ids").get<std::vector<std::string>>(),
                                         a.at("raw_response").get<std::string>()};
            break;
        case ConsolidationStrategy::random:
            p.audit = RandomAudit{a.at("seed").get<Seed>(), a.at("chosen_id").get<std::string>()};
            break;
        case ConsolidationStrategy::human: p.audit = HumanAudit{a.at("source").get<std::string>()}; break;
    }
    return p;
}

json to_json(const PredictionRecord& r) {
    return {{"example_id", r.example_id},
            {"raw_output", r.raw_output},
            {"parsed", r.parsed ? json(*r.parsed) : json(nullptr)},
            {"prompt_tokens", r.prompt_tokens.count},
            {"estimator", r.prompt_tokens.estimator_id},
            {"calls_used", r.calls_used},
            {"too_long", r.too_long},
            {"error", r.error}};
}

PredictionRecord prediction_from_json(const json& j) {
    PredictionRecord r;
    r.example_id = j.at("example_id").get<std::string>();
    r.raw_output = j.at("raw_output").get<std::string>();
    if (!j.at("parsed").is_null()) r.parsed = j.at("parsed").get<ClassIndex>();
    r.prompt_tokens = {j.at("prompt_tokens").get<std::size_t>(), j.at("estimator").get<std::string>()};
    r.calls_used = j.at("calls_used").get<std::size_t>();
    r.too_long = j.at("too_long").get<bool>();
    r.error = j.at("error").get<std::string>();
    return r;
}

std::string to_jsonl(const RunResult& run) {
    std::string out;
    for (const auto& r : run.records) out += to_json(r).dump() + "\n";
    return out;
}

RunResult run_result_from_jsonl(const std::string& text, std::string strategy, Seed seed) {
    RunResult run{std::move(strategy), seed, std::nullopt, {}};
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            run.records.push_back(prediction_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw MissingArtifactError("corrupt prediction record at line " + std::to_string(line_no) + ": " +
                                       e.what());
        }
    }
    return run;
}

json to_json(const SeedScore& s) {
    json per_class = json::array();
    for (const auto& c : s.scores.per_class) {
        per_class.push_back({{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"support", c.support}});
    }
    return {{"strategy", s.strategy},
            {"seed", s.seed},
            {"macro_f1", s.scores.macro_f1},
            {"per_class", per_class},
            {"unparsed", s.scores.unparsed},
            {"mean_prompt_tokens", s.mean_prompt_tokens},
            {"too_long", s.too_long},
            {"failed", s.failed}};
}

SeedScore seed_score_from_json(const json& j) {
    SeedScore s;
    s.strategy = j.at("strategy").get<std::string>();
    s.seed = j.at("seed").get<Seed>();
    s.scores.macro_f1 = j.at("macro_f1").get<double>();
    s.scores.unparsed = j.at("unparsed").get<std::size_t>();
    for (const auto& c : j.at("per_class")) {
        s.scores.per_class.push_back({c.at("precision").get<double>(), c.at("recall").get<double>(),
                                      c.at("f1").get<double>(), c.at("support").get<std::size_t>()});
    }
    s.mean_prompt_tokens = j.at("mean_prompt_tokens").get<double>();
    s.too_long = j.at("too_long").get<std::size_t>();
    s.failed = j.at("failed").get<std::size_t>();
    return s;
}

json to_json(const EvalReport& r) {
    json seeds = json::array();
    for (const auto& s : r.per_seed) seeds.push_back(to_json(s));
    return {{"strategy", r.strategy},
            {"mean", r.mean},
            {"std", r.std},
            {"single_seed", r.single_seed},
            {"unparsed_count", r.unparsed_count},
            {"mean_prompt_tokens", r.mean_prompt_tokens},
            {"per_seed", seeds}};
}

EvalReport eval_report_from_json(const json& j) {
    std::vector<SeedScore> seeds;
    for (const auto& s : j.at("per_seed")) seeds.push_back(seed_score_from_json(s));
    return aggregate_seeds(std::move(seeds));
}

json to_json(const TokenProfile& p) {
    json rows = json::array();
    for (const auto& r : p.rows) {
        rows.push_back({{"strategy", r.strategy}, {"n", r.n ? json(*r.n) : json(nullptr)}, {"mean_tokens", r.mean_tokens}});
    }
    auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
    return {{"estimator", p.estimator_id},
            {"rows", rows},
            {"fewshot_fit",
             {{"slope", p.fewshot_fit.slope},
              {"intercept", p.fewshot_fit.intercept},
              {"r_squared", p.fewshot_fit.r_squared}}},
            {"principle_tokens", opt(p.principle_tokens)},
            {"crossover_n", opt(p.crossover_n)},
            {"equivalent_n", opt(p.equivalent_n)},
            {"skipped_ns", p.skipped_ns}};
}

json to_json(const AblationReport& r) {
    json cells = json::array();
    for (const auto& c : r.cells) {
        cells.push_back({{"agent_mode", std::string(to_string(c.mode))},
                         {"n", c.n},
                         {"labels", c.labels},
                         {"report", c.report ? to_json(*c.report) : json(nullptr)},
                         {"error", c.error}});
    }
    return {{"complete", r.complete()}, {"cells", cells}};
}

}  // namespace pbp::app
