#include "pbp/app/pipeline.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <set>

#include "pbp/app/artifacts.hpp"
#include "pbp/error.hpp"

namespace pbp::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kRunIdLength = 16;

std::string file_digest(const fs::path& p) { return sha256_hex(read_file(p)); }

std::string utc_now() {
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(
                                                    std::chrono::system_clock::now())));
}

ConsolidationStrategy principle_source(const StrategySpec& s) {
    return s.kind == StrategyKind::principle_human ? ConsolidationStrategy::human : *s.consolidation;
}

}  // namespace

std::string compute_run_id(const RunConfig& config, const Dataset& dataset) {
    json norm = config.raw;
    norm.erase("out_dir");
    norm.erase("cache_dir");
    norm["seed"] = config.run_seed;
    json inputs = {{"train", file_digest(config.train_path)}, {"test", file_digest(config.test_path)}};
    inputs["task"] = config.task_file ? file_digest(*config.task_file) : dataset.task.name();
    json templates = json::array();
    for (const auto& t : config.template_files) templates.push_back(file_digest(t));
    inputs["templates"] = templates;
    norm["__inputs"] = inputs;
    return sha256_hex(norm.dump()).substr(0, kRunIdLength);
}

Pipeline::Pipeline(RunConfig config, PipelineOptions options)
    : config_(std::move(config)),
      options_(options),
      dataset_([&] {
          TaskSpec task = config_.task_file ? load_task_spec(*config_.task_file) : builtin_task(*config_.builtin_task);
          return load_dataset(config_.train_path, config_.test_path, std::move(task));
      }()),
      templates_(TemplateRegistry::with_builtins()) {
    for (const auto& t : config_.template_files) templates_.load_file(t);
    if (auto missing = templates_.missing_kinds(dataset_.task.template_family()); !missing.empty()) {
        throw ConfigError(fmt::format("template family '{}' lacks the '{}' template", dataset_.task.template_family(),
                                      to_string(missing.front())));
    }

    ProviderOptions po;
    po.retry = config_.retry;
    po.offline = options_.offline;
    po.cache_dir = config_.cache_dir;
    if (config_.estimator) {
        po.estimator = std::make_shared<CommandEstimator>(config_.estimator->id, config_.estimator->command);
    }
    provider_ = std::make_unique<Provider>(std::move(po));
    for (const auto& a : config_.agents) {
        provider_->add_agent(a.spec);
        if (a.spec.backend == BackendType::scripted) provider_->register_script(a.spec.agent_id, a.rules, a.fallback);
    }

    run_id_ = compute_run_id(config_, dataset_);
    config_digest_ = sha256_hex(config_.raw.dump());
    run_dir_ = config_.out_dir / "runs" / run_id_;
    report_dir_ = config_.out_dir / "reports" / run_id_;
    fs::create_directories(run_dir_);
    fs::create_directories(report_dir_);

    const fs::path lock = run_dir_ / ".lock";
    lock_fd_ = ::open(lock.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
    if (lock_fd_ < 0) throw ConfigError("cannot open lock file " + lock.string());
    if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
        ::close(lock_fd_);
        lock_fd_ = -1;
        throw ConfigError("run " + run_id_ + " is locked by another process");
    }
}

Pipeline::~Pipeline() {
    if (lock_fd_ >= 0) {
        ::flock(lock_fd_, LOCK_UN);
        ::close(lock_fd_);
    }
}

StageContext Pipeline::context() { return StageContext{*provider_, templates_, config_.sampling, config_.concurrency}; }

fs::path Pipeline::principle_path(ConsolidationStrategy strategy) const {
    return run_dir_ / fmt::format("principle.{}.json", to_string(strategy));
}

fs::path Pipeline::run_path(const std::string& strategy_label, Seed seed) const {
    return run_dir_ / strategy_label / fmt::format("{}.jsonl", seed);
}

fs::path Pipeline::ledger_path(const std::string& stage) const { return run_dir_ / ("ledger." + stage + ".csv"); }

template <typename Fn>
auto Pipeline::stage(const std::string& name, bool keeps_ledger, Fn&& fn) {
    provider_->ledger().clear();
    struct Finish {
        Pipeline* self;
        const std::string& name;
        bool keeps_ledger;
        ~Finish() {
            try {
                if (keeps_ledger) self->provider_->ledger().write_csv(self->ledger_path(name));
                self->write_manifest();
            } catch (const std::exception& e) {
                log_warning(std::string("could not finalise stage bookkeeping: ") + e.what());
            }
        }
    } finish{this, name, keeps_ledger};
    try {
        auto result = fn();
        record_failures(name, {});
        return result;
    } catch (const PartialResultError&) {
        throw;
    } catch (const Error& e) {
        record_failures(name, {e.what()});
        throw;
    }
}

void Pipeline::record_failures(const std::string& stage, const std::vector<std::string>& messages) {
    const fs::path path = run_dir_ / "failures.json";
    json j = fs::exists(path) ? read_json(path) : json::object();
    if (messages.empty()) {
        j.erase(stage);
    } else {
        j[stage] = messages;
    }
    write_file_atomic(path, dump_json(j));
}

void Pipeline::update_report(const std::string& section, json value) {
    const fs::path path = report_dir_ / "report.json";
    json j = fs::exists(path) ? read_json(path) : json::object();
    j["dataset"] = dataset_.task.name();
    j["run_id"] = run_id_;
    j[section] = std::move(value);
    write_file_atomic(path, dump_json(j));
}

void Pipeline::write_manifest() {
    const fs::path path = run_dir_ / "manifest.json";
    json m = fs::exists(path) ? read_json(path) : json::object();
    const std::string now = utc_now();
    if (!m.contains("created_at")) m["created_at"] = now;
    m["updated_at"] = now;
    m["run_id"] = run_id_;
    m["config_digest"] = config_digest_;
    if (!config_.config_path.empty()) m["config_path"] = config_.config_path.string();

    std::vector<std::string> artifacts;
    json ledgers = json::object();
    std::map<std::string, std::size_t> totals;
    for (const fs::path& root : {run_dir_, report_dir_}) {
        for (const auto& entry : fs::recursive_directory_iterator(root)) {
            if (!entry.is_regular_file()) continue;
            const auto& p = entry.path();
            const auto name = p.filename().string();
            if (name == "manifest.json" || name == ".lock" || p.extension() == ".tmp") continue;
            artifacts.push_back(fs::relative(p, config_.out_dir).generic_string());
            if (name.rfind("ledger.", 0) == 0 && p.extension() == ".csv") {
                const std::string stage = name.substr(7, name.size() - 11);
                json counts = json::object();
                std::size_t hits = 0;
                for (const auto& e : CallLedger::read_csv(p)) {
                    const std::string purpose(to_string(e.purpose));
                    counts[purpose] = counts.value(purpose, 0) + 1;
                    ++totals[purpose];
                    hits += e.cache_hit;
                }
                ledgers[stage] = {{"by_purpose", counts}, {"cache_hits", hits}};
            }
        }
    }
    std::sort(artifacts.begin(), artifacts.end());
    m["artifacts"] = artifacts;
    m["ledger"] = {{"stages", ledgers}, {"by_purpose", totals}};
    write_file_atomic(path, dump_json(m));
}

// --- stages -----------------------------------------------------------------

std::vector<PrincipleCandidate> Pipeline::generate() {
    return stage("generate", true, [&] {
        auto ctx = context();
        auto candidates = generate_candidates(config_.grid, dataset_, ctx);
        json arr = json::array();
        for (const auto& c : candidates) arr.push_back(to_json(c));
        write_file_atomic(run_dir_ / "candidates.json", dump_json(arr));
        return candidates;
    });
}

std::vector<PrincipleCandidate> Pipeline::load_candidates() const {
    const fs::path path = run_dir_ / "candidates.json";
    if (!fs::exists(path)) throw MissingArtifactError("missing candidates artifact; run `generate` first");
    std::vector<PrincipleCandidate> out;
    for (const auto& c : read_json(path)) out.push_back(candidate_from_json(c));
    return out;
}

std::vector<RankedList> Pipeline::load_rankings() const {
    const fs::path path = run_dir_ / "rankings.json";
    if (!fs::exists(path)) throw MissingArtifactError("missing rankings artifact");
    std::vector<RankedList> out;
    for (const auto& l : read_json(path)) out.push_back(ranked_list_from_json(l));
    return out;
}

FinalPrinciple Pipeline::load_principle(ConsolidationStrategy strategy) const {
    const fs::path path = principle_path(strategy);
    if (!fs::exists(path)) {
        throw MissingArtifactError(fmt::format("missing principle artifact {}", path.filename().string()));
    }
    return final_principle_from_json(read_json(path));
}

FinalPrinciple Pipeline::consolidate(ConsolidationStrategy strategy) {
    if (strategy == ConsolidationStrategy::human) {
        throw ConfigError("human principles are supplied with `import-principle <file>`");
    }
    const auto candidates = load_candidates();
    return stage(fmt::format("consolidate.{}", to_string(strategy)), true, [&] {
        auto ctx = context();
        FinalPrinciple fp;
        switch (strategy) {
            case ConsolidationStrategy::ranking: {
                auto outcome = consolidate_ranking(candidates, config_.consolidation.finalizers, dataset_,
                                                   config_.consolidation.top_k, config_.run_seed, ctx);
                json lists = json::array();
                for (const auto& l : outcome.lists) lists.push_back(to_json(l));
                write_file_atomic(run_dir_ / "rankings.json", dump_json(lists));
                fp = std::move(outcome.principle);
                break;
            }
            case ConsolidationStrategy::consolidation:
                fp = consolidate_llm(candidates, config_.consolidation.finalizer, dataset_, ctx, config_.run_seed);
                break;
            case ConsolidationStrategy::random: fp = consolidate_random(candidates, config_.run_seed); break;
            case ConsolidationStrategy::human: break;
        }
        write_file_atomic(principle_path(strategy), dump_json(to_json(fp)));
        return fp;
    });
}

FinalPrinciple Pipeline::import_principle(const fs::path& file) {
    return stage("import-principle", false, [&] {
        FinalPrinciple fp = human_principle(read_file(file), file.filename().string());
        write_file_atomic(principle_path(ConsolidationStrategy::human), dump_json(to_json(fp)));
        return fp;
    });
}

std::vector<RunResult> Pipeline::classify(const StrategySpec& strategy) {
    StrategySpec bound = strategy;
    if (bound.needs_principle_artifact()) bound.principle = load_principle(principle_source(bound)).text;
    const std::string label = bound.label();
    return stage("classify." + label, true, [&] {
        auto ctx = context();
        auto runs = run_strategy(dataset_, bound, config_.classifier, config_.seeds, ctx);
        std::vector<std::string> failures;
        for (const auto& run : runs) {
            write_file_atomic(run_path(label, run.seed), to_jsonl(run));
            for (const auto& r : run.records) {
                if (r.error.empty() || r.too_long) continue;
                failures.push_back(fmt::format("seed {} example {}: {}", run.seed, r.example_id, r.error));
            }
        }
        if (!failures.empty()) {
            record_failures("classify." + label, failures);
            throw PartialResultError(fmt::format("{}: {} record(s) failed", label, failures.size()));
        }
        return runs;
    });
}

std::optional<RunResult> Pipeline::load_run(const std::string& strategy_label, Seed seed) const {
    const fs::path path = run_path(strategy_label, seed);
    if (!fs::exists(path)) return std::nullopt;
    return run_result_from_jsonl(read_file(path), strategy_label, seed);
}

EvaluationBundle Pipeline::evaluate(const std::vector<fs::path>& include) {
    return stage("evaluate", false, [&] {
        EvaluationBundle bundle;
        std::vector<std::string> gaps;
        for (const auto& s : config_.strategies) {
            std::vector<RunResult> runs;
            std::vector<Seed> missing;
            for (Seed seed : config_.seeds) {
                if (auto run = load_run(s.label(), seed)) {
                    runs.push_back(std::move(*run));
                } else {
                    missing.push_back(seed);
                }
            }
            if (runs.empty()) {
                log_warning(fmt::format("no results for strategy {}; left out of the evaluation", s.label()));
                continue;
            }
            for (Seed seed : missing) gaps.push_back(fmt::format("{} seed {}: no results", s.label(), seed));
            bundle.reports.push_back(evaluate_runs(runs, dataset_));
        }
        std::map<std::string, std::vector<EvalReport>> by_dataset{{dataset_.task.name(), bundle.reports}};
        for (const auto& path : include) {
            const json other = read_json(path);
            if (!other.contains("evaluation")) throw MissingArtifactError(path.string() + " holds no evaluation");
            auto& list = by_dataset[other.at("dataset").get<std::string>()];
            for (const auto& r : other.at("evaluation")) list.push_back(eval_report_from_json(r));
        }
        if (bundle.reports.empty() ||
            std::none_of(bundle.reports.begin(), bundle.reports.end(),
                         [](const EvalReport& r) { return r.strategy == "vanilla"; })) {
            throw MissingArtifactError("missing vanilla baseline results; run `classify --strategy vanilla` first");
        }
        bundle.deltas = delta_table(by_dataset);
        write_file_atomic(report_dir_ / "deltas.csv", bundle.deltas.to_csv());

        json reports = json::array();
        for (const auto& r : bundle.reports) reports.push_back(to_json(r));
        update_report("evaluation", reports);
        update_report("deltas", {{"cells", bundle.deltas.cells}, {"avg", bundle.deltas.avg}});
        if (!gaps.empty()) {
            record_failures("evaluate", gaps);
            throw PartialResultError(fmt::format("evaluation has {} missing run(s)", gaps.size()));
        }
        return bundle;
    });
}

TokenProfile Pipeline::tokens() {
    return stage("tokens", false, [&] {
        std::optional<std::string> principle;
        for (auto s : {ConsolidationStrategy::consolidation, ConsolidationStrategy::ranking,
                       ConsolidationStrategy::random, ConsolidationStrategy::human}) {
            if (fs::exists(principle_path(s))) {
                principle = load_principle(s).text;
                break;
            }
        }
        if (!principle) log_warning("no principle artifact yet; token profile covers baselines only");
        const std::vector<StrategySpec> others{StrategySpec::parse("vanilla"), StrategySpec::parse("cot"),
                                               StrategySpec::parse("stepback")};
        TokenProfile profile = token_profile(dataset_, templates_, provider_->estimator(), principle,
                                             config_.run_seed, config_.token_ns, others);
        write_file_atomic(report_dir_ / "tokens.csv", profile.to_csv());
        update_report("tokens", to_json(profile));
        return profile;
    });
}

AblationReport Pipeline::ablate() {
    AblationConfig ac;
    ac.demo_counts = config_.grid.demo_counts;
    ac.label_flags = config_.grid.label_flags;
    ac.classifier_id = config_.classifier;
    ac.finalizer_id = config_.consolidation.finalizer;
    ac.candidates = load_candidates();
    ac.seeds = config_.seeds;
    ac.run_seed = config_.run_seed;
    return stage("ablate", true, [&] {
        auto ctx = context();
        AblationReport report = ablation_grid(dataset_, ac, ctx);
        write_file_atomic(report_dir_ / "ablation.csv", report.to_csv());
        update_report("ablation", to_json(report));
        if (!report.complete()) {
            std::vector<std::string> gaps;
            for (const auto& c : report.cells) {
                if (!c.report) {
                    gaps.push_back(fmt::format("{} n={} labels={}: {}", to_string(c.mode), c.n,
                                               c.labels ? "with" : "without", c.error));
                }
            }
            record_failures("ablate", gaps);
            throw PartialResultError(fmt::format("ablation grid has {} gap(s)", gaps.size()));
        }
        return report;
    });
}

void Pipeline::run_all() {
    generate();
    for (auto s : {ConsolidationStrategy::ranking, ConsolidationStrategy::consolidation, ConsolidationStrategy::random}) {
        consolidate(s);
    }
    std::vector<std::string> partial;
    for (const auto& s : config_.strategies) {
        if (s.kind == StrategyKind::principle_human && !fs::exists(principle_path(ConsolidationStrategy::human))) {
            log_warning("skipping principle_human: no imported principle");
            continue;
        }
        try {
            classify(s);
        } catch (const PartialResultError& e) {
            partial.push_back(e.what());
        }
    }
    try {
        evaluate();
    } catch (const PartialResultError& e) {
        partial.push_back(e.what());
    }
    tokens();
    if (!partial.empty()) throw PartialResultError(fmt::format("{} stage(s) incomplete: {}", partial.size(), partial.front()));
}

}  // namespace pbp::app
