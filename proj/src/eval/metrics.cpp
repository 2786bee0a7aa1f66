#include <cmath>
#include <numeric>
#include <unordered_map>

#include "pbp/error.hpp"
#include "pbp/eval.hpp"

namespace pbp {

ClassScores macro_f1(const std::vector<ClassIndex>& gold, const std::vector<std::optional<ClassIndex>>& predicted,
                     std::size_t num_classes) {
    if (gold.size() != predicted.size()) throw EvalError("gold and prediction lengths differ");
    if (num_classes == 0) throw EvalError("empty label space");
    std::vector<std::size_t> tp(num_classes), fp(num_classes), fn(num_classes);
    ClassScores out;
    out.per_class.resize(num_classes);
    auto in_range = [&](ClassIndex c) { return c >= 0 && static_cast<std::size_t>(c) < num_classes; };
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (!in_range(gold[i])) throw EvalError("gold label out of range");
        const auto g = static_cast<std::size_t>(gold[i]);
        ++out.per_class[g].support;
        if (!predicted[i]) {
            ++out.unparsed;
            ++fn[g];
            continue;
        }
        if (!in_range(*predicted[i])) throw EvalError("predicted label out of range");
        const auto p = static_cast<std::size_t>(*predicted[i]);
        if (p == g) {
            ++tp[g];
        } else {
            ++fp[p];
            ++fn[g];
        }
    }
    double sum = 0.0;
    for (std::size_t c = 0; c < num_classes; ++c) {
        auto& s = out.per_class[c];
        s.precision = tp[c] + fp[c] ? static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fp[c]) : 0.0;
        s.recall = tp[c] + fn[c] ? static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fn[c]) : 0.0;
        s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
        sum += s.f1;
    }
    out.macro_f1 = sum / static_cast<double>(num_classes);
    return out;
}

namespace {

std::vector<const PredictionRecord*> align(const RunResult& run, const Dataset& dataset) {
    std::unordered_map<std::string_view, std::size_t> index;
    for (std::size_t i = 0; i < dataset.test.size(); ++i) index.emplace(dataset.test[i].id, i);
    std::vector<const PredictionRecord*> by_test(dataset.test.size(), nullptr);
    for (const auto& rec : run.records) {
        auto it = index.find(rec.example_id);
        if (it == index.end()) throw EvalError("record for unknown example id '" + rec.example_id + "'");
        if (by_test[it->second]) throw EvalError("duplicate record for example id '" + rec.example_id + "'");
        by_test[it->second] = &rec;
    }
    for (std::size_t i = 0; i < by_test.size(); ++i) {
        if (!by_test[i]) throw EvalError("missing record for example id '" + dataset.test[i].id + "'");
    }
    return by_test;
}

}  // namespace

ClassScores macro_f1(const RunResult& run, const Dataset& dataset) {
    const auto records = align(run, dataset);
    std::vector<ClassIndex> gold;
    std::vector<std::optional<ClassIndex>> pred;
    for (std::size_t i = 0; i < records.size(); ++i) {
        gold.push_back(dataset.test[i].label);
        pred.push_back(records[i]->parsed);
    }
    return macro_f1(gold, pred, dataset.task.num_classes());
}

SeedScore score_run(const RunResult& run, const Dataset& dataset) {
    SeedScore s{run.strategy, run.seed, macro_f1(run, dataset)};
    double tokens = 0.0;
    for (const auto& r : run.records) {
        tokens += static_cast<double>(r.prompt_tokens.count);
        s.too_long += r.too_long;
        s.failed += !r.error.empty() && !r.too_long;
    }
    s.mean_prompt_tokens = run.records.empty() ? 0.0 : tokens / static_cast<double>(run.records.size());
    return s;
}

EvalReport aggregate_seeds(std::vector<SeedScore> per_seed) {
    if (per_seed.empty()) throw EvalError("aggregate_seeds: no seeds");
    EvalReport r;
    r.strategy = per_seed.front().strategy;
    const double n = static_cast<double>(per_seed.size());
    double tokens = 0.0;
    for (const auto& s : per_seed) {
        if (s.strategy != r.strategy) {
            throw EvalError("aggregate_seeds: mixed strategies '" + r.strategy + "' and '" + s.strategy + "'");
        }
        r.mean += s.scores.macro_f1;
        r.unparsed_count += s.scores.unparsed;
        tokens += s.mean_prompt_tokens;
    }
    r.mean /= n;
    r.mean_prompt_tokens = tokens / n;
    r.single_seed = per_seed.size() == 1;
    if (!r.single_seed) {
        double ss = 0.0;
        for (const auto& s : per_seed) ss += (s.scores.macro_f1 - r.mean) * (s.scores.macro_f1 - r.mean);
        r.std = std::sqrt(ss / (n - 1.0));
    }
    r.per_seed = std::move(per_seed);
    return r;
}

EvalReport evaluate_runs(const std::vector<RunResult>& runs, const Dataset& dataset) {
    std::vector<SeedScore> scores;
    for (const auto& run : runs) scores.push_back(score_run(run, dataset));
    return aggregate_seeds(std::move(scores));
}

}  // namespace pbp
