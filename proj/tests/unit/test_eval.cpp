#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "pbp/error.hpp"
#include "pbp/eval.hpp"

namespace pbp {
namespace {

using Preds = std::vector<std::optional<ClassIndex>>;

// Confusion-matrix oracle; column `k` collects Unparsed predictions.
double oracle_macro_f1(const std::vector<ClassIndex>& gold, const Preds& pred, std::size_t k) {
    std::vector<std::vector<double>> m(k, std::vector<double>(k + 1, 0.0));
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const std::size_t col = pred[i] ? static_cast<std::size_t>(*pred[i]) : k;
        m[static_cast<std::size_t>(gold[i])][col] += 1.0;
    }
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        const double tp = m[c][c];
        double predicted = 0.0, actual = 0.0;
        for (std::size_t r = 0; r < k; ++r) predicted += m[r][c];
        for (std::size_t col = 0; col <= k; ++col) actual += m[c][col];
        const double p = predicted > 0 ? tp / predicted : 0.0;
        const double r = actual > 0 ? tp / actual : 0.0;
        total += (p + r) > 0 ? 2 * p * r / (p + r) : 0.0;
    }
    return total / static_cast<double>(k);
}

TEST(MacroF1, WorkedExample) {
    const auto s = macro_f1({0, 0, 1, 1}, {0, 1, 1, 1}, 2);
    EXPECT_NEAR(s.per_class[0].f1, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(s.per_class[1].f1, 4.0 / 5.0, 1e-12);
    EXPECT_NEAR(s.macro_f1, 11.0 / 15.0, 1e-12);
    EXPECT_EQ(s.per_class[0].support + s.per_class[1].support, 4u);
}

TEST(MacroF1, PerfectAndInverted) {
    EXPECT_DOUBLE_EQ(macro_f1({0, 1, 2, 1}, {0, 1, 2, 1}, 3).macro_f1, 1.0);
    EXPECT_DOUBLE_EQ(macro_f1({0, 1}, {1, 0}, 2).macro_f1, 0.0);
}

TEST(MacroF1, AbsentClassCountsAsZero) {
    EXPECT_NEAR(macro_f1({0, 1}, {0, 1}, 3).macro_f1, 2.0 / 3.0, 1e-12);
}

TEST(MacroF1, UnparsedIsAMissForTheGoldClass) {
    const auto s = macro_f1({0, 1}, {0, std::nullopt}, 2);
    EXPECT_EQ(s.unparsed, 1u);
    EXPECT_DOUBLE_EQ(s.per_class[0].precision, 1.0);
    EXPECT_DOUBLE_EQ(s.per_class[1].recall, 0.0);
    EXPECT_NEAR(s.macro_f1, 0.5, 1e-12);
}

TEST(MacroF1, RejectsBadInput) {
    EXPECT_THROW(macro_f1({0, 1}, {0}, 2), EvalError);
    EXPECT_THROW(macro_f1({0, 3}, {0, 1}, 2), EvalError);
    EXPECT_THROW(macro_f1({0, 1}, {0, 5}, 2), EvalError);
}

struct Instance {
    std::vector<ClassIndex> gold;
    Preds pred;
    std::size_t k;
};

Instance random_instance(std::mt19937_64& rng) {
    Instance in;
    in.k = std::uniform_int_distribution<std::size_t>(2, 6)(rng);
    const auto n = std::uniform_int_distribution<std::size_t>(1, 50)(rng);
    std::uniform_int_distribution<int> cls(0, static_cast<int>(in.k) - 1);
    std::uniform_int_distribution<int> coin(0, 9);
    for (std::size_t i = 0; i < n; ++i) {
        in.gold.push_back(cls(rng));
        in.pred.push_back(coin(rng) == 0 ? std::nullopt : std::optional<ClassIndex>(cls(rng)));
    }
    return in;
}

TEST(MacroF1Property, MatchesOracleOnRandomInstances) {
    std::mt19937_64 rng(20240611);
    for (int t = 0; t < 200; ++t) {
        const auto in = random_instance(rng);
        EXPECT_NEAR(macro_f1(in.gold, in.pred, in.k).macro_f1, oracle_macro_f1(in.gold, in.pred, in.k), 1e-9);
    }
}

TEST(MacroF1Property, InvariantUnderReordering) {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 100; ++t) {
        auto in = random_instance(rng);
        const double before = macro_f1(in.gold, in.pred, in.k).macro_f1;
        std::vector<std::size_t> order(in.gold.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        Instance shuffled{{}, {}, in.k};
        for (auto i : order) {
            shuffled.gold.push_back(in.gold[i]);
            shuffled.pred.push_back(in.pred[i]);
        }
        EXPECT_NEAR(macro_f1(shuffled.gold, shuffled.pred, in.k).macro_f1, before, 1e-12);
    }
}

TEST(MacroF1Property, UnparsingACorrectPredictionNeverHelps) {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 200; ++t) {
        auto in = random_instance(rng);
        for (std::size_t i = 0; i < in.gold.size(); ++i) {
            if (in.pred[i] != in.gold[i]) continue;
            const double before = macro_f1(in.gold, in.pred, in.k).macro_f1;
            in.pred[i].reset();
            EXPECT_LE(macro_f1(in.gold, in.pred, in.k).macro_f1, before + 1e-12);
        }
    }
}

RunResult run_of(const Dataset& ds, const std::vector<std::optional<ClassIndex>>& preds, std::string strategy = "s",
                 Seed seed = 0) {
    RunResult r{std::move(strategy), seed, std::nullopt, {}};
    for (std::size_t i = 0; i < preds.size(); ++i) {
        PredictionRecord rec;
        rec.example_id = ds.test[i].id;
        rec.parsed = preds[i];
        rec.prompt_tokens = {10 + i, "segment/v1"};
        r.records.push_back(rec);
    }
    return r;
}

TEST(MacroF1Run, AlignsByIdAndChecksCoverage) {
    const auto ds = testing::synthetic_dataset("irony2018", 1, 2);  // test labels 0,1,0,1
    auto run = run_of(ds, {0, 1, 0, 1});
    std::reverse(run.records.begin(), run.records.end());
    EXPECT_DOUBLE_EQ(macro_f1(run, ds).macro_f1, 1.0);

    auto missing = run;
    missing.records.pop_back();
    EXPECT_THROW(macro_f1(missing, ds), EvalError);
    auto dup = run;
    dup.records.back() = dup.records.front();
    EXPECT_THROW(macro_f1(dup, ds), EvalError);
    auto unknown = run;
    unknown.records[0].example_id = "ghost";
    EXPECT_THROW(macro_f1(unknown, ds), EvalError);
}

SeedScore seed_score(std::string strategy, Seed seed, double f1) {
    SeedScore s;
    s.strategy = std::move(strategy);
    s.seed = seed;
    s.scores.macro_f1 = f1;
    return s;
}

TEST(AggregateSeeds, MeanAndSampleStd) {
    const auto r = aggregate_seeds({seed_score("a", 1, 0.5), seed_score("a", 2, 0.7)});
    EXPECT_NEAR(r.mean, 0.6, 1e-12);
    EXPECT_NEAR(r.std, std::sqrt(0.02), 1e-12);
    EXPECT_FALSE(r.single_seed);
    EXPECT_EQ(r.per_seed.size(), 2u);

    const auto one = aggregate_seeds({seed_score("a", 1, 0.4)});
    EXPECT_TRUE(one.single_seed);
    EXPECT_EQ(one.std, 0.0);

    std::vector<SeedScore> same;
    for (Seed s = 0; s < 5; ++s) same.push_back(seed_score("a", s, 0.8));
    EXPECT_EQ(aggregate_seeds(same).std, 0.0);

    EXPECT_THROW(aggregate_seeds({}), EvalError);
    EXPECT_THROW(aggregate_seeds({seed_score("a", 1, 0.5), seed_score("b", 2, 0.5)}), EvalError);
}

TEST(EvaluateRuns, TracksUnparsedAndTokens) {
    const auto ds = testing::synthetic_dataset("irony2018", 1, 2);
    const auto r = evaluate_runs({run_of(ds, {0, 1, std::nullopt, 1}, "s", 1), run_of(ds, {0, 1, 0, 1}, "s", 2)}, ds);
    EXPECT_EQ(r.unparsed_count, 1u);
    EXPECT_DOUBLE_EQ(r.per_seed[1].scores.macro_f1, 1.0);
    EXPECT_NEAR(r.mean_prompt_tokens, 11.5, 1e-12);
}

EvalReport report(std::string strategy, double mean) {
    EvalReport r;
    r.strategy = std::move(strategy);
    r.mean = mean;
    return r;
}

TEST(DeltaTable, PercentagePointsOverTheBaseline) {
    const auto t = delta_table({{"irony", {report("vanilla", 0.50), report("principle", 0.62)}}});
    EXPECT_NEAR(*t.cell("principle", "irony"), 12.0, 1e-9);
    EXPECT_EQ(*t.cell("vanilla", "irony"), 0.0);
    EXPECT_EQ(t.strategies, (std::vector<std::string>{"vanilla", "principle"}));
    EXPECT_EQ(t.to_csv(), "method,irony,AVG\nvanilla,0.00,0.00\nprinciple,12.00,12.00\n");
}

TEST(DeltaTable, AverageOverPresentDatasets) {
    DeltaTable t = delta_table({{"a", {report("vanilla", 0.5), report("x", 0.5477)}},
                                {"b", {report("vanilla", 0.3), report("x", 0.4511)}},
                                {"c", {report("vanilla", 0.6), report("x", 0.7417)}},
                                {"d", {report("vanilla", 0.6)}}});
    EXPECT_NEAR(t.avg.at("x"), (4.77 + 15.11 + 14.17) / 3.0, 1e-9);
    EXPECT_EQ(t.to_csv().substr(t.to_csv().find("\nx,")), "\nx,4.77,15.11,14.17,NA,11.35\n");
}

TEST(DeltaTable, MissingBaselineAndNegativeZero) {
    EXPECT_THROW(delta_table({{"a", {report("x", 0.5)}}}), EvalError);
    const auto t = delta_table({{"a", {report("vanilla", 0.3), report("x", 0.3 - 1e-15)}}});
    EXPECT_EQ(t.to_csv().find("-0.00"), std::string::npos);
}

TEST(DeltaTable, Antisymmetric) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double a = u(rng), b = u(rng);
        EXPECT_NEAR(delta_points(a, b), -delta_points(b, a), 1e-12);
    }
}

TEST(FitLine, ExactLineAndNoise) {
    const auto f = fit_line({1, 2, 4, 8}, {13, 23, 43, 83});
    EXPECT_NEAR(f.slope, 10.0, 1e-12);
    EXPECT_NEAR(f.intercept, 3.0, 1e-12);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
    EXPECT_EQ(fit_line({1, 2}, {5, 5}).r_squared, 1.0);
    EXPECT_THROW(fit_line({1}, {1}), EvalError);
    EXPECT_THROW(fit_line({2, 2}, {1, 3}), EvalError);
}

TEST(TokenProfile, LinearFewshotAndCrossover) {
    const auto ds = testing::synthetic_dataset("irony2018", 10, 3);
    const auto templates = TemplateRegistry::with_builtins();
    SegmentingEstimator est;
    std::string principle;
    for (int i = 0; i < 10; ++i) principle += "Irony contrasts literal and intended meaning. ";
    const auto p = token_profile(ds, templates, est, principle, 1, {1, 2, 4, 8}, {StrategySpec::parse("vanilla")});

    EXPECT_GT(p.fewshot_fit.r_squared, 0.99);
    double prev = 0.0;
    for (const auto& r : p.rows) {
        if (!r.n) continue;
        EXPECT_GE(r.mean_tokens, prev);
        prev = r.mean_tokens;
    }
    ASSERT_TRUE(p.principle_tokens);
    ASSERT_TRUE(p.crossover_n);
    for (const auto& r : p.rows) {
        if (!r.n) continue;
        if (*r.n < *p.crossover_n) {
            EXPECT_LT(r.mean_tokens, *p.principle_tokens);
        } else if (*r.n == *p.crossover_n) {
            EXPECT_GE(r.mean_tokens, *p.principle_tokens);
        }
    }
    const double fitted = p.fewshot_fit.slope * *p.equivalent_n + p.fewshot_fit.intercept;
    EXPECT_NEAR(fitted, *p.principle_tokens, 1e-9);
    const auto csv = p.to_csv();
    EXPECT_EQ(csv.rfind("strategy,n,mean_prompt_tokens,note\nvanilla,,", 0), 0u);
    EXPECT_NE(csv.find("fewshot-n" + std::to_string(*p.crossover_n) + ","), std::string::npos);
    EXPECT_NE(csv.find(",crossover\n"), std::string::npos);
    EXPECT_NE(csv.find("equivalent_n="), std::string::npos);
}

TEST(TokenProfile, SkipsUnaffordableN) {
    set_warnings_enabled(false);
    const auto ds = testing::synthetic_dataset("irony2018", 3, 1);
    const auto p = token_profile(ds, TemplateRegistry::with_builtins(), SegmentingEstimator{}, std::nullopt, 1);
    set_warnings_enabled(true);
    EXPECT_EQ(p.skipped_ns, (std::vector<std::size_t>{4, 8}));
    EXPECT_EQ(p.rows.size(), 2u);
    EXPECT_FALSE(p.crossover_n);
}

struct AblationFixture {
    Provider provider;
    TemplateRegistry templates = TemplateRegistry::with_builtins();
    StageContext ctx{provider, templates, SamplingParams{}, 4};
    Dataset dataset = testing::synthetic_dataset("irony2018", 10, 3);
    AblationConfig config;

    AblationFixture() {
        testing::add_scripted(provider, "clf", {AgentRole::classifier, AgentRole::generator},
                              {testing::contains("extract principles", "Key principles:\n- self rule"),
                               testing::regex("Statement: ironic", "yes")},
                              "no");
        testing::add_scripted(provider, "fin", {AgentRole::finalizer}, {}, "Key principles:\n- merged");
        config.classifier_id = "clf";
        config.finalizer_id = "fin";
        config.seeds = {1, 2};
        for (std::size_t n : {4, 8, 16}) {
            for (bool labels : {true, false}) {
                const auto id = "P" + std::to_string(config.candidates.size() + 1);
                config.candidates.push_back({id, "rule " + id, {"gen", n, labels}, ""});
            }
        }
    }
};

TEST(Ablation, TwelveCellsInOrder) {
    AblationFixture f;
    const auto r = ablation_grid(f.dataset, f.config, f.ctx);
    ASSERT_EQ(r.cells.size(), 12u);
    EXPECT_TRUE(r.complete());
    EXPECT_EQ(r.cells[0].mode, AgentMode::single);
    EXPECT_EQ(r.cells[1].labels, false);
    EXPECT_EQ(r.cells[2].n, 8u);
    EXPECT_EQ(r.cells[6].mode, AgentMode::multi);
    for (const auto& c : r.cells) EXPECT_DOUBLE_EQ(c.report->mean, 1.0);
    EXPECT_EQ(f.provider.ledger().count(Purpose::consolidation), 6u);
    EXPECT_EQ(f.provider.ledger().count(Purpose::generation), 12u);  // 6 single cells x 2 seeds
    const auto csv = r.to_csv();
    EXPECT_EQ(csv.rfind("agent_mode,n,labels,macro_f1,std,status\nsingle,4,with,1.0000,0.0000,ok\n", 0), 0u);
}

TEST(Ablation, FailedCellIsAGap) {
    set_warnings_enabled(false);
    AblationFixture f;
    f.config.candidates.pop_back();  // no candidates for (16, without)
    const auto r = ablation_grid(f.dataset, f.config, f.ctx);
    set_warnings_enabled(true);
    ASSERT_EQ(r.cells.size(), 12u);
    EXPECT_FALSE(r.complete());
    EXPECT_FALSE(r.cells[11].report);
    EXPECT_FALSE(r.cells[11].error.empty());
    EXPECT_NE(r.to_csv().find("multi,16,without,NA,NA,gap\n"), std::string::npos);
}

}  // namespace
}  // namespace pbp
