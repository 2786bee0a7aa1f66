#include <gtest/gtest.h>

#include <mutex>

#include "fixtures.hpp"
#include "pbp/classify.hpp"
#include "pbp/error.hpp"

namespace pbp {
namespace {

using testing::add_scripted;
using testing::contains;
using testing::regex;

TEST(ParseAnswer, IronyFamily) {
    const auto task = builtin_task("irony2018");
    EXPECT_EQ(parse_answer("yes", task), 1);
    EXPECT_EQ(parse_answer("  No.\n", task), 0);
    EXPECT_EQ(parse_answer("**YES**", task), 1);
    EXPECT_EQ(parse_answer("Answer: yes, it is ironic", task), 1);
    EXPECT_EQ(parse_answer("yes and no", task), std::nullopt);
    EXPECT_EQ(parse_answer("maybe", task), std::nullopt);
    EXPECT_EQ(parse_answer("", task), std::nullopt);
    EXPECT_EQ(parse_answer("nobody knows", task), std::nullopt);  // word match only
}

TEST(ParseAnswer, EmotionFinancialAndProductFamilies) {
    const auto emotion = builtin_task("emotion20");
    EXPECT_EQ(parse_answer("Optimism", emotion), 2);
    EXPECT_EQ(parse_answer("The emotion is sadness.", emotion), 3);
    EXPECT_EQ(parse_answer("joy or anger", emotion), std::nullopt);

    const auto fin = builtin_task("financial");
    EXPECT_EQ(parse_answer("Neutral", fin), 2);
    EXPECT_EQ(parse_answer("Sentiment: negative", fin), 0);
    EXPECT_EQ(parse_answer("positive, not negative", fin), std::nullopt);

    const auto product = builtin_task("binary-product");
    EXPECT_EQ(parse_answer("Yes!", product), 1);
}

TEST(ParseAnswer, EveryLabelWordRoundTrips) {
    for (const auto& name : builtin_task_names()) {
        const auto task = builtin_task(name);
        for (std::size_t c = 0; c < task.num_classes(); ++c) {
            const auto label = static_cast<ClassIndex>(c);
            const auto& word = task.render_label_word(label);
            EXPECT_EQ(parse_answer(word, task), label);
            EXPECT_EQ(parse_answer("  " + word + ".  ", task), label);
        }
    }
}

TEST(StrategySpec, ParseAndLabel) {
    EXPECT_EQ(StrategySpec::parse("vanilla").label(), "vanilla");
    EXPECT_EQ(StrategySpec::parse("fewshot:2").label(), "fewshot-n2");
    EXPECT_EQ(StrategySpec::parse("fewshot:2").n_per_class, 2u);
    EXPECT_EQ(StrategySpec::parse("principle_multi").label(), "principle_multi-consolidation");
    EXPECT_EQ(StrategySpec::parse("principle_multi:ranking").label(), "principle_multi-ranking");
    EXPECT_EQ(StrategySpec::parse("principle_human").kind, StrategyKind::principle_human);
    EXPECT_THROW(StrategySpec::parse("fewshot"), ConfigError);
    EXPECT_THROW(StrategySpec::parse("fewshot:0"), ConfigError);
    EXPECT_THROW(StrategySpec::parse("fewshot:x"), ConfigError);
    EXPECT_THROW(StrategySpec::parse("cot:3"), ConfigError);
    EXPECT_THROW(StrategySpec::parse("principle_multi:vote"), ConfigError);
    EXPECT_THROW(StrategySpec::parse("zeroshot"), ConfigError);
}

TEST(StrategySpec, ParametersOnlyWhereTheKindNeedsThem) {
    StrategySpec s;
    s.kind = StrategyKind::vanilla;
    s.n_per_class = 2;
    EXPECT_THROW(s.validate(), ConfigError);
    s = StrategySpec{};
    s.principle = "p";
    EXPECT_THROW(s.validate(), ConfigError);
    s = StrategySpec::parse("principle_multi:ranking");
    EXPECT_NO_THROW(s.validate());
    try {
        s.validate(true);
        FAIL();
    } catch (const MissingArtifactError& e) {
        EXPECT_NE(std::string(e.what()).find("missing principle artifact"), std::string::npos);
    }
    s.principle = "p";
    EXPECT_NO_THROW(s.validate(true));
    EXPECT_NO_THROW(StrategySpec::parse("principle_single").validate(true));
}

struct Fixture {
    Provider provider;
    TemplateRegistry templates = TemplateRegistry::with_builtins();
    StageContext ctx{provider, templates, SamplingParams{}, 4};
    Dataset dataset = testing::synthetic_dataset("irony2018", 10, 5);
    std::vector<std::string> prompts;
    std::vector<Purpose> purposes;
    std::mutex mu;

    Fixture() {
        provider.set_call_hook([this](const AgentSpec&, const CompletionRequest& req) {
            std::lock_guard lock(mu);
            prompts.push_back(req.prompt);
            purposes.push_back(req.purpose);
        });
    }
};

TEST(ClassifyOne, StepbackMakesTwoCalls) {
    Fixture f;
    add_scripted(f.provider, "clf", {AgentRole::classifier},
                 {contains("What are the principles", "Irony says the opposite."),
                  contains("Irony says the opposite.", "yes")},
                 "no");
    const auto rec = classify_one(f.dataset.test[0], f.dataset, StrategySpec::parse("stepback"), "clf", 1, f.ctx);
    EXPECT_EQ(rec.calls_used, 2u);
    EXPECT_EQ(rec.parsed, 1);
    ASSERT_EQ(f.prompts.size(), 2u);
    EXPECT_NE(f.prompts[0].find("What are the principles or important features to distinguish"), std::string::npos);
    EXPECT_EQ(f.purposes, (std::vector<Purpose>{Purpose::stepback_1, Purpose::stepback_2}));
    SegmentingEstimator est;
    EXPECT_EQ(rec.prompt_tokens.count, est.count(f.prompts[0]) + est.count(f.prompts[1]));
}

TEST(ClassifyOne, PrincipleIsBoundIntoThePrompt) {
    Fixture f;
    add_scripted(f.provider, "clf", {AgentRole::classifier}, {contains("PRINCIPLE-XYZ", "No")}, "yes");
    auto spec = StrategySpec::parse("principle_multi:consolidation");
    spec.principle = "PRINCIPLE-XYZ";
    const auto rec = classify_one(f.dataset.test[0], f.dataset, spec, "clf", 1, f.ctx);
    EXPECT_EQ(rec.raw_output, "No");
    EXPECT_EQ(rec.parsed, 0);
    EXPECT_EQ(rec.calls_used, 1u);
    spec.principle.reset();
    EXPECT_THROW(classify_one(f.dataset.test[0], f.dataset, spec, "clf", 1, f.ctx), MissingArtifactError);
}

TEST(ClassifyOne, TooLongBecomesAFlaggedUnparsedRecord) {
    Fixture f;
    add_scripted(f.provider, "clf", {AgentRole::classifier}, {}, "yes", 60);
    const auto rec = classify_one(f.dataset.test[0], f.dataset, StrategySpec::parse("fewshot:8"), "clf", 1, f.ctx);
    EXPECT_TRUE(rec.too_long);
    EXPECT_EQ(rec.parsed, std::nullopt);
    EXPECT_EQ(rec.calls_used, 0u);
    EXPECT_GT(rec.prompt_tokens.count, 60u);
    EXPECT_EQ(f.provider.backend_calls(), 0u);
}

TEST(BuildPrompt, FewshotDemosAreStratifiedAndSeeded) {
    Fixture f;
    const auto spec = StrategySpec::parse("fewshot:3");
    const auto& ex = f.dataset.test[0];
    const std::string a = build_prompt(ex, f.dataset, spec, 1, f.templates);
    EXPECT_EQ(a, build_prompt(ex, f.dataset, spec, 1, f.templates));
    EXPECT_NE(a, build_prompt(ex, f.dataset, spec, 2, f.templates));
    std::size_t yes = 0, no = 0;
    for (auto pos = a.find("Answer: yes"); pos != std::string::npos; pos = a.find("Answer: yes", pos + 1)) ++yes;
    for (auto pos = a.find("Answer: no"); pos != std::string::npos; pos = a.find("Answer: no", pos + 1)) ++no;
    EXPECT_EQ(yes, 3u);
    EXPECT_EQ(no, 3u);
}

TEST(RunStrategy, OneRecordPerExamplePerSeed) {
    Fixture f;
    add_scripted(f.provider, "clf", {AgentRole::classifier}, {regex("Statement: ironic", "yes")}, "no");
    const std::vector<Seed> seeds{1, 2, 3, 4, 5};
    const auto runs = run_strategy(f.dataset, StrategySpec::parse("vanilla"), "clf", seeds, f.ctx);
    ASSERT_EQ(runs.size(), 5u);
    for (std::size_t s = 0; s < runs.size(); ++s) {
        EXPECT_EQ(runs[s].seed, seeds[s]);
        EXPECT_EQ(runs[s].strategy, "vanilla");
        ASSERT_EQ(runs[s].records.size(), 10u);
        for (std::size_t i = 0; i < 10; ++i) {
            const auto& r = runs[s].records[i];
            EXPECT_EQ(r.example_id, f.dataset.test[i].id);
            EXPECT_EQ(r.parsed, f.dataset.test[i].label);
        }
    }
    EXPECT_EQ(f.provider.ledger().count(Purpose::classification), 50u);
}

TEST(RunStrategy, DeterministicAcrossInvocations) {
    auto once = [] {
        Fixture f;
        add_scripted(f.provider, "clf", {AgentRole::classifier}, {regex("w1[0-9]", "yes")}, "no");
        return run_strategy(f.dataset, StrategySpec::parse("fewshot:2"), "clf", {3, 9}, f.ctx);
    };
    const auto a = once();
    const auto b = once();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].records, b[i].records);
}

TEST(RunStrategy, PrincipleSingleGeneratesOncePerSeed) {
    Fixture f;
    add_scripted(f.provider, "clf", {AgentRole::classifier, AgentRole::generator},
                 {contains("extract principles", "Key principles:\n- own rule"), contains("- own rule", "yes")}, "no");
    const auto runs = run_strategy(f.dataset, StrategySpec::parse("principle_single"), "clf", {1, 2, 3}, f.ctx);
    EXPECT_EQ(f.provider.ledger().count(Purpose::generation), 3u);
    EXPECT_EQ(f.provider.ledger().count(Purpose::classification), 30u);
    for (const auto& r : runs) {
        EXPECT_EQ(r.principle, "- own rule");
        for (const auto& rec : r.records) EXPECT_EQ(rec.parsed, 1);
    }
}

TEST(RunStrategy, EveryExampleFailingIsAStageError) {
    Fixture f;
    class Down : public Backend {
    public:
        BackendReply send(const AgentSpec&, const CompletionRequest&) override {
            throw BackendRefusalError("HTTP 400");
        }
    };
    f.provider.add_agent(testing::scripted_agent("clf", {AgentRole::classifier}), std::make_unique<Down>());
    EXPECT_THROW(run_strategy(f.dataset, StrategySpec::parse("cot"), "clf", {1}, f.ctx), StageError);
}

TEST(RunStrategy, AllTooLongIsNotAFailure) {
    Fixture f;
    add_scripted(f.provider, "clf", {AgentRole::classifier}, {}, "yes", 5);
    const auto runs = run_strategy(f.dataset, StrategySpec::parse("vanilla"), "clf", {1}, f.ctx);
    for (const auto& r : runs[0].records) EXPECT_TRUE(r.too_long);
}

TEST(RunStrategy, RejectsEmptySeedsAndMissingPrinciple) {
    Fixture f;
    add_scripted(f.provider, "clf", {AgentRole::classifier}, {}, "yes");
    EXPECT_THROW(run_strategy(f.dataset, StrategySpec::parse("vanilla"), "clf", {}, f.ctx), ConfigError);
    EXPECT_THROW(run_strategy(f.dataset, StrategySpec::parse("principle_human"), "clf", {1}, f.ctx),
                 MissingArtifactError);
}

}  // namespace
}  // namespace pbp
