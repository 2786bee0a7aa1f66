#include "pbp/app/cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <iostream>

#include "pbp/app/artifacts.hpp"
#include "pbp/app/config.hpp"
#include "pbp/app/pipeline.hpp"
#include "pbp/error.hpp"

namespace pbp::app {

namespace fs = std::filesystem;

namespace {

struct GlobalFlags {
    std::string config;
    std::optional<Seed> seed;
    bool offline = false;
    std::optional<std::string> cache_dir;
    std::optional<std::string> out_dir;
};

Pipeline open_pipeline(const GlobalFlags& g) {
    ConfigOverrides o;
    o.seed = g.seed;
    if (g.cache_dir) o.cache_dir = fs::path(*g.cache_dir);
    if (g.out_dir) o.out_dir = fs::path(*g.out_dir);
    return Pipeline(load_config(g.config, o), PipelineOptions{g.offline});
}

void print_ledger_summary(Pipeline& p) {
    const auto counts = p.provider().ledger().counts();
    std::size_t hits = 0;
    for (const auto& e : p.provider().ledger().entries()) hits += e.cache_hit;
    std::string parts;
    for (const auto& [purpose, n] : counts) parts += fmt::format(" {}={}", to_string(purpose), n);
    std::cout << fmt::format("last stage calls:{} (cache hits {}); backend calls this invocation: {}\n",
                             parts.empty() ? " none" : parts, hits, p.provider().backend_calls());
}

int dispatch(CLI::App& app, const GlobalFlags& g, const std::string& consolidation, const std::string& strategy,
             const std::vector<std::string>& include, const std::string& principle_file) {
    auto* sub = app.get_subcommands().front();
    const std::string cmd = sub->get_name();
    Pipeline p = open_pipeline(g);
    std::cout << fmt::format("run {} ({})\n", p.run_id(), p.run_dir().string());

    if (cmd == "generate") {
        const auto c = p.generate();
        std::cout << fmt::format("{} candidates -> {}\n", c.size(), (p.run_dir() / "candidates.json").string());
    } else if (cmd == "consolidate") {
        const auto fp = p.consolidate(consolidation_strategy_from_string(consolidation));
        std::cout << fmt::format("{} principle -> {}\n", consolidation, p.principle_path(fp.strategy).string());
    } else if (cmd == "classify") {
        const auto runs = p.classify(StrategySpec::parse(strategy));
        std::cout << fmt::format("{} seed(s) of {} classified\n", runs.size(), strategy);
    } else if (cmd == "evaluate") {
        std::vector<fs::path> paths(include.begin(), include.end());
        const auto bundle = p.evaluate(paths);
        std::cout << bundle.deltas.to_csv();
    } else if (cmd == "ablate") {
        const auto r = p.ablate();
        std::cout << r.to_csv();
    } else if (cmd == "tokens") {
        const auto t = p.tokens();
        std::cout << t.to_csv();
    } else if (cmd == "run") {
        p.run_all();
        std::cout << fmt::format("reports -> {}\n", p.report_dir().string());
        const auto manifest = read_json(p.run_dir() / "manifest.json");
        for (const auto& [purpose, n] : manifest.at("ledger").at("by_purpose").items()) {
            std::cout << fmt::format("  {} calls: {}\n", purpose, n.get<std::size_t>());
        }
    } else if (cmd == "import-principle") {
        p.import_principle(principle_file);
        std::cout << fmt::format("human principle -> {}\n", p.principle_path(ConsolidationStrategy::human).string());
    }
    print_ledger_summary(p);
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Principle-based prompting pipeline for LLM text classification", "pbp"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalFlags g;
    app.add_option("--config", g.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Override the run seed");
    app.add_flag("--offline", g.offline, "Refuse HTTP backends");
    app.add_option("--cache-dir", g.cache_dir, "Response cache directory");
    app.add_option("--out-dir", g.out_dir, "Root for runs/ and reports/");

    std::string consolidation, strategy, principle_file;
    std::vector<std::string> include;
    app.add_subcommand("generate", "Generate candidate principles over the grid");
    app.add_subcommand("consolidate", "Reduce candidates to one principle")
        ->add_option("--strategy", consolidation, "ranking | consolidation | random")
        ->required()
        ->check(CLI::IsMember({"ranking", "consolidation", "random"}));
    app.add_subcommand("classify", "Classify the test split with one strategy")
        ->add_option("--strategy", strategy, "vanilla | cot | stepback | fewshot:<n> | principle_single | "
                                             "principle_multi:<ranking|consolidation|random> | principle_human")
        ->required();
    app.add_subcommand("evaluate", "Score classified runs and write the delta table")
        ->add_option("--include", include, "report.json of other runs to add as dataset columns")
        ->check(CLI::ExistingFile);
    app.add_subcommand("ablate", "Demo count x label flag x agent mode grid");
    app.add_subcommand("tokens", "Prompt length profile for few-shot and principle prompts");
    app.add_subcommand("run", "generate, consolidate, classify, evaluate and tokens");
    app.add_subcommand("import-principle", "Import a human-written principle")
        ->add_option("file", principle_file, "Plain-text principle")
        ->required()
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        return dispatch(app, g, consolidation, strategy, include, principle_file);
    } catch (const PartialResultError& e) {
        std::cerr << "pbp: partial results: " << e.what() << "\n";
        return kExitPartial;
    } catch (const ConfigError& e) {
        std::cerr << "pbp: config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const MissingArtifactError& e) {
        std::cerr << "pbp: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "pbp: data error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const TemplateError& e) {
        std::cerr << "pbp: template error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const EvalError& e) {
        std::cerr << "pbp: evaluation error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const StageError& e) {
        std::cerr << "pbp: stage failed: " << e.what() << "\n";
        return kExitProvider;
    } catch (const ProviderError& e) {
        std::cerr << "pbp: provider failure: " << e.what() << "\n";
        return kExitProvider;
    } catch (const std::exception& e) {
        std::cerr << "pbp: " << e.what() << "\n";
        return kExitInternal;
    }
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("pbp");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace pbp::app
