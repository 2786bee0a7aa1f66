#include <fmt/format.h>

#include "pbp/error.hpp"
#include "pbp/eval.hpp"

namespace pbp {

LinearFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw EvalError("fit_line needs at least two paired points");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) throw EvalError("fit_line: all x values are equal");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

namespace {

double mean_prompt_tokens(const Dataset& dataset, const StrategySpec& strategy, Seed seed,
                          const TemplateRegistry& templates, const TokenEstimator& estimator) {
    if (dataset.test.empty()) throw EvalError("token profile: test split is empty");
    double sum = 0.0;
    for (const auto& ex : dataset.test) {
        sum += static_cast<double>(estimator.count(build_prompt(ex, dataset, strategy, seed, templates)));
    }
    return sum / static_cast<double>(dataset.test.size());
}

}  // namespace

TokenProfile token_profile(const Dataset& dataset, const TemplateRegistry& templates, const TokenEstimator& estimator,
                           const std::optional<std::string>& principle, Seed seed,
                           const std::vector<std::size_t>& fewshot_ns, const std::vector<StrategySpec>& others) {
    TokenProfile p;
    p.estimator_id = estimator.id();

    for (const auto& s : others) {
        p.rows.push_back({s.label(), std::nullopt, mean_prompt_tokens(dataset, s, seed, templates, estimator)});
    }

    std::vector<double> xs, ys;
    for (std::size_t n : fewshot_ns) {
        StrategySpec fs;
        fs.kind = StrategyKind::fewshot;
        fs.n_per_class = n;
        double mean = 0.0;
        try {
            mean = mean_prompt_tokens(dataset, fs, seed, templates, estimator);
        } catch (const DataError& e) {
            log_warning(fmt::format("token profile: skipping fewshot n={}: {}", n, e.what()));
            p.skipped_ns.push_back(n);
            continue;
        }
        p.rows.push_back({fs.label(), n, mean});
        xs.push_back(static_cast<double>(n));
        ys.push_back(mean);
    }
    if (xs.size() >= 2) p.fewshot_fit = fit_line(xs, ys);

    if (principle) {
        StrategySpec ps;
        ps.kind = StrategyKind::principle_human;
        ps.principle = *principle;
        const double mean = mean_prompt_tokens(dataset, ps, seed, templates, estimator);
        p.principle_tokens = mean;
        p.rows.push_back({"principle", std::nullopt, mean});
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (ys[i] >= mean) {
                p.crossover_n = static_cast<std::size_t>(xs[i]);
                break;
            }
        }
        if (xs.size() >= 2 && p.fewshot_fit.slope > 0.0) {
            p.equivalent_n = (mean - p.fewshot_fit.intercept) / p.fewshot_fit.slope;
        }
    }
    return p;
}

std::string TokenProfile::to_csv() const {
    std::string out = "strategy,n,mean_prompt_tokens,note\n";
    for (const auto& r : rows) {
        std::string note;
        if (r.n && crossover_n && *r.n == *crossover_n) note = "crossover";
        if (!r.n && r.strategy == "principle" && equivalent_n) note = fmt::format("equivalent_n={:.2f}", *equivalent_n);
        out += fmt::format("{},{},{:.2f},{}\n", r.strategy, r.n ? std::to_string(*r.n) : std::string(), r.mean_tokens,
                           note);
    }
    return out;
}

}  // namespace pbp
