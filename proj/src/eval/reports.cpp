#include <fmt/format.h>

#include <algorithm>

#include "pbp/error.hpp"
#include "pbp/eval.hpp"

namespace pbp {

namespace {

std::string fixed2(double v) {
    std::string s = fmt::format("{:.2f}", v);
    return s == "-0.00" ? "0.00" : s;
}

}  // namespace

double delta_points(double score, double baseline) { return 100.0 * (score - baseline); }

std::optional<double> DeltaTable::cell(const std::string& strategy, const std::string& dataset) const {
    auto row = cells.find(strategy);
    if (row == cells.end()) return std::nullopt;
    auto c = row->second.find(dataset);
    if (c == row->second.end()) return std::nullopt;
    return c->second;
}

std::string DeltaTable::to_csv() const {
    std::string out = "method";
    for (const auto& d : datasets) out += "," + d;
    out += ",AVG\n";
    for (const auto& s : strategies) {
        out += s;
        for (const auto& d : datasets) {
            auto v = cell(s, d);
            out += "," + (v ? fixed2(*v) : std::string("NA"));
        }
        auto a = avg.find(s);
        out += "," + (a != avg.end() ? fixed2(a->second) : std::string("NA"));
        out += "\n";
    }
    return out;
}

DeltaTable delta_table(const std::map<std::string, std::vector<EvalReport>>& reports, const std::string& baseline) {
    DeltaTable t;
    t.strategies.push_back(baseline);
    for (const auto& [dataset, list] : reports) {
        t.datasets.push_back(dataset);
        auto base = std::find_if(list.begin(), list.end(), [&](const EvalReport& r) { return r.strategy == baseline; });
        if (base == list.end()) throw EvalError("dataset '" + dataset + "' has no '" + baseline + "' baseline report");
        for (const auto& r : list) {
            if (std::find(t.strategies.begin(), t.strategies.end(), r.strategy) == t.strategies.end()) {
                t.strategies.push_back(r.strategy);
            }
            t.cells[r.strategy][dataset] = delta_points(r.mean, base->mean);
        }
    }
    for (const auto& [strategy, row] : t.cells) {
        double sum = 0.0;
        for (const auto& [dataset, v] : row) sum += v;
        t.avg[strategy] = sum / static_cast<double>(row.size());
    }
    return t;
}

}  // namespace pbp
