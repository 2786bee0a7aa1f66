#include <numeric>

#include "pbp/corpus.hpp"
#include "pbp/error.hpp"

namespace pbp {

namespace {

// First `n` positions of a seeded Fisher-Yates over [0, size).
std::vector<std::size_t> draw_indices(std::size_t size, std::size_t n, DeterministicRng& rng) {
    std::vector<std::size_t> idx(size);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(size - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(n);
    return idx;
}

}  // namespace

DemoSet sample_demonstrations(const Dataset& dataset, Split split, std::size_t n, bool include_labels,
                              bool stratified, Seed seed) {
    if (n == 0) throw DataError("sample_demonstrations: n must be positive");
    const auto& pool = dataset.split(split);
    DeterministicRng rng(seed);
    DemoSet out{{}, include_labels, n, seed, stratified};

    if (!stratified) {
        if (pool.size() < n) {
            throw DataError("insufficient examples: requested " + std::to_string(n) + " but split has " +
                            std::to_string(pool.size()));
        }
        for (std::size_t i : draw_indices(pool.size(), n, rng)) out.examples.push_back(pool[i]);
        return out;
    }

    const std::size_t k = dataset.task.num_classes();
    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t i = 0; i < pool.size(); ++i) members[static_cast<std::size_t>(pool[i].label)].push_back(i);
    std::vector<std::vector<std::size_t>> picked(k);
    for (std::size_t c = 0; c < k; ++c) {
        if (members[c].size() < n) {
            throw DataError("insufficient examples: class '" + dataset.task.labels()[c] + "' has " +
                            std::to_string(members[c].size()) + " examples, " + std::to_string(n) + " requested");
        }
        for (std::size_t j : draw_indices(members[c].size(), n, rng)) picked[c].push_back(members[c][j]);
    }
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < k; ++c) out.examples.push_back(pool[picked[c][r]]);
    }
    return out;
}

}  // namespace pbp
