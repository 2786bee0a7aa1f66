#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace pbp {

using Seed = std::uint64_t;

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// Seeded generator whose output sequence is part of the external contract:
/// std::mt19937_64 (bit-exact by the standard) plus rejection-sampled bounded
/// draws, so the same seed yields the same samples on every toolchain.
class DeterministicRng {
public:
    static constexpr std::string_view kId = "mt19937_64+rejection/v1";

    explicit DeterministicRng(Seed seed);

    std::uint64_t next();

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound);

    /// In-place Fisher-Yates shuffle driven by `below`.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

/// Child seed for a numbered stream (grid cell, permutation, seed run).
Seed derive_seed(Seed base, std::uint64_t stream);

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Results must be
/// written into index-keyed slots by the caller, so completion order never
/// matters. The first exception (lowest index) is rethrown after all workers join.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn);

/// Writes "pbp: warning: <msg>" to stderr unless warnings are silenced.
void log_warning(std::string_view msg);
void set_warnings_enabled(bool enabled);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

}  // namespace pbp
