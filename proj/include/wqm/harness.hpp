#pragma once

// Seeded Monte Carlo sweeps over bill size.
//
// Each trial gets its own mint and its own generator seeded with
// derive_stream_seed(seed, n, trial), so results do not depend on how
// trials are scheduled across threads.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wqm/attacks.hpp"
#include "wqm/mint.hpp"

namespace wqm {

struct ExperimentConfig {
    StrategyKind strategy = StrategyKind::AdaptiveOracle;
    MintPolicy policy = MintPolicy::ReturnAlways;
    std::vector<std::size_t> n_values;
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    // 0 picks std::thread::hardware_concurrency().
    unsigned threads = 0;
};

struct ResultRow {
    std::size_t n = 0;
    StrategyKind strategy = StrategyKind::AdaptiveOracle;
    MintPolicy policy = MintPolicy::ReturnAlways;
    std::size_t trials = 0;
    std::size_t successes = 0;
    double success_rate = 0.0;
    double mean_queries = 0.0;
    // Normal approximation sqrt(p(1-p)/trials).
    double std_error = 0.0;
    std::optional<double> analytic_rate;
    std::uint64_t seed = 0;

    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct TrialOutcome {
    bool success = false;
    std::size_t queries = 0;
};

// One trial with a fresh bill of n qubits. Success means the counterfeit
// verifies VALID (baselines) or the whole secret is recovered (adaptive).
TrialOutcome run_trial(StrategyKind strategy, MintPolicy policy, std::size_t n, Rng& rng);

// Throws InvalidArgument for empty n_values, n == 0 or trials == 0.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

std::optional<double> analytic_success_rate(StrategyKind strategy, MintPolicy policy,
                                            std::size_t n);

enum class ResultFormat { Csv, Json };

inline constexpr std::string_view kCsvHeader =
    "n,strategy,policy,trials,successes,success_rate,mean_queries,std_error,analytic_rate,seed";

std::string format_results(const std::vector<ResultRow>& rows, ResultFormat format);
std::vector<ResultRow> parse_results(std::string_view text, ResultFormat format);

// Throws InvalidArgument for empty rows, Io on write failure.
void write_results(const std::vector<ResultRow>& rows, const std::filesystem::path& path,
                   ResultFormat format);

}  // namespace wqm
