#pragma once

#include <cstdint>
#include <vector>

#include "nestpool/prevalence.hpp"
#include "nestpool/strategy.hpp"

namespace nestpool {

/// Infection indicators X_1..X_{m_1} of one initial pool (1 = infected).
struct Population {
    std::vector<std::uint8_t> statuses;
};

struct ProcedureOutcome {
    std::int64_t total_tests = 0;
    /// Tests run in stages 1..k+1; the last stage tests individuals.
    std::vector<std::int64_t> per_stage;
};

/// Runs the nested procedure on one initial pool. A sub-pool is only tested
/// when its parent tested positive. Throws LengthMismatch unless the
/// population has exactly m_1 members (1 for individual testing).
ProcedureOutcome run_procedure(const NestedStrategy& s, const Population& pop);

struct SimulationReport {
    std::int64_t replications = 0;
    double mean_tests_per_pool = 0.0;
    double mean_tests_per_individual = 0.0;
    /// Unbiased sample variance of the tests per pool.
    double variance_tests_per_pool = 0.0;
    /// Mean tests per pool in each of the k+1 stages.
    std::vector<double> stage_counts;
    /// Standard error of mean_tests_per_individual.
    double std_error_mean = 0.0;
    /// Standard error of variance_tests_per_pool.
    double std_error_variance = 0.0;
    std::uint64_t seed = 0;
};

/// Monte Carlo over independent initial pools. Replication r draws from a
/// generator keyed by (seed, r), so the report is bit-identical for any
/// thread count (threads = 0 means all hardware threads).
SimulationReport monte_carlo(const NestedStrategy& s, const Prevalence& p,
                             std::int64_t replications, std::uint64_t seed,
                             unsigned threads = 0);

struct ExactMoments {
    double mean = 0.0;     ///< E T_k
    double variance = 0.0; ///< Var T_k
    std::vector<double> stage_means; ///< E T_k^l per pool
};

/// Full enumeration of the 2^{m_1} infection patterns. Throws TooLarge for m_1 > 20.
ExactMoments enumerate_exact(const NestedStrategy& s, const Prevalence& p);

/// SplitMix64 stream for one replication.
class ReplicationRng {
public:
    ReplicationRng(std::uint64_t seed, std::uint64_t replication) noexcept;

    std::uint64_t next() noexcept;
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1p-53; }

private:
    std::uint64_t state_;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

} // namespace nestpool
