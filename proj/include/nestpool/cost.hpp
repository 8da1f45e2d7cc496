#pragma once

#include <optional>
#include <vector>

#include "nestpool/prevalence.hpp"
#include "nestpool/strategy.hpp"

namespace nestpool {

/// Expected cost of a nested strategy, in tests per individual.
struct CostReport {
    double cost = 1.0;
    /// Entry l (0-based) is E[T^{l+1}] / m_1; the last entry counts individual retests.
    std::vector<double> stage_means;
    /// Var T_k per initial pool. Only available for k <= 2 or geometric chains.
    std::optional<double> variance_per_pool;
    PoolSize first_pool = 1;

    std::optional<double> variance_per_individual() const
    {
        if (!variance_per_pool)
            return std::nullopt;
        const double m1 = static_cast<double>(first_pool);
        return *variance_per_pool / (m1 * m1);
    }
};

/// Dorfman two-stage cost (1 + n(1 - q^n)) / n. Throws InvalidPoolSize for n < 2.
double dorfman_cost(PoolSize n, const Prevalence& p);

/// 1/m_1 + (1 - q^{m_k}) + sum_{j=2..k} (1 - q^{m_{j-1}}) / m_j
double cost_by_stages(const NestedStrategy& s, const Prevalence& p);

/// 1 + sum_{i=1..k} (1/m_i - q^{m_i}/m_{i+1}), with m_{k+1} = 1.
double cost_telescoped(const NestedStrategy& s, const Prevalence& p);

CostReport cost(const NestedStrategy& s, const Prevalence& p);

/// Var T_2 for the chain (m1, m2). Throws NonDivisible / PoolTooSmall / NotDecreasing.
double variance_two_stage(PoolSize m1, PoolSize m2, const Prevalence& p);

/// Var T_k for the geometric chain m_j = mu^{k-j+1}. Throws Overflow when mu^k
/// does not fit in 64 bits.
double variance_geometric(int k, PoolSize mu, const Prevalence& p);

} // namespace nestpool
