#pragma once

#include <span>
#include <vector>

#include "nestpool/prevalence.hpp"
#include "nestpool/strategy.hpp"

namespace nestpool {

/// Optimizers of the linearized cost L_k, where pool sizes are real numbers.
struct LinearizedPlan {
    double k = 0.0;
    std::vector<double> m_sharp; ///< empty when not defined for this plan
    double L_value = 0.0;
    double k_sharp = 0.0; ///< log(1/p) - 1
    double L_sharp = 0.0; ///< e p log(1/p)
};

/// L_k(m, p) = 1/m_1 + m_k p + p sum_{j=2..k} m_{j-1}/m_j. The pools must be
/// >= 1 and strictly decreasing (InvalidPools otherwise); divisibility is not
/// required. An empty vector is individual testing, L = 1.
double linear_cost(std::span<const double> m, const Prevalence& p);

/// Gradient of L_k with respect to the pool sizes.
std::vector<double> linear_cost_gradient(std::span<const double> m, const Prevalence& p);

/// m#_j = p^{-(k-j+1)/(k+1)} and L#_k = (k+1) p^{k/(k+1)}. Requires 0 < p < 1, k >= 2.
LinearizedPlan optimal_linear_pools(int k, const Prevalence& p);

/// (k+1) p^{k/(k+1)} for real k > 0.
double optimal_linear_value(double k, const Prevalence& p);

/// k# = log(1/p) - 1 and L# = e p log(1/p). When p = e^{-u} for an integer
/// u >= 2 the pools (e^{u-1}, ..., e) are filled in as well. Requires 0 < p < e^{-2}.
LinearizedPlan optimal_linear_stages(const Prevalence& p);

struct LinearizationBound {
    double exact = 0.0;
    double linear = 0.0;
    double bound = 0.0;
};

/// Exact cost, linearized cost, and l m_1 log^2 q + l k p^2 with l the
/// largest consecutive ratio (m_{k+1} = 1). Requires p <= 1/2.
LinearizationBound linearization_error_bound(const NestedStrategy& s, const Prevalence& p);

/// Symmetric tridiagonal Hessian of L_k at m.
struct TridiagonalMatrix {
    std::vector<double> diagonal;
    std::vector<double> off_diagonal; ///< entry i couples i and i+1
};

TridiagonalMatrix linear_cost_hessian(std::span<const double> m, const Prevalence& p);

/// x^T H x
double quadratic_form(const TridiagonalMatrix& h, std::span<const double> x);

/// True iff every leading principal minor is positive.
bool positive_definite(const TridiagonalMatrix& h);

/// Positive definiteness of the Hessian of L_k at m#. Requires k >= 2, 0 < p < 1.
bool hessian_check(int k, const Prevalence& p);

/// Same verdict at an arbitrary pool vector.
bool hessian_check_at(std::span<const double> m, const Prevalence& p);

} // namespace nestpool
