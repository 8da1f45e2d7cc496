#include "nestpool/linearized.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nestpool/cost.hpp"
#include "nestpool/error.hpp"

namespace nestpool {

namespace {

void validate_pools(std::span<const double> m)
{
    for (std::size_t j = 0; j < m.size(); ++j) {
        if (!(m[j] >= 1.0) || !std::isfinite(m[j]))
            throw Error(ErrorCode::InvalidPools, "linearized pool sizes must be finite and >= 1");
        if (j > 0 && !(m[j] < m[j - 1]))
            throw Error(ErrorCode::InvalidPools, "linearized pool sizes must strictly decrease");
    }
}

void require_open_unit(const Prevalence& p)
{
    if (!(p.p() > 0.0 && p.p() < 1.0))
        throw Error(ErrorCode::OutOfRange, "prevalence must satisfy 0 < p < 1");
}

} // namespace

double linear_cost(std::span<const double> m, const Prevalence& p)
{
    validate_pools(m);
    if (m.empty())
        return 1.0;
    const double pv = p.p();
    double sum = 1.0 / m.front() + m.back() * pv;
    for (std::size_t j = 1; j < m.size(); ++j)
        sum += pv * (m[j - 1] / m[j]);
    return sum;
}

std::vector<double> linear_cost_gradient(std::span<const double> m, const Prevalence& p)
{
    validate_pools(m);
    const double pv = p.p();
    const std::size_t k = m.size();
    std::vector<double> g(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double mi = m[i];
        const double next = i + 1 < k ? m[i + 1] : 1.0;
        const double own = i == 0 ? -1.0 / (mi * mi) : -pv * m[i - 1] / (mi * mi);
        g[i] = own + pv / next;
    }
    return g;
}

double optimal_linear_value(double k, const Prevalence& p)
{
    return (k + 1.0) * std::pow(p.p(), k / (k + 1.0));
}

LinearizedPlan optimal_linear_pools(int k, const Prevalence& p)
{
    require_open_unit(p);
    if (k < 2)
        throw Error(ErrorCode::OutOfRange, "optimal linear pools need k >= 2");
    LinearizedPlan plan;
    plan.k = k;
    const double log_p = std::log(p.p());
    for (int j = 1; j <= k; ++j)
        plan.m_sharp.push_back(std::exp(-log_p * (k - j + 1) / (k + 1.0)));
    plan.L_value = optimal_linear_value(k, p);
    plan.k_sharp = -log_p - 1.0;
    plan.L_sharp = std::numbers::e * p.p() * -log_p;
    return plan;
}

LinearizedPlan optimal_linear_stages(const Prevalence& p)
{
    const double limit = std::exp(-2.0);
    if (!(p.p() > 0.0 && p.p() < limit))
        throw Error(ErrorCode::OutOfRange, "linearized stage count requires 0 < p < e^-2");
    LinearizedPlan plan;
    const double u = -std::log(p.p());
    plan.k_sharp = u - 1.0;
    plan.L_sharp = std::numbers::e * p.p() * u;
    plan.k = plan.k_sharp;
    plan.L_value = plan.L_sharp;

    const double nearest = std::round(u);
    if (nearest >= 2.0 && std::fabs(u - nearest) <= 1e-9 * nearest) {
        const int stages = static_cast<int>(nearest) - 1;
        for (int j = 1; j <= stages; ++j)
            plan.m_sharp.push_back(std::exp(static_cast<double>(stages - j + 1)));
    }
    return plan;
}

LinearizationBound linearization_error_bound(const NestedStrategy& s, const Prevalence& p)
{
    if (p.p() > 0.5)
        throw Error(ErrorCode::OutOfRange, "linearization error bound requires p <= 1/2");
    LinearizationBound out;
    out.exact = cost(s, p).cost;

    std::vector<double> m;
    for (PoolSize v : s.pools())
        m.push_back(static_cast<double>(v));
    out.linear = linear_cost(m, p);

    const int k = s.stages();
    double ratio = 0.0;
    for (int i = 2; i <= k + 1; ++i)
        ratio = std::max(ratio, static_cast<double>(s.pool(i - 1)) / static_cast<double>(s.pool(i)));
    const double lq = p.log_q();
    out.bound = ratio * static_cast<double>(s.first_pool()) * lq * lq + ratio * k * p.p() * p.p();
    if (k == 0)
        out.bound = 0.0;
    return out;
}

TridiagonalMatrix linear_cost_hessian(std::span<const double> m, const Prevalence& p)
{
    validate_pools(m);
    const double pv = p.p();
    const std::size_t k = m.size();
    TridiagonalMatrix h;
    h.diagonal.resize(k);
    h.off_diagonal.resize(k > 0 ? k - 1 : 0);
    for (std::size_t i = 0; i < k; ++i) {
        const double cube = m[i] * m[i] * m[i];
        h.diagonal[i] = i == 0 ? 2.0 / cube : 2.0 * pv * m[i - 1] / cube;
        if (i + 1 < k)
            h.off_diagonal[i] = -pv / (m[i + 1] * m[i + 1]);
    }
    return h;
}

double quadratic_form(const TridiagonalMatrix& h, std::span<const double> x)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < h.diagonal.size(); ++i)
        sum += h.diagonal[i] * x[i] * x[i];
    for (std::size_t i = 0; i < h.off_diagonal.size(); ++i)
        sum += 2.0 * h.off_diagonal[i] * x[i] * x[i + 1];
    return sum;
}

bool positive_definite(const TridiagonalMatrix& h)
{
    // pivots of the LDL^T factorization; minor_i is the product of the first i
    double previous = 0.0;
    for (std::size_t i = 0; i < h.diagonal.size(); ++i) {
        double pivot = h.diagonal[i];
        if (i > 0)
            pivot -= h.off_diagonal[i - 1] * h.off_diagonal[i - 1] / previous;
        if (!(pivot > 0.0))
            return false;
        previous = pivot;
    }
    return !h.diagonal.empty();
}

bool hessian_check(int k, const Prevalence& p)
{
    require_open_unit(p);
    if (k < 2)
        throw Error(ErrorCode::OutOfRange, "Hessian check needs k >= 2");
    const LinearizedPlan plan = optimal_linear_pools(k, p);
    return hessian_check_at(plan.m_sharp, p);
}

bool hessian_check_at(std::span<const double> m, const Prevalence& p)
{
    require_open_unit(p);
    return positive_definite(linear_cost_hessian(m, p));
}

} // namespace nestpool
