#include "nestpool/cost.hpp"

#include <limits>
#include <string>

#include "nestpool/error.hpp"

namespace nestpool {

namespace {

double as_real(PoolSize m) { return static_cast<double>(m); }

std::vector<double> stage_means(const NestedStrategy& s, const Prevalence& p)
{
    const int k = s.stages();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(k) + 1);
    out.push_back(1.0 / as_real(s.first_pool()));
    for (int l = 2; l <= k + 1; ++l)
        out.push_back(p.one_minus_q_pow(as_real(s.pool(l - 1))) / as_real(s.pool(l)));
    return out;
}

} // namespace

double dorfman_cost(PoolSize n, const Prevalence& p)
{
    if (n < 2)
        throw Error(ErrorCode::InvalidPoolSize, "Dorfman pool size must be at least 2");
    const double m = as_real(n);
    return 1.0 / m + p.one_minus_q_pow(m);
}

double cost_by_stages(const NestedStrategy& s, const Prevalence& p)
{
    if (s.individual())
        return 1.0;
    double sum = 0.0;
    for (double v : stage_means(s, p))
        sum += v;
    return sum;
}

double cost_telescoped(const NestedStrategy& s, const Prevalence& p)
{
    const int k = s.stages();
    double sum = 1.0;
    for (int i = 1; i <= k; ++i) {
        const double mi = as_real(s.pool(i));
        sum += 1.0 / mi - p.q_pow(mi) / as_real(s.pool(i + 1));
    }
    return sum;
}

CostReport cost(const NestedStrategy& s, const Prevalence& p)
{
    CostReport r;
    r.first_pool = s.first_pool();
    if (s.individual()) {
        r.cost = 1.0;
        r.stage_means = {1.0};
        r.variance_per_pool = 0.0;
        return r;
    }
    r.stage_means = stage_means(s, p);
    r.cost = 0.0;
    for (double v : r.stage_means)
        r.cost += v;

    const int k = s.stages();
    if (k == 1)
        r.variance_per_pool = variance_geometric(1, s.pool(1), p);
    else if (k == 2)
        r.variance_per_pool = variance_two_stage(s.pool(1), s.pool(2), p);
    else if (s.geometric())
        r.variance_per_pool = variance_geometric(k, s.pool(k), p);
    return r;
}

double variance_two_stage(PoolSize m1, PoolSize m2, const Prevalence& p)
{
    // validates divisibility and ordering
    NestedStrategy chain({m1, m2});
    const double a = as_real(m1);
    const double b = as_real(m2);
    const double qa = p.q_pow(a);
    const double qb = p.q_pow(b);
    const double ca = p.one_minus_q_pow(a);
    const double cb = p.one_minus_q_pow(b);
    return (a * a) / (b * b) * qa * ca + b * a * qb * cb + 2.0 * (a * a) / b * qa * cb;
}

double variance_geometric(int k, PoolSize mu, const Prevalence& p)
{
    if (k < 1)
        throw Error(ErrorCode::OutOfRange, "geometric chain needs k >= 1");
    if (mu < 2)
        throw Error(ErrorCode::PoolTooSmall, "geometric ratio must be at least 2");

    // pools[i-1] = m_i = mu^{k-i+1}
    std::vector<double> pools(static_cast<std::size_t>(k));
    PoolSize m = 1;
    for (int i = k; i >= 1; --i) {
        if (m > std::numeric_limits<PoolSize>::max() / mu)
            throw Error(ErrorCode::Overflow,
                        std::to_string(mu) + "^" + std::to_string(k) + " overflows 64-bit pool sizes");
        m *= mu;
        pools[static_cast<std::size_t>(i - 1)] = as_real(m);
    }

    const double ratio = as_real(mu);
    double sum = 0.0;
    double ancestors = 0.0; // sum_{j<i} q^{m_j}
    double weight = 1.0;    // mu^{i-1}
    for (int i = 1; i <= k; ++i) {
        const double mi = pools[static_cast<std::size_t>(i - 1)];
        const double qi = p.q_pow(mi);
        sum += weight * p.one_minus_q_pow(mi) * (qi + 2.0 * ancestors);
        ancestors += qi;
        weight *= ratio;
    }
    return ratio * ratio * sum;
}

} // namespace nestpool
