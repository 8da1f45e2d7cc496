#include "nestpool/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "nestpool/double_double.hpp"
#include "nestpool/error.hpp"
#include "parallel.hpp"

namespace nestpool {

namespace {

const double log3 = std::log(3.0);

double log_base3(double x) { return std::log(x) / log3; }

constexpr int max_root_iterations = 200;

double bisect_root(const std::function<double(double)>& f, double lo, double hi, double tol,
                   const char* name)
{
    const double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0)
        return lo;
    if (fhi == 0.0)
        return hi;
    if (std::signbit(flo) == std::signbit(fhi))
        throw Error(ErrorCode::BracketFailure,
                    std::string("bracket for ") + name + " does not change sign");

    std::uintmax_t iterations = max_root_iterations;
    const auto bracket = boost::math::tools::bisect(
        f, lo, hi, boost::math::tools::eps_tolerance<double>(), iterations);
    const double root = bracket.first + (bracket.second - bracket.first) / 2.0;
    if (!(std::fabs(f(root)) <= tol))
        throw Error(ErrorCode::ToleranceNotMet,
                    std::string("residual for ") + name + " exceeds tolerance");
    return root;
}

void require_pooling_range(const Prevalence& p)
{
    if (!(p.p() > 0.0 && p.p() < pooling_threshold()))
        throw Error(ErrorCode::OutOfRange, "prevalence must satisfy 0 < p < 1 - 3^(-1/3)");
}

std::vector<int> integers_in(StageBounds b)
{
    std::vector<int> out;
    const int first = std::max(1, static_cast<int>(std::floor(b.lower)) + 1);
    const int last = static_cast<int>(std::floor(b.upper));
    for (int k = first; k <= last; ++k)
        out.push_back(k);
    return out;
}

// Candidate chain for the four-candidate comparison. Families whose first
// multiplier is 2 must keep it at k = 1, which leaves the chain (2).
NestedStrategy candidate_chain(Family code, int k)
{
    if (k == 1 && (code == Family::m23 || code == Family::m24))
        return NestedStrategy({2});
    return family(code, k);
}

struct Candidate {
    std::optional<int> k;
    std::optional<NestedStrategy> strategy;
    std::optional<compensated::Enclosure> cost;

    double value() const
    {
        return cost ? cost->approx() : std::numeric_limits<double>::infinity();
    }
};

Candidate evaluate(Family code, std::span<const int> ks, double p)
{
    Candidate best;
    for (int k : ks) {
        NestedStrategy s = candidate_chain(code, k);
        compensated::Enclosure c = compensated::cost(s, p);
        if (!best.cost || (c.value - best.cost->value).hi < 0.0) {
            best.k = k;
            best.strategy = std::move(s);
            best.cost = c;
        }
    }
    return best;
}

std::optional<compensated::Enclosure> min_of(const Candidate& a, const Candidate& b)
{
    if (a.cost && b.cost)
        return compensated::min(*a.cost, *b.cost);
    if (a.cost)
        return a.cost;
    return b.cost;
}

} // namespace

double pooling_threshold() noexcept
{
    static const double rho0 = -std::expm1(-log3 / 3.0);
    return rho0;
}

TransitionConstants transition_constants(double tol)
{
    if (!(tol > 0.0 && tol <= 1e-8))
        throw Error(ErrorCode::OutOfRange, "tolerance must satisfy 0 < tol <= 1e-8");

    const auto F = [](double a) { return 1.0 / 12.0 - std::exp(-3.0 * a) + std::exp(-4.0 * a); };
    const auto G = [](double a) {
        return -7.0 / 36.0 - std::exp(-4.0 * a) + std::exp(-9.0 * a) / 3.0 + std::exp(-3.0 * a);
    };
    // h_a(x) = 1/x - e^{-ax}
    const auto h54 = [](double a) {
        return (0.2 - std::exp(-5.0 * a)) - (0.25 - std::exp(-4.0 * a));
    };
    const auto h43 = [](double a) {
        return (0.25 - std::exp(-4.0 * a)) - (1.0 / 3.0 - std::exp(-3.0 * a));
    };

    TransitionConstants c;
    c.alpha1 = bisect_root(F, 0.05, 0.3, tol, "alpha1");
    c.alpha2 = bisect_root(F, 0.3, 1.0, tol, "alpha2");
    c.beta = bisect_root(G, 0.01, 1.0, tol, "beta");
    c.a1 = bisect_root(h54, 0.01, 0.12, tol, "a1");
    c.a2 = bisect_root(h43, 0.06, 0.3, tol, "a2");
    c.rho0 = pooling_threshold();
    return c;
}

const TransitionConstants& default_transition_constants()
{
    static const TransitionConstants constants = transition_constants(1e-12);
    return constants;
}

TransitionTable transition_table(int K)
{
    if (K < 1 || K > 40)
        throw Error(ErrorCode::OutOfRange, "transition table size must be in [1, 40]");
    const auto& c = default_transition_constants();
    TransitionTable t;
    double scale = 1.0; // 3^{k-1}
    for (int k = 1; k <= K; ++k) {
        TransitionRow row;
        row.k = k;
        row.lambda = -std::expm1(-c.alpha1 / scale);
        row.rho_prev = k == 1 ? c.rho0 : -std::expm1(-3.0 * c.beta / scale);
        t.rows.push_back(row);
        scale *= 3.0;
    }
    return t;
}

double stage_scale(const Prevalence& p)
{
    // log_3(1/|log_3 q|) = log_3(log 3 / |log q|)
    return (std::log(log3) - std::log(p.neg_log_q())) / log3;
}

int stage_count(Family code, const Prevalence& p)
{
    require_pooling_range(p);
    const double x = stage_scale(p);
    double k = 0.0;
    switch (code) {
    case Family::m33: k = std::floor(x); break;
    case Family::m23: k = std::floor(x - log_base3(2.0) + 1.0); break;
    default:
        throw Error(ErrorCode::OutOfRange, "stage_count takes the m33 or m23 family");
    }
    return std::max(1, static_cast<int>(k));
}

StageBounds stage_bounds(Family code, const Prevalence& p)
{
    require_pooling_range(p);
    const double x = stage_scale(p);
    const double extra = log_base3(log_base3(4.0));
    switch (code) {
    case Family::m24: {
        const double base = x - log_base3(8.0);
        return {base + 1.0, base + 2.0 + extra};
    }
    case Family::m34: {
        const double base = x - log_base3(4.0);
        return {base, base + 1.0 + extra};
    }
    default:
        throw Error(ErrorCode::OutOfRange, "stage_count_interval takes the m24 or m34 family");
    }
}

std::vector<int> stage_count_interval(Family code, const Prevalence& p)
{
    return integers_in(stage_bounds(code, p));
}

Selection conjectured_optimal(const Prevalence& p)
{
    const auto& c = default_transition_constants();
    if (p.p() >= c.rho0)
        return {NestedStrategy{}, cost(NestedStrategy{}, p)};
    if (p.p() == 0.0)
        throw Error(ErrorCode::OutOfRange, "no optimal strategy exists at p = 0");

    // smallest k with 3^{k-1} |log q| > beta; then m33 when that scaled value
    // is at least alpha1 and m34 otherwise
    double scaled = p.neg_log_q();
    int k = 1;
    while (scaled <= c.beta) {
        scaled *= 3.0;
        ++k;
        if (k > max_family_stages)
            throw Error(ErrorCode::OutOfRange,
                        "prevalence too small: optimal chain exceeds 64-bit pool sizes");
    }
    const Family code = scaled >= c.alpha1 ? Family::m33 : Family::m34;
    NestedStrategy s = family(code, k);
    CostReport r = cost(s, p);
    return {std::move(s), std::move(r)};
}

FourCandidateResult four_candidate_optimal(const Prevalence& p)
{
    require_pooling_range(p);
    const double pv = p.p();

    const int k23 = stage_count(Family::m23, p);
    const int k3 = stage_count(Family::m33, p);
    const std::vector<int> ks24 = stage_count_interval(Family::m24, p);
    const std::vector<int> ks34 = stage_count_interval(Family::m34, p);

    const int one23[] = {k23};
    const int one33[] = {k3};
    const Candidate c23 = evaluate(Family::m23, one23, pv);
    const Candidate c24 = evaluate(Family::m24, ks24, pv);
    const Candidate c33 = evaluate(Family::m33, one33, pv);
    const Candidate c34 = evaluate(Family::m34, ks34, pv);

    ConjectureRecord rec;
    rec.p = pv;
    rec.k23 = c23.k;
    rec.k24 = c24.k;
    rec.k3 = c33.k;
    rec.k34 = c34.k;
    rec.D23 = c23.value();
    rec.D24 = c24.value();
    rec.D33 = c33.value();
    rec.D34 = c34.value();
    const double best3 = std::min(rec.D33, rec.D34);
    const double best2 = std::min(rec.D23, rec.D24);
    rec.phi = best3 - best2;
    rec.winner = rec.D33 <= rec.D34 ? Family::m33 : Family::m34;

    // The compensated enclosure of Phi decides certification; the stored
    // double phi must agree in sign and lie within the reported radius.
    const auto three = min_of(c33, c34);
    const auto two = min_of(c23, c24);
    const compensated::Enclosure phi = *three - *two;
    const double drift = compensated::magnitude(compensated::DoubleDouble(rec.phi) - phi.value);
    rec.phi_radius = (phi.radius + drift) * (1.0 + 0x1p-50);
    rec.sign_certified = phi.sign_certain() &&
                         std::signbit(rec.phi) == std::signbit(phi.value.hi) &&
                         std::fabs(rec.phi) > rec.phi_radius;

    // argmin, preferring m33, m34, m23, m24 on exact ties
    const Candidate* order[] = {&c33, &c34, &c23, &c24};
    const Candidate* best = nullptr;
    for (const Candidate* c : order)
        if (c->cost && (!best || c->value() < best->value()))
            best = c;

    FourCandidateResult out{*best->strategy, cost(*best->strategy, p), rec};
    return out;
}

std::vector<ConjectureRecord> conjecture_sweep(int j_min, int j_max,
                                               std::span<const double> extra_points,
                                               unsigned threads)
{
    if (!(2 <= j_min && j_min <= j_max && j_max <= 51))
        throw Error(ErrorCode::OutOfRange, "sweep requires 2 <= j_min <= j_max <= 51");
    std::vector<double> points;
    for (int j = j_min; j <= j_max; ++j)
        points.push_back(std::ldexp(1.0, -j));
    for (double x : extra_points) {
        if (!(x > 0.0 && x < pooling_threshold()))
            throw Error(ErrorCode::OutOfRange, "extra sweep point outside (0, 1 - 3^(-1/3))");
        points.push_back(x);
    }

    std::vector<ConjectureRecord> out(points.size());
    detail::parallel_chunks(points.size(), threads, [&](std::size_t b, std::size_t e, std::size_t) {
        for (std::size_t i = b; i < e; ++i)
            out[i] = four_candidate_optimal(Prevalence(points[i])).record;
    });
    return out;
}

Selection exhaustive_optimal(const Prevalence& p, PoolSize max_m1)
{
    if (max_m1 < 2 || max_m1 > 2000)
        throw Error(ErrorCode::OutOfRange, "max_m1 must lie in [2, 2000]");

    // positive[n] = 1 - q^n, shared by every chain
    std::vector<double> positive(static_cast<std::size_t>(max_m1) + 1);
    for (PoolSize n = 1; n <= max_m1; ++n)
        positive[static_cast<std::size_t>(n)] = p.one_minus_q_pow(static_cast<double>(n));

    std::vector<PoolSize> best_chain;
    double best_cost = 1.0;
    std::vector<PoolSize> chain;

    const auto better = [&](double c) {
        if (c != best_cost)
            return c < best_cost;
        if (chain.size() != best_chain.size())
            return chain.size() < best_chain.size();
        return std::lexicographical_compare(chain.begin(), chain.end(), best_chain.begin(),
                                            best_chain.end());
    };

    // prefix = 1/m_1 + sum_{l=2..j} (1 - q^{m_{l-1}}) / m_l, summed left to right
    std::function<void(double)> descend = [&](double prefix) {
        const PoolSize last = chain.back();
        const double total = prefix + positive[static_cast<std::size_t>(last)];
        if (better(total)) {
            best_cost = total;
            best_chain = chain;
        }
        for (PoolSize d = 2; d < last; ++d) {
            if (last % d != 0)
                continue;
            chain.push_back(d);
            descend(prefix + positive[static_cast<std::size_t>(last)] / static_cast<double>(d));
            chain.pop_back();
        }
    };

    for (PoolSize m1 = 2; m1 <= max_m1; ++m1) {
        chain.assign(1, m1);
        descend(1.0 / static_cast<double>(m1));
    }

    NestedStrategy s(std::move(best_chain));
    CostReport r = cost(s, p);
    return {std::move(s), std::move(r)};
}

} // namespace nestpool
