#include <doctest.h>

#include <random>

#include "nestpool/error.hpp"
#include "nestpool/optimizer.hpp"
#include "oracles.hpp"

using namespace nestpool;

namespace {

const double log3 = std::log(3.0);
const double rho0 = 1.0 - std::pow(3.0, -1.0 / 3.0);

double D(Family f, int k, double p) { return cost(family(f, k), Prevalence(p)).cost; }

std::vector<PoolSize> to_vec(std::span<const PoolSize> s) { return {s.begin(), s.end()}; }

std::vector<double> linear_grid(double lo, double hi, int n)
{
    std::vector<double> g;
    for (int i = 0; i < n; ++i)
        g.push_back(lo + (hi - lo) * i / (n - 1));
    return g;
}

bool decimals_match(double x, double ref, int d) { return std::fabs(x - ref) <= 0.5 * std::pow(10.0, -d); }

} // namespace

TEST_CASE("pooling threshold")
{
    CHECK(pooling_threshold() == doctest::Approx(rho0).epsilon(1e-15));
    CHECK(std::fabs(dorfman_cost(3, Prevalence(pooling_threshold())) - 1.0) <= 1e-12);
}

TEST_CASE("transition constants")
{
    const auto c = transition_constants(1e-12);
    const auto F = [](double a) { return 1.0 / 12.0 - std::exp(-3 * a) + std::exp(-4 * a); };
    const auto G = [](double a) {
        return -7.0 / 36.0 - std::exp(-4 * a) + std::exp(-9 * a) / 3.0 + std::exp(-3 * a);
    };
    CHECK(std::fabs(F(c.alpha1)) <= 1e-12);
    CHECK(std::fabs(F(c.alpha2)) <= 1e-12);
    CHECK(std::fabs(G(c.beta)) <= 1e-12);
    CHECK(0.0 < c.alpha1);
    CHECK(c.alpha1 < c.alpha2);
    CHECK(c.alpha2 < 1.0);
    CHECK(c.alpha1 >= 0.132);
    CHECK(c.alpha1 <= 0.133);
    CHECK(c.alpha2 >= 0.534);
    CHECK(c.alpha2 <= 0.535);
    CHECK(c.beta >= 0.116);
    CHECK(c.beta <= 0.117);

    CHECK(decimals_match(c.alpha1, 0.1323, 4));
    CHECK(decimals_match(c.alpha2, 0.5343, 4));
    CHECK(decimals_match(c.beta, 0.1164, 4));
    CHECK(decimals_match(c.a1, 0.067836, 6));
    CHECK(decimals_match(c.a2, 0.1323239, 7));
    // 50-digit reference values
    CHECK(std::fabs(c.alpha1 - 0.13232392789) < 1e-10);
    CHECK(std::fabs(c.alpha2 - 0.53425298829) < 1e-10);
    CHECK(std::fabs(c.beta - 0.11636269880) < 1e-10);
    CHECK(std::fabs(c.a1 - 0.06783602410) < 1e-10);
    CHECK(c.alpha1 == doctest::Approx(c.a2).epsilon(1e-9));

    CHECK_THROWS_AS(transition_constants(1e-6), Error);
    CHECK_THROWS_AS(transition_constants(0.0), Error);
}

TEST_CASE("transition table")
{
    // the printed table truncates to four decimals
    const double lambda[] = {0.1239, 0.0431, 0.0145, 0.0048, 0.0016, 0.0005};
    const double rho[] = {0.3066, 0.1098, 0.0380, 0.0128, 0.0043, 0.0014};
    const auto t = transition_table(6);
    REQUIRE(t.rows.size() == 6);
    for (int i = 0; i < 6; ++i) {
        CHECK(t.rows[i].k == i + 1);
        CHECK(std::fabs(t.rows[i].lambda - lambda[i]) < 1e-4);
        CHECK(std::fabs(t.rows[i].rho_prev - rho[i]) < 1e-4);
    }
    CHECK(transition_table(1).rows.size() == 1);
    CHECK_THROWS_AS(transition_table(0), Error);
    CHECK_THROWS_AS(transition_table(41), Error);

    const auto long_table = transition_table(40);
    for (std::size_t i = 0; i < long_table.rows.size(); ++i) {
        const auto& r = long_table.rows[i];
        CHECK(r.lambda < r.rho_prev);
        if (i + 1 < long_table.rows.size()) {
            const auto& next = long_table.rows[i + 1];
            CHECK(next.lambda < r.lambda);
            CHECK(next.rho_prev < r.rho_prev);
            CHECK(next.rho_prev < r.lambda); // rho_k < lambda_k
        }
    }
}

TEST_CASE("stage counts")
{
    CHECK(stage_count(Family::m33, Prevalence(0.02)) == 3);
    CHECK(stage_count(Family::m33, Prevalence(rho0 * (1.0 - 1e-12))) == 1);
    CHECK(stage_count(Family::m23, Prevalence(0.1)) == 2);
    // k23(0.1) = 2 agrees with direct comparison of the m23 chains
    const double c2 = cost(make_strategy({2}), Prevalence(0.1)).cost;
    const double c62 = cost(make_strategy({6, 2}), Prevalence(0.1)).cost;
    const double c1862 = cost(make_strategy({18, 6, 2}), Prevalence(0.1)).cost;
    CHECK(c62 < c2);
    CHECK(c62 < c1862);
    CHECK_THROWS_AS(stage_count(Family::m34, Prevalence(0.1)), Error);
    CHECK_THROWS_AS(stage_count(Family::m33, Prevalence(0.4)), Error);
    CHECK_THROWS_AS(stage_count(Family::m33, Prevalence(0.0)), Error);
}

TEST_CASE("stage count intervals")
{
    const auto ks = stage_count_interval(Family::m34, Prevalence(0.02));
    REQUIRE_FALSE(ks.empty());
    const auto b = stage_bounds(Family::m34, Prevalence(0.02));
    for (int k : ks) {
        CHECK(k > b.lower);
        CHECK(k <= b.upper);
    }
    // near the pooling threshold no m34 chain qualifies
    CHECK(stage_count_interval(Family::m34, Prevalence(0.3)).empty());
    const auto rec = four_candidate_optimal(Prevalence(0.3)).record;
    CHECK_FALSE(rec.k34.has_value());
    CHECK(std::isinf(rec.D34));

    // a two-tail chain with one stage is (2)
    const auto m24 = [](int k) {
        return k == 1 ? make_strategy({2}) : family(Family::m24, k);
    };
    const auto ks24 = stage_count_interval(Family::m24, Prevalence(0.1));
    REQUIRE_FALSE(ks24.empty());
    for (int k : ks24) {
        const double here = cost(m24(k), Prevalence(0.1)).cost;
        if (k > 1)
            CHECK(here <= cost(m24(k - 1), Prevalence(0.1)).cost);
        CHECK(here <= cost(m24(k + 1), Prevalence(0.1)).cost);
    }
    CHECK_THROWS_AS(stage_count_interval(Family::m33, Prevalence(0.1)), Error);
}

TEST_CASE("conjectured optimal examples")
{
    const auto s = conjectured_optimal(Prevalence(0.02));
    CHECK(to_vec(s.strategy.pools()) == std::vector<PoolSize>{27, 9, 3});
    CHECK(std::fabs(s.report.cost - 0.20) < 5e-3);

    const auto none = conjectured_optimal(Prevalence(0.5));
    CHECK(none.strategy.individual());
    CHECK(none.report.cost == 1.0);

    double direct = 1.0;
    for (int j = 1; j <= 5; ++j)
        direct = std::min({direct, D(Family::m33, j, 0.08), D(Family::m34, j, 0.08)});
    CHECK(conjectured_optimal(Prevalence(0.08)).report.cost == direct);

    CHECK_THROWS_AS(conjectured_optimal(Prevalence(0.0)), Error);
}

TEST_CASE("four candidate examples")
{
    const auto r = four_candidate_optimal(Prevalence(0.02));
    CHECK(r.record.winner == Family::m33);
    CHECK(r.strategy == family(Family::m33, 3));

    CHECK(four_candidate_optimal(Prevalence(std::ldexp(1.0, -10))).record.phi < 0.0);

    const auto high = four_candidate_optimal(Prevalence(0.3));
    CHECK(high.strategy.stages() == 1);
    const bool three_or_four = high.strategy.first_pool() == 3 || high.strategy.first_pool() == 4;
    CHECK(three_or_four);
    CHECK(high.report.cost < 1.0);
    CHECK(high.report.cost == exhaustive_optimal(Prevalence(0.3), 81).report.cost);

    CHECK_THROWS_AS(four_candidate_optimal(Prevalence(0.31)), Error);
}

TEST_CASE("conjecture sweep records")
{
    const auto recs = conjecture_sweep(2, 51, {}, 0);
    REQUIRE(recs.size() == 50);
    CHECK(recs.front().p == 0.25);
    CHECK(recs.front().phi < 0.0);
    CHECK(recs.front().sign_certified);
    CHECK(recs.back().phi < 0.0);
    CHECK(recs.back().sign_certified);
    CHECK(std::min(recs[8].D33, recs[8].D34) ==
          four_candidate_optimal(Prevalence(std::ldexp(1.0, -10))).report.cost);

    for (const auto& r : recs) {
        CHECK(r.phi == std::min(r.D33, r.D34) - std::min(r.D23, r.D24));
        CHECK(r.phi_radius < std::fabs(r.phi));
    }

    const auto serial = conjecture_sweep(2, 51, {}, 1);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(serial[i].phi == recs[i].phi);
        CHECK(serial[i].sign_certified == recs[i].sign_certified);
    }

    const double extras[] = {0.05, 0.2};
    CHECK(conjecture_sweep(3, 3, extras).size() == 3);
    const double bad[] = {0.4};
    CHECK_THROWS_AS(conjecture_sweep(3, 3, bad), Error);
    CHECK_THROWS_AS(conjecture_sweep(5, 4), Error);
    CHECK_THROWS_AS(conjecture_sweep(1, 4), Error);
    CHECK_THROWS_AS(conjecture_sweep(2, 52), Error);
}

TEST_CASE("certified signs survive 50-digit recomputation")
{
    const auto chain = [](Family f, int k) -> oracle::Chain {
        if (k == 1 && (f == Family::m23 || f == Family::m24))
            return {2};
        return to_vec(family(f, k).pools());
    };
    for (const auto& r : conjecture_sweep(2, 51)) {
        REQUIRE(r.sign_certified);
        using oracle::big;
        const big inf = big(1e300);
        const auto at = [&](Family f, const std::optional<int>& k) {
            return k ? oracle::cost_50(chain(f, *k), r.p) : inf;
        };
        const big phi = std::min(at(Family::m33, r.k3), at(Family::m34, r.k34)) -
                        std::min(at(Family::m23, r.k23), at(Family::m24, r.k24));
        CHECK(phi < 0);
        CHECK(abs(phi - big(r.phi)) <= big(r.phi_radius));
    }
}

TEST_CASE("exhaustive optimal examples")
{
    CHECK(exhaustive_optimal(Prevalence(0.5), 81).strategy.individual());
    CHECK(to_vec(exhaustive_optimal(Prevalence(0.02), 81).strategy.pools()) ==
          std::vector<PoolSize>{27, 9, 3});
    const auto pi = multipliers(exhaustive_optimal(Prevalence(0.15), 81).strategy).pi;
    CHECK((pi.front() == 2 || pi.front() == 3));
    CHECK((pi.back() == 3 || pi.back() == 4));
    for (std::size_t i = 1; i + 1 < pi.size(); ++i)
        CHECK(pi[i] == 3);
    CHECK(std::fabs(exhaustive_optimal(Prevalence(0.02), 2000).report.cost - 0.1979771689) < 1e-9);
    CHECK_THROWS_AS(exhaustive_optimal(Prevalence(0.1), 1), Error);
}

TEST_CASE("exhaustive search agrees with a direct scan of all chains")
{
    const auto chains = oracle::all_chains(81);
    for (double p : linear_grid(0.02, 0.5, 13)) {
        double best = 1.0;
        for (const auto& c : chains)
            best = std::min(best, static_cast<double>(oracle::cost_50(c, p)));
        CHECK(exhaustive_optimal(Prevalence(p), 81).report.cost == doctest::Approx(best).epsilon(1e-13));
    }
}

TEST_CASE("transition points are cost ties and sign laws hold")
{
    const auto& c = default_transition_constants();
    std::mt19937_64 rng(21);
    for (int k = 1; k <= 8; ++k) {
        const double scale = std::pow(3.0, k - 1);
        const double lambda = -std::expm1(-c.alpha1 / scale);
        const double rho_k = -std::expm1(-c.beta / scale);
        const double rho_prev = k == 1 ? c.rho0 : -std::expm1(-c.beta / (scale / 3.0));
        CHECK(std::fabs(D(Family::m33, k, lambda) - D(Family::m34, k, lambda)) <= 1e-10);
        CHECK(std::fabs(D(Family::m34, k, rho_k) - D(Family::m33, k + 1, rho_k)) <= 1e-10);

        std::uniform_real_distribution<double> unif(0.0, rho_prev);
        for (int i = 0; i < 50; ++i) {
            const double p = unif(rng);
            const double d33_34 = D(Family::m33, k, p) - D(Family::m34, k, p);
            const double d34_33 = D(Family::m34, k, p) - D(Family::m33, k + 1, p);
            CHECK((d33_34 > 0) == (lambda - p > 0));
            CHECK((d34_33 > 0) == (rho_k - p > 0));
        }
    }
}

TEST_CASE("structural properties at the exhaustive optimum")
{
    for (double p : linear_grid(0.02, 0.30, 50)) {
        const Prevalence prev(p);
        const auto best = exhaustive_optimal(prev, 81).strategy;
        const int k = best.stages();
        REQUIRE(k >= 1);
        for (int i = 1; i <= k; ++i)
            CHECK(1.0 / best.pool(i) - prev.q_pow(best.pool(i)) / best.pool(i + 1) <= 1e-15);
        const auto pi = multipliers(best).pi;
        for (std::size_t i = 1; i < pi.size(); ++i)
            CHECK(pi[i - 1] <= pi[i]);
        CHECK((pi.back() == 3 || pi.back() == 4));
        CHECK(prev.q_pow(best.first_pool()) >= std::pow(3.0, -4.0 / 3.0));

        const double a = std::pow(3.0, k - 1) * prev.neg_log_q();
        if (best == family(Family::m33, k)) {
            CHECK(a >= log3 / 9 - 1e-12);
            CHECK(a <= log3 / 3 + 1e-12);
        } else if (k >= 2 && best == family(Family::m34, k)) {
            CHECK(a >= std::log(4.0) / 12 - 1e-12);
            CHECK(a <= log3 / 4 + 1e-12);
        }
    }
}

TEST_CASE("oracle agreement on [0.02, 0.30]")
{
    for (double p : linear_grid(0.02, 0.30, 50)) {
        const double ex = exhaustive_optimal(Prevalence(p), 81).report.cost;
        const double four = four_candidate_optimal(Prevalence(p)).report.cost;
        CHECK(std::fabs(ex - four) <= 1e-12);
    }
}

TEST_CASE("selector agreement on 500 random p")
{
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> unif(-51.0 * std::log(2.0), std::log(rho0));
    for (int i = 0; i < 500; ++i) {
        const Prevalence p(std::exp(unif(rng)));
        CHECK(std::fabs(conjectured_optimal(p).report.cost - four_candidate_optimal(p).report.cost) <= 1e-12);
    }
}

TEST_CASE("large-scale upper and gap bounds")
{
    const double log_lo = std::log(1e-8);
    const double log_hi = std::log(rho0);
    for (int i = 0; i < 200; ++i) {
        // open interval: skip both endpoints
        const double p = std::exp(log_lo + (log_hi - log_lo) * (i + 1) / 201.0);
        const Prevalence prev(p);
        const double l = std::log(1.0 / p);
        const double d3 = D(Family::m33, stage_count(Family::m33, prev), p);
        CHECK(d3 <= 3.0 / log3 * p * l + 6.0 * p);
        const double opt = four_candidate_optimal(prev).report.cost;
        const double gap_bound =
            (3.0 / log3 - std::exp(1.0)) * p * l + 12.0 * p + 4.0 * p * p * l + 5.0 * p * p;
        CHECK(d3 - opt <= gap_bound);
    }
}
