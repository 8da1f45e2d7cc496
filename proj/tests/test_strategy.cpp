#include <doctest.h>

#include <numeric>

#include "nestpool/error.hpp"
#include "nestpool/prevalence.hpp"
#include "nestpool/strategy.hpp"
#include "oracles.hpp"

using namespace nestpool;

namespace {

ErrorCode code_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::OutOfRange;
}

std::vector<PoolSize> to_vec(std::span<const PoolSize> s) { return {s.begin(), s.end()}; }

} // namespace

TEST_CASE("prevalence derived quantities")
{
    const Prevalence p(0.25);
    CHECK(p.q() == 0.75);
    CHECK(p.neg_log_q() == doctest::Approx(-std::log(0.75)));
    CHECK(Prevalence(0.0).neg_log_q() == 0.0);
    CHECK(std::isinf(Prevalence(1.0).neg_log_q()));
    CHECK(code_of([] { Prevalence(-0.1); }) == ErrorCode::InvalidProbability);
    CHECK(code_of([] { Prevalence(1.5); }) == ErrorCode::InvalidProbability);
    CHECK(code_of([] { Prevalence(std::nan("")); }) == ErrorCode::InvalidProbability);

    for (double x : {1e-9, 1e-12, 0x1p-51, 1e-300}) {
        const Prevalence tiny(x);
        CHECK(std::fabs(tiny.neg_log_q() - x) <= x * x);
        CHECK(tiny.one_minus_q_pow(9) == doctest::Approx(9 * x).epsilon(1e-12));
    }
}

TEST_CASE("make_strategy examples")
{
    const auto s = make_strategy({27, 9, 3});
    CHECK(s.stages() == 3);
    CHECK(s.pool(1) == 27);
    CHECK(s.pool(4) == 1);

    const auto none = make_strategy({});
    CHECK(none.stages() == 0);
    CHECK(none.individual());
    CHECK(none.first_pool() == 1);

    CHECK(code_of([] { make_strategy({9, 4}); }) == ErrorCode::NonDivisible);
    CHECK(code_of([] { make_strategy({3, 9}); }) == ErrorCode::NotDecreasing);
    CHECK(code_of([] { make_strategy({3, 3}); }) == ErrorCode::NotDecreasing);
    CHECK(code_of([] { make_strategy({4, 1}); }) == ErrorCode::PoolTooSmall);
    CHECK(code_of([] { make_strategy({0}); }) == ErrorCode::PoolTooSmall);
}

TEST_CASE("error messages name the violation")
{
    try {
        make_strategy({27, 9, 4});
        FAIL("no throw");
    } catch (const Error& e) {
        const std::string what = e.what();
        CHECK(what.find("m_2 = 9") != std::string::npos);
        CHECK(what.find("m_3 = 4") != std::string::npos);
    }
}

TEST_CASE("multipliers examples")
{
    CHECK(multipliers(make_strategy({27, 9, 3})).pi == std::vector<PoolSize>{3, 3, 3});
    CHECK(multipliers(make_strategy({6, 2})).pi == std::vector<PoolSize>{2, 3});
    CHECK(multipliers(make_strategy({16, 4, 2})).pi == std::vector<PoolSize>{2, 2, 4});
    CHECK(code_of([] { multipliers(make_strategy({})); }) == ErrorCode::EmptyStrategy);
}

TEST_CASE("multipliers reconstruct every chain with m1 <= 200")
{
    for (const auto& chain : oracle::all_chains(200)) {
        const auto s = make_strategy(chain);
        const auto pi = multipliers(s);
        CHECK(pi.reconstruct() == chain);
        for (PoolSize v : pi.pi)
            CHECK(v >= 2);
        CHECK(std::accumulate(pi.pi.begin(), pi.pi.end(), PoolSize{1}, std::multiplies<>()) ==
              chain.front());
    }
}

TEST_CASE("family examples")
{
    CHECK(to_vec(family(Family::m33, 3).pools()) == std::vector<PoolSize>{27, 9, 3});
    CHECK(to_vec(family(Family::m34, 2).pools()) == std::vector<PoolSize>{12, 3});
    CHECK(to_vec(family(Family::m24, 1).pools()) == std::vector<PoolSize>{4});
    CHECK(to_vec(family(Family::m23, 1).pools()) == std::vector<PoolSize>{3});
    CHECK(to_vec(family(Family::m23, 3).pools()) == std::vector<PoolSize>{18, 6, 2});
    CHECK(to_vec(family(Family::m24, 3).pools()) == std::vector<PoolSize>{24, 6, 2});
    CHECK(code_of([] { family(Family::m33, 0); }) == ErrorCode::OutOfRange);
    CHECK(code_of([] { family(Family::m34, 40); }) == ErrorCode::Overflow);
    CHECK(family(Family::m34, 39).first_pool() == 4 * checked_pow3(38));
}

TEST_CASE("family multiplier patterns for k = 1..8")
{
    for (int k = 1; k <= 8; ++k) {
        std::vector<PoolSize> threes(static_cast<std::size_t>(k), 3);
        CHECK(multipliers(family(Family::m33, k)).pi == threes);
        if (k < 2)
            continue;
        auto m34 = threes;
        m34.back() = 4;
        CHECK(multipliers(family(Family::m34, k)).pi == m34);
        auto m23 = threes;
        m23.front() = 2;
        CHECK(multipliers(family(Family::m23, k)).pi == m23);
        auto m24 = m23;
        m24.back() = 4;
        CHECK(multipliers(family(Family::m24, k)).pi == m24);
    }
}

TEST_CASE("family outputs validate for k = 1..12")
{
    for (Family f : {Family::m33, Family::m34, Family::m23, Family::m24})
        for (int k = 1; k <= 12; ++k) {
            const auto s = family(f, k);
            CHECK_NOTHROW(make_strategy(to_vec(s.pools())));
            CHECK(s.stages() == k);
        }
}

TEST_CASE("family names round-trip")
{
    for (Family f : {Family::m33, Family::m34, Family::m23, Family::m24})
        CHECK(parse_family(to_string(f)) == f);
    CHECK_THROWS_AS(parse_family("m99"), Error);
}

TEST_CASE("geometric chains")
{
    CHECK(make_strategy({27, 9, 3}).geometric());
    CHECK(make_strategy({8, 4, 2}).geometric());
    CHECK(make_strategy({5}).geometric());
    CHECK_FALSE(make_strategy({12, 3}).geometric());
    CHECK_FALSE(make_strategy({18, 6, 2}).geometric());
}
