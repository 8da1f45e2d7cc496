#pragma once

#include <cmath>
#include <optional>

#include "nestpool/strategy.hpp"

namespace nestpool::compensated {

/// Unevaluated sum hi + lo with |lo| <= ulp(hi) / 2.
struct DoubleDouble {
    double hi = 0.0;
    double lo = 0.0;

    constexpr DoubleDouble() = default;
    constexpr DoubleDouble(double h) : hi(h) {}
    constexpr DoubleDouble(double h, double l) : hi(h), lo(l) {}

    static DoubleDouble from_integer(PoolSize n) noexcept;

    double to_double() const noexcept { return hi + lo; }
};

// Error-free transformations.
inline DoubleDouble two_sum(double a, double b) noexcept
{
    const double s = a + b;
    const double bb = s - a;
    return {s, (a - (s - bb)) + (b - bb)};
}

inline DoubleDouble quick_two_sum(double a, double b) noexcept
{
    const double s = a + b;
    return {s, b - (s - a)};
}

inline DoubleDouble two_prod(double a, double b) noexcept
{
    const double p = a * b;
    return {p, std::fma(a, b, -p)};
}

DoubleDouble operator+(DoubleDouble a, DoubleDouble b) noexcept;
DoubleDouble operator-(DoubleDouble a) noexcept;
DoubleDouble operator-(DoubleDouble a, DoubleDouble b) noexcept;
DoubleDouble operator*(DoubleDouble a, DoubleDouble b) noexcept;
DoubleDouble operator*(DoubleDouble a, double b) noexcept;
DoubleDouble operator/(DoubleDouble a, double b) noexcept;

inline double magnitude(DoubleDouble a) noexcept { return std::fabs(a.hi) + std::fabs(a.lo); }

/// A double-double value with an upper bound on its distance to the exact
/// real it approximates. Every arithmetic operation widens the radius by the
/// propagated input error plus the operation's own rounding bound.
struct Enclosure {
    DoubleDouble value;
    double radius = 0.0;

    static Enclosure exact(DoubleDouble v) noexcept { return {v, 0.0}; }

    double approx() const noexcept { return value.to_double(); }
    double lower() const noexcept;
    double upper() const noexcept;

    /// True when the sign of the enclosed real is determined.
    bool sign_certain() const noexcept;
};

Enclosure operator+(const Enclosure& a, const Enclosure& b) noexcept;
Enclosure operator-(const Enclosure& a, const Enclosure& b) noexcept;
Enclosure operator*(const Enclosure& a, const Enclosure& b) noexcept;
Enclosure operator/(const Enclosure& a, double b) noexcept;

/// Enclosure of the smaller of two reals, centred on the smaller centre.
Enclosure min(const Enclosure& a, const Enclosure& b) noexcept;

/// log(1 - p) for an exact double p in [0, 1/2]. Throws OutOfRange otherwise.
Enclosure log_one_minus(double p);

/// 1 - exp(-w) for w >= 0.
Enclosure one_minus_exp_neg(const Enclosure& w);

/// 1 - q^m given log q.
Enclosure one_minus_q_pow(PoolSize m, const Enclosure& log_q);

/// Exact reciprocal 1/m up to double-double rounding.
Enclosure reciprocal(PoolSize m);

/// D_k(m, p) evaluated in double-double with a rigorous error radius.
/// p must be an exact double in [0, 1/2].
Enclosure cost(const NestedStrategy& s, double p);

} // namespace nestpool::compensated
