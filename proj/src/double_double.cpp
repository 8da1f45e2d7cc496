#include "nestpool/double_double.hpp"

#include <algorithm>
#include <limits>

#include "nestpool/error.hpp"

namespace nestpool::compensated {

namespace {

constexpr double unit_roundoff = 0x1p-53;
// Relative rounding bound for one double-double operation. The published
// bounds for the algorithms below are at most 5u^2; 8u^2 leaves headroom.
constexpr double op_bound = 8.0 * unit_roundoff * unit_roundoff;
// Inflation applied to radii to absorb the rounding of the radius arithmetic.
constexpr double inflate = 1.0 + 4.0 * unit_roundoff;
constexpr double tiny = std::numeric_limits<double>::denorm_min();

// Relative size below which series terms are dropped (tail is still bounded).
constexpr double series_cutoff = 0x1p-115;

double widen(double r) noexcept { return r * inflate + tiny; }

Enclosure negate(const Enclosure& a) noexcept { return {-a.value, a.radius}; }

Enclosure scale_pow2(const Enclosure& a, double s) noexcept
{
    return {{a.value.hi * s, a.value.lo * s}, a.radius * s};
}

DoubleDouble divide(DoubleDouble a, DoubleDouble b) noexcept
{
    const double q1 = a.hi / b.hi;
    DoubleDouble r = a - b * q1;
    const double q2 = r.hi / b.hi;
    r = r - b * q2;
    const double q3 = r.hi / b.hi;
    return quick_two_sum(q1, q2) + DoubleDouble(q3);
}

} // namespace

DoubleDouble DoubleDouble::from_integer(PoolSize n) noexcept
{
    const double h = static_cast<double>(n);
    // n - h is exact in 64-bit arithmetic and fits a double exactly
    const auto rest = n - static_cast<PoolSize>(h);
    return quick_two_sum(h, static_cast<double>(rest));
}

DoubleDouble operator+(DoubleDouble a, DoubleDouble b) noexcept
{
    DoubleDouble s = two_sum(a.hi, b.hi);
    const DoubleDouble t = two_sum(a.lo, b.lo);
    s.lo += t.hi;
    s = quick_two_sum(s.hi, s.lo);
    s.lo += t.lo;
    return quick_two_sum(s.hi, s.lo);
}

DoubleDouble operator-(DoubleDouble a) noexcept { return {-a.hi, -a.lo}; }

DoubleDouble operator-(DoubleDouble a, DoubleDouble b) noexcept { return a + (-b); }

DoubleDouble operator*(DoubleDouble a, DoubleDouble b) noexcept
{
    DoubleDouble p = two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return quick_two_sum(p.hi, p.lo);
}

DoubleDouble operator*(DoubleDouble a, double b) noexcept
{
    DoubleDouble p = two_prod(a.hi, b);
    p.lo += a.lo * b;
    return quick_two_sum(p.hi, p.lo);
}

DoubleDouble operator/(DoubleDouble a, double b) noexcept
{
    const double q1 = a.hi / b;
    const DoubleDouble p = two_prod(q1, b);
    const DoubleDouble s = two_sum(a.hi, -p.hi);
    const double e = (s.lo - p.lo) + a.lo;
    const double q2 = (s.hi + e) / b;
    return quick_two_sum(q1, q2);
}

double Enclosure::lower() const noexcept { return value.to_double() - radius; }
double Enclosure::upper() const noexcept { return value.to_double() + radius; }

bool Enclosure::sign_certain() const noexcept
{
    // |hi + lo| >= |hi| - |lo|, and the comparison leaves a relative margin
    // for the rounding of the subtraction itself.
    const double lowest = std::fabs(value.hi) - std::fabs(value.lo);
    return lowest * (1.0 - 4.0 * unit_roundoff) > widen(radius);
}

Enclosure operator+(const Enclosure& a, const Enclosure& b) noexcept
{
    Enclosure r;
    r.value = a.value + b.value;
    r.radius = widen(a.radius + b.radius + op_bound * magnitude(r.value));
    return r;
}

Enclosure operator-(const Enclosure& a, const Enclosure& b) noexcept { return a + negate(b); }

Enclosure operator*(const Enclosure& a, const Enclosure& b) noexcept
{
    Enclosure r;
    r.value = a.value * b.value;
    const double ma = magnitude(a.value);
    const double mb = magnitude(b.value);
    r.radius = widen(ma * b.radius + mb * a.radius + a.radius * b.radius +
                     op_bound * magnitude(r.value));
    return r;
}

Enclosure operator/(const Enclosure& a, double b) noexcept
{
    Enclosure r;
    r.value = a.value / b;
    r.radius = widen(a.radius / std::fabs(b) + op_bound * magnitude(r.value));
    return r;
}

Enclosure min(const Enclosure& a, const Enclosure& b) noexcept
{
    const bool a_smaller = (a.value - b.value).hi <= 0.0;
    Enclosure r = a_smaller ? a : b;
    r.radius = std::max(a.radius, b.radius);
    return r;
}

Enclosure log_one_minus(double p)
{
    if (!(p >= 0.0 && p <= 0.5))
        throw Error(ErrorCode::OutOfRange, "compensated log(1 - p) requires p in [0, 1/2]");
    if (p == 0.0)
        return Enclosure::exact(0.0);

    // log(1 - p) = -sum_{n>=1} p^n / n
    const Enclosure step = Enclosure::exact(p);
    Enclosure power = step;
    Enclosure sum = Enclosure::exact(0.0);
    Enclosure term;
    int n = 1;
    for (;; ++n) {
        term = power / static_cast<double>(n);
        sum = sum + term;
        if (magnitude(term.value) < series_cutoff * magnitude(sum.value))
            break;
        power = power * step;
    }
    // tail: sum_{j>n} p^j / j <= p^{n+1} / ((n+1)(1-p)) <= 2 p |term_n|
    const double tail = 2.0 * p * (magnitude(term.value) + term.radius);
    sum.radius = widen(sum.radius + tail);
    return negate(sum);
}

Enclosure one_minus_exp_neg(const Enclosure& w)
{
    const double whi = w.value.hi;
    if (whi == 0.0 && w.value.lo == 0.0)
        return {0.0, w.radius * 2.0};

    if (whi > 40.0) {
        // exp(-w) < 5e-18: a first-order correction for lo is enough
        const double e = std::exp(-whi) * (1.0 - w.value.lo);
        Enclosure r;
        r.value = quick_two_sum(1.0, -e);
        const double lo = w.value.lo;
        r.radius = widen(e * (8.0 * unit_roundoff + lo * lo + 2.0 * w.radius) + op_bound);
        return r;
    }

    // reduce w by 2^s until w / 2^s <= 1/16, evaluate expm1 by Taylor series,
    // then undo the reduction with expm1(2x) = expm1(x) (expm1(x) + 2)
    int s = 0;
    double scale = 1.0;
    while (whi * scale > 0.0625) {
        scale *= 0.5;
        ++s;
    }
    const Enclosure r = negate(scale_pow2(w, scale));
    const double abs_r = magnitude(r.value) + r.radius;

    Enclosure term = r;
    Enclosure sum = r;
    int n = 1;
    while (magnitude(term.value) >= series_cutoff * magnitude(sum.value)) {
        ++n;
        term = (term * r) / static_cast<double>(n);
        sum = sum + term;
    }
    // alternating-or-not tail bounded by a geometric series with ratio |r| <= 1/2
    const double tail = 2.0 * abs_r * (magnitude(term.value) + term.radius);
    sum.radius = widen(sum.radius + tail);

    const Enclosure two = Enclosure::exact(2.0);
    for (int i = 0; i < s; ++i)
        sum = sum * (sum + two);
    return negate(sum);
}

Enclosure one_minus_q_pow(PoolSize m, const Enclosure& log_q)
{
    const Enclosure w = Enclosure::exact(DoubleDouble::from_integer(m)) * negate(log_q);
    return one_minus_exp_neg(w);
}

Enclosure reciprocal(PoolSize m)
{
    const DoubleDouble dm = DoubleDouble::from_integer(m);
    Enclosure r;
    r.value = divide(DoubleDouble(1.0), dm);
    r.radius = widen(2.0 * op_bound * magnitude(r.value));
    return r;
}

Enclosure cost(const NestedStrategy& s, double p)
{
    if (s.individual())
        return Enclosure::exact(1.0);
    const Enclosure log_q = log_one_minus(p);
    const int k = s.stages();
    Enclosure sum = reciprocal(s.pool(1));
    for (int l = 2; l <= k + 1; ++l) {
        Enclosure positive = one_minus_q_pow(s.pool(l - 1), log_q);
        if (l <= k)
            positive = positive * reciprocal(s.pool(l));
        sum = sum + positive;
    }
    return sum;
}

} // namespace nestpool::compensated
