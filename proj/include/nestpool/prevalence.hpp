#pragma once

#include <cmath>
#include <cstdint>

#include "nestpool/error.hpp"

namespace nestpool {

/// Infection probability p together with q = 1 - p and |log q|.
///
/// |log q| is obtained as -log1p(-p), so it keeps full relative precision
/// for p far below machine epsilon. All "1 - q^n" quantities in the library
/// go through one_minus_q_pow(), which never forms q^n directly.
class Prevalence {
public:
    explicit Prevalence(double p) : p_(p)
    {
        if (!(p >= 0.0 && p <= 1.0))
            throw Error(ErrorCode::InvalidProbability, "prevalence must lie in [0, 1]");
        q_ = 1.0 - p;
        log_q_ = std::log1p(-p);
        neg_log_q_ = -log_q_;
    }

    double p() const noexcept { return p_; }
    double q() const noexcept { return q_; }
    /// log q (<= 0, -inf at p = 1)
    double log_q() const noexcept { return log_q_; }
    /// |log q| (>= 0, +inf at p = 1)
    double neg_log_q() const noexcept { return neg_log_q_; }

    /// q^n computed as exp(n log q).
    double q_pow(double n) const noexcept
    {
        if (p_ == 0.0)
            return 1.0;
        return std::exp(n * log_q_);
    }

    /// 1 - q^n without cancellation.
    double one_minus_q_pow(double n) const noexcept
    {
        if (p_ == 0.0)
            return 0.0;
        return -std::expm1(n * log_q_);
    }

private:
    double p_;
    double q_;
    double log_q_;
    double neg_log_q_;
};

} // namespace nestpool
