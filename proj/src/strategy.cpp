#include "nestpool/strategy.hpp"

#include <string>

#include "nestpool/error.hpp"

namespace nestpool {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::NonDivisible: return "NonDivisible";
    case ErrorCode::NotDecreasing: return "NotDecreasing";
    case ErrorCode::PoolTooSmall: return "PoolTooSmall";
    case ErrorCode::EmptyStrategy: return "EmptyStrategy";
    case ErrorCode::InvalidPoolSize: return "InvalidPoolSize";
    case ErrorCode::InvalidProbability: return "InvalidProbability";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::BracketFailure: return "BracketFailure";
    case ErrorCode::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorCode::InvalidPools: return "InvalidPools";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooLarge: return "TooLarge";
    }
    return "Unknown";
}

NestedStrategy::NestedStrategy(std::vector<PoolSize> pools) : pools_(std::move(pools))
{
    for (std::size_t j = 0; j < pools_.size(); ++j) {
        const PoolSize m = pools_[j];
        if (m < 2)
            throw Error(ErrorCode::PoolTooSmall,
                        "pool size m_" + std::to_string(j + 1) + " = " + std::to_string(m) +
                            " is smaller than 2");
        if (j == 0)
            continue;
        const PoolSize prev = pools_[j - 1];
        if (m >= prev)
            throw Error(ErrorCode::NotDecreasing,
                        "pool sizes must strictly decrease: m_" + std::to_string(j) + " = " +
                            std::to_string(prev) + ", m_" + std::to_string(j + 1) + " = " +
                            std::to_string(m));
        if (prev % m != 0)
            throw Error(ErrorCode::NonDivisible,
                        "m_" + std::to_string(j) + " = " + std::to_string(prev) +
                            " is not a multiple of m_" + std::to_string(j + 1) + " = " +
                            std::to_string(m));
    }
}

PoolSize NestedStrategy::pool(int j) const
{
    const int k = stages();
    if (j == k + 1)
        return 1;
    if (j < 1 || j > k + 1)
        throw Error(ErrorCode::OutOfRange, "pool index out of range");
    return pools_[static_cast<std::size_t>(j - 1)];
}

bool NestedStrategy::geometric() const noexcept
{
    if (pools_.empty())
        return true;
    const PoolSize mu = pools_.back();
    for (std::size_t j = 0; j + 1 < pools_.size(); ++j)
        if (pools_[j] != pools_[j + 1] * mu)
            return false;
    return true;
}

NestedStrategy make_strategy(std::vector<PoolSize> pools)
{
    return NestedStrategy(std::move(pools));
}

std::vector<PoolSize> Multipliers::reconstruct() const
{
    const std::size_t k = pi.size();
    std::vector<PoolSize> m(k);
    PoolSize prod = 1;
    // m_{k-j+1} = pi_j * ... * pi_1
    for (std::size_t j = 0; j < k; ++j) {
        prod *= pi[j];
        m[k - 1 - j] = prod;
    }
    return m;
}

Multipliers multipliers(const NestedStrategy& s)
{
    const int k = s.stages();
    if (k == 0)
        throw Error(ErrorCode::EmptyStrategy, "individual testing has no multipliers");
    Multipliers out;
    out.pi.reserve(static_cast<std::size_t>(k));
    for (int j = 1; j <= k; ++j)
        out.pi.push_back(s.pool(k - j + 1) / s.pool(k - j + 2));
    return out;
}

std::string_view to_string(Family f) noexcept
{
    switch (f) {
    case Family::m33: return "m33";
    case Family::m34: return "m34";
    case Family::m23: return "m23";
    case Family::m24: return "m24";
    }
    return "?";
}

Family parse_family(std::string_view name)
{
    if (name == "m33") return Family::m33;
    if (name == "m34") return Family::m34;
    if (name == "m23") return Family::m23;
    if (name == "m24") return Family::m24;
    throw Error(ErrorCode::OutOfRange, "unknown family '" + std::string(name) + "'");
}

PoolSize checked_pow3(int e)
{
    if (e < 0 || e > 39)
        throw Error(ErrorCode::Overflow, "3^" + std::to_string(e) + " outside 64-bit range");
    PoolSize v = 1;
    for (int i = 0; i < e; ++i)
        v *= 3;
    return v;
}

NestedStrategy family(Family code, int k)
{
    if (k < 1)
        throw Error(ErrorCode::OutOfRange, "family requires k >= 1");
    if (k > max_family_stages)
        throw Error(ErrorCode::Overflow,
                    "family chain with k = " + std::to_string(k) + " overflows 64-bit pool sizes");
    if (k == 1) {
        const bool three = code == Family::m33 || code == Family::m23;
        return NestedStrategy({three ? PoolSize{3} : PoolSize{4}});
    }

    // build from multipliers pi_1..pi_k
    std::vector<PoolSize> pi(static_cast<std::size_t>(k), 3);
    if (code == Family::m23 || code == Family::m24)
        pi.front() = 2;
    if (code == Family::m34 || code == Family::m24)
        pi.back() = 4;
    return NestedStrategy(Multipliers{std::move(pi)}.reconstruct());
}

} // namespace nestpool
