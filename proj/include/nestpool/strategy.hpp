#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace nestpool {

using PoolSize = std::int64_t;

/// A nested pooling chain m_1 > m_2 > ... > m_k > 1 where each pool size
/// divides the previous one. An empty chain (k = 0) is individual testing.
class NestedStrategy {
public:
    /// Individual testing.
    NestedStrategy() = default;

    /// Validates the chain; throws Error{NonDivisible, NotDecreasing, PoolTooSmall}.
    explicit NestedStrategy(std::vector<PoolSize> pools);

    int stages() const noexcept { return static_cast<int>(pools_.size()); }
    bool individual() const noexcept { return pools_.empty(); }

    std::span<const PoolSize> pools() const noexcept { return pools_; }

    /// m_j for j = 1..k, and m_{k+1} = 1 by convention.
    PoolSize pool(int j) const;
    PoolSize first_pool() const noexcept { return pools_.empty() ? 1 : pools_.front(); }

    /// True when m_j / m_{j+1} = m_k for every j, i.e. m_j = mu^{k-j+1}.
    bool geometric() const noexcept;

    friend bool operator==(const NestedStrategy&, const NestedStrategy&) = default;

private:
    std::vector<PoolSize> pools_;
};

NestedStrategy make_strategy(std::vector<PoolSize> pools);

/// Multipliers pi_j = m_{k-j+1} / m_{k-j+2}, so pi_1 = m_k is the last pool
/// size and pi_k = m_1 / m_2.
struct Multipliers {
    std::vector<PoolSize> pi;

    /// m = (pi_k...pi_1, ..., pi_2 pi_1, pi_1)
    std::vector<PoolSize> reconstruct() const;
};

/// Throws Error{EmptyStrategy} for k = 0.
Multipliers multipliers(const NestedStrategy& s);

enum class Family { m33, m34, m23, m24 };

std::string_view to_string(Family f) noexcept;
Family parse_family(std::string_view name);

/// Largest k accepted by family(); 4 * 3^38 still fits in 64 bits.
inline constexpr int max_family_stages = 39;

/// Canonical chains:
///   m33 = (3^k, ..., 9, 3)
///   m34 = (4*3^{k-1}, 3^{k-1}, ..., 3)
///   m23 = (2*3^{k-1}, ..., 6, 2)
///   m24 = (8*3^{k-2}, 2*3^{k-2}, ..., 6, 2)
/// with k = 1 giving (3) for m33/m23 and (4) for m34/m24.
NestedStrategy family(Family code, int k);

PoolSize checked_pow3(int e);

} // namespace nestpool
