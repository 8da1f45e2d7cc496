#pragma once

#include <optional>
#include <span>
#include <vector>

#include "nestpool/cost.hpp"
#include "nestpool/prevalence.hpp"
#include "nestpool/strategy.hpp"

namespace nestpool {

/// 1 - 3^{-1/3}: above this prevalence no pooling strategy beats individual testing.
double pooling_threshold() noexcept;

/// Roots that fix the transition prevalences between the m33 and m34 families.
struct TransitionConstants {
    double alpha1 = 0.0; ///< smallest root of F(a) = 1/12 - e^{-3a} + e^{-4a}
    double alpha2 = 0.0; ///< second root of F
    double beta = 0.0;   ///< root of G(a) = -7/36 - e^{-4a} + e^{-9a}/3 + e^{-3a}
    double a1 = 0.0;     ///< 1/5 - e^{-5a} = 1/4 - e^{-4a}
    double a2 = 0.0;     ///< 1/4 - e^{-4a} = 1/3 - e^{-3a}
    double rho0 = 0.0;
};

/// Bisection on fixed brackets, capped at 200 iterations. Throws
/// BracketFailure if a bracket does not change sign and ToleranceNotMet if a
/// residual exceeds tol. Requires 0 < tol <= 1e-8.
TransitionConstants transition_constants(double tol = 1e-12);

/// Constants computed once at tol = 1e-12.
const TransitionConstants& default_transition_constants();

struct TransitionRow {
    int k = 0;
    double lambda = 0.0;   ///< m33 / m34 switch with k stages
    double rho_prev = 0.0; ///< rho_{k-1}
};

struct TransitionTable {
    std::vector<TransitionRow> rows;
};

/// Rows k = 1..K with lambda_k = 1 - e^{-alpha1/3^{k-1}} and
/// rho_k = 1 - e^{-beta/3^{k-1}}, rho_0 = 1 - 3^{-1/3}. Requires 1 <= K <= 40.
TransitionTable transition_table(int K);

/// Real interval (lower, upper] that brackets the admissible stage counts.
struct StageBounds {
    double lower = 0.0; ///< exclusive
    double upper = 0.0; ///< inclusive
};

/// log_3(1 / |log_3 q|).
double stage_scale(const Prevalence& p);

/// Closed-form stage count for the m33 (all multipliers 3) or m23 family.
/// Requires 0 < p < rho0; throws OutOfRange otherwise or for other families.
int stage_count(Family code, const Prevalence& p);

/// Bracket for the m24 or m34 family.
StageBounds stage_bounds(Family code, const Prevalence& p);

/// All integers k >= 1 inside stage_bounds(code, p). May be empty.
std::vector<int> stage_count_interval(Family code, const Prevalence& p);

struct Selection {
    NestedStrategy strategy;
    CostReport report;
};

/// m33 / m34 choice by transition point; individual testing for p >= rho0.
/// Ties at transition points resolve to m33. Throws OutOfRange when p is so
/// small (including p = 0) that the chain would overflow 64-bit pool sizes.
Selection conjectured_optimal(const Prevalence& p);

struct ConjectureRecord {
    double p = 0.0;
    std::optional<int> k23, k24, k3, k34;
    /// Candidate costs; +infinity when the stage interval is empty.
    double D23 = 0.0, D24 = 0.0, D33 = 0.0, D34 = 0.0;
    /// min(D33, D34) - min(D23, D24), recomputed from the four doubles above.
    double phi = 0.0;
    /// Rigorous bound on |phi - exact Phi(p)|.
    double phi_radius = 0.0;
    bool sign_certified = false;
    /// Family attaining min(D33, D34).
    Family winner = Family::m33;
};

struct FourCandidateResult {
    NestedStrategy strategy;
    CostReport report;
    ConjectureRecord record;
};

/// Evaluates the four candidate families at their admissible stage counts in
/// compensated arithmetic and returns the cheapest. Candidates with first
/// multiplier 2 are the chain (2) when the stage count is 1.
/// Requires 0 < p < rho0.
FourCandidateResult four_candidate_optimal(const Prevalence& p);

/// Records for p = 2^{-j}, j = j_min..j_max, followed by extra_points.
/// threads = 0 uses all hardware threads; output does not depend on it.
std::vector<ConjectureRecord> conjecture_sweep(int j_min, int j_max,
                                               std::span<const double> extra_points = {},
                                               unsigned threads = 0);

/// Brute force over every divisor chain with m_1 <= max_m1, plus individual
/// testing. Ties go to smaller k, then the lexicographically smaller chain.
/// Requires 2 <= max_m1 <= 2000.
Selection exhaustive_optimal(const Prevalence& p, PoolSize max_m1);

} // namespace nestpool
