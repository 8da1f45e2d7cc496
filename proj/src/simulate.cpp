#include "nestpool/simulate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <string>

#include "nestpool/error.hpp"
#include "parallel.hpp"

namespace nestpool {

namespace {

// Neumaier summation
struct CompensatedSum {
    double sum = 0.0;
    double correction = 0.0;

    void add(double v) noexcept
    {
        const double t = sum + v;
        if (std::fabs(sum) >= std::fabs(v))
            correction += (sum - t) + v;
        else
            correction += (v - t) + sum;
        sum = t;
    }

    double value() const noexcept { return sum + correction; }
};

/// Stage-by-stage procedure. positive(start, size) reports whether the pool
/// covering [start, start + size) holds an infected member.
template <class Positive>
void run_stages(const NestedStrategy& s, Positive&& positive, std::vector<std::int64_t>& per_stage,
                std::vector<std::int64_t>& current, std::vector<std::int64_t>& next)
{
    const int k = s.stages();
    per_stage.assign(static_cast<std::size_t>(k) + 1, 0);
    per_stage[0] = 1;
    const std::int64_t m1 = s.first_pool();
    current.clear();
    if (k == 0 || !positive(0, m1))
        return;
    current.push_back(0);

    for (int l = 1; l <= k; ++l) {
        const std::int64_t size = s.pool(l);
        const std::int64_t child = s.pool(l + 1);
        const std::int64_t fanout = size / child;
        per_stage[static_cast<std::size_t>(l)] = static_cast<std::int64_t>(current.size()) * fanout;
        if (l == k)
            break;
        next.clear();
        for (std::int64_t start : current)
            for (std::int64_t c = 0; c < fanout; ++c) {
                const std::int64_t sub = start + c * child;
                if (positive(sub, child))
                    next.push_back(sub);
            }
        current.swap(next);
    }
}

std::int64_t total_of(const std::vector<std::int64_t>& per_stage)
{
    std::int64_t t = 0;
    for (auto v : per_stage)
        t += v;
    return t;
}

} // namespace

std::uint64_t mix64(std::uint64_t x) noexcept
{
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

ReplicationRng::ReplicationRng(std::uint64_t seed, std::uint64_t replication) noexcept
    : state_(mix64(mix64(seed) + replication * 0x9e3779b97f4a7c15ULL))
{
}

std::uint64_t ReplicationRng::next() noexcept
{
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
}

ProcedureOutcome run_procedure(const NestedStrategy& s, const Population& pop)
{
    const auto n = static_cast<std::size_t>(s.first_pool());
    if (pop.statuses.size() != n)
        throw Error(ErrorCode::LengthMismatch,
                    "population has " + std::to_string(pop.statuses.size()) +
                        " members, strategy expects " + std::to_string(n));

    std::vector<std::int64_t> infected_before(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i)
        infected_before[i + 1] = infected_before[i] + (pop.statuses[i] != 0 ? 1 : 0);
    const auto positive = [&](std::int64_t start, std::int64_t size) {
        return infected_before[static_cast<std::size_t>(start + size)] !=
               infected_before[static_cast<std::size_t>(start)];
    };

    ProcedureOutcome out;
    std::vector<std::int64_t> current, next;
    run_stages(s, positive, out.per_stage, current, next);
    out.total_tests = total_of(out.per_stage);
    return out;
}

SimulationReport monte_carlo(const NestedStrategy& s, const Prevalence& p,
                             std::int64_t replications, std::uint64_t seed, unsigned threads)
{
    if (replications < 1)
        throw Error(ErrorCode::OutOfRange, "monte carlo needs at least one replication");

    const auto n = static_cast<std::size_t>(s.first_pool());
    const std::size_t stages = static_cast<std::size_t>(s.stages()) + 1;
    const double prob = p.p();

    // Integer tallies merge exactly, so the result cannot depend on how
    // replications are split between workers.
    struct Tally {
        std::map<std::int64_t, std::int64_t> histogram; // tests per pool -> count
        std::vector<std::int64_t> stage_totals;
    };
    const unsigned workers = detail::resolve_threads(threads);
    std::vector<Tally> tallies(workers);

    detail::parallel_chunks(
        static_cast<std::size_t>(replications), workers,
        [&](std::size_t begin, std::size_t end, std::size_t w) {
            Tally& tally = tallies[w];
            tally.stage_totals.assign(stages, 0);
            std::vector<std::int64_t> infected_before(n + 1, 0);
            std::vector<std::int64_t> per_stage, current, next;
            const auto positive = [&](std::int64_t start, std::int64_t size) {
                return infected_before[static_cast<std::size_t>(start + size)] !=
                       infected_before[static_cast<std::size_t>(start)];
            };
            for (std::size_t r = begin; r < end; ++r) {
                ReplicationRng rng(seed, r);
                for (std::size_t i = 0; i < n; ++i)
                    infected_before[i + 1] = infected_before[i] + (rng.uniform() < prob ? 1 : 0);
                run_stages(s, positive, per_stage, current, next);
                ++tally.histogram[total_of(per_stage)];
                for (std::size_t l = 0; l < stages; ++l)
                    tally.stage_totals[l] += per_stage[l];
            }
        });

    std::map<std::int64_t, std::int64_t> histogram;
    std::vector<std::int64_t> stage_totals(stages, 0);
    for (const Tally& t : tallies) {
        for (const auto& [tests, count] : t.histogram)
            histogram[tests] += count;
        for (std::size_t l = 0; l < t.stage_totals.size(); ++l)
            stage_totals[l] += t.stage_totals[l];
    }

    const double count = static_cast<double>(replications);
    long double sum = 0.0L;
    for (const auto& [tests, c] : histogram)
        sum += static_cast<long double>(tests) * static_cast<long double>(c);
    const double mean = static_cast<double>(sum / static_cast<long double>(replications));

    CompensatedSum second, fourth;
    for (const auto& [tests, c] : histogram) {
        const double d = static_cast<double>(tests) - mean;
        second.add(static_cast<double>(c) * d * d);
        fourth.add(static_cast<double>(c) * d * d * d * d);
    }
    const double m2 = second.value() / count;
    const double m4 = fourth.value() / count;

    SimulationReport rep;
    rep.replications = replications;
    rep.seed = seed;
    rep.mean_tests_per_pool = mean;
    rep.mean_tests_per_individual = mean / static_cast<double>(n);
    rep.variance_tests_per_pool = replications > 1 ? second.value() / (count - 1.0) : 0.0;
    for (std::size_t l = 0; l < stages; ++l)
        rep.stage_counts.push_back(static_cast<double>(stage_totals[l]) / count);
    rep.std_error_mean = std::sqrt(rep.variance_tests_per_pool / count) / static_cast<double>(n);
    // Var(s^2) ~ (mu_4 - sigma^4 (n-3)/(n-1)) / n
    const double var_of_var =
        replications > 3 ? (m4 - m2 * m2 * (count - 3.0) / (count - 1.0)) / count : 0.0;
    rep.std_error_variance = std::sqrt(std::max(0.0, var_of_var));
    return rep;
}

ExactMoments enumerate_exact(const NestedStrategy& s, const Prevalence& p)
{
    const std::int64_t m1 = s.first_pool();
    if (m1 > 20)
        throw Error(ErrorCode::TooLarge, "exact enumeration is limited to m_1 <= 20");
    const auto n = static_cast<int>(m1);
    const std::size_t stages = static_cast<std::size_t>(s.stages()) + 1;

    // pattern weight depends only on the number of infected members
    std::vector<double> weight(static_cast<std::size_t>(n) + 1, 0.0);
    if (p.p() == 0.0) {
        weight[0] = 1.0;
    } else if (p.p() == 1.0) {
        weight[static_cast<std::size_t>(n)] = 1.0;
    } else {
        const double log_p = std::log(p.p());
        for (int c = 0; c <= n; ++c)
            weight[static_cast<std::size_t>(c)] = std::exp(c * log_p + (n - c) * p.log_q());
    }

    std::map<std::int64_t, CompensatedSum> mass; // tests per pool -> probability
    std::vector<CompensatedSum> stage_sums(stages);
    std::vector<std::int64_t> per_stage, current, next;
    const std::uint64_t patterns = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < patterns; ++mask) {
        const double w = weight[static_cast<std::size_t>(std::popcount(mask))];
        if (w == 0.0)
            continue;
        const auto positive = [mask](std::int64_t start, std::int64_t size) {
            const std::uint64_t bits = ((std::uint64_t{1} << size) - 1) << start;
            return (mask & bits) != 0;
        };
        run_stages(s, positive, per_stage, current, next);
        mass[total_of(per_stage)].add(w);
        for (std::size_t l = 0; l < stages; ++l)
            stage_sums[l].add(w * static_cast<double>(per_stage[l]));
    }

    ExactMoments out;
    CompensatedSum mean;
    for (const auto& [tests, w] : mass)
        mean.add(w.value() * static_cast<double>(tests));
    out.mean = mean.value();
    CompensatedSum var;
    for (const auto& [tests, w] : mass) {
        const double d = static_cast<double>(tests) - out.mean;
        var.add(w.value() * d * d);
    }
    out.variance = var.value();
    for (const auto& st : stage_sums)
        out.stage_means.push_back(st.value());
    return out;
}

} // namespace nestpool
