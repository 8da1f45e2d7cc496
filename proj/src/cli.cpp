#include "nestpool/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <string_view>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "nestpool/cost.hpp"
#include "nestpool/error.hpp"
#include "nestpool/linearized.hpp"
#include "nestpool/optimizer.hpp"
#include "nestpool/simulate.hpp"

namespace nestpool {

namespace {

using json = nlohmann::ordered_json;

/// Thrown for bad flag values that CLI11 cannot catch on its own.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json number_or_null(const std::optional<double>& v)
{
    return v ? json(*v) : json(nullptr);
}

json pool_array(const NestedStrategy& s)
{
    json a = json::array();
    for (PoolSize m : s.pools())
        a.push_back(m);
    return a;
}

// CSV cells carry every digit needed to round-trip.
std::string real(double v) { return fmt::format("{:.17g}", v); }

NestedStrategy parse_pools(std::string_view text)
{
    std::vector<PoolSize> pools;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const std::string_view token = text.substr(0, comma);
        PoolSize v = 0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
        if (ec != std::errc{} || ptr != token.data() + token.size())
            throw UsageError("invalid pool size '" + std::string(token) + "'");
        pools.push_back(v);
        if (comma == std::string_view::npos)
            break;
        text.remove_prefix(comma + 1);
    }
    return NestedStrategy(std::move(pools));
}

Prevalence open_unit(double p)
{
    if (!(p > 0.0 && p < 1.0))
        throw UsageError("--p must satisfy 0 < p < 1");
    return Prevalence(p);
}

void append_subtree(const NestedStrategy& s, int stage, std::string& label, int& printed,
                    int max_nodes, std::string& out)
{
    if (printed >= max_nodes)
        return;
    ++printed;
    out += std::string(2 * static_cast<std::size_t>(stage - 1), ' ');
    out += fmt::format("({}) size {}\n", label, s.pool(stage));
    if (stage == s.stages())
        return;
    const PoolSize children = s.pool(stage) / s.pool(stage + 1);
    for (PoolSize i = 1; i <= children && printed < max_nodes; ++i) {
        const std::size_t mark = label.size();
        label += fmt::format(",{}", i);
        append_subtree(s, stage + 1, label, printed, max_nodes, out);
        label.resize(mark);
    }
}

std::int64_t pool_node_count(const NestedStrategy& s)
{
    std::int64_t total = 0;
    for (int j = 1; j <= s.stages(); ++j) {
        const std::int64_t at_stage = s.first_pool() / s.pool(j);
        if (total > std::numeric_limits<std::int64_t>::max() - at_stage)
            return std::numeric_limits<std::int64_t>::max();
        total += at_stage;
    }
    return total;
}

int cmd_plan(double p_value, const std::string& mode, PoolSize max_pool, std::ostream& out)
{
    const Prevalence p = open_unit(p_value);
    NestedStrategy s;
    CostReport report;
    if (mode == "conjecture") {
        auto sel = conjectured_optimal(p);
        s = sel.strategy;
        report = sel.report;
    } else if (mode == "four_candidate") {
        if (p.p() >= pooling_threshold()) {
            report = cost(s, p);
        } else {
            auto res = four_candidate_optimal(p);
            s = res.strategy;
            report = res.report;
        }
    } else {
        auto sel = exhaustive_optimal(p, max_pool);
        s = sel.strategy;
        report = sel.report;
    }

    json j;
    j["p"] = p.p();
    j["mode"] = mode;
    j["k"] = s.stages();
    j["pools"] = pool_array(s);
    j["cost"] = report.cost;
    j["stage_means"] = report.stage_means;
    j["tree"] = render_tree(s);
    out << j.dump(2) << '\n';
    return exit_ok;
}

int cmd_cost(double p_value, const std::string& pools, std::ostream& out)
{
    const Prevalence p(p_value);
    const CostReport report = cost(parse_pools(pools), p);
    json j;
    j["cost"] = report.cost;
    j["stage_means"] = report.stage_means;
    j["variance_per_pool"] = number_or_null(report.variance_per_pool);
    out << j.dump(2) << '\n';
    return exit_ok;
}

int cmd_transitions(int kmax, std::ostream& out)
{
    out << "k,lambda_k,rho_k_minus_1\n";
    for (const TransitionRow& row : transition_table(kmax).rows)
        out << fmt::format("{},{:.10g},{:.10g}\n", row.k, row.lambda, row.rho_prev);
    return exit_ok;
}

int cmd_sweep(double pmin, double pmax, int points, bool log_spaced, std::ostream& out)
{
    if (!(pmin > 0.0 && pmin < pmax && pmax < 1.0))
        throw UsageError("sweep requires 0 < pmin < pmax < 1");
    if (points < 2)
        throw UsageError("--points must be at least 2");

    out << "p,cost,k,family\n";
    for (int i = 0; i < points; ++i) {
        const double t = static_cast<double>(i) / (points - 1);
        double p = log_spaced ? std::exp(std::log(pmin) + t * (std::log(pmax) - std::log(pmin)))
                              : pmin + t * (pmax - pmin);
        if (i == 0)
            p = pmin;
        if (i == points - 1)
            p = pmax;
        const Selection sel = conjectured_optimal(Prevalence(p));
        const int k = sel.strategy.stages();
        std::string_view fam = "none";
        if (k > 0)
            fam = sel.strategy == family(Family::m33, k) ? to_string(Family::m33)
                                                          : to_string(Family::m34);
        out << fmt::format("{},{},{},{}\n", real(p), real(sel.report.cost), k, fam);
    }
    return exit_ok;
}

int cmd_simulate(double p_value, const std::string& pools, std::int64_t replications,
                 std::uint64_t seed, unsigned threads, std::ostream& out)
{
    const Prevalence p(p_value);
    const SimulationReport r = monte_carlo(parse_pools(pools), p, replications, seed, threads);
    json j;
    j["replications"] = r.replications;
    j["mean_tests_per_pool"] = r.mean_tests_per_pool;
    j["mean_tests_per_individual"] = r.mean_tests_per_individual;
    j["variance_tests_per_pool"] = r.variance_tests_per_pool;
    j["stage_counts"] = r.stage_counts;
    j["std_error_mean"] = r.std_error_mean;
    j["std_error_variance"] = r.std_error_variance;
    j["seed"] = r.seed;
    out << j.dump(2) << '\n';
    return exit_ok;
}

int cmd_conjecture(int jmin, int jmax, unsigned threads, std::ostream& out)
{
    if (!(2 <= jmin && jmin <= jmax && jmax <= 51))
        throw UsageError("conjecture requires 2 <= jmin <= jmax <= 51");
    const auto records = conjecture_sweep(jmin, jmax, {}, threads);

    bool uncertified = false;
    bool violated = false;
    out << "j,p,phi,sign_certified,winner\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        const ConjectureRecord& r = records[i];
        out << fmt::format("{},{},{},{},{}\n", jmin + static_cast<int>(i), real(r.p), real(r.phi),
                           r.sign_certified ? "true" : "false", to_string(r.winner));
        if (!r.sign_certified)
            uncertified = true;
        else if (!(r.phi < 0.0))
            violated = true;
    }
    if (violated)
        return exit_violation;
    if (uncertified)
        return exit_uncertified;
    return exit_ok;
}

int cmd_linearize(double p_value, std::ostream& out)
{
    const Prevalence p = open_unit(p_value);
    const LinearizedPlan plan = optimal_linear_stages(p);
    json j;
    j["k_sharp"] = plan.k_sharp;
    j["L_sharp"] = plan.L_sharp;
    j["m_sharp"] = plan.m_sharp.empty() ? json(nullptr) : json(plan.m_sharp);
    json rows = json::array();
    const int lo = static_cast<int>(std::floor(plan.k_sharp));
    const int hi = static_cast<int>(std::ceil(plan.k_sharp));
    for (int k = lo; k <= hi; ++k) {
        json row;
        row["k"] = k;
        row["L_sharp_k"] = optimal_linear_value(k, p);
        rows.push_back(row);
    }
    j["integer_comparison"] = rows;
    out << j.dump(2) << '\n';
    return exit_ok;
}

} // namespace

std::string render_tree(const NestedStrategy& s, int max_nodes)
{
    if (s.individual())
        return "(1) size 1 [individual testing]\n";
    std::string out;
    std::string label = "1";
    int printed = 0;
    append_subtree(s, 1, label, printed, max_nodes, out);
    const std::int64_t total = pool_node_count(s);
    if (total > printed)
        out += fmt::format("... {} more pools\n", total - printed);
    return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Nested pool testing: costs, optimal strategies, simulation", "nestpool"};
    app.require_subcommand(1);
    unsigned threads = 0;

    double p = 0.0;
    std::string pools;

    auto* plan = app.add_subcommand("plan", "Optimal strategy for a prevalence (JSON)");
    std::string mode = "conjecture";
    PoolSize max_pool = 81;
    plan->add_option("--p", p, "Prevalence")->required();
    plan->add_option("--mode", mode)->check(CLI::IsMember({"conjecture", "four_candidate", "exhaustive"}));
    plan->add_option("--max-pool", max_pool, "Largest m_1 for exhaustive mode");

    auto* cost_cmd = app.add_subcommand("cost", "Cost and stage means of a chain (JSON)");
    cost_cmd->add_option("--p", p, "Prevalence")->required();
    cost_cmd->add_option("--pools", pools, "Comma-separated pool sizes, e.g. 27,9,3")->required();

    auto* transitions = app.add_subcommand("transitions", "Transition points (CSV)");
    int kmax = 6;
    transitions->add_option("--kmax", kmax)->check(CLI::Range(1, 40));

    auto* sweep = app.add_subcommand("sweep", "Conjectured-optimal cost curve (CSV)");
    double pmin = 0.0, pmax = 0.0;
    int points = 0;
    bool log_spaced = false;
    sweep->add_option("--pmin", pmin)->required();
    sweep->add_option("--pmax", pmax)->required();
    sweep->add_option("--points", points)->required();
    sweep->add_flag("--log", log_spaced, "Log-spaced grid");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo of a chain (JSON)");
    std::int64_t replications = 0;
    std::uint64_t seed = 0;
    simulate->add_option("--p", p, "Prevalence")->required();
    simulate->add_option("--pools", pools)->required();
    simulate->add_option("--replications", replications)->required()->check(CLI::PositiveNumber);
    simulate->add_option("--seed", seed)->required();

    auto* conjecture = app.add_subcommand("conjecture", "Sign of Phi at p = 2^-j (CSV)");
    int jmin = 2, jmax = 51;
    conjecture->add_option("--jmin", jmin);
    conjecture->add_option("--jmax", jmax);

    auto* linearize = app.add_subcommand("linearize", "Optimal linearized stage count (JSON)");
    linearize->add_option("--p", p, "Prevalence")->required();

    for (auto* sub : app.get_subcommands({}))
        sub->add_option("--threads", threads, "Worker threads, 0 for all cores");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return exit_ok;
        }
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }

    try {
        if (plan->parsed())
            return cmd_plan(p, mode, max_pool, out);
        if (cost_cmd->parsed())
            return cmd_cost(p, pools, out);
        if (transitions->parsed())
            return cmd_transitions(kmax, out);
        if (sweep->parsed())
            return cmd_sweep(pmin, pmax, points, log_spaced, out);
        if (simulate->parsed())
            return cmd_simulate(p, pools, replications, seed, threads, out);
        if (conjecture->parsed())
            return cmd_conjecture(jmin, jmax, threads, out);
        if (linearize->parsed())
            return cmd_linearize(p, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const Error& e) {
        err << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
        return exit_usage;
    }
    err << "error: no command given\n";
    return exit_usage;
}

} // namespace nestpool
