#include <doctest.h>

#include <cmath>
#include <swipt/dual_solver.hpp>
#include <swipt/oracle.hpp>
#include <swipt/rng.hpp>

#include "helpers.hpp"

using namespace swipt;
using swipt_test::make_fixed;
using swipt_test::small_indoor_params;

TEST_CASE("theta reproduces direct substitutions")
{
    SUBCASE("q = 0, alpha = 0, lambda = 0, beta = 1 gives 1")
    {
        auto s = make_fixed(1, 2);
        DualState d = DualState::fresh(2);
        d.beta = 1.0;
        CHECK(theta(0.0, d, s.realization, s.params, 0, 0) == doctest::Approx(1.0));
    }
    SUBCASE("K = 1 leaves only q eps + lambda eps + beta")
    {
        auto s = make_fixed(1, 1);
        DualState d = DualState::fresh(1);
        d.lambda = 0.3;
        d.beta = 0.7;
        const double q = 2.0;
        CHECK(theta(q, d, s.realization, s.params, 0, 0) ==
              doctest::Approx(q * 2.5 + 0.3 * 2.5 + 0.7));
    }
    SUBCASE("idle transfer sum of 0.5 at q = 1, eps = 2.5 gives 2.0")
    {
        auto s = make_fixed(1, 2);
        s.realization.transfer_eff(0, 1) = 0.5;
        DualState d = DualState::fresh(2);
        CHECK(theta(1.0, d, s.realization, s.params, 0, 0) == doctest::Approx(2.0));
    }
}

TEST_CASE("optimal_power implements the clamped water-filling form")
{
    // One subcarrier, one user: engineer Theta so the level is exactly 2 and
    // 1/Gamma = 0.5, expecting P* = 1.5.
    auto s = make_fixed(1, 1);
    s.realization.cnr(0, 0) = 2.0;
    DualState d = DualState::fresh(1);
    const double w_hz = s.params.subcarrier_bandwidth_hz;
    d.beta = w_hz * 1.0 / (detail::ln2 * 2.0); // level = W w / (ln2 Theta) = 2
    const matrix p = optimal_power(0.0, d, s.realization, s.params);
    CHECK(p(0, 0) == doctest::Approx(1.5).epsilon(1e-12));

    SUBCASE("level at or below 1/Gamma clamps to zero")
    {
        s.realization.cnr(0, 0) = 1.0 / 3.0; // 1/Gamma = 3 > level = 2
        const matrix p2 = optimal_power(0.0, d, s.realization, s.params);
        CHECK(p2(0, 0) == 0.0);
    }
}

TEST_CASE("raising gamma never lowers any allocation")
{
    SystemParams params = small_indoor_params(3, 4);
    const ChannelRealization r = sample_realization(params, 5);
    DualState d = DualState::fresh(3);
    d.beta = 1e5;
    const matrix base = optimal_power(1e5, d, r, params);
    d.gamma = 0.8;
    const matrix boosted = optimal_power(1e5, d, r, params);
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 3; ++k)
            CHECK(boosted(i, k) >= base(i, k) - 1e-15);
}

TEST_CASE("marginal benefit matches substitution and stays nonnegative")
{
    SUBCASE("zero power means zero benefit")
    {
        auto s = make_fixed(3, 2);
        const matrix p(3, 2, 0.0);
        const auto q = marginal_benefit(p, s.realization, DualState::fresh(2), s.params);
        CHECK(q[0] == 0.0);
        CHECK(q[1] == 0.0);
    }
    SUBCASE("P Gamma = 1 with unit W(w + gamma) gives 1 - 1/(2 ln 2)")
    {
        auto s = make_fixed(1, 1);
        s.params.subcarrier_bandwidth_hz = 1.0;
        s.params.total_bandwidth_hz = 1.0;
        s.realization.cnr(0, 0) = 1.0;
        matrix p(1, 1, 1.0);
        const auto q = marginal_benefit(p, s.realization, DualState::fresh(1), s.params);
        CHECK(q[0] == doctest::Approx(1.0 - 1.0 / (2.0 * detail::ln2)).epsilon(1e-12));
        CHECK(q[0] == doctest::Approx(0.2786524795).epsilon(1e-8));
    }
    SUBCASE("nonnegative across random draws, matching the direct summand")
    {
        random_stream rng(71);
        auto s = make_fixed(1, 1);
        s.params.subcarrier_bandwidth_hz = 1.0;
        for (int t = 0; t < 10000; ++t) {
            const double x = rng.next_uniform(0.0, 50.0);
            s.realization.cnr(0, 0) = 1.0;
            matrix p(1, 1, x);
            const auto q = marginal_benefit(p, s.realization, DualState::fresh(1), s.params);
            const double direct = std::log2(1.0 + x) - (x / detail::ln2) / (1.0 + x);
            CHECK(q[0] >= 0.0);
            CHECK(q[0] == doctest::Approx(direct).epsilon(1e-9));
        }
    }
}

TEST_CASE("select_user follows the shifted argmax with lowest-index ties")
{
    SystemParams p = small_indoor_params(2, 2);
    DualState d = DualState::fresh(2);

    SUBCASE("plain argmax")
    {
        const auto s = select_user({0.5, 0.2}, d, p);
        CHECK(s[0] == 1.0);
        CHECK(s[1] == 0.0);
    }
    SUBCASE("exact tie goes to the first user")
    {
        const auto s = select_user({0.3, 0.3}, d, p);
        CHECK(s[0] == 1.0);
        CHECK(s[1] == 0.0);
    }
    SUBCASE("transfer-floor pricing can flip the winner")
    {
        d.alpha = {0.0, 0.05 / p.min_harvest_w[1]};
        const auto s = select_user({0.1, 0.1}, d, p);
        CHECK(s[0] == 0.0);
        CHECK(s[1] == 1.0);
    }
    SUBCASE("adding a constant to every benefit changes nothing")
    {
        d = DualState::fresh(2);
        const auto s1 = select_user({0.4, 0.9}, d, p);
        const auto s2 = select_user({1000.4, 1000.9}, d, p);
        CHECK(s1 == s2);
    }
    SUBCASE("exactly one user is always selected")
    {
        const auto s = select_user({0.0, 0.0}, d, p);
        double sum = 0.0;
        for (double v : s)
            sum += v;
        CHECK(sum == 1.0);
    }
}

TEST_CASE("update_duals follows the projected subgradient signs")
{
    SystemParams params = small_indoor_params(2, 2, 10.0, 1e5, -40.0);
    const ChannelRealization r = sample_realization(params, 17);
    SolverOptions opts;

    SUBCASE("violated rate requirement raises gamma")
    {
        // zero-power policy: rate 0 < R_min
        AllocationPolicy pol = AllocationPolicy::single_user(2, 2, 0, {0.0, 0.0});
        DualState d = DualState::fresh(2);
        const DualState next = update_duals(d, pol, r, params, opts);
        CHECK(next.gamma > d.gamma);
        CHECK(next.iteration == 1);
    }
    SUBCASE("slack power budget never raises beta")
    {
        AllocationPolicy pol = AllocationPolicy::single_user(2, 2, 0, {1e-6, 1e-6});
        DualState d = DualState::fresh(2);
        d.beta = 5.0;
        const DualState next = update_duals(d, pol, r, params, opts);
        CHECK(next.beta <= d.beta);
    }
    SUBCASE("multipliers stay nonnegative under any update")
    {
        random_stream rng(3);
        DualState d = DualState::fresh(2);
        for (int t = 0; t < 200; ++t) {
            AllocationPolicy pol = AllocationPolicy::single_user(
                2, 2, static_cast<int>(rng.next_u64() % 2),
                {rng.next_uniform(0.0, params.max_tx_power_w / 2),
                 rng.next_uniform(0.0, params.max_tx_power_w / 2)});
            d = update_duals(d, pol, r, params, opts);
            CHECK(d.beta >= 0.0);
            CHECK(d.gamma >= 0.0);
            CHECK(d.lambda >= 0.0);
            CHECK(d.delta >= 0.0);
            for (double a : d.alpha)
                CHECK(a >= 0.0);
        }
    }
    SUBCASE("a tight constraint leaves its multiplier unchanged")
    {
        // Build a policy radiating exactly P_max so the C2 bracket is zero.
        SystemParams p1 = small_indoor_params(1, 1, 10.0, 0.0);
        p1.grid_power_w = dbm_to_watt(40.0); // keep C3 slack
        const ChannelRealization r1 = sample_realization(p1, 4);
        AllocationPolicy pol = AllocationPolicy::single_user(1, 1, 0, {p1.max_tx_power_w});
        DualState d = DualState::fresh(1);
        d.beta = 2.0;
        const DualState next = update_duals(d, pol, r1, p1, opts);
        CHECK(next.beta == doctest::Approx(2.0).epsilon(1e-12));
    }
}

TEST_CASE("KKT stationarity holds for the closed-form allocation")
{
    SystemParams params = small_indoor_params(3, 4);
    const ChannelRealization r = sample_realization(params, 23);
    random_stream rng(29);
    for (int t = 0; t < 50; ++t) {
        DualState d = DualState::fresh(3);
        d.beta = rng.next_uniform(0.0, 2e5);
        d.gamma = rng.next_uniform(0.0, 1.0);
        d.lambda = rng.next_uniform(0.0, 2e4);
        for (auto &a : d.alpha)
            a = rng.next_uniform(0.0, 1e7);
        const double q = rng.next_uniform(0.0, 1e6);
        const matrix p = optimal_power(q, d, r, params);
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 3; ++k) {
                const double th = theta(q, d, r, params, i, k);
                if (th <= 0.0)
                    continue;
                const double cnr = r.cnr(i, k);
                const double deriv = params.subcarrier_bandwidth_hz *
                                     (params.weights[k] + d.gamma) * cnr /
                                     (detail::ln2 * (1.0 + p(i, k) * cnr));
                if (p(i, k) > 0.0)
                    CHECK(std::abs(deriv - th) / th < 1e-9);
                else
                    CHECK(deriv <= th * (1.0 + 1e-9));
            }
    }
}

TEST_CASE("marginal benefit equals the numerical selection derivative of the Lagrangian")
{
    // With the time-shared transmit power held fixed, the Lagrangian's
    // dependence on one selection variable is
    //   g(s) = (w + gamma) s sum_i W log2(1 + ptilde Gamma / s)
    //          + alpha_k s req_k - delta s + const,
    // and its derivative at s must equal Q_k(ptilde / s) + alpha_k req_k - delta.
    SystemParams params = small_indoor_params(2, 4);
    const ChannelRealization r = sample_realization(params, 37);
    random_stream rng(41);

    DualState d = DualState::fresh(2);
    d.gamma = 0.37;
    d.alpha = {1e4, 2e4};
    d.delta = 123.0;

    const int k = 1;
    const double s = 0.7;
    std::vector<double> ptilde(4);
    for (auto &v : ptilde)
        v = rng.next_uniform(1e-4, 5e-3);

    auto g = [&](double sk) {
        double cap = 0.0;
        for (int i = 0; i < 4; ++i)
            cap += params.subcarrier_bandwidth_hz *
                   std::log2(1.0 + ptilde[i] * r.cnr(i, k) / sk);
        return (params.weights[k] + d.gamma) * sk * cap +
               d.alpha[k] * sk * params.min_harvest_w[k] - d.delta * sk;
    };

    const double h = 1e-6;
    const double numeric = (g(s + h) - g(s - h)) / (2.0 * h);

    matrix p_star(4, 2, 0.0);
    for (int i = 0; i < 4; ++i)
        p_star(i, k) = ptilde[i] / s;
    const auto q_k = marginal_benefit(p_star, r, d, params);
    const double analytic = q_k[k] + d.alpha[k] * params.min_harvest_w[k] - d.delta;
    CHECK(analytic == doctest::Approx(numeric).epsilon(1e-4));
}

TEST_CASE("solve_inner at q = 0 on a 1x1 instance fills the whole budget")
{
    // Capacity maximization with a single subcarrier: the optimum sits at the
    // radiated-power boundary min(P_max, (P_PG - P_C)/eps). Verified against a
    // one-dimensional grid scan.
    SystemParams params = small_indoor_params(1, 1, 10.0, 0.0, -100.0);
    params.min_harvest_w[0] = 0.0;
    const ChannelRealization r = sample_realization(params, 51);
    SolverOptions opts;

    const InnerSolution sol = solve_inner(0.0, r, params, opts);
    const double budget = params.tx_power_budget_w();
    REQUIRE(sol.policy.finalized);
    CHECK(sol.policy.selected_user == 0);
    CHECK(sol.policy.power(0, 0) == doctest::Approx(budget).epsilon(1e-6));
    CHECK(sol.feasible);

    double best_grid = 0.0;
    double best_p = 0.0;
    for (int t = 0; t <= 5000; ++t) {
        const double p = budget * t / 5000.0;
        const double u = params.subcarrier_bandwidth_hz * std::log2(1.0 + p * r.cnr(0, 0));
        if (u > best_grid) {
            best_grid = u;
            best_p = p;
        }
    }
    CHECK(best_p == doctest::Approx(budget).epsilon(1e-9));
    CHECK(sol.weighted_capacity_bps == doctest::Approx(best_grid).epsilon(1e-6));

    // at q = 0 the subtractive objective is exactly the weighted capacity
    CHECK(sol.objective == doctest::Approx(sol.weighted_capacity_bps).epsilon(1e-12));
}

TEST_CASE("solve_inner returns feasible, KKT-certified solutions on random instances")
{
    random_stream seeds(61);
    int solved = 0;
    for (int t = 0; t < 30; ++t) {
        SystemParams params = small_indoor_params(3, 4, 10.0, 2e5, -50.0);
        const ChannelRealization r = sample_realization(params, seeds.next_u64());
        if (!check_feasibility(r, params).feasible)
            continue;
        SolverOptions opts;
        const double q = 1e5 * (t % 5);
        const InnerSolution sol = solve_inner(q, r, params, opts);
        REQUIRE(sol.policy.finalized);
        CHECK(sol.feasible);
        // C5-C7 hold exactly by construction
        double ssum = 0.0;
        for (double v : sol.policy.selection) {
            CHECK((v == 0.0 || v == 1.0));
            ssum += v;
        }
        CHECK(ssum == 1.0);
        const double res = kkt_residual(sol.policy, sol.duals, q, r, params);
        CHECK(res < 1e-4);
        ++solved;
    }
    CHECK(solved > 10);
}

TEST_CASE("check_feasibility handles the documented edge cases")
{
    SUBCASE("no requirements at all is always feasible")
    {
        SystemParams params = small_indoor_params(2, 2, 10.0, 0.0);
        params.min_harvest_w.assign(2, 0.0);
        const ChannelRealization r = sample_realization(params, 71);
        const FeasibilityReport rep = check_feasibility(r, params);
        CHECK(rep.feasible);
    }
    SUBCASE("zero channel with a positive rate floor is infeasible")
    {
        auto s = make_fixed(2, 2);
        s.params.min_rate_bps = 1e5;
        const FeasibilityReport rep = check_feasibility(s.realization, s.params);
        CHECK_FALSE(rep.feasible);
        CHECK(rep.max_rate_bps[0] == 0.0);
    }
    SUBCASE("unreachable transfer floor is infeasible")
    {
        SystemParams params = small_indoor_params(2, 2, 10.0, 0.0, 20.0); // 100 mW floor
        const ChannelRealization r = sample_realization(params, 73);
        const FeasibilityReport rep = check_feasibility(r, params);
        CHECK_FALSE(rep.feasible);
    }
}

TEST_CASE("solve_inner trace reports monotone-ish convergence diagnostics")
{
    SystemParams params = small_indoor_params(2, 4, 10.0, 1e5, -50.0);
    const ChannelRealization r = sample_realization(params, 83);
    if (!check_feasibility(r, params).feasible)
        return;
    SolverOptions opts;
    std::vector<DualTraceRow> trace;
    const InnerSolution sol = solve_inner(2e5, r, params, opts, nullptr, nullptr, &trace);
    REQUIRE(!trace.empty());
    CHECK(trace.front().iteration == 0);
    // violations must decay to the tolerance by the end on feasible instances
    CHECK(sol.feasible);
}
