#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <swipt/experiments.hpp>

#include "helpers.hpp"

using namespace swipt;

namespace {

// Small fast spec: tiny instances, few realizations.
ExperimentSpec small_spec()
{
    ExperimentSpec spec;
    spec.base = swipt_test::small_indoor_params(2, 4, 10.0, 1e5, -50.0);
    spec.pmax_dbm_sweep = {6.0, 10.0};
    spec.user_sweep = {1, 2};
    spec.realizations = 40;
    spec.seed = 99;
    return spec;
}

std::string slurp(const std::string &path)
{
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("sweep produces one proposed and one baseline row per cell")
{
    const ExperimentSpec spec = small_spec();
    const SweepResult res = sweep_pmax(spec);
    CHECK(res.cells.size() == 2 * 2 * 2);
    for (std::size_t i = 0; i + 1 < res.cells.size(); i += 2) {
        CHECK(res.cells[i].scheme == "proposed");
        CHECK(res.cells[i + 1].scheme == "baseline");
        CHECK(res.cells[i].config_id == res.cells[i + 1].config_id);
        CHECK(res.cells[i].failure_rate == res.cells[i + 1].failure_rate);
        CHECK(res.cells[i].n_realizations == 40);
        CHECK(res.cells[i].se_ee >= 0.0);
    }
}

TEST_CASE("paired dominance: proposed wins efficiency, baseline wins capacity")
{
    const ExperimentSpec spec = small_spec();
    const SweepResult res = sweep_pmax(spec);
    for (std::size_t i = 0; i + 1 < res.cells.size(); i += 2) {
        const SweepCell &p = res.cells[i];
        const SweepCell &b = res.cells[i + 1];
        CHECK(p.mean_ee >= b.mean_ee * (1.0 - 0.01));
        CHECK(b.mean_capacity >= p.mean_capacity * (1.0 - 0.01));
        CHECK(p.mean_harvested >= 0.0);
    }
}

TEST_CASE("sweep aggregates are independent of the worker count")
{
    ExperimentSpec spec = small_spec();
    spec.realizations = 24;
    spec.workers = 1;
    const SweepResult serial = sweep_pmax(spec);
    spec.workers = 8;
    const SweepResult parallel = sweep_pmax(spec);
    REQUIRE(serial.cells.size() == parallel.cells.size());
    for (std::size_t i = 0; i < serial.cells.size(); ++i) {
        CHECK(serial.cells[i].mean_ee == parallel.cells[i].mean_ee);
        CHECK(serial.cells[i].se_ee == parallel.cells[i].se_ee);
        CHECK(serial.cells[i].mean_capacity == parallel.cells[i].mean_capacity);
        CHECK(serial.cells[i].mean_harvested == parallel.cells[i].mean_harvested);
        CHECK(serial.cells[i].failure_rate == parallel.cells[i].failure_rate);
    }
}

TEST_CASE("sweep CSV is byte-identical across reruns and worker counts")
{
    ExperimentSpec spec = small_spec();
    spec.realizations = 16;
    const std::string path1 = "test_sweep_a.csv";
    const std::string path2 = "test_sweep_b.csv";

    spec.workers = 1;
    emit_csv(sweep_pmax(spec), path1);
    spec.workers = 8;
    emit_csv(sweep_pmax(spec), path2);
    CHECK(slurp(path1) == slurp(path2));
    std::remove(path1.c_str());
    std::remove(path2.c_str());
}

TEST_CASE("sweep CSV round-trips exactly")
{
    ExperimentSpec spec = small_spec();
    spec.realizations = 10;
    const SweepResult res = sweep_pmax(spec);
    const std::string path = "test_sweep_rt.csv";
    emit_csv(res, path);
    const SweepResult back = parse_sweep_csv(path);
    REQUIRE(back.cells.size() == res.cells.size());
    for (std::size_t i = 0; i < res.cells.size(); ++i) {
        CHECK(back.cells[i].config_id == res.cells[i].config_id);
        CHECK(back.cells[i].scheme == res.cells[i].scheme);
        CHECK(back.cells[i].mean_ee == res.cells[i].mean_ee);
        CHECK(back.cells[i].se_ee == res.cells[i].se_ee);
        CHECK(back.cells[i].mean_capacity == res.cells[i].mean_capacity);
        CHECK(back.cells[i].mean_harvested == res.cells[i].mean_harvested);
        CHECK(back.cells[i].failure_rate == res.cells[i].failure_rate);
        CHECK(back.cells[i].n_realizations == res.cells[i].n_realizations);
    }
    std::remove(path.c_str());
}

TEST_CASE("empty sweep emits a header-only file")
{
    const std::string path = "test_sweep_empty.csv";
    emit_csv(SweepResult{}, path);
    const std::string content = slurp(path);
    CHECK(content ==
          "config_id,pmax_dbm,K,scheme,mean_ee_bit_per_joule,se_ee,mean_capacity_bps,"
          "se_capacity,mean_harvested_w,se_harvested,failure_rate,n_realizations\n");
    std::remove(path.c_str());
}

TEST_CASE("convergence table: efficiency never degrades with a larger budget")
{
    ExperimentSpec spec = small_spec();
    spec.pmax_dbm_sweep = {10.0};
    spec.user_sweep = {2};
    spec.realizations = 30;
    spec.convergence_budgets = {1, 2, 5, 10, 30, 80};
    const auto rows = run_convergence(spec);
    REQUIRE(rows.size() == 6);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].budget > rows[i - 1].budget);
        CHECK(rows[i].mean_ee >= rows[i - 1].mean_ee * (1.0 - 1e-9));
    }
    // deterministic rerun
    const auto rows2 = run_convergence(spec);
    for (std::size_t i = 0; i < rows.size(); ++i)
        CHECK(rows[i].mean_ee == rows2[i].mean_ee);
}

TEST_CASE("failure accounting zeroes efficiency and capacity for infeasible draws")
{
    ExperimentSpec spec = small_spec();
    // unreachable transfer floor: every draw fails
    spec.base.min_harvest_w.assign(spec.base.num_users, dbm_to_watt(20.0));
    spec.pmax_dbm_sweep = {10.0};
    spec.user_sweep = {2};
    spec.realizations = 10;
    const SweepResult res = sweep_pmax(spec);
    REQUIRE(res.cells.size() == 2);
    for (const SweepCell &c : res.cells) {
        CHECK(c.failure_rate == 1.0);
        CHECK(c.mean_ee == 0.0);
        CHECK(c.mean_capacity == 0.0);
        CHECK(c.mean_harvested == 0.0);
    }
}
