#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "molfield/analytic.hpp"
#include "molfield/config.hpp"
#include "molfield/geometry.hpp"
#include "molfield/sim.hpp"
#include "molfield/stats.hpp"

using namespace molfield;
using core::Config;

namespace {

Config scenario(const std::string& kind, double D, double kd, double lambda, double R_max,
                double N_tx, double T_b, double T_ss, const std::string& protocol_tail,
                unsigned seed) {
    std::string text = "{\"medium\": {\"D_um2_per_s\": " + std::to_string(D) +
                       ", \"k_d_per_s\": " + std::to_string(kd) +
                       "}, \"receiver\": {\"kind\": \"" + kind +
                       "\", \"r_r_um\": 5.0}, \"deployment\": {\"lambda_per_um3\": " +
                       std::to_string(lambda) + ", \"R_max_um\": " + std::to_string(R_max) +
                       "}, \"protocol\": {\"N_tx\": " + std::to_string(N_tx) +
                       ", \"T_b_s\": " + std::to_string(T_b) + ", \"T_ss_s\": " +
                       std::to_string(T_ss) + ", " + protocol_tail +
                       "}, \"seed\": " + std::to_string(seed) + "}";
    return core::parse_config_text(text);
}

}  // namespace

TEST_CASE("field-expectation sampler converges on the analytic expectation") {
    const Config cfg =
        scenario("absorbing", 80.0, 0.0, 1e-4, 50.0, 10000, 0.2, 0.05, "\"bits\": [1]", 61001);
    const std::vector<double> grid = {0.05, 0.3};
    const auto curve = sim::mc_type1(cfg, grid, 400, 4);
    REQUIRE(curve.size() == grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        analytic::PhiKernel phi{cfg.receiver.kind, cfg.medium, cfg.receiver.r_r, grid[k],
                                cfg.protocol.T_ss};
        const double want = analytic::expected_all(phi, cfg.protocol.N_tx, cfg.deployment.lambda_a);
        CHECK(curve[k].t == grid[k]);
        CHECK(curve[k].std_error > 0.0);
        CHECK_MESSAGE(std::fabs(curve[k].mean - want) < 4.0 * curve[k].std_error, "t=", grid[k],
                      " mean=", curve[k].mean, " want=", want);
    }
}

TEST_CASE("count-level sampler matches the closed-form mean") {
    const Config cfg =
        scenario("absorbing", 800.0, 0.0, 1e-5, 250.0, 20, 0.2, 0.2, "\"bits\": [1]", 61002);
    const auto reals = sim::mc_type2(cfg, 2000, 4);
    REQUIRE(reals.size() == 2000);
    double sum = 0.0, sumsq = 0.0;
    for (const auto& r : reals) {
        REQUIRE(r.bits == std::vector<int>{1});
        REQUIRE(r.trace.n_rx.size() == 1);
        CHECK(r.trace.sample_times[0] == cfg.protocol.T_b);
        sum += r.trace.n_rx[0];
        sumsq += r.trace.n_rx[0] * r.trace.n_rx[0];
    }
    const double mean = sum / 2000.0;
    const double var = (sumsq - 2000.0 * mean * mean) / 1999.0;
    const double se = std::sqrt(var / 2000.0);
    const double want = analytic::fa_closed_cumulative(cfg.protocol.T_b, cfg.medium,
                                                       cfg.receiver.r_r, cfg.protocol.N_tx,
                                                       cfg.deployment.lambda_a);
    CHECK_MESSAGE(std::fabs(mean - want) < 4.0 * se, "mean=", mean, " want=", want);
}

TEST_CASE("iid bit source honors its prior") {
    const Config cfg = scenario("absorbing", 800.0, 0.0, 1e-5, 50.0, 20, 0.2, 0.2,
                                "\"P1\": 0.7, \"n_bits\": 4", 61003);
    const auto reals = sim::mc_type2(cfg, 500, 4);
    long long ones = 0, total = 0;
    for (const auto& r : reals) {
        REQUIRE(r.bits.size() == 4);
        for (int b : r.bits) {
            CHECK((b == 0 || b == 1));
            ones += b;
            ++total;
        }
    }
    const double frac = static_cast<double>(ones) / static_cast<double>(total);
    CHECK(std::fabs(frac - 0.7) < 4.0 * std::sqrt(0.7 * 0.3 / static_cast<double>(total)));
}

TEST_CASE("results are identical for any thread count") {
    const Config cfg =
        scenario("passive", 400.0, 0.3, 1e-4, 50.0, 100, 0.2, 0.1, "\"bits\": [1, 0, 1]", 61004);

    const auto c1 = sim::mc_type1(cfg, {0.1, 0.4}, 60, 1);
    const auto r1 = sim::mc_type2(cfg, 60, 1);
    const auto s1 = sim::simulate_ber_sweep(cfg, {1, 0}, core::DetectorMode::Fixed, 1, 5, 400, 1);
    for (const int threads : {2, 8}) {
        const auto ct = sim::mc_type1(cfg, {0.1, 0.4}, 60, threads);
        for (std::size_t k = 0; k < c1.size(); ++k) {
            CHECK(ct[k].mean == c1[k].mean);
            CHECK(ct[k].std_error == c1[k].std_error);
        }
        const auto rt = sim::mc_type2(cfg, 60, threads);
        for (std::size_t i = 0; i < r1.size(); ++i) {
            CHECK(rt[i].bits == r1[i].bits);
            CHECK(rt[i].trace.n_rx == r1[i].trace.n_rx);
        }
        const auto st = sim::simulate_ber_sweep(cfg, {1, 0}, core::DetectorMode::Fixed, 1, 5, 400,
                                                threads);
        for (std::size_t k = 0; k < s1.size(); ++k) CHECK(st[k].errors == s1[k].errors);
    }

    // particle tier: same trajectory bookkeeping regardless of partition
    geometry::TxField field;
    field.deployment = cfg.deployment;
    field.r_r = cfg.receiver.r_r;
    field.points = {{8.0, 0.0, 0.0}, {0.0, 12.0, 0.0}, {-6.0, 3.0, 9.0}};
    const Config pcfg =
        scenario("absorbing", 80.0, 0.5, 1e-4, 50.0, 200, 0.2, 0.05, "\"bits\": [1]", 61004);
    const auto p1 = sim::particle_sim(field, pcfg, 1e-3, {0.05, 0.2}, 0, 1);
    for (const int threads : {2, 8}) {
        const auto pt = sim::particle_sim(field, pcfg, 1e-3, {0.05, 0.2}, 0, threads);
        CHECK(pt.absorbed_cum == p1.absorbed_cum);
        CHECK(pt.degraded_cum == p1.degraded_cum);
        CHECK(pt.inside == p1.inside);
        CHECK(pt.live == p1.live);
    }
    // a different realization index genuinely re-randomizes
    const auto p2 = sim::particle_sim(field, pcfg, 1e-3, {0.05, 0.2}, 1, 2);
    CHECK(p2.absorbed_cum != p1.absorbed_cum);
}

TEST_CASE("error scoring over hand-built realizations") {
    const core::DetectorSpec fixed{core::DetectorMode::Fixed, 5};
    auto make = [](std::vector<int> bits, std::vector<double> counts) {
        sim::Realization r;
        r.bits = std::move(bits);
        r.trace.n_rx = std::move(counts);
        return r;
    };
    // bit 2 decided wrong in exactly one of four realizations
    const std::vector<sim::Realization> reals = {
        make({1, 1}, {9.0, 8.0}),
        make({1, 0}, {7.0, 2.0}),
        make({0, 1}, {1.0, 11.0}),
        make({0, 1}, {0.0, 3.0}),
    };
    const auto est = sim::estimate_ber(reals, fixed, 2);
    CHECK(est.errors == 1);
    CHECK(est.trials == 4);
    CHECK(est.p_e == 0.25);
    const auto ci = stats::wilson(1, 4, stats::kZ99);
    CHECK(est.ci_low == ci.low);
    CHECK(est.ci_high == ci.high);

    CHECK_THROWS_AS(sim::estimate_ber({}, fixed, 1), std::domain_error);
    CHECK_THROWS_AS(sim::estimate_ber(reals, fixed, 0), std::invalid_argument);
    CHECK_THROWS_AS(sim::estimate_ber(reals, fixed, 3), std::invalid_argument);
}

TEST_CASE("threshold-sweep simulation brackets the analytic error probability") {
    const Config cfg =
        scenario("absorbing", 800.0, 0.0, 1e-5, 250.0, 20, 0.2, 0.2, "\"P1\": 0.5", 61005);
    const auto mc = sim::simulate_ber_sweep(cfg, {}, core::DetectorMode::Fixed, 1, 3, 30000, 4);
    REQUIRE(mc.size() == 3);

    const detection::LinkParams link{cfg.receiver.kind, cfg.medium, cfg.receiver.r_r,
                                     cfg.protocol.N_tx, cfg.protocol.T_b};
    const auto analytic_sweep =
        detection::ber_threshold_sweep(1, {}, link, cfg.deployment.lambda_a, 1, 3);
    for (std::size_t k = 0; k < mc.size(); ++k) {
        CHECK(mc[k].trials == 30000);
        CHECK_MESSAGE(analytic_sweep[k].p_e >= mc[k].ci_low, "N_th=", k + 1);
        CHECK_MESSAGE(analytic_sweep[k].p_e <= mc[k].ci_high, "N_th=", k + 1);
    }

    // with no history the first sample has no predecessor, so the
    // difference statistic degenerates to the count itself
    const auto dfd = sim::simulate_ber_sweep(cfg, {}, core::DetectorMode::Dfd, 1, 3, 30000, 4);
    for (std::size_t k = 0; k < mc.size(); ++k) CHECK(dfd[k].errors == mc[k].errors);
}

TEST_CASE("particle walk reproduces the first-passage law") {
    geometry::TxField field;
    field.deployment = {1e-4, 50.0};
    field.r_r = 5.0;
    field.points = {{10.0, 0.0, 0.0}};
    const Config cfg =
        scenario("absorbing", 80.0, 0.0, 1e-4, 50.0, 2000, 1.0, 0.05, "\"bits\": [1]", 61006);

    const std::vector<double> times = {0.1, 0.25, 0.5};
    const std::vector<double> want = {0.105649773667, 0.214597650220, 0.288075061015};
    const auto fine = sim::particle_sim(field, cfg, 2e-4, times, 0, 4);
    CHECK(fine.emitted == 2000);
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double frac = static_cast<double>(fine.absorbed_cum[k]) / 2000.0;
        CHECK_MESSAGE(std::fabs(frac - want[k]) < 0.03, "t=", times[k], " frac=", frac);
        CHECK(fine.absorbed_cum[k] + fine.degraded_cum[k] + fine.live[k] == fine.emitted);
        CHECK(fine.inside[k] == 0);  // absorbed molecules are gone, not inside
    }

    // discretization bias: coarse steps overshoot the boundary and absorb
    // late, so a coarse run undercounts
    const auto coarse = sim::particle_sim(field, cfg, 5e-3, times, 0, 4);
    CHECK(coarse.absorbed_cum.back() < fine.absorbed_cum.back());
}

TEST_CASE("particle degradation follows the exponential clock") {
    geometry::TxField field;
    field.deployment = {1e-4, 50.0};
    field.r_r = 5.0;
    field.points = {{20.0, 0.0, 0.0}, {0.0, 0.0, -25.0}};
    const Config cfg =
        scenario("passive", 80.0, 5.0, 1e-4, 50.0, 500, 1.0, 0.05, "\"bits\": [1]", 61007);

    const auto run = sim::particle_sim(field, cfg, 1e-3, {0.1, 0.5}, 0, 4);
    CHECK(run.emitted == 1000);
    // passive receivers never remove molecules
    for (std::size_t k = 0; k < run.sample_times.size(); ++k) {
        CHECK(run.absorbed_cum[k] == 0);
        CHECK(run.live[k] == run.emitted - run.degraded_cum[k]);
        CHECK(run.inside[k] <= run.live[k]);
    }
    CHECK(run.degraded_cum[0] < run.degraded_cum[1]);
    const double frac = static_cast<double>(run.degraded_cum[1]) / 1000.0;
    const double want = -std::expm1(-5.0 * 0.5);
    CHECK(std::fabs(frac - want) < 4.0 * std::sqrt(want * (1.0 - want) / 1000.0));
}

TEST_CASE("particle trace exposes the per-window observable") {
    geometry::TxField field;
    field.deployment = {1e-4, 50.0};
    field.r_r = 5.0;
    field.points = {{9.0, 0.0, 0.0}};
    const Config cfg =
        scenario("absorbing", 80.0, 0.0, 1e-4, 50.0, 400, 1.0, 0.05, "\"bits\": [1]", 61008);
    const auto run = sim::particle_sim(field, cfg, 1e-3, {0.1, 0.2, 0.3}, 0, 2);
    const auto tr = run.trace();
    REQUIRE(tr.n_rx.size() == 3);
    double acc = 0.0;
    for (double v : tr.n_rx) acc += v;
    CHECK(acc == static_cast<double>(run.absorbed_cum.back()));

    Config pcfg = cfg;
    pcfg.receiver.kind = core::ReceiverKind::Passive;
    const auto prun = sim::particle_sim(field, pcfg, 1e-3, {0.1, 0.2, 0.3}, 0, 2);
    const auto ptr = prun.trace();
    for (std::size_t k = 0; k < ptr.n_rx.size(); ++k)
        CHECK(ptr.n_rx[k] == static_cast<double>(prun.inside[k]));
}

TEST_CASE("simulation input validation") {
    const Config cfg =
        scenario("absorbing", 80.0, 0.0, 1e-4, 50.0, 100, 0.2, 0.05, "\"bits\": [1]", 61009);
    CHECK_THROWS_AS(sim::mc_type1(cfg, {0.1}, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(sim::mc_type2(cfg, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(
        sim::simulate_ber_sweep(cfg, {1, 2}, core::DetectorMode::Fixed, 1, 3, 10, 1),
        std::invalid_argument);

    geometry::TxField field;
    field.deployment = cfg.deployment;
    field.r_r = cfg.receiver.r_r;
    field.points = {{10.0, 0.0, 0.0}};
    CHECK_THROWS_AS(sim::particle_sim(field, cfg, 0.0, {0.1}, 0, 1), core::config_error);
    CHECK_THROWS_AS(sim::particle_sim(field, cfg, 0.05, {0.1}, 0, 1), core::config_error);
    CHECK_THROWS_AS(sim::particle_sim(field, cfg, 1e-3, {}, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(sim::particle_sim(field, cfg, 1e-3, {0.2, 0.1}, 0, 1), std::invalid_argument);

    Config frac = cfg;
    frac.protocol.N_tx = 10.5;
    CHECK_THROWS_AS(sim::particle_sim(field, frac, 1e-3, {0.1}, 0, 1), core::config_error);
}
