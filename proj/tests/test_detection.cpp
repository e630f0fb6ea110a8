#include "doctest.h"

#include <cmath>
#include <vector>

#include "molfield/channel.hpp"
#include "molfield/detection.hpp"
#include "molfield/geometry.hpp"
#include "molfield/rng.hpp"

using namespace molfield;
using core::Medium;
using core::ReceiverKind;
using detection::LinkParams;

namespace {

double rel_err(double got, double want) { return std::fabs(got - want) / std::fabs(want); }

// reference scenario for the frozen values below
const LinkParams kLink{ReceiverKind::Absorbing, Medium{800.0, 0.0}, 5.0, 20.0, 0.2};
constexpr double kLambda = 1e-5;

}  // namespace

TEST_CASE("per-slot kernel reduces to the channel fractions") {
    const double r0 = 12.0;
    const double Tb = kLink.T_b;

    // single 1-bit, sampled at its own end: everything absorbed during it
    CHECK(detection::r_kernel(r0, 1, {1}, kLink) ==
          channel::fa_cum_fraction(r0, Tb, kLink.medium, kLink.r_r));
    CHECK(detection::r_kernel(r0, 1, {0}, kLink) == 0.0);

    // two consecutive 1-bits telescope to the cumulative at 2 T_b
    CHECK(detection::r_kernel(r0, 2, {1, 1}, kLink) ==
          doctest::Approx(channel::fa_cum_fraction(r0, 2.0 * Tb, kLink.medium, kLink.r_r))
              .epsilon(1e-14));
    // a lone leading 1-bit contributes its second-interval increment
    CHECK(detection::r_kernel(r0, 2, {1, 0}, kLink) ==
          channel::fa_net_fraction(r0, Tb, Tb, kLink.medium, kLink.r_r));

    // passive: currently-inside fractions at the sampling instant
    LinkParams ps = kLink;
    ps.kind = ReceiverKind::Passive;
    CHECK(detection::r_kernel(r0, 1, {1}, ps) ==
          channel::ps_fraction(r0, Tb, ps.medium, ps.r_r));
    CHECK(detection::r_kernel(r0, 2, {1, 0}, ps) ==
          channel::ps_fraction(r0, 2.0 * Tb, ps.medium, ps.r_r));

    // entries beyond the sampling instant are ignored
    CHECK(detection::r_kernel(r0, 2, {1, 0, 1, 1, 1}, kLink) ==
          detection::r_kernel(r0, 2, {1, 0}, kLink));
}

TEST_CASE("field Laplace transform matches frozen references") {
    // s is the Laplace argument of the summed fraction kernel; the frozen
    // values are at s = N_tx and s = 0.3 N_tx
    CHECK(rel_err(detection::laplace_rtot(20.0, 1, {1}, kLink, kLambda), 2.571034905092e-01) <
          1e-9);
    CHECK(rel_err(detection::laplace_rtot(6.0, 1, {1}, kLink, kLambda), 5.448690505276e-01) <
          1e-9);
    // s = 0: the void functional of nothing is one
    CHECK(detection::laplace_rtot(0.0, 1, {1}, kLink, kLambda) == 1.0);
    // monotone decreasing in s
    double prev = 1.0;
    for (const double s : {2.0, 6.0, 12.0, 20.0, 40.0}) {
        const double cur = detection::laplace_rtot(s, 1, {1}, kLink, kLambda);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("moment integrals match frozen references") {
    const auto cm = detection::count_moments(1, {1}, kLink, kLambda, 4);
    CHECK(rel_err(cm.laplace, 2.571034905092e-01) < 1e-9);
    const std::vector<double> want = {8.060334432951e-01, 4.918074184407e-01,
                                      6.833005222295e-01, 1.507749624519e+00};
    REQUIRE(cm.x.size() == want.size());
    for (std::size_t k = 0; k < want.size(); ++k) CHECK(rel_err(cm.x[k], want[k]) < 2e-9);

    CHECK(detection::count_moments(1, {1}, kLink, kLambda, 0).x.empty());
    CHECK_THROWS_AS(detection::count_moments(1, {1}, kLink, kLambda, 21), std::invalid_argument);
    CHECK_THROWS_AS(detection::count_moments(1, {1}, kLink, kLambda, -1), std::invalid_argument);
}

TEST_CASE("Bell polynomial recurrence") {
    // all arguments 1: the Bell numbers
    const auto bell = detection::bell_polynomials(std::vector<double>(8, 1.0));
    const std::vector<double> numbers = {1, 1, 2, 5, 15, 52, 203, 877, 4140};
    REQUIRE(bell.size() == numbers.size());
    for (std::size_t i = 0; i < numbers.size(); ++i) CHECK(bell[i] == numbers[i]);

    // low orders by hand
    const auto b = detection::bell_polynomials({2.0, 3.0, 5.0});
    CHECK(b[1] == 2.0);
    CHECK(b[2] == 7.0);    // x1^2 + x2
    CHECK(b[3] == 31.0);   // x1^3 + 3 x1 x2 + x3

    // against direct set-partition enumeration
    const std::vector<double> x = {0.7, -1.3, 2.1, 0.4, -0.9, 1.8};
    const auto rec = detection::bell_polynomials(x);
    for (int n = 0; n <= 6; ++n) {
        const double ref = detection::bell_by_partition_enumeration(x, n);
        CHECK_MESSAGE(std::fabs(rec[n] - ref) <= 1e-12 * std::max(1.0, std::fabs(ref)), "n=", n);
    }
    CHECK_THROWS_AS(detection::bell_by_partition_enumeration(x, 13), std::invalid_argument);
}

TEST_CASE("single-bit miss probabilities match frozen references") {
    const std::vector<double> want = {2.5710349051e-01, 4.6433750225e-01, 6.1107897624e-01,
                                      7.1375805443e-01};
    for (std::size_t i = 0; i < want.size(); ++i) {
        const auto c = detection::ber_theorem2(1, {}, static_cast<long long>(i + 1), kLink, kLambda);
        CHECK_MESSAGE(rel_err(c.miss, want[i]) < 1e-8, "N_th=", i + 1);
        // an empty interference history emits nothing on the 0-branch
        CHECK(c.false_alarm == 0.0);
        CHECK(c.p_e == 0.5 * c.miss);
        CHECK_FALSE(c.clamped);
    }
}

TEST_CASE("general threshold expression collapses to the unit-threshold shortcut") {
    for (const int j : {1, 5}) {
        const std::vector<int> history = j == 1 ? std::vector<int>{} : std::vector<int>{1, 0, 1, 0};
        const auto t2 = detection::ber_theorem2(j, history, 1, kLink, kLambda);
        const auto l3 = detection::ber_lemma3(j, history, kLink, kLambda);
        CHECK(rel_err(t2.miss, l3.miss) < 1e-12);
        if (l3.false_alarm > 0.0)
            CHECK(rel_err(t2.false_alarm, l3.false_alarm) < 1e-12);
        else
            CHECK(t2.false_alarm == 0.0);
    }
}

TEST_CASE("five-bit interference history matches frozen references") {
    const std::vector<int> history = {1, 0, 1, 0};
    struct Row {
        long long nth;
        double miss, fa, pe;
    };
    const std::vector<Row> rows = {
        {1, 7.36388760e-03, 9.82486315e-01, 4.94925101e-01},
        {2, 3.50890010e-02, 9.19033802e-01, 4.77061401e-01},
        {4, 1.77391166e-01, 6.34153430e-01, 4.05772298e-01},
    };
    for (const Row& row : rows) {
        const auto c = detection::ber_theorem2(5, history, row.nth, kLink, kLambda);
        CHECK_MESSAGE(rel_err(c.miss, row.miss) < 5e-8, "N_th=", row.nth);
        CHECK_MESSAGE(rel_err(c.false_alarm, row.fa) < 5e-8, "N_th=", row.nth);
        CHECK_MESSAGE(rel_err(c.p_e, row.pe) < 5e-8, "N_th=", row.nth);
    }
}

TEST_CASE("threshold sweep equals per-threshold evaluation") {
    const std::vector<int> history = {1, 0, 1, 0};
    const auto sweep = detection::ber_threshold_sweep(5, history, kLink, kLambda, 1, 10, 0.3);
    REQUIRE(sweep.size() == 10);
    for (long long nth = 1; nth <= 10; ++nth) {
        const auto one = detection::ber_theorem2(5, history, nth, kLink, kLambda, 0.3);
        const auto& s = sweep[static_cast<std::size_t>(nth - 1)];
        CHECK(rel_err(s.miss, one.miss) < 1e-12);
        CHECK(rel_err(s.false_alarm, one.false_alarm) < 1e-12);
        CHECK(s.p_e == doctest::Approx(0.3 * s.miss + 0.7 * s.false_alarm).epsilon(1e-14));
    }
    // raising the threshold can only add misses and remove false alarms
    for (std::size_t i = 1; i < sweep.size(); ++i) {
        CHECK(sweep[i].miss >= sweep[i - 1].miss);
        CHECK(sweep[i].false_alarm <= sweep[i - 1].false_alarm);
    }
}

TEST_CASE("count probabilities exhaust the distribution at large thresholds") {
    // the recursion walks P(count = n) directly; far beyond the count mean
    // the partial sums must saturate at one without ever overshooting
    const auto c = detection::ber_theorem2(1, {}, 400, kLink, kLambda);
    CHECK(c.miss == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_FALSE(c.clamped);
}

TEST_CASE("field-averaged void probability agrees with a field simulation") {
    rng::Stream stream(411001u, 0);
    const core::Deployment dep{kLambda, 250.0};
    const int fields = 10000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < fields; ++i) {
        const auto field = geometry::sample_field(dep, kLink.r_r, stream);
        double rtot = 0.0;
        for (const auto& p : field.points) rtot += detection::r_kernel(p.norm(), 1, {1}, kLink);
        const double v = std::exp(-kLink.N_tx * rtot);
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / fields;
    const double sd = std::sqrt((sumsq - fields * mean * mean) / (fields - 1));
    const double se = sd / std::sqrt(static_cast<double>(fields));
    CHECK(std::fabs(mean - 2.571034905092e-01) < 4.0 * se);
}

TEST_CASE("count sampling matches the field mean for a fixed field") {
    geometry::TxField field;
    field.deployment = {kLambda, 250.0};
    field.r_r = kLink.r_r;
    field.points = {{10.0, 0.0, 0.0}, {0.0, -14.0, 0.0}, {3.0, 4.0, 12.0}};

    double mean_want = 0.0;
    for (const auto& p : field.points)
        mean_want += kLink.N_tx * detection::r_kernel(p.norm(), 1, {1}, kLink);

    for (const auto model :
         {detection::ObservationModel::PoissonApprox, detection::ObservationModel::BinomialExact}) {
        rng::Stream stream(411002u, model == detection::ObservationModel::PoissonApprox ? 0 : 1);
        const int draws = 4000;
        double sum = 0.0;
        for (int i = 0; i < draws; ++i) {
            const long long n = detection::observation_sample(field, {1}, 1, kLink, model, stream);
            CHECK(n >= 0);
            sum += static_cast<double>(n);
        }
        const double se = std::sqrt(mean_want / draws);  // Poisson-scale spread
        CHECK_MESSAGE(std::fabs(sum / draws - mean_want) < 4.0 * se, "model=",
                      static_cast<int>(model));
    }

    // identical seeds replay identical draws
    rng::Stream a(77u, 3), b(77u, 3);
    for (int i = 0; i < 50; ++i)
        CHECK(detection::observation_sample(field, {1}, 1, kLink,
                                            detection::ObservationModel::PoissonApprox, a) ==
              detection::observation_sample(field, {1}, 1, kLink,
                                            detection::ObservationModel::PoissonApprox, b));

    geometry::TxField empty;
    empty.deployment = field.deployment;
    empty.r_r = field.r_r;
    rng::Stream s(1u, 0);
    CHECK(detection::observation_sample(empty, {1}, 1, kLink,
                                        detection::ObservationModel::BinomialExact, s) == 0);
    LinkParams frac = kLink;
    frac.N_tx = 20.5;
    CHECK_THROWS_AS(detection::observation_sample(field, {1}, 1, frac,
                                                  detection::ObservationModel::BinomialExact, s),
                    std::invalid_argument);
}

TEST_CASE("threshold demodulation") {
    core::DetectorSpec fixed{core::DetectorMode::Fixed, 5};
    CHECK(detection::demodulate({10.0, 10.0, 10.0}, fixed) == std::vector<int>{1, 1, 1});
    CHECK(detection::demodulate({5.0}, fixed) == std::vector<int>{1});  // >= comparison
    CHECK(detection::demodulate({4.0}, fixed) == std::vector<int>{0});

    core::DetectorSpec dfd{core::DetectorMode::Dfd, 5};
    // cumulative counts: differences against the previous sample decide
    CHECK(detection::demodulate({10.0, 10.0, 10.0}, dfd) == std::vector<int>{1, 0, 0});
    CHECK(detection::demodulate({3.0, 9.0, 4.0, 10.0}, dfd) == std::vector<int>{0, 1, 0, 1});
    CHECK(detection::demodulate({}, dfd).empty());
}

TEST_CASE("detection input validation") {
    CHECK_THROWS_AS(detection::ber_theorem2(1, {}, 0, kLink, kLambda), std::invalid_argument);
    CHECK_THROWS_AS(detection::ber_theorem2(3, {1}, 1, kLink, kLambda), std::invalid_argument);
    CHECK_THROWS_AS(detection::ber_threshold_sweep(1, {}, kLink, kLambda, 2, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(detection::r_kernel(10.0, 0, {}, kLink), std::invalid_argument);
    CHECK_THROWS_AS(detection::r_kernel(10.0, 2, {1}, kLink), std::invalid_argument);
    CHECK_THROWS_AS(detection::laplace_rtot(20.0, 1, {1}, kLink, 0.0), std::domain_error);
}
