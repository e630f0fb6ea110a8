#include "doctest.h"

#include <cmath>
#include <vector>

#include "molfield/rng.hpp"
#include "molfield/stats.hpp"

using namespace molfield;

TEST_CASE("Wilson interval reproduces textbook values") {
    // 8 successes in 10 trials at 95%: the classic (0.4902, 0.9433)
    const auto w = stats::wilson(8, 10, 1.959963984540054);
    CHECK(w.center == doctest::Approx(0.716740).epsilon(1e-5));
    CHECK(w.low == doctest::Approx(0.490176).epsilon(1e-4));
    CHECK(w.high == doctest::Approx(0.943304).epsilon(1e-4));

    // degenerate endpoints stay inside [0, 1] and keep a usable width
    const auto none = stats::wilson(0, 10, 1.959963984540054);
    CHECK(none.low == 0.0);
    CHECK(none.high == doctest::Approx(0.277532).epsilon(1e-4));
    const auto all = stats::wilson(10, 10, 1.959963984540054);
    CHECK(all.high == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(all.high <= 1.0);
    CHECK(all.low == doctest::Approx(1.0 - 0.277532).epsilon(1e-3));

    CHECK(w.low <= w.center);
    CHECK(w.center <= w.high);
    CHECK_THROWS_AS(stats::wilson(1, 0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(stats::wilson(5, 4, 2.0), std::invalid_argument);
}

TEST_CASE("99% quantile constant is consistent with the normal CDF") {
    CHECK(stats::normal_cdf(stats::kZ99) == doctest::Approx(0.995).epsilon(1e-12));
    CHECK(stats::normal_cdf(0.0) == 0.5);
    CHECK(stats::normal_cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-14));
    CHECK(stats::normal_cdf(-1.96) ==
          doctest::Approx(1.0 - 0.9750021048517795).epsilon(1e-12));
}

TEST_CASE("Kolmogorov survival function matches frozen references") {
    struct Row {
        double y, q;
    };
    const std::vector<Row> rows = {
        {0.5, 9.639452436649e-01},  {0.8, 5.441424115742e-01}, {1.0, 2.699996716774e-01},
        {1.36, 4.948587675538e-02}, {1.63, 9.846364888487e-03}, {2.0, 6.709252557797e-04},
    };
    for (const Row& row : rows)
        CHECK(stats::kolmogorov_survival(row.y) == doctest::Approx(row.q).epsilon(1e-10));
    CHECK(stats::kolmogorov_survival(0.0) == 1.0);
    CHECK(stats::kolmogorov_survival(-2.0) == 1.0);
    double prev = 1.0;
    for (double y = 0.1; y < 3.0; y += 0.1) {
        const double q = stats::kolmogorov_survival(y);
        CHECK(q <= prev);
        prev = q;
    }
}

TEST_CASE("KS statistic by hand") {
    const std::vector<double> samples = {0.1, 0.2, 0.3};
    const double d = stats::ks_statistic(samples, [](double x) { return x; });
    CHECK(d == doctest::Approx(0.7).epsilon(1e-15));
    CHECK_THROWS_AS(stats::ks_statistic({}, [](double x) { return x; }), std::invalid_argument);
}

TEST_CASE("KS test accepts uniform draws and rejects skewed ones") {
    rng::Stream stream(52001u, 0);
    std::vector<double> uniform, skewed;
    for (int i = 0; i < 5000; ++i) {
        const double u = stream.u01();
        uniform.push_back(u);
        skewed.push_back(u * u);
    }
    const auto unit = [](double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); };
    CHECK(stats::ks_pvalue(stats::ks_statistic(uniform, unit), uniform.size()) > 0.01);
    CHECK(stats::ks_pvalue(stats::ks_statistic(skewed, unit), skewed.size()) < 1e-10);
}

TEST_CASE("total variation distance") {
    CHECK(stats::tv_distance({0.5, 0.5}, {0.25, 0.75}) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(stats::tv_distance({0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}) == 0.0);
    CHECK_THROWS_AS(stats::tv_distance({0.5, 0.5}, {1.0}), std::invalid_argument);
}

TEST_CASE("Wilson intervals cover the truth at their stated rate") {
    rng::Stream stream(52002u, 0);
    const double p = 0.3;
    const long long n = 1000;
    const int experiments = 2000;
    int covered = 0;
    for (int i = 0; i < experiments; ++i) {
        const long long k = stream.binomial(n, p);
        const auto w = stats::wilson(k, n, stats::kZ99);
        if (w.low <= p && p <= w.high) ++covered;
    }
    // nominal coverage 99%; allow sampling slack on 2000 replicates
    CHECK(covered >= static_cast<int>(experiments * 0.98));
}
