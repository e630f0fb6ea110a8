#ifndef MOLFIELD_STATS_HPP
#define MOLFIELD_STATS_HPP

#include <cstddef>
#include <functional>
#include <vector>

// Small statistics kit used by the simulators and their consistency
// checks: binomial confidence intervals for error-rate estimates,
// Kolmogorov-Smirnov distribution tests, and discrete distribution
// distances.
namespace molfield {
namespace stats {

// Two-sided 99% standard normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;

struct WilsonInterval {
    double center = 0.0;
    double low = 0.0;
    double high = 1.0;
};

// Wilson score interval for a binomial proportion; well-behaved at 0 and
// n successes, unlike the Wald interval.
WilsonInterval wilson(long long successes, long long trials, double z);

// Two-sided KS statistic of samples against a continuous CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

// Survival function of the Kolmogorov distribution,
//   Q(y) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 y^2).
double kolmogorov_survival(double y);

// Asymptotic p-value of a KS statistic d at sample size n (with the usual
// finite-n effective-size correction).
double ks_pvalue(double d, std::size_t n);

// Total variation distance 0.5 * sum |p_i - q_i| between two discrete
// distributions given on a common support.
double tv_distance(const std::vector<double>& p, const std::vector<double>& q);

double normal_cdf(double x);

}  // namespace stats
}  // namespace molfield

#endif
