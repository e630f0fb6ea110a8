#include "molfield/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace molfield {
namespace stats {

WilsonInterval wilson(long long successes, long long trials, double z) {
    if (trials <= 0) throw std::invalid_argument("trials must be positive");
    if (successes < 0 || successes > trials) throw std::invalid_argument("successes out of range");
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = (z / denom) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    WilsonInterval w;
    w.center = center;
    w.low = std::max(0.0, center - half);
    w.high = std::min(1.0, center + half);
    return w;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("need at least one sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, f - static_cast<double>(i) / n);
        d = std::max(d, static_cast<double>(i + 1) / n - f);
    }
    return d;
}

double kolmogorov_survival(double y) {
    if (y <= 0.0) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * y * y);
        sum += sign * term;
        if (term < 1e-16) break;
        sign = -sign;
    }
    const double q = 2.0 * sum;
    return std::clamp(q, 0.0, 1.0);
}

double ks_pvalue(double d, std::size_t n) {
    if (n == 0) throw std::invalid_argument("need at least one sample");
    const double sn = std::sqrt(static_cast<double>(n));
    return kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw std::invalid_argument("distributions must share a support");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::fabs(p[i] - q[i]);
    return 0.5 * s;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace stats
}  // namespace molfield
