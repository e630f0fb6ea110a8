#include "molfield/special.hpp"

#include <cmath>

namespace molfield {
namespace math {

namespace {

constexpr double kInvSqrtPi = 0.5641895835477562869;  // 1/sqrt(pi)

// Continued fraction
//   sqrt(pi) * erfcx(x) = 1 / (x + (1/2)/(x + 1/(x + (3/2)/(x + 2/(x + ...)))))
// (partial numerators k/2, partial denominators x), evaluated with the
// modified Lentz algorithm. Converges in ~20 terms for x >= 6.
double erfcx_cf(double x) {
    constexpr double tiny = 1e-300;
    double f = x, c = x, d = 0.0;
    for (int k = 1; k <= 300; ++k) {
        const double a = 0.5 * k;
        d = x + a * d;
        if (d == 0.0) d = tiny;
        c = x + a / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return kInvSqrtPi / f;
}

}  // namespace

double erfcx(double x) {
    if (std::isnan(x)) return x;
    if (x < 0.0) {
        // reflection; overflows to +inf for x <= -26.6 where the true value
        // exceeds the double range anyway
        return 2.0 * std::exp(x * x) - erfcx(-x);
    }
    if (x < 6.0) {
        // x^2 < 36 so exp() is exact to a few ulp and erfc() has not underflowed
        return std::exp(x * x) * std::erfc(x);
    }
    return erfcx_cf(x);
}

}  // namespace math
}  // namespace molfield
