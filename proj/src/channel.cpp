#include "molfield/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "molfield/special.hpp"

namespace molfield {
namespace channel {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;

void check_fa_domain(double r0, double t, const core::Medium& medium, double r_r) {
    if (!(r_r > 0.0)) throw std::domain_error("receiver radius must be positive");
    if (!(r0 >= r_r)) throw std::domain_error("release distance must be at least the receiver radius");
    if (!(t >= 0.0)) throw std::domain_error("time must be non-negative");
    if (!(medium.D > 0.0)) throw std::domain_error("diffusion coefficient must be positive");
    if (medium.k_d < 0.0) throw std::domain_error("degradation rate must be non-negative");
}

}  // namespace

double fa_hit_rate(double r0, double t, const core::Medium& medium, double r_r) {
    check_fa_domain(r0, t, medium, r_r);
    if (t == 0.0) return 0.0;
    const double a = r0 - r_r;
    const double u2 = a * a / (4.0 * medium.D * t);
    // (r_r/r0) * a / sqrt(4 pi D t^3) * exp(-a^2 / 4Dt)
    return (r_r / r0) * a / (2.0 * kSqrtPi * std::sqrt(medium.D * t) * t) * std::exp(-u2);
}

double fa_cum_fraction(double r0, double t, const core::Medium& medium, double r_r) {
    check_fa_domain(r0, t, medium, r_r);
    if (t == 0.0) return 0.0;

    const double u = (r0 - r_r) / (2.0 * std::sqrt(medium.D * t));
    if (medium.k_d == 0.0) return (r_r / r0) * std::erfc(u);

    // With degradation the cumulative fraction splits into two mirrored
    // erfc terms whose direct evaluation overflows (each carries a factor
    // exp(2uv) against exp(-(u±v)^2) decay). Scaling both through erfcx
    // keeps every intermediate bounded:
    //   e^{-u^2-kt} erfc(u-v) e^{...}  ->  e^c erfcx(|u-v|) with a 2e^{-2uv}
    //   complement when u < v, since erfc(-x) = 2 - erfc(x).
    const double v = std::sqrt(medium.k_d * t);
    const double c = -u * u - medium.k_d * t;
    const double plus = std::exp(c) * math::erfcx(u + v);
    double minus;
    if (u >= v) {
        minus = std::exp(c) * math::erfcx(u - v);
    } else {
        minus = 2.0 * std::exp(-2.0 * u * v) - std::exp(c) * math::erfcx(v - u);
    }
    const double f = (r_r / (2.0 * r0)) * (minus + plus);
    return f > 0.0 ? f : 0.0;
}

double fa_net_fraction(double r0, double t, double T_ss, const core::Medium& medium, double r_r) {
    if (!(T_ss >= 0.0)) throw std::domain_error("sampling interval must be non-negative");
    check_fa_domain(r0, t, medium, r_r);
    if (T_ss == 0.0) return 0.0;
    const double d =
        fa_cum_fraction(r0, t + T_ss, medium, r_r) - fa_cum_fraction(r0, t, medium, r_r);
    return d > 0.0 ? d : 0.0;
}

double ps_point_concentration(double r0, double t, const core::Medium& medium) {
    if (!(r0 >= 0.0)) throw std::domain_error("distance must be non-negative");
    if (!(t > 0.0)) throw std::domain_error("time must be positive");
    if (!(medium.D > 0.0)) throw std::domain_error("diffusion coefficient must be positive");
    if (medium.k_d < 0.0) throw std::domain_error("degradation rate must be non-negative");
    const double four_dt = 4.0 * medium.D * t;
    const double norm = std::pow(M_PI * four_dt, -1.5);
    return norm * std::exp(-r0 * r0 / four_dt - medium.k_d * t);
}

double ps_fraction(double r0, double t, const core::Medium& medium, double r_r) {
    if (!(r_r > 0.0)) throw std::domain_error("receiver radius must be positive");
    if (!(r0 >= 0.0)) throw std::domain_error("distance must be non-negative");
    if (!(t >= 0.0)) throw std::domain_error("time must be non-negative");
    if (!(medium.D > 0.0)) throw std::domain_error("diffusion coefficient must be positive");
    if (medium.k_d < 0.0) throw std::domain_error("degradation rate must be non-negative");
    if (t == 0.0) {
        // sharp-release limit: the indicator of the release point lying
        // inside the sphere (boundary releases split evenly)
        if (r0 < r_r) return 1.0;
        if (r0 == r_r) return 0.5;
        return 0.0;
    }

    const double s = 2.0 * std::sqrt(medium.D * t);
    const double decay = std::exp(-medium.k_d * t);
    if (r0 == 0.0) {
        const double w = r_r / s;
        const double f = std::erf(w) - (2.0 * w / kSqrtPi) * std::exp(-w * w);
        return decay * (f > 0.0 ? f : 0.0);
    }

    const double a = (r0 - r_r) / s;
    const double b = (r0 + r_r) / s;
    const double A = 0.5 * (std::erfc(a) - std::erfc(b));
    // The Gaussian difference e^{-a^2} - e^{-b^2} cancels badly when the
    // sphere subtends a small angle; expm1 on the ratio keeps full
    // precision: e^{-a^2} - e^{-b^2} = -e^{-a^2} expm1(a^2 - b^2) and
    // b^2 - a^2 = 4 r0 r_r / s^2.
    const double B =
        (std::sqrt(medium.D * t) / (kSqrtPi * r0)) * std::exp(-a * a) * std::expm1(-4.0 * r0 * r_r / (s * s));
    const double f = A + B;
    return decay * (f > 0.0 ? f : 0.0);
}

double ps_fraction_uniform(double r0, double t, const core::Medium& medium, double r_r) {
    if (!(r_r > 0.0)) throw std::domain_error("receiver radius must be positive");
    const double volume = (4.0 / 3.0) * M_PI * r_r * r_r * r_r;
    return ps_point_concentration(r0, t, medium) * volume;
}

}  // namespace channel
}  // namespace molfield
