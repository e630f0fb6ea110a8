#include "molfield/analytic.hpp"

#include <cmath>
#include <stdexcept>

#include "molfield/parallel.hpp"

namespace molfield {
namespace analytic {

namespace {

constexpr double kFourThirdsPi = 4.0 * M_PI / 3.0;

QuadratureConfig scaled(const QuadratureConfig& cfg, const PhiKernel& phi) {
    QuadratureConfig c = cfg;
    c.initial_scale = phi.suggested_scale();
    return c;
}

double void_probability_exponent(double x, double lambda_a, double r_r) {
    return -lambda_a * kFourThirdsPi * (x * x * x - r_r * r_r * r_r);
}

}  // namespace

double expected_all(const PhiKernel& phi, double N_tx, double lambda_a,
                    const QuadratureConfig& cfg) {
    const QuadratureConfig qc = scaled(cfg, phi);
    const QuadResult r = integrate_semi_infinite(
        [&phi](double x) { return phi(x) * x * x; }, phi.r_r, qc);
    require_converged(r, "expected_all");
    return 4.0 * M_PI * N_tx * lambda_a * r.value;
}

double expected_nearest(const PhiKernel& phi, double N_tx, double lambda_a,
                        const QuadratureConfig& cfg) {
    const QuadratureConfig qc = scaled(cfg, phi);
    const double r_r = phi.r_r;
    const QuadResult r = integrate_semi_infinite(
        [&phi, lambda_a, r_r](double x) {
            return phi(x) * x * x * std::exp(void_probability_exponent(x, lambda_a, r_r));
        },
        r_r, qc);
    require_converged(r, "expected_nearest");
    return 4.0 * M_PI * N_tx * lambda_a * r.value;
}

double expected_others(const PhiKernel& phi, double N_tx, double lambda_a,
                       const QuadratureConfig& cfg) {
    const QuadratureConfig qc = scaled(cfg, phi);
    // inner tail T(x) = integral_x^inf phi r^2 dr, memoized over the panels
    // of one adaptive sweep so the outer integral does not re-refine it
    TailTable tail([&phi](double r) { return phi(r) * r * r; }, phi.r_r, qc);
    if (!tail.converged())
        throw quadrature_error("expected_others: inner tail integral did not converge", {});
    const double r_r = phi.r_r;
    const QuadResult outer = integrate_semi_infinite(
        [&tail, lambda_a, r_r](double x) {
            const double e = void_probability_exponent(x, lambda_a, r_r);
            return tail(x) * x * x * std::exp(e);
        },
        r_r, qc);
    require_converged(outer, "expected_others");
    const double c = 4.0 * M_PI * lambda_a;
    return N_tx * c * c * outer.value;
}

std::vector<ExpectedPoint> expected_sweep(const core::Config& config,
                                          const std::vector<double>& t_grid, int threads) {
    std::vector<ExpectedPoint> out(t_grid.size());
    parallel_for(t_grid.size(), resolve_threads(threads), [&](std::size_t i) {
        PhiKernel phi;
        phi.kind = config.receiver.kind;
        phi.medium = config.medium;
        phi.r_r = config.receiver.r_r;
        phi.t = t_grid[i];
        phi.T_ss = config.protocol.T_ss;
        ExpectedPoint p;
        p.t = t_grid[i];
        p.e_nearest = expected_nearest(phi, config.protocol.N_tx, config.deployment.lambda_a);
        p.e_others = expected_others(phi, config.protocol.N_tx, config.deployment.lambda_a);
        p.e_all = expected_all(phi, config.protocol.N_tx, config.deployment.lambda_a);
        out[i] = p;
    });
    return out;
}

namespace {

void require_stable(const core::Medium& medium, const char* fn) {
    if (medium.k_d != 0.0)
        throw std::invalid_argument(std::string(fn) + " is derived for k_d = 0 only");
}

}  // namespace

double fa_closed_cumulative(double t, const core::Medium& medium, double r_r, double N_tx,
                            double lambda_a) {
    require_stable(medium, "fa_closed_cumulative");
    if (!(t >= 0.0)) throw std::domain_error("time must be non-negative");
    const double dt = medium.D * t;
    return 4.0 * N_tx * lambda_a * r_r * (M_PI * dt + 2.0 * std::sqrt(M_PI) * r_r * std::sqrt(dt));
}

double fa_closed_net(double t, double T_ss, const core::Medium& medium, double r_r, double N_tx,
                     double lambda_a) {
    require_stable(medium, "fa_closed_net");
    if (!(t >= 0.0)) throw std::domain_error("time must be non-negative");
    if (!(T_ss >= 0.0)) throw std::domain_error("sampling interval must be non-negative");
    const double sqrt_d = std::sqrt(medium.D);
    return 4.0 * std::sqrt(M_PI) * N_tx * lambda_a * r_r *
           (std::sqrt(M_PI) * medium.D * T_ss +
            2.0 * r_r * sqrt_d * (std::sqrt(t + T_ss) - std::sqrt(t)));
}

double fa_asymptotic_net(double T_ss, const core::Medium& medium, double r_r, double N_tx,
                         double lambda_a) {
    require_stable(medium, "fa_asymptotic_net");
    if (!(T_ss >= 0.0)) throw std::domain_error("sampling interval must be non-negative");
    return 4.0 * M_PI * N_tx * lambda_a * r_r * medium.D * T_ss;
}

}  // namespace analytic
}  // namespace molfield
