#ifndef MOLFIELD_ANALYTIC_HPP
#define MOLFIELD_ANALYTIC_HPP

#include <vector>

#include "molfield/channel.hpp"
#include "molfield/config.hpp"
#include "molfield/quadrature.hpp"

// Expected collective signal of the whole transmitter field, obtained by
// averaging the single-transmitter response over the point process
// (Campbell's formula for the full field, the nearest-distance law for the
// closest transmitter, and a tail integral for everyone else).
//
// The observable is the per-sampling-window increment: molecules newly
// absorbed during [t, t + T_ss] for the absorbing receiver, change of the
// in-sphere count over the same window for the passive one. The passive
// increment goes negative once the local concentration passes its peak;
// that is real signal decay, not an error, so it is not clamped.
namespace molfield {
namespace analytic {

// Per-transmitter expected window increment as a function of release
// distance r, with the scenario bound in.
struct PhiKernel {
    core::ReceiverKind kind = core::ReceiverKind::Absorbing;
    core::Medium medium;
    double r_r = 0.0;
    double t = 0.0;
    double T_ss = 0.0;

    double operator()(double r) const {
        if (kind == core::ReceiverKind::Absorbing)
            return channel::fa_net_fraction(r, t, T_ss, medium, r_r);
        return channel::ps_fraction(r, t + T_ss, medium, r_r) -
               channel::ps_fraction(r, t, medium, r_r);
    }

    // Radial extent of the bulk of the kernel; used to size the first
    // integration segment.
    double suggested_scale() const {
        const double diffusion = std::sqrt(4.0 * medium.D * (t + T_ss));
        return r_r + (diffusion > 0.0 ? diffusion : 1.0);
    }
};

// Expected increment summed over every transmitter in an unbounded field:
//   4 pi N_tx lambda_a * integral_{r_r}^inf phi(r) r^2 dr.
double expected_all(const PhiKernel& phi, double N_tx, double lambda_a,
                    const QuadratureConfig& cfg = {});

// Contribution of the nearest transmitter alone: phi averaged over the
// nearest-distance density 4 pi lambda x^2 exp(-lambda (4pi/3)(x^3 - r_r^3)).
double expected_nearest(const PhiKernel& phi, double N_tx, double lambda_a,
                        const QuadratureConfig& cfg = {});

// Contribution of every transmitter except the nearest. Conditioned on the
// nearest lying at distance x, the rest form an unthinned field beyond x,
// so this is the double integral
//   N_tx (4 pi lambda)^2 integral_x x^2 e^{-lambda(4pi/3)(x^3-r_r^3)} T(x) dx,
//   T(x) = integral_x^inf phi(r) r^2 dr,
// with the inner tail memoized once and shared across the outer nodes.
// Satisfies expected_nearest + expected_others = expected_all.
double expected_others(const PhiKernel& phi, double N_tx, double lambda_a,
                       const QuadratureConfig& cfg = {});

struct ExpectedPoint {
    double t = 0.0;
    double e_nearest = 0.0;
    double e_others = 0.0;
    double e_all = 0.0;
};

// Evaluates all three expectations on a time grid, grid points in parallel.
std::vector<ExpectedPoint> expected_sweep(const core::Config& config,
                                          const std::vector<double>& t_grid, int threads);

// Closed forms for the absorbing receiver with a stable molecule (k_d = 0);
// they throw std::invalid_argument when k_d > 0.

// Expected total number absorbed by age t over the whole field:
//   4 N lambda r_r (pi D t + 2 sqrt(pi) r_r sqrt(D t)).
double fa_closed_cumulative(double t, const core::Medium& medium, double r_r, double N_tx,
                            double lambda_a);

// Window increment of the closed form.
double fa_closed_net(double t, double T_ss, const core::Medium& medium, double r_r, double N_tx,
                     double lambda_a);

// Large-t limit of the window increment: 4 pi N lambda r_r D T_ss.
double fa_asymptotic_net(double T_ss, const core::Medium& medium, double r_r, double N_tx,
                         double lambda_a);

}  // namespace analytic
}  // namespace molfield

#endif
