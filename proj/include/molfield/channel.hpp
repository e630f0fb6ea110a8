#ifndef MOLFIELD_CHANNEL_HPP
#define MOLFIELD_CHANNEL_HPP

#include "molfield/config.hpp"

// Single-transmitter response of the two receiver types to an impulse
// release of molecules at distance r0 from the receiver center.
//
// Absorbing receiver: molecules vanish on first contact with the sphere
// surface, so the natural observable is the cumulative fraction ever
// absorbed. Passive receiver: the sphere is transparent and the observable
// is the fraction of molecules inside it at one instant.
//
// All arguments are in internal units (um, s, um^-3). Functions throw
// std::domain_error on arguments outside their physical domain.
namespace molfield {
namespace channel {

// First-passage time density to the absorbing sphere, weighted by the hit
// probability, for a stable molecule (no degradation): the fraction of
// released molecules absorbed per unit time at age t. Zero at t = 0.
double fa_hit_rate(double r0, double t, const core::Medium& medium, double r_r);

// Fraction of molecules released at distance r0 that have been absorbed by
// age t, degradation included. Increases from 0 toward r_r/r0 (less when
// k_d > 0). Requires r0 >= r_r.
double fa_cum_fraction(double r0, double t, const core::Medium& medium, double r_r);

// Absorbed-count increment over one sampling window: cum(t + T_ss) - cum(t).
double fa_net_fraction(double r0, double t, double T_ss, const core::Medium& medium, double r_r);

// Free-space concentration (per released molecule, um^-3) at distance r0
// from the release point at age t > 0, including degradation survival.
double ps_point_concentration(double r0, double t, const core::Medium& medium);

// Fraction of molecules inside a transparent sphere of radius r_r centered
// at distance r0 from the release point, at age t. Exact integral of the
// Gaussian kernel over the sphere; r0 = 0 (release at the center) and
// r0 < r_r are allowed. t = 0 resolves to the indicator of the release
// point being inside.
double ps_fraction(double r0, double t, const core::Medium& medium, double r_r);

// Uniform-concentration approximation of ps_fraction: center concentration
// times sphere volume. Kept for accuracy comparisons; do not use as the
// observation model.
double ps_fraction_uniform(double r0, double t, const core::Medium& medium, double r_r);

// Binds the medium and receiver radius so sweep code can pass one object.
struct ChannelQuery {
    core::Medium medium;
    double r_r = 0.0;

    double fa_hit_rate(double r0, double t) const {
        return channel::fa_hit_rate(r0, t, medium, r_r);
    }
    double fa_cum_fraction(double r0, double t) const {
        return channel::fa_cum_fraction(r0, t, medium, r_r);
    }
    double fa_net_fraction(double r0, double t, double T_ss) const {
        return channel::fa_net_fraction(r0, t, T_ss, medium, r_r);
    }
    double ps_point_concentration(double r0, double t) const {
        return channel::ps_point_concentration(r0, t, medium);
    }
    double ps_fraction(double r0, double t) const {
        return channel::ps_fraction(r0, t, medium, r_r);
    }
    double ps_fraction_uniform(double r0, double t) const {
        return channel::ps_fraction_uniform(r0, t, medium, r_r);
    }
};

}  // namespace channel
}  // namespace molfield

#endif
