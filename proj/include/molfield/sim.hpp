#ifndef MOLFIELD_SIM_HPP
#define MOLFIELD_SIM_HPP

#include <cstdint>
#include <vector>

#include "molfield/config.hpp"
#include "molfield/detection.hpp"
#include "molfield/geometry.hpp"
#include "molfield/rng.hpp"

// Monte Carlo estimators at three fidelity tiers:
//  - tier 1 randomizes only the field and sums conditional expectations
//    (variance from transmitter placement alone);
//  - tier 2 randomizes field and molecule counts (Poisson observation
//    model, one field per realization, one count per bit interval);
//  - the particle tier walks every molecule by Brownian steps.
//
// Realization r always uses rng::Stream(seed, r) (particles derive one
// further key per molecule), and reductions run in realization order, so
// every estimate is bit-identical for any thread count.
namespace molfield {
namespace sim {

struct ObservationTrace {
    core::ReceiverKind kind = core::ReceiverKind::Absorbing;
    std::vector<double> sample_times;
    std::vector<double> n_rx;  // one sampled count per bit interval
};

struct Realization {
    std::vector<int> bits;
    ObservationTrace trace;
};

struct CurvePoint {
    double t = 0.0;
    double mean = 0.0;
    double std_error = 0.0;
};

// Tier 1: expected window increment of the sampled field, averaged over
// field realizations. Randomness is the placement only.
std::vector<CurvePoint> mc_type1(const core::Config& config, const std::vector<double>& t_grid,
                                 long long realizations, int threads);

// Tier 2: per-realization bit sequence (explicit pattern or iid draws),
// one field, then one Poisson count per bit interval with the
// field-summed kernel mean. Counts are drawn independently across
// intervals; for the passive receiver this ignores the correlation of a
// molecule lingering across samples, which is the model the analytic
// error probabilities describe.
std::vector<Realization> mc_type2(const core::Config& config, long long realizations, int threads);

struct BerEstimate {
    double p_e = 0.0;
    double ci_low = 0.0;
    double ci_high = 1.0;  // Wilson 99% bounds
    long long errors = 0;
    long long trials = 0;
};

// Demodulates each realization and scores the bit at position test_bit
// (1-based) against the truth; Wilson 99% interval on the error rate.
BerEstimate estimate_ber(const std::vector<Realization>& realizations,
                         const core::DetectorSpec& detector, int test_bit);

// Dedicated error-rate estimator for one decision instant: every
// realization draws the current bit (prior P1) after the fixed
// interference history, samples tier-2 counts, and scores all thresholds
// in [nth_min, nth_max] on the same draws. Entry k is threshold
// nth_min + k.
std::vector<BerEstimate> simulate_ber_sweep(const core::Config& config,
                                            const std::vector<int>& history,
                                            core::DetectorMode mode, long long nth_min,
                                            long long nth_max, long long realizations,
                                            int threads);

struct ParticleCounts {
    core::ReceiverKind kind = core::ReceiverKind::Absorbing;
    std::vector<double> sample_times;
    long long emitted = 0;
    std::vector<long long> absorbed_cum;  // absorbed by each sample time
    std::vector<long long> degraded_cum;  // degraded by each sample time
    std::vector<long long> inside;        // currently inside (passive observable)
    std::vector<long long> live;          // neither absorbed nor degraded

    // Per-window observation: absorbed increments (absorbing) or the
    // inside count (passive).
    ObservationTrace trace() const;
};

// Brownian-walk reference simulation of one impulse release (every
// transmitter emits N_tx molecules at t = 0). Per step: Gaussian move
// with per-axis sigma = sqrt(2 D dt), absorption test at the new
// position, then a degradation draw. Absorption is only checked at step
// ends, so absorbed fractions carry an O(sqrt(dt)) bias toward late
// absorption; sample times are snapped to whole steps. dt must resolve
// the sampling interval (dt < T_ss).
ParticleCounts particle_sim(const geometry::TxField& field, const core::Config& config, double dt,
                            const std::vector<double>& sample_times,
                            std::uint64_t realization_index, int threads);

}  // namespace sim
}  // namespace molfield

#endif
