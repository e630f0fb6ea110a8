#ifndef MOLFIELD_DETECTION_HPP
#define MOLFIELD_DETECTION_HPP

#include <vector>

#include "molfield/channel.hpp"
#include "molfield/config.hpp"
#include "molfield/geometry.hpp"
#include "molfield/quadrature.hpp"
#include "molfield/rng.hpp"

// Symbol detection over the collective channel. Every transmitter
// broadcasts the same bit sequence (one bit per interval T_b, N_tx
// molecules per 1-bit); the receiver samples once per bit interval and
// thresholds the count. Intersymbol interference enters through the
// channel memory, multiuser interference through the random field.
//
// The analytic error probabilities condition on the field through its
// Laplace functional and recover the Poisson-mixture count distribution
// from factorial-style moment sums (complete Bell polynomials), so they
// are exact for a Poisson observation model over the field, at any
// threshold, without enumerating field configurations.
namespace molfield {
namespace detection {

struct LinkParams {
    core::ReceiverKind kind = core::ReceiverKind::Absorbing;
    core::Medium medium;
    double r_r = 0.0;
    double N_tx = 0.0;
    double T_b = 0.0;
};

// Expected fraction of one transmitter's bit-i molecules contributing to
// the sample at the end of bit j, summed over i <= j with bit values
// b[i-1]: newly absorbed during bit j for the absorbing receiver,
// currently inside at the sampling instant for the passive one.
// r0 is the transmitter distance; j is 1-based; bits must hold at least j
// entries (extras are ignored).
double r_kernel(double r0, int j, const std::vector<int>& bits, const LinkParams& link);

enum class ObservationModel {
    BinomialExact,  // Binomial(N_tx, fraction) per transmitter per 1-bit
    PoissonApprox,  // one Poisson draw with the summed mean
};

// Draws the received count at sampling instant j for a fixed field.
// Binomial draws iterate transmitters in field order and bits in ascending
// order, so traces are reproducible.
long long observation_sample(const geometry::TxField& field, const std::vector<int>& bits, int j,
                             const LinkParams& link, ObservationModel model, rng::Stream& stream);

// Laplace transform of the field-summed kernel R_tot = sum_x R(|x|):
//   L(s) = exp(-4 pi lambda integral_{r_r}^inf (1 - e^{-s R(r)}) r^2 dr).
// Evaluated at s = N_tx this is the probability that the Poisson-model
// count at instant j is zero.
double laplace_rtot(double s, int j, const std::vector<int>& bits, const LinkParams& link,
                    double lambda_a, const analytic::QuadratureConfig& cfg = {});

// Complete Bell polynomials B_0..B_K from arguments x_1..x_K (x[i] is
// x_{i+1}), by the convolution recurrence. Raw B_n overflows double once
// the implied count mean passes ~150; the error-probability path below
// therefore never uses this directly (see count_moments), and it exists
// for the partition-enumeration cross-check.
std::vector<double> bell_polynomials(const std::vector<double>& x);

struct CountMoments {
    double laplace = 1.0;   // L_{R_tot}(N_tx) = P(count = 0)
    std::vector<double> x;  // x[k-1] = k-th moment integral x_k
};

// Laplace value and raw moment integrals
//   x_k = 4 pi lambda integral (N_tx R(r))^k e^{-N_tx R(r)} r^2 dr
// for k = 1..K at sampling instant j. K is capped at 20 here: beyond
// that the raw x_k lose digits to the k! rescaling and the probability
// recursion inside the error-probability functions is the stable route.
CountMoments count_moments(int j, const std::vector<int>& bits, const LinkParams& link,
                           double lambda_a, int K, const analytic::QuadratureConfig& cfg = {});

// B_n by direct set-partition enumeration (reference implementation for
// cross-checking the recurrence; n is capped at 12).
double bell_by_partition_enumeration(const std::vector<double>& x, int n);

struct BerComponents {
    double miss = 0.0;         // P(decide 0 | current bit 1)
    double false_alarm = 0.0;  // P(decide 1 | current bit 0)
    double p_e = 0.0;          // prior-weighted average
    bool clamped = false;      // true if a probability strayed past [0,1] by > 1e-9
};

// Fixed-threshold error probability at sampling instant j (1-based) with
// interference history bits b_1..b_{j-1} (first j-1 entries of
// bits_history; the current bit is set to 1 and 0 internally for the two
// error branches). P(count < N_th) is
//   L(N_tx) * sum_{n=0}^{N_th-1} B_n(x_1..x_n) / n!
// with the moment integrals of count_moments. Evaluated through the
// equivalent point-probability recursion c_0 = L,
//   c_n = (1/n) sum_{i<=n} i (x_i/i!) c_{n-i},
// whose terms are the count probabilities P(count = n) themselves, so
// arbitrarily large thresholds and means stay in range.
BerComponents ber_theorem2(int j, const std::vector<int>& bits_history, long long N_th,
                           const LinkParams& link, double lambda_a, double P1 = 0.5,
                           const analytic::QuadratureConfig& cfg = {});

// N_th = 1 shortcut: miss is exactly the Laplace transform at N_tx.
BerComponents ber_lemma3(int j, const std::vector<int>& bits_history, const LinkParams& link,
                         double lambda_a, double P1 = 0.5, const analytic::QuadratureConfig& cfg = {});

// All thresholds in [nth_min, nth_max] at once; the moment integrals for
// both bit branches are evaluated as one vector quadrature on a shared
// mesh, so the channel kernel is resolved once, not once per threshold.
std::vector<BerComponents> ber_threshold_sweep(int j, const std::vector<int>& bits_history,
                                               const LinkParams& link, double lambda_a,
                                               long long nth_min, long long nth_max,
                                               double P1 = 0.5, const analytic::QuadratureConfig& cfg = {});

// Threshold demodulation of a sampled count trace (one entry per bit
// interval). Fixed mode compares each count; difference mode compares the
// change from the previous sample, with the pre-transmission count taken
// as zero.
std::vector<int> demodulate(const std::vector<double>& n_rx, const core::DetectorSpec& detector);

}  // namespace detection
}  // namespace molfield

#endif
