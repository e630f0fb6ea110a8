#include "molfield/detection.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace molfield {
namespace detection {

namespace {

void check_instant(int j, const std::vector<int>& bits) {
    if (j < 1) throw std::invalid_argument("sampling instant must be 1-based and positive");
    if (static_cast<int>(bits.size()) < j)
        throw std::invalid_argument("bit sequence must cover the sampling instant");
}

// fraction of bit-i molecules counted at instant j for one transmitter
double slot_fraction(double r0, int j, int i, const LinkParams& link) {
    const double age = (j - i + 1) * link.T_b;
    if (link.kind == core::ReceiverKind::Absorbing)
        return channel::fa_net_fraction(r0, (j - i) * link.T_b, link.T_b, link.medium, link.r_r);
    return channel::ps_fraction(r0, age, link.medium, link.r_r);
}

double clamp01(double p, bool& flagged) {
    if (p < 0.0) {
        if (p < -1e-9) flagged = true;
        return 0.0;
    }
    if (p > 1.0) {
        if (p > 1.0 + 1e-9) flagged = true;
        return 1.0;
    }
    return p;
}

}  // namespace

double r_kernel(double r0, int j, const std::vector<int>& bits, const LinkParams& link) {
    check_instant(j, bits);
    double total = 0.0;
    for (int i = 1; i <= j; ++i) {
        if (bits[i - 1] == 0) continue;
        total += slot_fraction(r0, j, i, link);
    }
    return total;
}

long long observation_sample(const geometry::TxField& field, const std::vector<int>& bits, int j,
                             const LinkParams& link, ObservationModel model, rng::Stream& stream) {
    check_instant(j, bits);
    if (model == ObservationModel::PoissonApprox) {
        double mean = 0.0;
        for (const auto& p : field.points) mean += r_kernel(p.norm(), j, bits, link);
        return stream.poisson(link.N_tx * mean);
    }

    const long long n_tx = std::llround(link.N_tx);
    if (!(link.N_tx > 0.0) || std::abs(link.N_tx - static_cast<double>(n_tx)) > 1e-9)
        throw std::invalid_argument("exact per-molecule sampling needs an integer molecule count");
    long long total = 0;
    bool ignored = false;
    for (const auto& p : field.points) {
        const double r0 = p.norm();
        for (int i = 1; i <= j; ++i) {
            if (bits[i - 1] == 0) continue;
            total += stream.binomial(n_tx, clamp01(slot_fraction(r0, j, i, link), ignored));
        }
    }
    return total;
}

double laplace_rtot(double s, int j, const std::vector<int>& bits, const LinkParams& link,
                    double lambda_a, const analytic::QuadratureConfig& cfg) {
    check_instant(j, bits);
    if (!(lambda_a > 0.0)) throw std::domain_error("density must be positive");
    analytic::QuadratureConfig qc = cfg;
    qc.initial_scale = link.r_r + std::sqrt(4.0 * link.medium.D * (j * link.T_b));
    const analytic::QuadResult r = analytic::integrate_semi_infinite(
        [&](double x) { return -std::expm1(-s * r_kernel(x, j, bits, link)) * x * x; }, link.r_r,
        qc);
    analytic::require_converged(r, "laplace_rtot");
    return std::exp(-4.0 * M_PI * lambda_a * r.value);
}

std::vector<double> bell_polynomials(const std::vector<double>& x) {
    const std::size_t K = x.size();
    std::vector<std::vector<double>> choose(K > 0 ? K : 1);
    for (std::size_t n = 0; n < choose.size(); ++n) {
        choose[n].assign(n + 1, 1.0);
        for (std::size_t k = 1; k < n; ++k) choose[n][k] = choose[n - 1][k - 1] + choose[n - 1][k];
    }
    std::vector<double> B(K + 1, 0.0);
    B[0] = 1.0;
    for (std::size_t n = 1; n <= K; ++n) {
        double s = 0.0;
        for (std::size_t i = 1; i <= n; ++i) s += choose[n - 1][i - 1] * x[i - 1] * B[n - i];
        B[n] = s;
    }
    return B;
}

double bell_by_partition_enumeration(const std::vector<double>& x, int n) {
    if (n < 0 || n > 12) throw std::invalid_argument("partition enumeration supports 0 <= n <= 12");
    if (n == 0) return 1.0;
    if (static_cast<int>(x.size()) < n)
        throw std::invalid_argument("need block-size arguments up to n");

    // walk restricted growth strings: a[i] picks the block of element i
    std::vector<int> a(static_cast<std::size_t>(n), 0);
    double total = 0.0;
    std::function<void(int, int)> rec = [&](int i, int max_label) {
        if (i == n) {
            std::vector<int> size(static_cast<std::size_t>(max_label) + 1, 0);
            for (int v : a) ++size[static_cast<std::size_t>(v)];
            double prod = 1.0;
            for (int s : size) prod *= x[static_cast<std::size_t>(s) - 1];
            total += prod;
            return;
        }
        for (int v = 0; v <= max_label + 1; ++v) {
            a[static_cast<std::size_t>(i)] = v;
            rec(i + 1, std::max(max_label, v));
        }
    };
    rec(1, 0);
    return total;
}

namespace {

struct MomentData {
    double laplace = 1.0;          // L_{R_tot}(N_tx)
    std::vector<double> x_scaled;  // x_scaled[k-1] = x_k / k!
};

// Moment integrals pre-divided by k! inside the integrand (the exponent
// k ln(phi) - phi - ln(k!) peaks below 0), so no component overflows no
// matter how large the count mean or the threshold.
MomentData compute_moments(int j, const std::vector<int>& bits, const LinkParams& link,
                           double lambda_a, int K, const analytic::QuadratureConfig& cfg) {
    const int dim = K + 1;
    std::vector<double> log_fact(static_cast<std::size_t>(K) + 1, 0.0);
    for (int k = 2; k <= K; ++k)
        log_fact[static_cast<std::size_t>(k)] = log_fact[static_cast<std::size_t>(k) - 1] + std::log(k);
    auto f = [&](double r, double* out) {
        const double phi = link.N_tx * r_kernel(r, j, bits, link);
        out[0] = -std::expm1(-phi) * r * r;
        if (phi > 0.0) {
            const double ln_phi = std::log(phi);
            for (int k = 1; k <= K; ++k)
                out[k] = std::exp(k * ln_phi - phi - log_fact[static_cast<std::size_t>(k)]) * r * r;
        } else {
            for (int k = 1; k <= K; ++k) out[k] = 0.0;
        }
    };
    analytic::QuadratureConfig qc = cfg;
    qc.initial_scale = link.r_r + std::sqrt(4.0 * link.medium.D * (j * link.T_b));
    const analytic::VecQuadResult vr = analytic::integrate_vec_semi_infinite(f, dim, link.r_r, qc);
    if (!vr.converged) {
        analytic::QuadResult partial{vr.value.empty() ? 0.0 : vr.value[0],
                           vr.error.empty() ? 0.0 : vr.error[0], false, vr.evals};
        throw analytic::quadrature_error("count-moment integrals did not converge", partial);
    }
    MomentData md;
    const double c = 4.0 * M_PI * lambda_a;
    md.laplace = std::exp(-c * vr.value[0]);
    md.x_scaled.resize(static_cast<std::size_t>(K));
    for (int k = 1; k <= K; ++k) md.x_scaled[static_cast<std::size_t>(k) - 1] = c * vr.value[k];
    return md;
}

// P(count < N_th) by accumulating the count probabilities
// c_n = P(count = n): c_0 = L, c_n = (1/n) sum_i i (x_i/i!) c_{n-i}.
double below_threshold(const MomentData& md, long long N_th, bool& flagged) {
    const std::ptrdiff_t K = static_cast<std::ptrdiff_t>(md.x_scaled.size());
    std::vector<double> c(static_cast<std::size_t>(N_th), 0.0);
    c[0] = md.laplace;
    double sum = c[0];
    for (long long n = 1; n < N_th; ++n) {
        double acc = 0.0;
        const std::ptrdiff_t imax = std::min<std::ptrdiff_t>(K, n);
        for (std::ptrdiff_t i = 1; i <= imax; ++i)
            acc += static_cast<double>(i) * md.x_scaled[static_cast<std::size_t>(i) - 1] *
                   c[static_cast<std::size_t>(n - i)];
        c[static_cast<std::size_t>(n)] = acc / static_cast<double>(n);
        sum += c[static_cast<std::size_t>(n)];
    }
    return clamp01(sum, flagged);
}

std::vector<int> branch_bits(int j, const std::vector<int>& history, int current) {
    if (static_cast<int>(history.size()) < j - 1)
        throw std::invalid_argument("interference history must cover bits before the sampling instant");
    std::vector<int> bits(history.begin(), history.begin() + (j - 1));
    bits.push_back(current);
    return bits;
}

}  // namespace

CountMoments count_moments(int j, const std::vector<int>& bits, const LinkParams& link,
                           double lambda_a, int K, const analytic::QuadratureConfig& cfg) {
    if (K < 0 || K > 20) throw std::invalid_argument("raw moment integrals support 0 <= K <= 20");
    const MomentData md = compute_moments(j, bits, link, lambda_a, K, cfg);
    CountMoments cm;
    cm.laplace = md.laplace;
    cm.x.resize(md.x_scaled.size());
    double factorial = 1.0;
    for (std::size_t k = 1; k <= md.x_scaled.size(); ++k) {
        factorial *= static_cast<double>(k);
        cm.x[k - 1] = md.x_scaled[k - 1] * factorial;
    }
    return cm;
}

BerComponents ber_theorem2(int j, const std::vector<int>& bits_history, long long N_th,
                           const LinkParams& link, double lambda_a, double P1,
                           const analytic::QuadratureConfig& cfg) {
    if (N_th < 1) throw std::invalid_argument("threshold must be at least 1");
    const std::vector<int> bits1 = branch_bits(j, bits_history, 1);
    const std::vector<int> bits0 = branch_bits(j, bits_history, 0);
    const int K = static_cast<int>(N_th - 1);
    const MomentData md1 = compute_moments(j, bits1, link, lambda_a, K, cfg);
    const MomentData md0 = compute_moments(j, bits0, link, lambda_a, K, cfg);

    BerComponents out;
    bool flagged = false;
    out.miss = below_threshold(md1, N_th, flagged);
    out.false_alarm = clamp01(1.0 - below_threshold(md0, N_th, flagged), flagged);
    out.p_e = P1 * out.miss + (1.0 - P1) * out.false_alarm;
    out.clamped = flagged;
    return out;
}

BerComponents ber_lemma3(int j, const std::vector<int>& bits_history, const LinkParams& link,
                         double lambda_a, double P1, const analytic::QuadratureConfig& cfg) {
    const std::vector<int> bits1 = branch_bits(j, bits_history, 1);
    const std::vector<int> bits0 = branch_bits(j, bits_history, 0);
    BerComponents out;
    bool flagged = false;
    out.miss = clamp01(laplace_rtot(link.N_tx, j, bits1, link, lambda_a, cfg), flagged);
    out.false_alarm = clamp01(1.0 - laplace_rtot(link.N_tx, j, bits0, link, lambda_a, cfg), flagged);
    out.p_e = P1 * out.miss + (1.0 - P1) * out.false_alarm;
    out.clamped = flagged;
    return out;
}

std::vector<BerComponents> ber_threshold_sweep(int j, const std::vector<int>& bits_history,
                                               const LinkParams& link, double lambda_a,
                                               long long nth_min, long long nth_max, double P1,
                                               const analytic::QuadratureConfig& cfg) {
    if (nth_min < 1 || nth_max < nth_min) throw std::invalid_argument("bad threshold range");
    const std::vector<int> bits1 = branch_bits(j, bits_history, 1);
    const std::vector<int> bits0 = branch_bits(j, bits_history, 0);
    const int K = static_cast<int>(nth_max - 1);
    const MomentData md1 = compute_moments(j, bits1, link, lambda_a, K, cfg);
    const MomentData md0 = compute_moments(j, bits0, link, lambda_a, K, cfg);

    std::vector<BerComponents> out;
    out.reserve(static_cast<std::size_t>(nth_max - nth_min + 1));
    for (long long nth = nth_min; nth <= nth_max; ++nth) {
        BerComponents c;
        bool flagged = false;
        c.miss = below_threshold(md1, nth, flagged);
        c.false_alarm = clamp01(1.0 - below_threshold(md0, nth, flagged), flagged);
        c.p_e = P1 * c.miss + (1.0 - P1) * c.false_alarm;
        c.clamped = flagged;
        out.push_back(c);
    }
    return out;
}

std::vector<int> demodulate(const std::vector<double>& n_rx, const core::DetectorSpec& detector) {
    std::vector<int> bits(n_rx.size(), 0);
    double prev = 0.0;
    for (std::size_t i = 0; i < n_rx.size(); ++i) {
        const double stat =
            detector.mode == core::DetectorMode::Fixed ? n_rx[i] : n_rx[i] - prev;
        bits[i] = stat >= static_cast<double>(detector.N_th) ? 1 : 0;
        prev = n_rx[i];
    }
    return bits;
}

}  // namespace detection
}  // namespace molfield
