#include "molfield/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "molfield/analytic.hpp"
#include "molfield/parallel.hpp"
#include "molfield/stats.hpp"

namespace molfield {
namespace sim {

namespace {

detection::LinkParams link_of(const core::Config& config) {
    detection::LinkParams link;
    link.kind = config.receiver.kind;
    link.medium = config.medium;
    link.r_r = config.receiver.r_r;
    link.N_tx = config.protocol.N_tx;
    link.T_b = config.protocol.T_b;
    return link;
}

std::vector<int> draw_bits(const core::EmissionProtocol& protocol, rng::Stream& stream) {
    if (protocol.source == core::BitSource::Explicit) return protocol.bits;
    std::vector<int> bits(static_cast<std::size_t>(protocol.n_bits), 0);
    for (auto& b : bits) b = stream.u01() < protocol.P1 ? 1 : 0;
    return bits;
}

// per-transmitter fraction counted at instant j for a release lagged by
// d = j - i bit intervals
double lag_fraction(double r0, int lag, const detection::LinkParams& link) {
    if (link.kind == core::ReceiverKind::Absorbing)
        return channel::fa_net_fraction(r0, lag * link.T_b, link.T_b, link.medium, link.r_r);
    return channel::ps_fraction(r0, (lag + 1) * link.T_b, link.medium, link.r_r);
}

}  // namespace

std::vector<CurvePoint> mc_type1(const core::Config& config, const std::vector<double>& t_grid,
                                 long long realizations, int threads) {
    if (realizations < 1) throw std::invalid_argument("need at least one realization");
    const std::size_t R = static_cast<std::size_t>(realizations);
    const std::size_t T = t_grid.size();

    std::vector<analytic::PhiKernel> kernels(T);
    for (std::size_t k = 0; k < T; ++k) {
        kernels[k].kind = config.receiver.kind;
        kernels[k].medium = config.medium;
        kernels[k].r_r = config.receiver.r_r;
        kernels[k].t = t_grid[k];
        kernels[k].T_ss = config.protocol.T_ss;
    }

    std::vector<double> values(R * T, 0.0);
    parallel_for(R, resolve_threads(threads), [&](std::size_t r) {
        rng::Stream stream(config.seed, static_cast<std::uint64_t>(r));
        const geometry::TxField field =
            geometry::sample_field(config.deployment, config.receiver.r_r, stream);
        std::vector<double> dist(field.size());
        for (std::size_t i = 0; i < field.size(); ++i) dist[i] = field.points[i].norm();
        for (std::size_t k = 0; k < T; ++k) {
            double sum = 0.0;
            for (double d : dist) sum += kernels[k](d);
            values[r * T + k] = config.protocol.N_tx * sum;
        }
    });

    // reduce in realization order so results do not depend on scheduling
    std::vector<CurvePoint> out(T);
    for (std::size_t k = 0; k < T; ++k) {
        double mean = 0.0;
        for (std::size_t r = 0; r < R; ++r) mean += values[r * T + k];
        mean /= static_cast<double>(R);
        double ss = 0.0;
        for (std::size_t r = 0; r < R; ++r) {
            const double d = values[r * T + k] - mean;
            ss += d * d;
        }
        out[k].t = t_grid[k];
        out[k].mean = mean;
        out[k].std_error =
            R > 1 ? std::sqrt(ss / (static_cast<double>(R - 1) * static_cast<double>(R))) : 0.0;
    }
    return out;
}

std::vector<Realization> mc_type2(const core::Config& config, long long realizations,
                                  int threads) {
    if (realizations < 1) throw std::invalid_argument("need at least one realization");
    const detection::LinkParams link = link_of(config);
    const std::size_t R = static_cast<std::size_t>(realizations);

    std::vector<Realization> out(R);
    parallel_for(R, resolve_threads(threads), [&](std::size_t r) {
        rng::Stream stream(config.seed, static_cast<std::uint64_t>(r));
        Realization real;
        real.bits = draw_bits(config.protocol, stream);
        const int J = static_cast<int>(real.bits.size());
        const geometry::TxField field =
            geometry::sample_field(config.deployment, config.receiver.r_r, stream);

        // lag -> per-field summed fraction, filled once per realization
        std::vector<double> lag_sum(static_cast<std::size_t>(J), 0.0);
        for (const auto& p : field.points) {
            const double r0 = p.norm();
            for (int lag = 0; lag < J; ++lag)
                lag_sum[static_cast<std::size_t>(lag)] += lag_fraction(r0, lag, link);
        }

        real.trace.kind = config.receiver.kind;
        real.trace.sample_times.resize(static_cast<std::size_t>(J));
        real.trace.n_rx.resize(static_cast<std::size_t>(J));
        for (int j = 1; j <= J; ++j) {
            double mean = 0.0;
            for (int i = 1; i <= j; ++i)
                if (real.bits[static_cast<std::size_t>(i - 1)] == 1)
                    mean += lag_sum[static_cast<std::size_t>(j - i)];
            mean *= config.protocol.N_tx;
            real.trace.sample_times[static_cast<std::size_t>(j - 1)] = j * config.protocol.T_b;
            real.trace.n_rx[static_cast<std::size_t>(j - 1)] =
                static_cast<double>(stream.poisson(mean));
        }
        out[r] = std::move(real);
    });
    return out;
}

BerEstimate estimate_ber(const std::vector<Realization>& realizations,
                         const core::DetectorSpec& detector, int test_bit) {
    if (realizations.empty()) throw std::domain_error("need at least one realization");
    if (test_bit < 1) throw std::invalid_argument("test bit index is 1-based");
    long long errors = 0;
    for (const auto& real : realizations) {
        if (static_cast<int>(real.bits.size()) < test_bit)
            throw std::invalid_argument("test bit index past the end of the bit sequence");
        const std::vector<int> decided = detection::demodulate(real.trace.n_rx, detector);
        if (decided[static_cast<std::size_t>(test_bit - 1)] !=
            real.bits[static_cast<std::size_t>(test_bit - 1)])
            ++errors;
    }
    const long long trials = static_cast<long long>(realizations.size());
    const stats::WilsonInterval ci = stats::wilson(errors, trials, stats::kZ99);
    BerEstimate est;
    est.p_e = static_cast<double>(errors) / static_cast<double>(trials);
    est.ci_low = ci.low;
    est.ci_high = ci.high;
    est.errors = errors;
    est.trials = trials;
    return est;
}

std::vector<BerEstimate> simulate_ber_sweep(const core::Config& config,
                                            const std::vector<int>& history,
                                            core::DetectorMode mode, long long nth_min,
                                            long long nth_max, long long realizations,
                                            int threads) {
    if (realizations < 1) throw std::invalid_argument("need at least one realization");
    if (nth_min > nth_max) throw std::invalid_argument("bad threshold range");
    for (int b : history)
        if (b != 0 && b != 1) throw std::invalid_argument("history bits must be 0 or 1");

    const detection::LinkParams link = link_of(config);
    const int J = static_cast<int>(history.size()) + 1;
    const std::size_t n_th = static_cast<std::size_t>(nth_max - nth_min + 1);
    const std::size_t R = static_cast<std::size_t>(realizations);
    const int workers = resolve_threads(threads);

    // one error-count array per worker block, merged after the join; the
    // per-realization draws never depend on the partition
    const std::size_t blocks = std::min<std::size_t>(static_cast<std::size_t>(workers), R);
    std::vector<std::vector<long long>> block_errors(blocks,
                                                    std::vector<long long>(n_th, 0));
    const std::size_t base = R / blocks, extra = R % blocks;

    parallel_for(blocks, workers, [&](std::size_t b) {
        const std::size_t begin = b * base + std::min(b, extra);
        const std::size_t end = begin + base + (b < extra ? 1 : 0);
        auto& errors = block_errors[b];
        for (std::size_t r = begin; r < end; ++r) {
            rng::Stream stream(config.seed, static_cast<std::uint64_t>(r));
            const int test_bit = stream.u01() < config.protocol.P1 ? 1 : 0;
            const geometry::TxField field =
                geometry::sample_field(config.deployment, config.receiver.r_r, stream);

            std::vector<double> lag_sum(static_cast<std::size_t>(J), 0.0);
            for (const auto& p : field.points) {
                const double r0 = p.norm();
                for (int lag = 0; lag < J; ++lag)
                    lag_sum[static_cast<std::size_t>(lag)] += lag_fraction(r0, lag, link);
            }

            double n_prev = 0.0, n_last = 0.0;
            for (int j = 1; j <= J; ++j) {
                double mean = 0.0;
                for (int i = 1; i <= j; ++i) {
                    const int bit = i < J ? history[static_cast<std::size_t>(i - 1)] : test_bit;
                    if (bit == 1) mean += lag_sum[static_cast<std::size_t>(j - i)];
                }
                mean *= config.protocol.N_tx;
                n_prev = n_last;
                n_last = static_cast<double>(stream.poisson(mean));
            }

            const double statistic = mode == core::DetectorMode::Fixed ? n_last : n_last - n_prev;
            for (std::size_t k = 0; k < n_th; ++k) {
                const int decided =
                    statistic >= static_cast<double>(nth_min + static_cast<long long>(k)) ? 1 : 0;
                if (decided != test_bit) ++errors[k];
            }
        }
    });

    std::vector<long long> errors(n_th, 0);
    for (const auto& blk : block_errors)
        for (std::size_t k = 0; k < n_th; ++k) errors[k] += blk[k];

    std::vector<BerEstimate> out(n_th);
    for (std::size_t k = 0; k < n_th; ++k) {
        const stats::WilsonInterval ci = stats::wilson(errors[k], realizations, stats::kZ99);
        out[k].p_e = static_cast<double>(errors[k]) / static_cast<double>(realizations);
        out[k].ci_low = ci.low;
        out[k].ci_high = ci.high;
        out[k].errors = errors[k];
        out[k].trials = realizations;
    }
    return out;
}

ObservationTrace ParticleCounts::trace() const {
    ObservationTrace tr;
    tr.kind = kind;
    tr.sample_times = sample_times;
    tr.n_rx.resize(sample_times.size());
    for (std::size_t k = 0; k < sample_times.size(); ++k) {
        if (kind == core::ReceiverKind::Absorbing) {
            const long long prev = k > 0 ? absorbed_cum[k - 1] : 0;
            tr.n_rx[k] = static_cast<double>(absorbed_cum[k] - prev);
        } else {
            tr.n_rx[k] = static_cast<double>(inside[k]);
        }
    }
    return tr;
}

ParticleCounts particle_sim(const geometry::TxField& field, const core::Config& config, double dt,
                            const std::vector<double>& sample_times,
                            std::uint64_t realization_index, int threads) {
    if (!(dt > 0.0)) throw core::config_error("step size must be positive");
    if (dt >= config.protocol.T_ss)
        throw core::config_error("step size must resolve the sampling interval (dt < T_ss)");
    if (sample_times.empty()) throw std::invalid_argument("need at least one sample time");
    const long long per_tx = std::llround(config.protocol.N_tx);
    if (!(config.protocol.N_tx > 0.0) ||
        std::abs(config.protocol.N_tx - static_cast<double>(per_tx)) > 1e-9)
        throw core::config_error("particle simulation needs an integer molecule count");

    const std::size_t S = sample_times.size();
    std::vector<long long> sample_step(S);
    for (std::size_t k = 0; k < S; ++k) {
        if (!(sample_times[k] >= 0.0)) throw std::invalid_argument("sample times must be non-negative");
        if (k > 0 && sample_times[k] <= sample_times[k - 1])
            throw std::invalid_argument("sample times must be strictly increasing");
        sample_step[k] = std::llround(sample_times[k] / dt);
    }

    const bool absorbing = config.receiver.kind == core::ReceiverKind::Absorbing;
    const double sigma = std::sqrt(2.0 * config.medium.D * dt);
    const double p_degrade =
        config.medium.k_d > 0.0 ? -std::expm1(-config.medium.k_d * dt) : 0.0;
    const double r2 = config.receiver.r_r * config.receiver.r_r;
    const std::uint64_t base_key = rng::derive_key(config.seed, realization_index);

    const std::size_t n_mol = field.size() * static_cast<std::size_t>(per_tx);
    struct Block {
        std::vector<long long> absorbed_at, degraded_at, inside;
    };
    const int workers = resolve_threads(threads);
    const std::size_t blocks =
        n_mol == 0 ? 1 : std::min<std::size_t>(static_cast<std::size_t>(workers), n_mol);
    std::vector<Block> acc(blocks);
    for (auto& b : acc) {
        b.absorbed_at.assign(S, 0);
        b.degraded_at.assign(S, 0);
        b.inside.assign(S, 0);
    }

    const std::size_t base = n_mol / blocks, extra = n_mol % blocks;
    parallel_for(blocks, workers, [&](std::size_t bi) {
        Block& blk = acc[bi];
        const std::size_t begin = bi * base + std::min(bi, extra);
        const std::size_t end = begin + base + (bi < extra ? 1 : 0);
        for (std::size_t m = begin; m < end; ++m) {
            rng::Stream ms(rng::derive_key(base_key, static_cast<std::uint64_t>(m)));
            const geometry::Point3& origin = field.points[m / static_cast<std::size_t>(per_tx)];
            double x = origin.x, y = origin.y, z = origin.z;
            long long step = 0;
            bool alive = true;
            for (std::size_t k = 0; k < S && alive; ++k) {
                while (step < sample_step[k]) {
                    x += sigma * ms.normal();
                    y += sigma * ms.normal();
                    z += sigma * ms.normal();
                    ++step;
                    if (absorbing && x * x + y * y + z * z <= r2) {
                        ++blk.absorbed_at[k];
                        alive = false;
                        break;
                    }
                    if (p_degrade > 0.0 && ms.u01() < p_degrade) {
                        ++blk.degraded_at[k];
                        alive = false;
                        break;
                    }
                }
                if (alive && !absorbing && x * x + y * y + z * z <= r2) ++blk.inside[k];
            }
        }
    });

    ParticleCounts out;
    out.kind = config.receiver.kind;
    out.sample_times = sample_times;
    out.emitted = static_cast<long long>(n_mol);
    out.absorbed_cum.assign(S, 0);
    out.degraded_cum.assign(S, 0);
    out.inside.assign(S, 0);
    out.live.assign(S, 0);
    long long absorbed = 0, degraded = 0;
    for (std::size_t k = 0; k < S; ++k) {
        for (const auto& blk : acc) {
            absorbed += blk.absorbed_at[k];
            degraded += blk.degraded_at[k];
            out.inside[k] += blk.inside[k];
        }
        out.absorbed_cum[k] = absorbed;
        out.degraded_cum[k] = degraded;
        out.live[k] = out.emitted - absorbed - degraded;
    }
    return out;
}

}  // namespace sim
}  // namespace molfield
