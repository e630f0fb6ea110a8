#ifndef MOLFIELD_QUADRATURE_HPP
#define MOLFIELD_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Globally adaptive Gauss-Kronrod (G7,K15) quadrature with a semi-infinite
// driver. All expectation operators in this library integrate smooth,
// eventually-decaying kernels over [r_r, inf); the driver extends the range
// in geometrically growing segments until the tail stops contributing, while
// a worst-panel-first refinement loop spends evaluations where the local
// error estimate is largest.
//
// The engine is vector-valued: one adaptive pass can integrate several
// components of the same kernel on a shared mesh (used so the Laplace
// functional and all moment integrals of the error-probability expressions
// are resolved together instead of re-running the erf-heavy kernel per
// component).
namespace molfield {
namespace analytic {

struct QuadratureConfig {
    double abs_tol = 1e-14;
    double rel_tol = 1e-9;
    double initial_scale = 1.0;        // width of the first semi-infinite segment
    std::size_t max_evals = 6000000;   // kernel evaluation budget
    int max_segments = 64;             // geometric tail-extension cap
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = false;
    std::size_t evals = 0;
};

struct VecQuadResult {
    std::vector<double> value;
    std::vector<double> error;
    bool converged = false;
    std::size_t evals = 0;
};

// Thrown by operations that require a converged integral; carries the
// partial value so callers can still report it.
class quadrature_error : public std::runtime_error {
public:
    quadrature_error(const std::string& what, QuadResult partial)
        : std::runtime_error(what), partial_(partial) {}
    const QuadResult& partial() const noexcept { return partial_; }

private:
    QuadResult partial_;
};

struct Panel {
    double a = 0.0, b = 0.0;
    double value = 0.0, error = 0.0;
};

namespace detail {

// 15-point Kronrod abscissae (positive half) and weights; the embedded
// 7-point Gauss rule lives on the odd-indexed abscissae.
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// One K15 application on [a,b] for a dim-component integrand.
// f must be callable as f(x, double* out) filling out[0..dim).
template <class F>
void
gk15(F& f, double a, double b, int dim, double* value, double* error, std::size_t& evals) {
    const double center = 0.5 * (a + b);
    const double hlgth = 0.5 * (b - a);

    // fv layout: [pair][side][component]; side 0 = center - h*x, side 1 = +
    std::vector<double> fc(dim), flo(dim), fhi(dim);
    std::vector<double> resk(dim, 0.0), resg(dim, 0.0), resasc(dim, 0.0);
    std::vector<double> store(static_cast<std::size_t>(dim) * 14);

    f(center, fc.data());
    ++evals;
    for (int c = 0; c < dim; ++c) {
        resk[c] = kWgk[7] * fc[c];
        resg[c] = kWg[3] * fc[c];
    }
    for (int j = 0; j < 7; ++j) {
        const double dx = hlgth * kXgk[j];
        f(center - dx, flo.data());
        f(center + dx, fhi.data());
        evals += 2;
        for (int c = 0; c < dim; ++c) {
            store[(2 * j) * dim + c] = flo[c];
            store[(2 * j + 1) * dim + c] = fhi[c];
            resk[c] += kWgk[j] * (flo[c] + fhi[c]);
        }
        if (j % 2 == 1) {  // j = 1,3,5 carry the Gauss nodes
            const int g = (j - 1) / 2;
            for (int c = 0; c < dim; ++c) resg[c] += kWg[g] * (store[(2 * j) * dim + c] + store[(2 * j + 1) * dim + c]);
        }
    }
    for (int c = 0; c < dim; ++c) {
        const double reskh = 0.5 * resk[c];
        double asc = kWgk[7] * std::fabs(fc[c] - reskh);
        for (int j = 0; j < 7; ++j)
            asc += kWgk[j] * (std::fabs(store[(2 * j) * dim + c] - reskh) +
                              std::fabs(store[(2 * j + 1) * dim + c] - reskh));
        asc *= std::fabs(hlgth);
        const double raw = std::fabs((resk[c] - resg[c]) * hlgth);
        double err = raw;
        if (asc != 0.0 && raw != 0.0)
            err = asc * std::min(1.0, std::pow(200.0 * raw / asc, 1.5));
        value[c] = resk[c] * hlgth;
        error[c] = err;
    }
}

}  // namespace detail

// Globally adaptive integrator over a union of intervals; panels are split
// worst-error-first until every component meets its tolerance. Selection
// ties break on the left endpoint so results are independent of evaluation
// order.
template <class F>
class AdaptiveIntegrator {
public:
    AdaptiveIntegrator(F f, int dim, const QuadratureConfig& cfg)
        : f_(std::forward<F>(f)), dim_(dim), cfg_(cfg) {}

    void add_interval(double a, double b) {
        Node n;
        n.a = a;
        n.b = b;
        n.value.resize(dim_);
        n.error.resize(dim_);
        detail::gk15(f_, a, b, dim_, n.value.data(), n.error.data(), evals_);
        nodes_.push_back(std::move(n));
    }

    // Split worst panels until tolerances hold or the budget runs out.
    // Returns true when the tolerance criterion is met.
    bool refine_to_tolerance() {
        while (!tolerance_met()) {
            if (evals_ >= cfg_.max_evals) return false;
            const int worst = worst_node();
            if (worst < 0) return false;  // every panel is at floating-point width
            split(worst);
        }
        return true;
    }

    bool tolerance_met() const {
        for (int c = 0; c < dim_; ++c) {
            double tot = 0.0, err = 0.0;
            for (const auto& n : nodes_) {
                tot += n.value[c];
                err += n.error[c];
            }
            if (err > std::max(cfg_.abs_tol, cfg_.rel_tol * std::fabs(tot))) return false;
        }
        return true;
    }

    std::vector<double> value() const {
        std::vector<double> v(dim_, 0.0);
        for (const auto& n : nodes_)
            for (int c = 0; c < dim_; ++c) v[c] += n.value[c];
        return v;
    }
    std::vector<double> error() const {
        std::vector<double> e(dim_, 0.0);
        for (const auto& n : nodes_)
            for (int c = 0; c < dim_; ++c) e[c] += n.error[c];
        return e;
    }
    std::size_t evals() const { return evals_; }

    // Accepted panels of one component, sorted by left endpoint.
    std::vector<Panel> panels(int comp = 0) const {
        std::vector<Panel> out;
        out.reserve(nodes_.size());
        for (const auto& n : nodes_) out.push_back({n.a, n.b, n.value[comp], n.error[comp]});
        std::sort(out.begin(), out.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
        return out;
    }

private:
    struct Node {
        double a, b;
        std::vector<double> value, error;
        bool unsplittable = false;
    };

    int worst_node() const {
        int best = -1;
        double best_err = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const auto& n = nodes_[i];
            if (n.unsplittable) continue;
            double e = 0.0;
            for (int c = 0; c < dim_; ++c) e = std::max(e, n.error[c]);
            if (best < 0 || e > best_err || (e == best_err && n.a < nodes_[best].a)) {
                best = static_cast<int>(i);
                best_err = e;
            }
        }
        return best;
    }

    void split(int idx) {
        Node old = std::move(nodes_[idx]);
        const double mid = 0.5 * (old.a + old.b);
        if (mid <= old.a || mid >= old.b) {
            old.unsplittable = true;
            nodes_[idx] = std::move(old);
            return;
        }
        Node left, right;
        left.a = old.a;
        left.b = mid;
        right.a = mid;
        right.b = old.b;
        left.value.resize(dim_);
        left.error.resize(dim_);
        right.value.resize(dim_);
        right.error.resize(dim_);
        detail::gk15(f_, left.a, left.b, dim_, left.value.data(), left.error.data(), evals_);
        detail::gk15(f_, right.a, right.b, dim_, right.value.data(), right.error.data(), evals_);
        nodes_[idx] = std::move(left);
        nodes_.push_back(std::move(right));
    }

    F f_;
    int dim_;
    QuadratureConfig cfg_;
    std::vector<Node> nodes_;
    std::size_t evals_ = 0;
};

namespace detail {

// Shared semi-infinite driver. Appends segments [lower, lower+L],
// [lower+L, lower+3L], ... (widths L, 2L, 4L, ...) until two consecutive
// segments contribute less than the tolerance in every component, then
// refines globally.
template <class F>
VecQuadResult integrate_vec_semi_infinite_impl(F f, int dim, double lower, const QuadratureConfig& cfg) {
    AdaptiveIntegrator<F&> integ(f, dim, cfg);
    const double scale = (cfg.initial_scale > 0.0) ? cfg.initial_scale : 1.0;

    double x = lower;
    double width = scale;
    int quiet = 0;
    bool tail_done = false;
    for (int seg = 0; seg < cfg.max_segments; ++seg) {
        const double x2 = x + width;
        integ.add_interval(x, x2);
        // significance of the segment just added, against the running total
        const auto tot = integ.value();
        bool significant = false;
        for (int c = 0; c < dim; ++c) {
            double sv = 0.0;
            for (const auto& p : integ.panels(c))
                if (p.a >= x - 1e-300 && p.b <= x2 + 1e-300) sv += p.value;
            const double gate = std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(tot[c]));
            if (std::fabs(sv) > 0.5 * gate) significant = true;
        }
        quiet = significant ? 0 : quiet + 1;
        x = x2;
        width *= 2.0;
        if (quiet >= 2) {
            tail_done = true;
            break;
        }
    }

    const bool refined = integ.refine_to_tolerance();
    VecQuadResult r;
    r.value = integ.value();
    r.error = integ.error();
    r.evals = integ.evals();
    r.converged = tail_done && refined;
    return r;
}

}  // namespace detail

template <class F>
QuadResult integrate_finite(F f, double a, double b, const QuadratureConfig& cfg = {}) {
    auto wrap = [&f](double x, double* out) { out[0] = f(x); };
    AdaptiveIntegrator<decltype(wrap)> integ(wrap, 1, cfg);
    integ.add_interval(a, b);
    const bool ok = integ.refine_to_tolerance();
    QuadResult r;
    r.value = integ.value()[0];
    r.error = integ.error()[0];
    r.evals = integ.evals();
    r.converged = ok;
    return r;
}

template <class F>
QuadResult integrate_semi_infinite(F f, double lower, const QuadratureConfig& cfg = {}) {
    auto wrap = [&f](double x, double* out) { out[0] = f(x); };
    const VecQuadResult vr = detail::integrate_vec_semi_infinite_impl(wrap, 1, lower, cfg);
    QuadResult r;
    r.value = vr.value[0];
    r.error = vr.error[0];
    r.evals = vr.evals;
    r.converged = vr.converged;
    return r;
}

// f(x, double* out) fills dim components.
template <class F>
VecQuadResult integrate_vec_semi_infinite(F f, int dim, double lower, const QuadratureConfig& cfg = {}) {
    return detail::integrate_vec_semi_infinite_impl(std::move(f), dim, lower, cfg);
}

inline void require_converged(const QuadResult& r, const std::string& context) {
    if (!r.converged) throw quadrature_error(context + ": quadrature did not converge", r);
}

// Memoized cumulative tail of a scalar integrand: T(x) = integral_x^inf f.
// Built from one adaptive semi-infinite sweep whose accepted panels are kept
// as suffix sums; a query inside a panel costs one K15 application of the
// partial panel, so an outer adaptive integral over x never re-runs the
// inner adaptive subdivision.
class TailTable {
public:
    template <class F>
    TailTable(F f, double lower, const QuadratureConfig& cfg) : f_(std::move(f)) {
        auto wrap = [this](double x, double* out) { out[0] = f_(x); };
        AdaptiveIntegrator<decltype(wrap)> integ(wrap, 1, cfg);
        double x = lower, width = (cfg.initial_scale > 0.0) ? cfg.initial_scale : 1.0;
        int quiet = 0;
        bool tail_done = false;
        for (int seg = 0; seg < cfg.max_segments; ++seg) {
            integ.add_interval(x, x + width);
            const auto tot = integ.value();
            double sv = 0.0;
            for (const auto& p : integ.panels(0))
                if (p.a >= x - 1e-300) sv += p.value;
            const double gate = std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(tot[0]));
            quiet = (std::fabs(sv) > 0.5 * gate) ? 0 : quiet + 1;
            x += width;
            width *= 2.0;
            if (quiet >= 2) {
                tail_done = true;
                break;
            }
        }
        converged_ = integ.refine_to_tolerance() && tail_done;
        const auto ps = integ.panels(0);
        edge_.reserve(ps.size() + 1);
        suffix_.assign(ps.size() + 1, 0.0);
        for (const auto& p : ps) edge_.push_back(p.a);
        edge_.push_back(ps.empty() ? lower : ps.back().b);
        for (std::size_t i = ps.size(); i-- > 0;) suffix_[i] = suffix_[i + 1] + ps[i].value;
        evals_ = integ.evals();
    }

    // integral_x^inf f (0 beyond the resolved range; the sweep stopped there
    // because the remainder is below tolerance)
    double operator()(double x) const {
        if (edge_.empty() || x >= edge_.back()) return 0.0;
        if (x <= edge_.front()) return suffix_.front();
        const auto it = std::upper_bound(edge_.begin(), edge_.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - edge_.begin()) - 1;
        double v = 0.0, e = 0.0;
        std::size_t evals = 0;
        auto wrap = [this](double xx, double* out) { out[0] = f_(xx); };
        detail::gk15(wrap, x, edge_[i + 1], 1, &v, &e, evals);
        return v + suffix_[i + 1];
    }

    double total() const { return suffix_.empty() ? 0.0 : suffix_.front(); }
    double upper() const { return edge_.empty() ? 0.0 : edge_.back(); }
    bool converged() const { return converged_; }
    std::size_t evals() const { return evals_; }

private:
    std::function<double(double)> f_;
    std::vector<double> edge_;    // panel boundaries, ascending
    std::vector<double> suffix_;  // suffix_[i] = integral from edge_[i] to upper()
    bool converged_ = false;
    std::size_t evals_ = 0;
};

}  // namespace analytic
}  // namespace molfield

#endif
