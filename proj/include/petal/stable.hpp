#pragma once

#include <memory>
#include <random>

#include "petal/reduce.hpp"

namespace petal {

enum class RegionCase { GenericWedge, UpperFlat, LowerFlat };
enum class RegionMode { Saddle, Node };

inline const char* to_string(RegionCase c) {
    switch (c) {
        case RegionCase::GenericWedge: return "generic-wedge";
        case RegionCase::UpperFlat: return "upper-flat";
        case RegionCase::LowerFlat: return "lower-flat";
    }
    return "?";
}

/// A sector-like region attached to an attracting direction, described in the
/// chart where the direction is the positive real axis. The three shapes are
///   generic wedge:  -d Re(x) < Im(x) < e Re(x)
///   upper flat:     -d Re(x) < Im(x) < e Re(x)^{r+1}
///   lower flat:     -d Re(x)^{r+1} < Im(x) < e Re(x)
/// all intersected with { |x| < eps, Re(x) > 0 }.
struct RegionDescriptor {
    Complex xi{1.0, 0.0};
    RegionCase shape = RegionCase::GenericWedge;
    RegionMode mode = RegionMode::Saddle;
    double d = 0.5, e = 0.5, eps = 0.1;
    int r = 0;

    double lo_bound(double u) const {
        return shape == RegionCase::LowerFlat ? -d * std::pow(u, r + 1) : -d * u;
    }
    double hi_bound(double u) const {
        return shape == RegionCase::UpperFlat ? e * std::pow(u, r + 1) : e * u;
    }
    bool contains_rotated(Complex x, double slack = 1.0) const {
        const double u = x.real();
        if (!(u > 0.0) || std::abs(x) >= eps * slack) return false;
        const double v = x.imag();
        return v > slack * lo_bound(u) - (slack - 1.0) * u && v < slack * hi_bound(u) + (slack - 1.0) * u;
    }
    bool contains(Complex x_unrotated, double slack = 1.0) const {
        return contains_rotated(x_unrotated / xi, slack);
    }
};

/// All reduced data rotated so one attracting direction lies along R+.
struct DirectionFrame {
    GermDiffeo germ;  // rotated reduced germ
    int k = 1, p = 0, r = 0;
    Complex mu = 1.0, log_mu = 0.0;
    UniJet A, a;       // rotated coefficients: A_j xi^{k+j}
    UniJet gamma2;     // curve jet in rotated coordinates
    Complex xi = 1.0;
    DirectionKind kind = DirectionKind::Saddle;
    int direction_index = 0;
    CoordChangeLog log;  // original -> rotated reduced coordinates

    DirectionFrame() : germ(GermDiffeo::identity(1)) {}
};

inline DirectionFrame make_direction_frame(const ReducedPair& rp, const DirectionReport& dir) {
    DirectionFrame fr;
    fr.k = rp.k;
    fr.p = rp.p;
    fr.mu = rp.mu;
    fr.log_mu = rp.log_mu;
    fr.xi = dir.xi;
    fr.kind = dir.kind;
    fr.direction_index = dir.index;
    fr.r = dir.first_significant_order.value_or(0);
    const LinearMap rot{dir.xi, 0.0, 0.0, 1.0};
    fr.germ = change_coordinates(rp.germ, GermDiffeo::linear(rot, rp.germ.order()),
                                 GermDiffeo::linear(rot.inverse(), rp.germ.order()));
    UniJet A(rp.p), a(rp.p);
    for (int j = 0; j <= rp.p; ++j) {
        const Complex w = std::pow(dir.xi, rp.k + j);
        A.set_coeff(j, w * rp.A.coeff(j));
        a.set_coeff(j, w * rp.a.coeff(j));
    }
    fr.A = A;
    fr.a = a;
    UniJet scale(rp.gamma2.order());
    if (scale.order() >= 1) scale.set_coeff(1, dir.xi);
    fr.gamma2 = compose(rp.gamma2, scale);
    fr.log = rp.log;
    fr.log.add({StepLinear{rot}, "rotate attracting direction to R+"});
    return fr;
}

// --- weights ---------------------------------------------------------------

enum class WeightMode { Restricted, Full };

/// Exponent r(x) with E(x) = exp(r(x)):
///   r(x) = sum_{j<p} A_j / ((p-j) x^{p-j}) - A_p log x,
/// the primitive of -A(x)/x^{p+1} on the principal branch.
inline Complex weight_exponent_restricted(const UniJet& A, int p, Complex x) {
    if (x == Complex(0.0)) throw AtOrigin();
    Complex acc = -A.coeff(p) * std::log(x);
    Complex xp = x;
    for (int j = p - 1; j >= 0; --j) {
        acc += A.coeff(j) / (double(p - j) * xp);
        if (j > 0) xp *= x;
    }
    return acc;
}

/// Exponent of the toy-model weight h(x) = exp(int (log mu + x^k A)/x^{k+p+1});
/// H(x, y) = y h(x) is the model first integral.
inline Complex weight_exponent_full(Complex log_mu, const UniJet& A, int k, int p, Complex x) {
    if (x == Complex(0.0)) throw AtOrigin();
    return -log_mu / (double(k + p) * std::pow(x, k + p)) -
           weight_exponent_restricted(A, p, x);
}

inline Complex eval_weight(const ReducedPair& rp, Complex x, WeightMode mode) {
    if (mode == WeightMode::Restricted)
        return std::exp(weight_exponent_restricted(rp.A, rp.p, x));
    return std::exp(weight_exponent_full(rp.log_mu, rp.A, rp.k, rp.p, x));
}

inline Complex eval_weight(const DirectionFrame& fr, Complex x, WeightMode mode) {
    if (mode == WeightMode::Restricted)
        return std::exp(weight_exponent_restricted(fr.A, fr.p, x));
    return std::exp(weight_exponent_full(fr.log_mu, fr.A, fr.k, fr.p, x));
}

namespace detail {
inline Complex bounded_exp(Complex w) {
    if (w.real() > 700.0) throw Error("weight overflow (exponent too large)");
    if (w.real() < -745.0) return 0.0;
    return std::exp(w);
}
} // namespace detail

/// H(x, y) = y - mu^{-1} E(x) E(F1(x,y))^{-1} F2(x,y), evaluated through the
/// exponent difference so the individual weights never overflow.
inline Complex eval_residual_H(const DirectionFrame& fr, Complex x, Complex y) {
    const Complex f1 = fr.germ.f1().evaluate(x, y);
    const Complex f2 = fr.germ.f2().evaluate(x, y);
    if (x == Complex(0.0) || f1 == Complex(0.0)) throw AtOrigin();
    const Complex w = weight_exponent_restricted(fr.A, fr.p, x) -
                      weight_exponent_restricted(fr.A, fr.p, f1) - fr.log_mu;
    return y - detail::bounded_exp(w) * f2;
}

/// Fitted constant of the size estimate
/// |H(x,y)| <= C (|x|^{k+p+1} |y| + |x|^k |y|^2 + |x|^{k+p+m}), sampled over a
/// radial range of x and |y| <= |x|.
struct HBoundFit {
    double c = 0.0;          // max ratio over the samples
    int samples = 0;
};

inline HBoundFit fit_residual_H_bound(const DirectionFrame& fr, int m, double r_lo = 1e-3,
                                      double r_hi = 1e-1, int n_samples = 64) {
    HBoundFit fit;
    std::mt19937_64 gen(0xabcdu);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < n_samples; ++i) {
        const double ax = r_lo * std::pow(r_hi / r_lo, unif(gen));
        const Complex x = std::polar(ax, 0.3 * (unif(gen) - 0.5));
        const Complex y = std::polar(ax * unif(gen), 2.0 * std::numbers::pi * unif(gen));
        const double bound = std::pow(ax, fr.k + fr.p + 1) * std::abs(y) +
                             std::pow(ax, fr.k) * std::norm(y) + std::pow(ax, fr.k + fr.p + m);
        fit.c = std::max(fit.c, std::abs(eval_residual_H(fr, x, y)) / bound);
        ++fit.samples;
    }
    return fit;
}

/// Same residual evaluated directly on a reduced pair (direction xi = 1).
inline Complex eval_residual_H(const ReducedPair& rp, Complex x, Complex y) {
    const Complex f1 = rp.germ.f1().evaluate(x, y);
    const Complex f2 = rp.germ.f2().evaluate(x, y);
    if (x == Complex(0.0) || f1 == Complex(0.0)) throw AtOrigin();
    const Complex w = weight_exponent_restricted(rp.A, rp.p, x) -
                      weight_exponent_restricted(rp.A, rp.p, f1) - rp.log_mu;
    return y - detail::bounded_exp(w) * f2;
}

// --- region fitting ----------------------------------------------------------

struct RegionFitOptions {
    double d0 = 0.5, e0 = 0.5, eps0 = 0.1;
    int max_halvings = 20;
    int radial = 14, angular = 7;
    double tol = 1e-9;
};

struct RegionFit {
    RegionDescriptor region;
    double margin = 0.0;  // fitted c in Re(x^k A(x)) >= c |x|^{k+r} (sign per mode)
    int halvings = 0;
};

inline RegionCase select_region_case(RegionMode mode, Complex mu, int r, Complex a0,
                                     double tol = 1e-9) {
    const double lnmu = std::log(std::abs(mu));
    if (std::abs(lnmu) > tol || r == 0) return RegionCase::GenericWedge;
    const bool upper = a0.imag() > 0.0;
    if (mode == RegionMode::Saddle) return upper ? RegionCase::UpperFlat : RegionCase::LowerFlat;
    return upper ? RegionCase::LowerFlat : RegionCase::UpperFlat;
}

namespace detail {

template <typename Fn>
inline void for_each_region_sample(const RegionDescriptor& reg, int radial, int angular, Fn&& fn) {
    const double slope = std::max(reg.d, reg.e);
    const double u_max = 0.92 * reg.eps / std::sqrt(1.0 + slope * slope);
    for (int i = 0; i < radial; ++i) {
        const double u = u_max * std::pow(2.0, -0.75 * i);
        const double lo = reg.lo_bound(u), hi = reg.hi_bound(u);
        for (int j = 0; j < angular; ++j) {
            const double f = 0.02 + 0.96 * double(j) / double(angular - 1);
            fn(Complex(u, lo + f * (hi - lo)));
        }
    }
}

} // namespace detail

/// Find (d, e, eps) by geometric halving until the sampled region conditions
/// hold: F1-invariance of the region, and the sign bound on Re(x^k A(x)) when
/// |mu| = 1 (positive in saddle mode, negative in node mode).
inline RegionFit fit_region(const DirectionFrame& fr, const RegionFitOptions& opts = {}) {
    RegionFit fit;
    const double lnmu = std::log(std::abs(fr.mu));
    const bool unit_mu = std::abs(lnmu) <= opts.tol;
    std::string last_violation = "none";
    for (int h = 0; h <= opts.max_halvings; ++h) {
        RegionDescriptor reg;
        reg.xi = fr.xi;
        reg.mode = fr.kind == DirectionKind::Saddle ? RegionMode::Saddle : RegionMode::Node;
        reg.r = fr.r;
        reg.shape = select_region_case(reg.mode, fr.mu, fr.r, fr.a.coeff(0), opts.tol);
        reg.d = opts.d0 * std::pow(0.5, h);
        reg.e = opts.e0 * std::pow(0.5, h);
        reg.eps = opts.eps0 * std::pow(0.5, h / 3);

        bool ok = true;
        double margin = INFINITY;
        // sign condition for |mu| = 1
        if (unit_mu) {
            detail::for_each_region_sample(reg, opts.radial, opts.angular, [&](Complex x) {
                if (!ok) return;
                Complex xa = std::pow(x, fr.k) * fr.A.evaluate(x);
                const double val = xa.real() / std::pow(std::abs(x), fr.k + fr.r);
                const double signed_val = reg.mode == RegionMode::Saddle ? val : -val;
                margin = std::min(margin, signed_val);
                if (signed_val <= 0.0) {
                    ok = false;
                    last_violation = "sign of Re(x^k A(x)) on the region";
                }
            });
        }
        // F1-invariance of the region for |y| < eps-ish
        if (ok) {
            detail::for_each_region_sample(reg, opts.radial, opts.angular, [&](Complex x) {
                if (!ok) return;
                const Complex ys[] = {Complex(0.0), Complex(0.4 * reg.eps, 0.3 * reg.eps),
                                      Complex(-0.5 * reg.eps, 0.5 * reg.eps)};
                for (Complex y : ys) {
                    const Complex fx = fr.germ.f1().evaluate(x, y);
                    if (!reg.contains_rotated(fx, 1.0 + 1e-12)) {
                        ok = false;
                        last_violation = "F1-invariance of the region";
                        return;
                    }
                }
            });
        }
        if (ok) {
            fit.region = reg;
            fit.margin = unit_mu ? margin : 0.0;
            fit.halvings = h;
            return fit;
        }
    }
    throw CannotFit(last_violation);
}

// --- Picard solver for parabolic curves -------------------------------------

struct GridSpec {
    int radial = 36;
    int angular = 13;
    double depth = 1e-4;  // u_min = depth * u_max
};

struct PicardOptions {
    int m = 0;  // 0: default p + 4
    GridSpec grid;
    double tol = 1e-10;
    int max_iter = 80;
    long max_tail_steps = 2000000;
    Complex forced_start = 0.0;  // u0(x) = forced_start * x when nonzero
};

/// Discrete solution of the invariance equation on a region grid.
struct ParabolicCurveSolution {
    RegionDescriptor region;
    int m = 0;
    Complex xi{1.0};
    std::vector<double> us;      // radial axis (Re-coordinate of the grid)
    std::vector<double> fracs;   // angular axis (fraction across the Im-bounds)
    std::vector<Complex> nodes;  // grid points, row-major (radial x angular)
    std::vector<Complex> values; // u(x) at the nodes
    std::vector<double> norm_history;
    std::vector<double> delta_history;
    double banach_norm = 0.0;
    double residual = 0.0;
    bool derivative_bound_ok = true;
    int iterations = 0;

    Complex node(int i, int j) const { return nodes[size_t(i) * fracs.size() + size_t(j)]; }
    Complex value(int i, int j) const { return values[size_t(i) * fracs.size() + size_t(j)]; }

    /// Bilinear interpolation in (log Re x, boundary fraction); 0 below the
    /// grid (the deep tail), error on side exits.
    Complex interpolate(Complex x, const RegionDescriptor& reg) const {
        const double u = x.real();
        if (!(u > 0.0)) throw InterpolationBreakdown("Re(x) <= 0");
        if (u < us.back()) return 0.0;  // deeper than the grid: |u| <= ||u|| |x|^{m-1}
        const double lo = reg.lo_bound(u), hi = reg.hi_bound(u);
        double f = (x.imag() - lo) / (hi - lo);
        if (f < -0.08 || f > 1.08) throw InterpolationBreakdown("left the angular span");
        f = std::clamp(f, 0.0, 1.0);
        const double t = std::log(u);
        // us is decreasing; find radial cell
        int i = 0;
        while (i + 2 < int(us.size()) && us[size_t(i) + 1] > u) ++i;
        const double t0 = std::log(us[size_t(i)]), t1 = std::log(us[size_t(i) + 1]);
        double wt = (t - t0) / (t1 - t0);
        wt = std::clamp(wt, 0.0, 1.0);
        const double df = fracs[1] - fracs[0];
        int j = int((f - fracs[0]) / df);
        j = std::clamp(j, 0, int(fracs.size()) - 2);
        const double wf = std::clamp((f - fracs[size_t(j)]) / df, 0.0, 1.0);
        return (1.0 - wt) * ((1.0 - wf) * value(i, j) + wf * value(i, j + 1)) +
               wt * ((1.0 - wf) * value(i + 1, j) + wf * value(i + 1, j + 1));
    }
};

namespace detail {

struct TailState {
    double recent_max = 0.0;
    double s_hat;
    double x_ref = 0.0, t_ref = 0.0;
    explicit TailState(double s0) : s_hat(s0) {}
};

} // namespace detail

/// One application of the contraction operator at x0:
///   Tu(x0) = sum_j mu^{-j} E(x0) E(x_j)^{-1} H(x_j, u(x_j)),  x_j = F1(x_{j-1}, u(x_{j-1})).
/// The tail is truncated once the running bound on the remaining sum falls
/// below `target_abs`. Weights are evaluated by exponent differences.
inline Complex apply_contraction_at(const DirectionFrame& fr, const RegionDescriptor& reg,
                                    const ParabolicCurveSolution& sol, Complex x0,
                                    double target_abs, long max_steps) {
    const int kp = fr.k + fr.p;
    const Complex r0 = weight_exponent_restricted(fr.A, fr.p, x0);
    Complex x = x0;
    Complex acc = 0.0;
    double term_window = 0.0;  // recent max of |term|
    double s_hat = double(kp + std::max(2, fr.p + 2));
    double prev_x = 0.0, prev_term = 0.0;
    for (long j = 0; j < max_steps; ++j) {
        const Complex ux = sol.interpolate(x, reg);
        const Complex w_exp = -double(j) * fr.log_mu + r0 - weight_exponent_restricted(fr.A, fr.p, x);
        const Complex weight = detail::bounded_exp(w_exp);
        const Complex f1 = fr.germ.f1().evaluate(x, ux);
        const Complex f2 = fr.germ.f2().evaluate(x, ux);
        const Complex h = ux - detail::bounded_exp(weight_exponent_restricted(fr.A, fr.p, x) -
                                                   weight_exponent_restricted(fr.A, fr.p, f1) -
                                                   fr.log_mu) *
                                   f2;
        const Complex term = weight * h;
        acc += term;
        const double at = std::abs(term);
        term_window = std::max(0.5 * term_window, at);
        // update the decay-exponent estimate when |x| has dropped enough
        if (prev_term > 0.0 && at > 0.0 && prev_x > 0.0) {
            const double lx = std::log(std::abs(x) / prev_x);
            if (lx < -0.3) {
                const double s_obs = std::log(at / prev_term) / lx;
                s_hat = std::clamp(s_obs, double(kp) + 0.5, double(kp) + 40.0);
                prev_x = std::abs(x);
                prev_term = at;
            }
        } else if (at > 0.0) {
            prev_x = std::abs(x);
            prev_term = at;
        }
        // Remaining tail: sum_{l>j} |x_l|^s <= |x_j|^{s-k-p} (k+p)/(s-k-p) under
        // the Leau-Fatou decay, so with |term| ~ W |x|^s the estimate is
        // |term_j| (k+p) / ((s-k-p) |x_j|^{k+p}).
        const double est_tail = 4.0 * term_window * double(kp) /
                                (std::max(0.5, s_hat - double(kp)) *
                                 std::pow(std::abs(x), kp));
        if (j >= 2 && est_tail < target_abs) return acc;
        x = f1;
    }
    throw Error("contraction tail budget exhausted");
}

/// Picard iteration of the contraction operator on a log-polar grid over the
/// region. Returns the discrete fixed point with its Banach-norm history.
inline ParabolicCurveSolution picard_solve_parabolic(const DirectionFrame& fr,
                                                     const RegionDescriptor& reg,
                                                     const PicardOptions& opts = {}) {
    if (fr.kind != DirectionKind::Saddle) throw NotSaddle();
    const int m = opts.m > 0 ? opts.m : fr.p + 4;
    ParabolicCurveSolution sol;
    sol.region = reg;
    sol.m = m;
    sol.xi = fr.xi;

    const double slope = std::max(reg.d, reg.e);
    const double u_max = 0.9 * reg.eps / std::sqrt(1.0 + slope * slope);
    const int R = opts.grid.radial, An = opts.grid.angular;
    sol.us.resize(size_t(R));
    const double rho = std::pow(opts.grid.depth, 1.0 / double(R - 1));
    for (int i = 0; i < R; ++i) sol.us[size_t(i)] = u_max * std::pow(rho, i);
    sol.fracs.resize(size_t(An));
    for (int j = 0; j < An; ++j)
        sol.fracs[size_t(j)] = 0.04 + 0.92 * double(j) / double(An - 1);
    sol.nodes.resize(size_t(R) * size_t(An));
    sol.values.assign(size_t(R) * size_t(An), Complex(0.0));
    for (int i = 0; i < R; ++i) {
        const double u = sol.us[size_t(i)];
        const double lo = reg.lo_bound(u), hi = reg.hi_bound(u);
        for (int j = 0; j < An; ++j)
            sol.nodes[size_t(i) * size_t(An) + size_t(j)] =
                Complex(u, lo + sol.fracs[size_t(j)] * (hi - lo));
    }
    auto scale_at = [&](size_t idx) {
        return std::pow(std::abs(sol.nodes[idx]), m - 1);
    };
    if (opts.forced_start != Complex(0.0))
        for (size_t idx = 0; idx < sol.nodes.size(); ++idx)
            sol.values[idx] = opts.forced_start * sol.nodes[idx];

    double delta_prev = INFINITY;
    int bad_streak = 0;
    std::vector<Complex> next(sol.values.size());
    for (int it = 0; it < opts.max_iter; ++it) {
        double norm_prev = 0.0;
        for (size_t idx = 0; idx < sol.nodes.size(); ++idx)
            norm_prev = std::max(norm_prev, std::abs(sol.values[idx]) / scale_at(idx));
        // Tail accuracy only needs to resolve the current iteration scale.
        const double ref = std::min(delta_prev, norm_prev + opts.tol);
        double delta = 0.0, norm = 0.0;
        for (size_t idx = 0; idx < sol.nodes.size(); ++idx) {
            const double sc = scale_at(idx);
            const double target = sc * std::max(opts.tol / 10.0, ref / 50.0);
            next[idx] = apply_contraction_at(fr, reg, sol, sol.nodes[idx], target,
                                             opts.max_tail_steps);
            delta = std::max(delta, std::abs(next[idx] - sol.values[idx]) / sc);
            norm = std::max(norm, std::abs(next[idx]) / sc);
        }
        sol.values.swap(next);
        sol.delta_history.push_back(delta);
        sol.norm_history.push_back(norm);
        sol.banach_norm = norm;
        sol.iterations = it + 1;
        if (delta < opts.tol) break;
        if (delta >= delta_prev) {
            if (++bad_streak >= 5)
                throw NoContraction("deltas non-decreasing for 5 iterations (d=" +
                                    std::to_string(reg.d) + ", e=" + std::to_string(reg.e) +
                                    ", eps=" + std::to_string(reg.eps) + ")");
        } else {
            bad_streak = 0;
        }
        delta_prev = delta;
    }

    // invariance residual on interior nodes
    double res = 0.0;
    for (int i = 1; i + 1 < R; ++i)
        for (int j = 0; j < An; ++j) {
            const Complex x = sol.node(i, j);
            const Complex ux = sol.value(i, j);
            const Complex f1 = fr.germ.f1().evaluate(x, ux);
            const Complex f2 = fr.germ.f2().evaluate(x, ux);
            if (f1.real() <= 0.0) continue;
            res = std::max(res, std::abs(sol.interpolate(f1, reg) - f2));
        }
    sol.residual = res;

    // sampled derivative bound |u'(x)| <= |x|^{m-p-2} via radial differences
    for (int i = 0; i + 1 < R && sol.derivative_bound_ok; ++i)
        for (int j = 0; j < An; ++j) {
            const Complex x1 = sol.node(i, j), x2 = sol.node(i + 1, j);
            const double du = std::abs(sol.value(i, j) - sol.value(i + 1, j));
            const double dx = std::abs(x1 - x2);
            const double bound = std::pow(std::abs(x2), m - fr.p - 2);
            if (du > 4.0 * dx * std::max(bound, 1e-300)) sol.derivative_bound_ok = false;
        }
    return sol;
}

// --- stable-set descriptors ---------------------------------------------------

struct StableSetDescriptor {
    enum class Kind { ParabolicCurve, NodeBasin };
    Kind kind = Kind::ParabolicCurve;
    RegionDescriptor region;
    Complex xi{1.0};
    int direction_index = 0;
    int m = 0;
    int q = 0;                 // NodeBasin: |y - J_M gamma2(x)| < |x|^q
    UniJet gamma2_jet;         // curve jet in the rotated reduced coordinates
    CoordChangeLog log;        // original -> rotated reduced coordinates
    std::shared_ptr<ParabolicCurveSolution> solution;  // for ParabolicCurve
    bool forward_invariant = false;
    int invariance_samples = 0;
    std::vector<std::pair<int, int>> basin_refinement;  // (annulus index, iterate count)

    /// Membership in rotated reduced coordinates.
    bool contains_rotated(Complex x, Complex y, double capture_tol = 1e-8) const {
        if (!region.contains_rotated(x)) return false;
        if (kind == Kind::NodeBasin)
            return std::abs(y - gamma2_jet.evaluate(x)) < std::pow(std::abs(x), q);
        return std::abs(y - solution->interpolate(x, region)) <= capture_tol;
    }
};

/// Open stable set of node type: S = {x in R, |y - J_M gamma2(x)| < |x|^{p+1}}.
/// Forward invariance F(S) in S is verified on samples; the optional
/// refinement constructs per-annulus iterate counts k_j with
/// F^{k_j}(U_j) inside V_1 .. V_{j+1}.
inline StableSetDescriptor node_stable_set(const DirectionFrame& fr, const RegionDescriptor& reg,
                                           int m, bool refine_asymptotic = false,
                                           int annuli = 5, int samples = 40) {
    if (fr.kind != DirectionKind::Node) throw NotNode();
    StableSetDescriptor sd;
    sd.kind = StableSetDescriptor::Kind::NodeBasin;
    sd.region = reg;
    sd.xi = fr.xi;
    sd.direction_index = fr.direction_index;
    sd.m = m;
    sd.q = fr.p + 1;
    sd.gamma2_jet = fr.gamma2;
    sd.log = fr.log;

    // forward invariance on a mesh
    bool ok = true;
    int count = 0;
    detail::for_each_region_sample(reg, 10, 5, [&](Complex x) {
        const double yb = std::pow(std::abs(x), sd.q);
        const Complex g2 = fr.gamma2.evaluate(x);
        const Complex ys[] = {g2, g2 + Complex(0.3 * yb, 0.2 * yb), g2 + Complex(-0.6 * yb, 0.6 * yb)};
        for (Complex y : ys) {
            const Complex fx = fr.germ.f1().evaluate(x, y);
            const Complex fy = fr.germ.f2().evaluate(x, y);
            ++count;
            if (!reg.contains_rotated(fx, 1.0 + 1e-9) ||
                !(std::abs(fy - fr.gamma2.evaluate(fx)) < std::pow(std::abs(fx), sd.q)))
                ok = false;
        }
    });
    sd.forward_invariant = ok;
    sd.invariance_samples = count;

    if (refine_asymptotic) {
        std::mt19937_64 gen(20240901);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int j = 0; j < annuli; ++j) {
            const double r_hi = reg.eps / std::pow(2.0, j);
            const double r_lo = reg.eps / std::pow(2.0, j + 2);
            // sample points of the annulus inside S
            std::vector<CPoint> pts;
            while (int(pts.size()) < samples) {
                const double u = r_lo + (r_hi - r_lo) * unif(gen);
                const double f = unif(gen);
                const Complex x(u, reg.lo_bound(u) + f * (reg.hi_bound(u) - reg.lo_bound(u)));
                if (!reg.contains_rotated(x) || std::abs(x) < r_lo || std::abs(x) > r_hi) continue;
                const double yb = std::pow(std::abs(x), sd.q);
                pts.push_back({x, fr.gamma2.evaluate(x) + Complex(0.5 * yb * (2.0 * unif(gen) - 1.0),
                                                                  0.5 * yb * (2.0 * unif(gen) - 1.0))});
            }
            auto in_all_V = [&](const CPoint& pt) {
                for (int N = 1; N <= j + 1; ++N) {
                    const Complex jet = fr.gamma2.truncated(N).evaluate(pt.x);
                    if (!(std::abs(pt.y - jet) < std::pow(std::abs(pt.x), N))) return false;
                }
                return true;
            };
            int kj = 0;
            const int k_cap = 4000;
            for (; kj < k_cap; ++kj) {
                bool all = true;
                for (const auto& pt : pts)
                    if (!in_all_V(pt)) {
                        all = false;
                        break;
                    }
                if (all) break;
                for (auto& pt : pts) {
                    const CPoint nxt{fr.germ.f1().evaluate(pt.x, pt.y),
                                     fr.germ.f2().evaluate(pt.x, pt.y)};
                    pt = nxt;
                }
            }
            sd.basin_refinement.emplace_back(j, kj);
        }
    }
    return sd;
}

inline StableSetDescriptor parabolic_curve_descriptor(const DirectionFrame& fr,
                                                      ParabolicCurveSolution sol) {
    StableSetDescriptor sd;
    sd.kind = StableSetDescriptor::Kind::ParabolicCurve;
    sd.region = sol.region;
    sd.xi = fr.xi;
    sd.direction_index = fr.direction_index;
    sd.m = sol.m;
    sd.q = 0;
    sd.gamma2_jet = fr.gamma2;
    sd.log = fr.log;
    sd.solution = std::make_shared<ParabolicCurveSolution>(std::move(sol));
    sd.forward_invariant = true;
    return sd;
}

} // namespace petal
