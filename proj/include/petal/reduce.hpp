#pragma once

#include "petal/curve.hpp"

namespace petal {

/// Residuals of the reduced-form coefficient predicates.
struct ReducedFormCheck {
    double x_linear_dev = 0.0;   // |coeff(x) - 1|
    double leading_dev = 0.0;    // |coeff(x^{k+p+1}) + 1|
    double x_pure_window = 0.0;  // max |coeff x^i|, 2 <= i <= 2k+2p, i != k+p+1
    double x_mixed_low = 0.0;    // max |coeff x^i y^j| in F1, j >= 1, i <= k+p
    double y_unit_dev = 0.0;     // |coeff(y) - mu|
    double y_linear_low = 0.0;   // max |coeff x^i y| in F2, 1 <= i < k
    double y_higher_low = 0.0;   // max |coeff x^i y^j| in F2, j >= 2, i <= k+p
    double a_read_dev = 0.0;     // deviation of the y-linear window from mu*x^k a(x)

    double worst() const {
        return std::max({x_linear_dev, leading_dev, x_pure_window, x_mixed_low, y_unit_dev,
                         y_linear_low, y_higher_low, a_read_dev});
    }
};

/// Normal form of a parabolic pair: k, p, mu, the principal-part polynomial
/// a(x), its logarithm jet A(x), and the coordinate trail that produced it.
struct ReducedPair {
    GermDiffeo germ;  // reduced coordinates
    int k = 1;
    int p = 0;
    Complex mu = 1.0;
    Complex log_mu = 0.0;                // principal branch
    UniJet a;                            // degree <= p, a(0) != 0
    UniJet A;                            // A_0..A_p: log mu + x^k A(x) = J_{k+p} log(mu(1+x^k a))
    std::optional<int> contact_order;    // ord of gamma2; nullopt = contact infinity
    UniJet gamma2;                       // curve jet in reduced coordinates
    CoordChangeLog log;
    ReducedFormCheck check;

    ReducedPair() : germ(GermDiffeo::identity(1)) {}
};

/// The model germ (x - x^{k+p+1}, mu(y + x^k a(x) y + b(x))), already reduced.
inline GermDiffeo make_model_germ(int k, int p, Complex mu, const UniJet& a, const UniJet& b,
                                  int order) {
    BiJet f1(order), f2(order);
    f1.set_coeff(1, 0, 1.0);
    if (k + p + 1 <= order) f1.set_coeff(k + p + 1, 0, -1.0);
    f2.set_coeff(0, 1, mu);
    for (int j = 0; j <= p && k + j + 1 <= order; ++j) f2.set_coeff(k + j, 1, mu * a.coeff(j));
    for (int i = 1; i <= std::min(order, b.order()); ++i)
        f2.set_coeff(i, 0, f2.coeff(i, 0) + mu * b.coeff(i));
    return GermDiffeo(f1, f2);
}

inline GermDiffeo make_model_germ(int k, int p, Complex mu, const UniJet& a, int order) {
    return make_model_germ(k, p, mu, a, UniJet(0), order);
}

/// Infinitesimal principal part: A with log mu + x^k A(x) = J_{k+p} log(mu(1 + x^k a(x))).
inline std::pair<Complex, UniJet> infinitesimal_principal_part(int k, int p, Complex mu,
                                                               const UniJet& a) {
    UniJet u(k + p);
    u.set_coeff(0, mu);
    for (int j = 0; j <= p && k + j <= k + p; ++j) u.set_coeff(k + j, mu * a.coeff(j));
    auto [logmu, L] = log_unit_series(u);
    UniJet A(p);
    for (int j = 0; j <= p; ++j) A.set_coeff(j, L.coeff(k + j));
    return {logmu, A};
}

inline ReducedFormCheck check_reduced_form(const GermDiffeo& g, int k, int p, Complex mu,
                                           const UniJet& a) {
    ReducedFormCheck c;
    const BiJet& f1 = g.f1();
    const BiJet& f2 = g.f2();
    const int n = g.order();
    c.x_linear_dev = std::abs(f1.coeff(1, 0) - Complex(1.0));
    c.leading_dev = std::abs(f1.coeff(k + p + 1, 0) + Complex(1.0));
    for (int i = 2; i <= std::min(2 * (k + p), n); ++i)
        if (i != k + p + 1) c.x_pure_window = std::max(c.x_pure_window, std::abs(f1.coeff(i, 0)));
    for (int i = 0; i <= k + p && i <= n; ++i)
        for (int j = 1; i + j <= n; ++j)
            c.x_mixed_low = std::max(c.x_mixed_low, std::abs(f1.coeff(i, j)));
    c.y_unit_dev = std::abs(f2.coeff(0, 1) - mu);
    for (int i = 1; i < k; ++i) c.y_linear_low = std::max(c.y_linear_low, std::abs(f2.coeff(i, 1)));
    for (int i = 0; i <= k + p && i <= n; ++i)
        for (int j = 2; i + j <= n; ++j)
            c.y_higher_low = std::max(c.y_higher_low, std::abs(f2.coeff(i, j)));
    for (int j = 0; j <= p; ++j)
        c.a_read_dev = std::max(c.a_read_dev, std::abs(f2.coeff(k + j, 1) - mu * a.coeff(j)));
    return c;
}

namespace detail {

// Conjugate by the shear old = (x, y + q(x)); q is a polynomial jet, q(0) = 0.
inline GermDiffeo conjugate_shear(const GermDiffeo& g, const UniJet& q) {
    const int n = g.order();
    const BiJet qb = lift_x(q, n);
    const BiJet x = BiJet::variable_x(n), y = BiJet::variable_y(n);
    const GermDiffeo phi(x, y + qb);
    const GermDiffeo phi_inv(x, y - qb);
    return change_coordinates(g, phi, phi_inv);
}

// Conjugate by the x-substitution old = (h(x), y), h(0) = 0, h'(0) != 0.
inline GermDiffeo conjugate_xpoly(const GermDiffeo& g, const UniJet& h, const UniJet& hinv) {
    const int n = g.order();
    const BiJet y = BiJet::variable_y(n);
    const GermDiffeo phi(lift_x(h, n), y);
    const GermDiffeo phi_inv(lift_x(hinv, n), y);
    return change_coordinates(g, phi, phi_inv);
}

// Blow-up of a germ with curve (s, g(s)) at the x-axis direction; returns the
// transform and shifts the curve jet down by one power of s.
inline GermDiffeo blow_up_on_axis(const GermDiffeo& g, UniJet& gamma2) {
    const GermDiffeo blown = blow_up_transform(g, ProjDirection(1.0, 0.0)).germ;
    UniJet shifted(std::max(gamma2.order() - 1, 0));
    for (int i = 1; i <= gamma2.order(); ++i) shifted.set_coeff(i - 1, gamma2.coeff(i));
    shifted.set_coeff(0, 0.0);  // gamma2(0)=0 and ord>=2 at every blow-up we perform
    gamma2 = shifted;
    return blown;
}

// Smallest x-exponent among y-carrying monomials of f1 (for the refine window).
inline int min_mixed_exponent(const BiJet& f1, double tol) {
    int e = std::numeric_limits<int>::max();
    for (int i = 0; i <= f1.order(); ++i)
        for (int j = 1; i + j <= f1.order(); ++j)
            if (std::abs(f1.coeff(i, j)) > tol) e = std::min(e, i);
    return e;
}

struct PrincipalRead {
    Complex mu;
    UniJet c_series;  // y-linear series of F2 divided by mu (c_1 x + c_2 x^2 + ...)
};

inline PrincipalRead read_principal(const GermDiffeo& g) {
    PrincipalRead r{g.f2().coeff(0, 1), g.f2().y_coefficient_series(1)};
    r.c_series = (1.0 / r.mu) * r.c_series;
    r.c_series.set_coeff(0, 0.0);
    return r;
}

} // namespace detail

struct ReduceOptions {
    double tol = 1e-9;
    int max_resolution_steps = 24;
};

/// Reduce a parabolic pair (F, Gamma) to normal form by blow-ups along the
/// curve and polynomial changes of coordinates.
inline ReducedPair reduce_pair(const GermDiffeo& f_in, const FormalCurveJet& curve_in,
                               const ReduceOptions& opts = {}) {
    if (!curve_in.irreducible_certified())
        throw Error("reduce_pair needs an irreducibility-certified curve");
    const double tol = opts.tol;

    // Restriction data up front: parabolicity and the coordinate-free order r+1.
    const RestrictionData rd0 = solve_restriction(f_in, curve_in, tol);
    const InnerClassification cls = classify_inner(rd0);
    if (cls.kind != InnerKind::Parabolic) throw NotParabolic();
    if (!rd0.restriction_order.has_value()) throw RestrictionIsIdentity();
    const int r = *rd0.restriction_order - 1;  // restriction order r+1, so k+p = r
    const int min_final_order = 2 * r + 2;

    GermDiffeo g = f_in;
    CoordChangeLog log;
    UniJet c1 = curve_in.gamma1(), c2 = curve_in.gamma2();

    auto require_order_for_blowup = [&](int upcoming) {
        if (g.order() - upcoming < min_final_order)
            throw OrderExhausted(f_in.order() + (min_final_order - (g.order() - upcoming)));
    };

    // Stage 1: resolve the curve to a non-singular branch transverse to the divisor.
    {
        int steps = 0;
        bool has_divisor = false;
        while (true) {
            const FormalCurveJet cur(c1, c2);
            const bool singular = cur.multiplicity() > 1;
            const bool on_divisor = has_divisor && cur.tangent().same_as(ProjDirection(0.0, 1.0));
            if (!singular && !on_divisor) break;
            if (++steps > opts.max_resolution_steps)
                throw Error("curve resolution did not terminate");
            require_order_for_blowup(1);
            const ProjDirection dir = cur.tangent();
            BlowUpResult blown = [&] {
                try {
                    return blow_up_transform(g, dir);
                } catch (const NotFixedDirection&) {
                    throw NotInvariant(steps);
                }
            }();
            const LinearMap li = blown.chart.inverse();
            const UniJet t1 = li.a * c1 + li.b * c2;
            const UniJet t2 = li.c * c1 + li.d * c2;
            const UniJet q = divide(t2, t1, cur.coeff_tol());
            c1 = t1.truncated(q.order());
            c2 = q;
            g = blown.germ;
            if (!(std::abs(blown.chart.a - Complex(1.0)) < 1e-15 &&
                  std::abs(blown.chart.b) == 0.0 && std::abs(blown.chart.c) == 0.0 &&
                  std::abs(blown.chart.d - Complex(1.0)) < 1e-15))
                log.add({StepLinear{blown.chart}, "resolution chart"});
            log.add({StepBlowUp{}, "curve resolution"});
            has_divisor = true;
        }
        // The branch may still be tangent to [0:1] with no divisor present: swap axes.
        const FormalCurveJet cur(c1, c2);
        if (std::abs(cur.tangent().a) < std::abs(cur.tangent().b) && !has_divisor) {
            const LinearMap swap{0.0, 1.0, 1.0, 0.0};
            g = change_coordinates(g, GermDiffeo::linear(swap, g.order()),
                                   GermDiffeo::linear(swap, g.order()));
            std::swap(c1, c2);
            log.add({StepLinear{swap}, "axis swap"});
        }
    }

    // Normalize the parametrization to a graph (s, gamma2(s)); this is a
    // reparametrization, not a change of coordinates.
    UniJet gamma2 = [&] {
        const FormalCurveJet cur(c1, c2);
        if (cur.is_graph()) return c2;
        return compose(c2, comp_inverse(c1));
    }();

    // Stage 2: restriction order in the resolved coordinates.
    auto restriction_deviation_order = [&]() -> std::optional<int> {
        const UniJet theta = compose_curve(g.f1(), UniJet::variable(g.order()), gamma2);
        const UniJet dev = theta - UniJet::variable(theta.order());
        return first_significant_index(dev, 1e-11);
    };
    {
        auto rdev = restriction_deviation_order();
        if (!rdev || *rdev != r + 1)
            throw Error("restriction order changed under resolution (jet order too small?)");
    }

    // Stage 3: kill the curve jet to order r+1.
    {
        UniJet q = gamma2.truncated(r + 1);
        if (!q.is_zero()) {
            g = detail::conjugate_shear(g, q);
            gamma2 = gamma2 - q.truncated(gamma2.order());
            log.add({StepShear{q}, "flatten curve to the restriction order"});
        }
    }

    // Read t and split r = k + p.
    int k = r, p = 0;
    {
        const auto pr = detail::read_principal(g);
        const auto t = first_significant_index(pr.c_series, tol);
        if (t && *t < r) {
            k = *t;
            p = r - *t;
        }
    }

    // Stage 4: blow-ups at the infinitely near points of the curve. Each one
    // raises the x-exponent of every y-carrying term of F1 by the y-degree and
    // of every y^j term (j >= 2) of F2 by j-1, so the number of blow-ups needed
    // to push them past x^{k+p+1} can be read off the current jets (at most
    // k+p+1 of them). Already-reduced inputs need none and pass through as-is.
    {
        int blowups = 0;
        // Scale against the low-degree content; tails can be arbitrarily large.
        double low = 1.0;
        for (int i = 0; i <= std::min(k + p + 2, g.order()); ++i)
            for (int j = 0; i + j <= std::min(k + p + 2, g.order()); ++j)
                low = std::max({low, std::abs(g.f1().coeff(i, j)), std::abs(g.f2().coeff(i, j))});
        const double s1 = tol * low;
        const double s2 = s1;
        for (int i = 0; i <= g.order(); ++i)
            for (int j = 1; i + j <= g.order(); ++j) {
                if (j >= 1 && std::abs(g.f1().coeff(i, j)) > s1 && i <= k + p)
                    blowups = std::max(blowups, (k + p + 1 - i + j - 1) / j);
                if (j >= 2 && std::abs(g.f2().coeff(i, j)) > s2 && i <= k + p)
                    blowups = std::max(blowups, (k + p + 1 - i + j - 2) / (j - 1));
            }
        for (int i = 0; i < blowups; ++i) {
            require_order_for_blowup(1);
            g = detail::blow_up_on_axis(g, gamma2);
            log.add({StepBlowUp{}, "reduction blow-up"});
        }
    }

    // Stage 5: flatten the strict transform to order k+p+1.
    {
        UniJet q = gamma2.truncated(k + p + 1);
        if (!q.is_zero()) {
            g = detail::conjugate_shear(g, q);
            gamma2 = gamma2 - q.truncated(gamma2.order());
            log.add({StepShear{q}, "flatten strict transform"});
        }
    }

    // Stage 6: normalize the pure-x part to x - x^{k+p+1} modulo x^{2k+2p+1}.
    {
        const int n = k + p;
        const Complex alpha = g.f1().coeff(n + 1, 0);
        if (std::abs(alpha) < tol)
            throw Error("leading parabolic coefficient vanished unexpectedly");
        UniJet h_total = UniJet::variable(g.order());
        bool changed = false;
        const Complex beta = std::exp(std::log(-1.0 / alpha) / double(n));
        if (std::abs(beta - Complex(1.0)) > 1e-15) {
            UniJet hb(g.order());
            hb.set_coeff(1, beta);
            UniJet hb_inv(g.order());
            hb_inv.set_coeff(1, 1.0 / beta);
            g = detail::conjugate_xpoly(g, hb, hb_inv);
            h_total = compose(h_total, hb);
            changed = true;
        }
        for (int j = 2; j <= n; ++j) {
            const Complex bad = g.f1().coeff(n + j, 0);
            if (std::abs(bad) < 1e-14) continue;
            // conjugation here is phi^{-1} o F o phi, so x + q x^j shifts the
            // order-(n+j) coefficient by -q(n+1-j)
            const Complex q = bad / double(n + 1 - j);
            UniJet hj = UniJet::variable(g.order());
            hj.set_coeff(j, q);
            g = detail::conjugate_xpoly(g, hj, comp_inverse(hj));
            h_total = compose(h_total, hj);
            changed = true;
        }
        if (changed) {
            // gamma2 in the new x-coordinate: (s, gamma2(s)) -> (s, gamma2(h_total(s))).
            gamma2 = compose(gamma2, h_total.truncated(gamma2.order()));
            log.add({StepXPoly{h_total, comp_inverse(h_total)}, "normalize parabolic part"});
        }
    }

    // Stage 7: the a(0) = 0 contingency (only possible with p = 0): raise the
    // order of contact by one and blow up, which shifts a(0) by +1.
    for (int guard = 0; guard < 8; ++guard) {
        const auto pr = detail::read_principal(g);
        double low = 1.0;
        for (int j = 0; j <= k; ++j) low = std::max(low, std::abs(pr.c_series.coeff(j)));
        if (std::abs(pr.c_series.coeff(k)) > tol * low) break;
        if (p != 0) throw Error("principal coefficient lost during reduction");
        UniJet q = gamma2.truncated(std::max(gamma2.vanishing_order(tol).value_or(1), 1));
        if (!q.is_zero()) {
            g = detail::conjugate_shear(g, q);
            gamma2 = gamma2 - q.truncated(gamma2.order());
            log.add({StepShear{q}, "raise contact (a(0) contingency)"});
        }
        require_order_for_blowup(1);
        g = detail::blow_up_on_axis(g, gamma2);
        log.add({StepBlowUp{}, "contingency blow-up"});
    }

    // Assemble the result.
    ReducedPair rp;
    rp.k = k;
    rp.p = p;
    const auto pr = detail::read_principal(g);
    rp.mu = pr.mu;
    UniJet a(p);
    for (int j = 0; j <= p; ++j) a.set_coeff(j, pr.c_series.coeff(k + j));
    rp.a = a;
    auto [logmu, A] = infinitesimal_principal_part(k, p, rp.mu, a);
    rp.log_mu = logmu;
    rp.A = A;
    rp.germ = g;
    rp.gamma2 = gamma2;
    rp.contact_order = gamma2.vanishing_order(tol);
    rp.log = std::move(log);
    rp.check = check_reduced_form(g, k, p, rp.mu, a);
    if (rp.check.worst() > 1e-6)
        throw Error("reduced-form predicates failed (residual " +
                    std::to_string(rp.check.worst()) + ")");
    return rp;
}

/// Raise the order of contact of the curve with the x-axis to at least
/// k+p+m, and optionally force Re(A_p) > 0 by unit blow-ups. The principal
/// part is preserved except that each blow-up adds exactly 1 to A_p.
inline ReducedPair refine_contact(const ReducedPair& rp, int m, bool want_re_positive,
                                  double tol = 1e-9) {
    if (m < rp.p + 2) throw Error("refine_contact needs m >= p+2");
    const int k = rp.k, p = rp.p;
    GermDiffeo g = rp.germ;
    UniJet gamma2 = rp.gamma2;
    CoordChangeLog log = rp.log;

    // Number of unit blow-ups: enough to push the y-carrying terms of F1 past
    // x^{2k+p}, and to make Re(A_p) positive when requested.
    double low = 1.0;
    for (int i = 0; i <= std::min(k + p + 2, g.order()); ++i)
        for (int j = 0; i + j <= std::min(k + p + 2, g.order()); ++j)
            low = std::max(low, std::abs(g.f1().coeff(i, j)));
    const int e_min = detail::min_mixed_exponent(g.f1(), tol * low);
    int blowups = e_min == std::numeric_limits<int>::max()
                      ? 0
                      : std::max(0, 2 * k + p + 1 - e_min);
    if (want_re_positive && rp.A.coeff(p).real() <= tol)
        blowups = std::max(blowups, static_cast<int>(std::ceil(-rp.A.coeff(p).real() + tol)) + 1);

    const int target_contact = k + p + m + blowups;
    const int min_after = 2 * (k + p) + 2;
    if (g.order() - blowups < min_after)
        throw OrderExhausted(rp.germ.order() + (min_after - (g.order() - blowups)));

    {
        UniJet q = gamma2.truncated(std::min(target_contact - 1, gamma2.order()));
        if (!q.is_zero()) {
            g = detail::conjugate_shear(g, q);
            gamma2 = gamma2 - q.truncated(gamma2.order());
            log.add({StepShear{q}, "raise order of contact"});
        }
    }
    for (int i = 0; i < blowups; ++i) {
        if (g.order() < 2) throw OrderExhausted(rp.germ.order() + blowups);
        g = detail::blow_up_on_axis(g, gamma2);
        log.add({StepBlowUp{}, "refine blow-up"});
    }

    ReducedPair out;
    out.k = k;
    out.p = p;
    const auto pr = detail::read_principal(g);
    out.mu = pr.mu;
    UniJet a(p);
    for (int j = 0; j <= p; ++j) a.set_coeff(j, pr.c_series.coeff(k + j));
    out.a = a;
    auto [logmu, A] = infinitesimal_principal_part(k, p, out.mu, a);
    out.log_mu = logmu;
    out.A = A;
    out.germ = g;
    out.gamma2 = gamma2;
    out.contact_order = gamma2.vanishing_order(tol);
    out.log = std::move(log);
    out.check = check_reduced_form(g, k, p, out.mu, a);
    return out;
}

enum class DirectionKind { Saddle, Node };

/// Classification of one attracting direction xi R+, xi^{k+p} = 1.
struct DirectionReport {
    Complex xi;
    int index = 0;  // xi = exp(2 pi i index / (k+p))
    DirectionKind kind = DirectionKind::Saddle;
    std::vector<double> witness;  // (ln|mu|, Re(xi^k A_0), ..., Re(xi^{k+p-1} A_{p-1}))
    std::optional<int> first_significant_order;  // defined when |mu| = 1
};

inline std::vector<DirectionReport> attracting_directions(int k, int p, Complex mu,
                                                          const UniJet& A, double tol = 1e-9) {
    const int n = k + p;
    std::vector<DirectionReport> out;
    out.reserve(static_cast<size_t>(n));
    const double lnmu = std::log(std::abs(mu));
    for (int l = 0; l < n; ++l) {
        DirectionReport dr;
        dr.index = l;
        const double ang = 2.0 * std::numbers::pi * double(l) / double(n);
        dr.xi = Complex(std::cos(ang), std::sin(ang));
        dr.witness.push_back(lnmu);
        for (int j = 0; j < p; ++j)
            dr.witness.push_back((std::pow(dr.xi, k + j) * A.coeff(j)).real());
        // lexicographic sign with an explicit zero band
        dr.kind = DirectionKind::Saddle;
        for (double w : dr.witness) {
            if (std::abs(w) <= tol) continue;
            dr.kind = w < 0.0 ? DirectionKind::Node : DirectionKind::Saddle;
            break;
        }
        if (std::abs(lnmu) <= tol) {
            int rl = p;
            for (int j = 0; j < p; ++j)
                if (std::abs(dr.witness[static_cast<size_t>(j) + 1]) > tol) {
                    rl = j;
                    break;
                }
            dr.first_significant_order = rl;
        }
        out.push_back(std::move(dr));
    }
    return out;
}

inline std::vector<DirectionReport> attracting_directions(const ReducedPair& rp,
                                                          double tol = 1e-9) {
    return attracting_directions(rp.k, rp.p, rp.mu, rp.A, tol);
}

} // namespace petal
