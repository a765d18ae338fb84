#pragma once

#include <limits>
#include <numbers>
#include <numeric>
#include <optional>

#include "petal/germ.hpp"

namespace petal {

/// A formal curve given by a parametrization jet (gamma1(s), gamma2(s)).
class FormalCurveJet {
public:
    FormalCurveJet(UniJet g1, UniJet g2) : g1_(std::move(g1)), g2_(std::move(g2)) {
        // Significance is judged against the running prefix magnitude: curve
        // jets routinely have divergent tails, and those must not drown the
        // low-order structure.
        constexpr double kRel = 1e-11;
        int nu = -1, support_gcd = 0;
        double run = 1.0;
        for (int i = 0; i <= order(); ++i) {
            const double a1 = std::abs(g1_.coeff(i));
            const double a2 = std::abs(g2_.coeff(i));
            run = std::max({run, a1, a2});
            const bool s1 = a1 > kRel * run, s2 = a2 > kRel * run;
            if ((s1 || s2) && i == 0) throw Error("parametrization must vanish at s = 0");
            if ((s1 || s2) && nu < 0) {
                nu = i;
                tol_ = kRel * run;
            }
            if (s1) support_gcd = std::gcd(support_gcd, i);
            if (s2) support_gcd = std::gcd(support_gcd, i);
        }
        if (nu < 0) throw ZeroParametrization();
        nu_ = nu;
        tangent_ = ProjDirection(g1_.coeff(nu_), g2_.coeff(nu_));
        irreducible_ = (support_gcd == 1);
    }

    static FormalCurveJet graph(const UniJet& gamma2, int order) {
        return FormalCurveJet(UniJet::variable(order), gamma2.truncated(order));
    }
    static FormalCurveJet x_axis(int order) {
        return FormalCurveJet(UniJet::variable(order), UniJet(order));
    }

    const UniJet& gamma1() const { return g1_; }
    const UniJet& gamma2() const { return g2_; }
    int order() const { return std::min(g1_.order(), g2_.order()); }
    int multiplicity() const { return nu_; }
    const ProjDirection& tangent() const { return tangent_; }
    bool irreducible_certified() const { return irreducible_; }
    double coeff_tol() const { return tol_; }

    /// True when gamma1 = s identically, so the curve is the graph of gamma2.
    bool is_graph() const {
        if (std::abs(g1_.coeff(1) - Complex(1.0)) > tol_) return false;
        for (int i = 2; i <= g1_.order(); ++i)
            if (std::abs(g1_.coeff(i)) > tol_) return false;
        return true;
    }

private:
    UniJet g1_, g2_;
    int nu_;
    ProjDirection tangent_;
    bool irreducible_;
    double tol_;
};

struct CurveBasics {
    int multiplicity;
    ProjDirection tangent;
    bool irreducible;
};

inline CurveBasics curve_basics(const FormalCurveJet& c) {
    return {c.multiplicity(), c.tangent(), c.irreducible_certified()};
}

/// The restriction F|_Gamma: the one-variable jet theta with F(gamma(s)) = gamma(theta(s)).
struct RestrictionData {
    UniJet theta;
    Complex inner_eigenvalue;            // theta'(0)
    Complex tangent_eigenvalue;          // eigenvalue of DF(0) along the tangent
    std::optional<int> restriction_order;  // ord(theta - id); nullopt = identity to truncation
    double residual;                     // sup-norm of F(gamma) - gamma(theta)
    int multiplicity;
};

/// Solve F o gamma = gamma o theta coefficient by coefficient.
inline RestrictionData solve_restriction(const GermDiffeo& f, const FormalCurveJet& curve,
                                         double tol = 1e-9) {
    const UniJet lhs1 = compose_curve(f.f1(), curve.gamma1(), curve.gamma2());
    const UniJet lhs2 = compose_curve(f.f2(), curve.gamma1(), curve.gamma2());
    const int nu = curve.multiplicity();
    const bool first_primary =
        curve.gamma1().vanishing_order(curve.coeff_tol()).value_or(std::numeric_limits<int>::max()) == nu;
    const UniJet& gp = first_primary ? curve.gamma1() : curve.gamma2();
    const UniJet& lp = first_primary ? lhs1 : lhs2;
    const int n_theta = curve.order() - nu + 1;

    const Complex lead = gp.coeff(nu);
    const Complex target = lp.coeff(nu) / lead;
    // theta_1^nu = target; try every branch of the nu-th root.
    const Complex root0 = std::pow(target, 1.0 / double(nu));

    double best_residual = INFINITY;
    UniJet best_theta(n_theta);
    int best_fail_order = nu;

    for (int branch = 0; branch < nu; ++branch) {
        const double ang = 2.0 * std::numbers::pi * double(branch) / double(nu);
        Complex t1 = root0 * Complex(std::cos(ang), std::sin(ang));
        // polish the root so representable branches (e.g. -1) are exact
        for (int newton = 0; newton < 2; ++newton)
            t1 -= (std::pow(t1, nu) - target) / (double(nu) * std::pow(t1, nu - 1));
        UniJet theta(n_theta);
        theta.set_coeff(1, t1);
        const Complex denom = double(nu) * lead * std::pow(t1, nu - 1);
        for (int n = 2; n <= n_theta; ++n) {
            const Complex resid = compose(gp, theta.truncated(curve.order())).coeff(nu - 1 + n) -
                                  lp.coeff(nu - 1 + n);
            theta.set_coeff(n, -resid / denom);
        }
        const UniJet r1 = compose(curve.gamma1(), theta.truncated(curve.order())) - lhs1;
        const UniJet r2 = compose(curve.gamma2(), theta.truncated(curve.order())) - lhs2;
        // Judge residuals per order against the prefix magnitude of the data.
        std::optional<int> fail;
        double run = 1.0, rel_res = 0.0;
        for (int i = 0; i <= std::min(r1.order(), r2.order()); ++i) {
            run = std::max({run, std::abs(lhs1.coeff(i)), std::abs(lhs2.coeff(i)),
                            std::abs(curve.gamma1().coeff(i)), std::abs(curve.gamma2().coeff(i))});
            const double d = std::max(std::abs(r1.coeff(i)), std::abs(r2.coeff(i))) / run;
            rel_res = std::max(rel_res, d);
            if (d > tol && !fail) fail = i;
        }
        if (rel_res < best_residual) {
            best_residual = rel_res;
            best_theta = theta;
            best_fail_order = fail.value_or(0);
        }
    }

    if (best_residual > tol) throw NotInvariant(best_fail_order);

    RestrictionData rd;
    rd.theta = best_theta;
    rd.inner_eigenvalue = best_theta.coeff(1);
    rd.multiplicity = nu;
    try {
        rd.tangent_eigenvalue = eigenvalue_along(f.linear_part(), curve.tangent());
    } catch (const NotFixedDirection&) {
        throw NotInvariant(1);
    }
    UniJet dev = best_theta - UniJet::variable(best_theta.order());
    rd.restriction_order = first_significant_index(dev, 1e-11);
    rd.residual = best_residual;
    return rd;
}

struct ExtendResult {
    FormalCurveJet curve;
    UniJet theta;
    bool non_unique = false;  // a resonant coefficient was free and set to 0
};

/// Seed for the invariant-jet solver: a fixed direction of DF(0), optionally
/// with known low-order coefficients of the graph jet (in the chart where the
/// direction is the x-axis).
struct CurveSeed {
    ProjDirection direction{1.0, 0.0};
    std::vector<Complex> prefix;  // gamma2 coefficients of s^2, s^3, ... to impose

    CurveSeed() = default;
    CurveSeed(ProjDirection d) : direction(d) {}
    CurveSeed(ProjDirection d, std::vector<Complex> pre)
        : direction(d), prefix(std::move(pre)) {}
};

/// Solve F(gamma(s)) = gamma(theta(s)) order by order for a non-singular curve
/// seeded at a fixed direction of DF(0), optionally honoring a partial jet.
inline ExtendResult extend_invariant_jet(const GermDiffeo& f, const CurveSeed& seed,
                                         int target_order, double tol = 1e-9) {
    if (target_order > f.order()) throw OrderExhausted(target_order);
    const int n = target_order;

    // Work in a chart with the seed on the x-axis.
    const ProjDirection& dir = seed.direction;
    LinearMap L = LinearMap::identity();
    GermDiffeo fc = f.truncated(n);
    if (!dir.same_as(ProjDirection(1.0, 0.0), 1e-14)) {
        if (std::abs(dir.a) >= std::abs(dir.b)) {
            L = {dir.a, 0.0, dir.b, 1.0};
        } else {
            L = {dir.a, 1.0, dir.b, 0.0};
        }
        fc = change_coordinates(fc, GermDiffeo::linear(L, n), GermDiffeo::linear(L.inverse(), n));
    }

    const Complex lam = fc.f1().coeff(1, 0);
    const Complex beta = fc.f1().coeff(0, 1);
    const Complex c = fc.f2().coeff(1, 0);
    const Complex mu = fc.f2().coeff(0, 1);
    const double scale = std::max({std::abs(lam), std::abs(mu), 1.0});

    UniJet g(n);
    bool non_unique = false;

    if (std::abs(c) > tol * scale) {
        // The seed is not actually fixed; when the order-1 equation is resonant it
        // is genuinely obstructed, otherwise the caller picked a bad direction.
        if (std::abs(mu - lam) <= tol * scale && std::abs(beta) <= tol * scale)
            throw Obstructed(1);
        throw NotFixedDirection();
    }

    Complex lam_pow = lam;
    for (int m = 2; m <= n; ++m) {
        lam_pow *= lam;
        const UniJet s_var = UniJet::variable(n);
        const UniJet lhs = compose_curve(fc.f2(), s_var, g);
        const UniJet w = compose_curve(fc.f1(), s_var, g);
        const UniJet rhs = compose(g, w);
        const Complex K = lhs.coeff(m) - rhs.coeff(m);
        const Complex coeff = mu - lam_pow;
        const bool resonant = std::abs(coeff) <= tol * scale;
        if (size_t(m - 2) < seed.prefix.size()) {
            // imposed coefficient: verify instead of solving
            const Complex want = seed.prefix[size_t(m - 2)];
            const double rhs_scale = std::max({1.0, lhs.max_abs_coeff(), rhs.max_abs_coeff()});
            if (std::abs(K + coeff * want) > 10.0 * tol * rhs_scale) throw Obstructed(m);
            g.set_coeff(m, want);
            continue;
        }
        if (resonant) {
            const double rhs_scale = std::max({1.0, lhs.max_abs_coeff(), rhs.max_abs_coeff()});
            if (std::abs(K) > tol * rhs_scale) throw Obstructed(m);
            non_unique = true;  // free coefficient, fixed to 0
        } else {
            g.set_coeff(m, -K / coeff);
        }
    }

    // Map the graph back through the chart.
    const UniJet s_var = UniJet::variable(n);
    UniJet g1 = L.a * s_var + L.b * g;
    UniJet g2 = L.c * s_var + L.d * g;
    const UniJet theta = compose_curve(fc.f1(), s_var, g);
    return {FormalCurveJet(g1, g2), theta, non_unique};
}

inline ExtendResult extend_invariant_jet(const GermDiffeo& f, const ProjDirection& seed,
                                         int target_order, double tol = 1e-9) {
    return extend_invariant_jet(f, CurveSeed(seed), target_order, tol);
}

struct TransformStep {
    ProjDirection point;   // tangent direction blown up at this step, in the previous chart
    GermDiffeo germ;       // transform of the diffeomorphism at the new fixed point
    FormalCurveJet curve;  // strict transform of the curve in the new chart
};

/// Chain of strict transforms along the infinitely near points of the curve.
inline std::vector<TransformStep> strict_transform_chain(const GermDiffeo& f,
                                                         const FormalCurveJet& curve, int depth) {
    std::vector<TransformStep> chain;
    GermDiffeo cur_f = f;
    FormalCurveJet cur_c = curve;
    for (int step = 0; step < depth; ++step) {
        if (cur_f.order() < 2 || cur_c.order() < 2) throw OrderExhausted(f.order() + depth);
        const ProjDirection dir = cur_c.tangent();
        BlowUpResult blown = [&] {
            try {
                return blow_up_transform(cur_f, dir);
            } catch (const NotFixedDirection&) {
                throw NotInvariant(step);
            }
        }();
        // Strict transform of the curve in the chart's coordinates.
        const LinearMap li = blown.chart.inverse();
        const UniJet c1 = li.a * cur_c.gamma1() + li.b * cur_c.gamma2();
        const UniJet c2 = li.c * cur_c.gamma1() + li.d * cur_c.gamma2();
        const UniJet c2_new = divide(c2, c1, cur_c.coeff_tol());
        const UniJet c1_new = c1.truncated(c2_new.order());
        FormalCurveJet next(c1_new, c2_new);
        chain.push_back({dir, blown.germ, next});
        cur_f = blown.germ;
        cur_c = std::move(next);
    }
    return chain;
}

enum class InnerKind {
    HyperbolicAttracting,
    HyperbolicRepelling,
    RationallyNeutral,
    Parabolic,
    IrrationallyNeutral,
};

struct InnerClassification {
    InnerKind kind;
    int root_order = 0;  // order of the inner eigenvalue as a root of unity, if rationally neutral
    Complex inner_eigenvalue;
};

inline const char* to_string(InnerKind k) {
    switch (k) {
        case InnerKind::HyperbolicAttracting: return "hyperbolic-attracting";
        case InnerKind::HyperbolicRepelling: return "hyperbolic-repelling";
        case InnerKind::RationallyNeutral: return "rationally-neutral";
        case InnerKind::Parabolic: return "parabolic";
        case InnerKind::IrrationallyNeutral: return "irrationally-neutral";
    }
    return "?";
}

inline InnerClassification classify_inner(const RestrictionData& rd, double root_tol = 1e-9,
                                          int max_root_order = 64) {
    const Complex l = rd.inner_eigenvalue;
    InnerClassification c;
    c.inner_eigenvalue = l;
    const double m = std::abs(l);
    if (m < 1.0 - root_tol) {
        c.kind = InnerKind::HyperbolicAttracting;
        return c;
    }
    if (m > 1.0 + root_tol) {
        c.kind = InnerKind::HyperbolicRepelling;
        return c;
    }
    Complex p = 1.0;
    for (int n = 1; n <= max_root_order; ++n) {
        p *= l;
        if (std::abs(p - Complex(1.0)) <= root_tol) {
            c.root_order = n;
            c.kind = n == 1 ? InnerKind::Parabolic : InnerKind::RationallyNeutral;
            return c;
        }
    }
    c.kind = InnerKind::IrrationallyNeutral;
    return c;
}

/// Structure report for a singular hyperbolic invariant curve: the cusp model
/// y^p = c x^q with coprime q > p > 1 and lambda^q = mu^p.
struct CuspStructure {
    bool matches = false;
    int p = 0, q = 0;
    Complex c;                    // gamma ~ (s^p, c s^q) after normalization
    double eigenvalue_residual = INFINITY;  // |lambda^q - mu^p|
    double membership_residual = INFINITY;  // sup |gamma2^p - c^p gamma1^q|
};

inline CuspStructure cusp_structure(const GermDiffeo& f, const FormalCurveJet& curve,
                                    double tol = 1e-9) {
    CuspStructure out;
    const int p = curve.multiplicity();
    if (p <= 1) return out;
    out.p = p;
    if (curve.gamma1().vanishing_order(curve.coeff_tol()).value_or(0) != p)
        return out;  // needs the tangent on the x-axis
    // Normalize gamma1 to s^p exactly by the reparametrization s -> sigma^{-1},
    // where sigma is the formal p-th root of gamma1.
    const int n = curve.order();
    UniJet unit(n - p);
    for (int i = 0; i + p <= n; ++i) unit.set_coeff(i, curve.gamma1().coeff(i + p));
    UniJet root = pow_unit(unit, Complex(1.0 / double(p)));
    UniJet sigma(n);
    for (int i = 0; i + 1 <= n && i <= root.order(); ++i) sigma.set_coeff(i + 1, root.coeff(i));
    const UniJet g2n = compose(curve.gamma2(), comp_inverse(sigma));
    auto q_ord = g2n.vanishing_order(curve.coeff_tol());
    if (!q_ord) return out;
    out.q = *q_ord;
    out.c = g2n.coeff(out.q);
    if (out.q <= out.p || std::gcd(out.p, out.q) != 1) return out;
    // Monomial check: all later coefficients vanish.
    for (int i = out.q + 1; i <= g2n.order(); ++i)
        if (std::abs(g2n.coeff(i)) > tol * std::max(1.0, std::abs(out.c))) return out;
    const Complex lam = eigenvalue_along(f.linear_part(), curve.tangent());
    const Spectrum s = spectrum_of(f.linear_part());
    const Complex mu = std::abs(s.lambda - lam) <= std::abs(s.mu - lam) ? s.mu : s.lambda;
    out.eigenvalue_residual = std::abs(std::pow(lam, out.q) - std::pow(mu, out.p));
    // Membership of the cusp ideal along the parametrization.
    const int m = curve.order();
    UniJet y_p = UniJet::constant(1.0, m), x_q = UniJet::constant(1.0, m);
    for (int i = 0; i < out.p; ++i) y_p = y_p * curve.gamma2();
    for (int i = 0; i < out.q; ++i) x_q = x_q * curve.gamma1();
    out.membership_residual = (y_p - std::pow(out.c, out.p) * x_q).max_abs_coeff();
    out.matches = out.eigenvalue_residual <= tol && out.membership_residual <= tol;
    return out;
}

} // namespace petal
