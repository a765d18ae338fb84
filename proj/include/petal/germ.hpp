#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "petal/bijet.hpp"

namespace petal {

struct CPoint {
    Complex x;
    Complex y;
};

/// 2x2 complex matrix acting on (x, y).
struct LinearMap {
    Complex a{1.0}, b{0.0}, c{0.0}, d{1.0};  // rows: (a b; c d)

    Complex det() const { return a * d - b * c; }
    CPoint apply(CPoint p) const { return {a * p.x + b * p.y, c * p.x + d * p.y}; }
    LinearMap inverse() const {
        const Complex dt = det();
        if (std::abs(dt) == 0.0) throw NotInvertible();
        return {d / dt, -b / dt, -c / dt, a / dt};
    }
    static LinearMap identity() { return {}; }
};

/// A direction [a : b] in the projective line of tangent directions.
struct ProjDirection {
    Complex a{1.0};
    Complex b{0.0};

    ProjDirection() = default;
    ProjDirection(Complex a_, Complex b_) : a(a_), b(b_) {
        const double n = std::max(std::abs(a), std::abs(b));
        if (n == 0.0) throw ZeroParametrization();
        a /= n;
        b /= n;
    }
    bool same_as(const ProjDirection& o, double tol = 1e-9) const {
        return std::abs(a * o.b - b * o.a) <= tol;
    }
};

struct EigenPair {
    Complex value;
    ProjDirection direction;
};

struct Spectrum {
    Complex lambda;  // eigenvalue along the first reported direction
    Complex mu;      // the other eigenvalue
    std::vector<EigenPair> pairs;  // one entry when a repeated eigenvalue is defective
    bool repeated = false;
    bool diagonalizable = true;
};

inline Spectrum spectrum_of(const LinearMap& m, double tol = 1e-12) {
    Spectrum s;
    const Complex tr = m.a + m.d;
    const Complex disc = std::sqrt((m.a - m.d) * (m.a - m.d) + 4.0 * m.b * m.c);
    Complex l1 = (tr + disc) / 2.0;
    Complex l2 = (tr - disc) / 2.0;
    const double scale = std::max({std::abs(m.a), std::abs(m.b), std::abs(m.c), std::abs(m.d), 1.0});
    s.repeated = std::abs(l1 - l2) <= tol * scale;
    auto eigvec = [&](Complex l) -> ProjDirection {
        // Kernel of (m - l I): rows (a-l, b) and (c, d-l); use the larger row.
        const Complex r1a = m.a - l, r1b = m.b;
        const Complex r2a = m.c, r2b = m.d - l;
        if (std::abs(r1a) + std::abs(r1b) >= std::abs(r2a) + std::abs(r2b)) {
            if (std::abs(r1a) + std::abs(r1b) <= tol * scale) return ProjDirection(1.0, 0.0);
            return ProjDirection(r1b, -r1a);
        }
        if (std::abs(r2a) + std::abs(r2b) <= tol * scale) return ProjDirection(1.0, 0.0);
        return ProjDirection(r2b, -r2a);
    };
    if (s.repeated) {
        const Complex l = tr / 2.0;
        s.lambda = s.mu = l;
        const bool scalar = std::abs(m.b) <= tol * scale && std::abs(m.c) <= tol * scale &&
                            std::abs(m.a - m.d) <= tol * scale;
        s.diagonalizable = scalar;
        if (scalar) {
            s.pairs = {{l, ProjDirection(1.0, 0.0)}, {l, ProjDirection(0.0, 1.0)}};
        } else {
            s.pairs = {{l, eigvec(l)}};
        }
    } else {
        s.lambda = l1;
        s.mu = l2;
        s.pairs = {{l1, eigvec(l1)}, {l2, eigvec(l2)}};
    }
    return s;
}

/// Eigenvalue of m along an invariant direction (throws if the direction moves).
inline Complex eigenvalue_along(const LinearMap& m, const ProjDirection& dir, double tol = 1e-9) {
    const CPoint w = m.apply({dir.a, dir.b});
    const double scale = std::max({std::abs(m.a), std::abs(m.b), std::abs(m.c), std::abs(m.d), 1.0});
    if (std::abs(w.x * dir.b - w.y * dir.a) > tol * scale) throw NotFixedDirection();
    return std::abs(dir.a) >= std::abs(dir.b) ? w.x / dir.a : w.y / dir.b;
}

/// Germ of a holomorphic diffeomorphism of (C^2, 0) as a pair of jets with
/// invertible linear part.
class GermDiffeo {
public:
    GermDiffeo(BiJet f1, BiJet f2) : f1_(std::move(f1)), f2_(std::move(f2)) {
        lin_ = {f1_.coeff(1, 0), f1_.coeff(0, 1), f2_.coeff(1, 0), f2_.coeff(0, 1)};
        // Constant terms must vanish; snap roundoff dirt, reject anything real.
        const double scale = std::max({1.0, std::abs(lin_.a), std::abs(lin_.b),
                                       std::abs(lin_.c), std::abs(lin_.d)});
        for (BiJet* comp : {&f1_, &f2_}) {
            const double c0 = std::abs(comp->coeff(0, 0));
            if (c0 > 1e-10 * scale) throw Error("germ components must vanish at the origin");
            if (c0 != 0.0) comp->set_coeff(0, 0, 0.0);
        }
        if (std::abs(lin_.det()) < 1e-14) throw NotInvertible();
    }

    static GermDiffeo identity(int order) {
        return GermDiffeo(BiJet::variable_x(order), BiJet::variable_y(order));
    }
    static GermDiffeo linear(const LinearMap& m, int order) {
        BiJet f1(order), f2(order);
        if (order >= 1) {
            f1.set_coeff(1, 0, m.a);
            f1.set_coeff(0, 1, m.b);
            f2.set_coeff(1, 0, m.c);
            f2.set_coeff(0, 1, m.d);
        }
        return GermDiffeo(f1, f2);
    }

    const BiJet& f1() const { return f1_; }
    const BiJet& f2() const { return f2_; }
    int order() const { return std::min(f1_.order(), f2_.order()); }
    const LinearMap& linear_part() const { return lin_; }

    CPoint evaluate(CPoint p) const { return {f1_.evaluate(p.x, p.y), f2_.evaluate(p.x, p.y)}; }

    GermDiffeo truncated(int n) const { return GermDiffeo(f1_.truncated(n), f2_.truncated(n)); }

private:
    BiJet f1_, f2_;
    LinearMap lin_;
};

inline GermDiffeo compose(const GermDiffeo& f, const GermDiffeo& g) {
    return GermDiffeo(compose(f.f1(), g.f1(), g.f2()), compose(f.f2(), g.f1(), g.f2()));
}

/// Jet inverse: G with F(G) = G(F) = id to truncation order.
inline GermDiffeo jet_inverse(const GermDiffeo& f) {
    const int n = f.order();
    const LinearMap linv = f.linear_part().inverse();
    GermDiffeo g = GermDiffeo::linear(linv, n);
    const BiJet idx = BiJet::variable_x(n), idy = BiJet::variable_y(n);
    for (int pass = 0; pass < n + 1; ++pass) {
        const GermDiffeo fg = compose(f, g);
        const BiJet e1 = fg.f1() - idx;
        const BiJet e2 = fg.f2() - idy;
        const double err = std::max(e1.max_abs_coeff(), e2.max_abs_coeff());
        if (err < 1e-15) break;
        g = GermDiffeo(g.f1() - (linv.a * e1 + linv.b * e2), g.f2() - (linv.c * e1 + linv.d * e2));
    }
    return g;
}

/// F^n as jets; F^0 is the identity, negative n uses the jet inverse.
inline GermDiffeo compose_iterate(const GermDiffeo& f, long n) {
    const int ord = f.order();
    if (n == 0) return GermDiffeo::identity(ord);
    GermDiffeo base = n > 0 ? f : jet_inverse(f);
    long e = n > 0 ? n : -n;
    GermDiffeo acc = GermDiffeo::identity(ord);
    while (e > 0) {
        if (e & 1) acc = compose(acc, base);
        base = (e >>= 1) > 0 ? compose(base, base) : base;
    }
    return acc;
}

/// phi^{-1} o F o phi. When the caller already has the inverse jet it can be
/// supplied to avoid recomputation.
inline GermDiffeo change_coordinates(const GermDiffeo& f, const GermDiffeo& phi) {
    return compose(compose(jet_inverse(phi), f), phi);
}
inline GermDiffeo change_coordinates(const GermDiffeo& f, const GermDiffeo& phi,
                                     const GermDiffeo& phi_inv) {
    return compose(compose(phi_inv, f), phi);
}

struct BlowUpResult {
    GermDiffeo germ;     // transform at the infinitely near fixed point, order N-1
    LinearMap chart;     // linear change used to put the direction on the x-axis
    Complex eigenvalue;  // eigenvalue of DF(0) along the blown-up direction
};

/// Transform of F at the infinitely near fixed point over a fixed direction.
/// In the chart the exceptional divisor is {x = 0}; one jet order is consumed
/// by the division.
inline BlowUpResult blow_up_transform(const GermDiffeo& f, const ProjDirection& dir,
                                      double tol = 1e-9) {
    const Complex lam = eigenvalue_along(f.linear_part(), dir, tol);  // NotFixedDirection if moved
    // Linear chart: columns (direction | complementary axis vector).
    LinearMap L;
    if (std::abs(dir.a) >= std::abs(dir.b)) {
        L = {dir.a, 0.0, dir.b, 1.0};
    } else {
        L = {dir.a, 1.0, dir.b, 0.0};
    }
    const bool on_axis = dir.same_as(ProjDirection(1.0, 0.0), 1e-15) && std::abs(dir.b) == 0.0;
    if (on_axis) L = LinearMap::identity();
    const GermDiffeo fl = on_axis ? f
                                  : change_coordinates(f, GermDiffeo::linear(L, f.order()),
                                                       GermDiffeo::linear(L.inverse(), f.order()));
    const BiJet g1 = substitute_xy_to_x_xy(fl.f1());
    const BiJet g2 = substitute_xy_to_x_xy(fl.f2());
    const BiJet q1 = divide_by_x(g1, 0.0);
    const BiJet q2 = divide_by_x(g2, 0.0);
    const BiJet t1 = g1.truncated(q1.order());
    const BiJet t2 = q2 * reciprocal(q1);
    return {GermDiffeo(t1, t2), L, lam};
}

/// Polynomial vector field jet, singular at the origin.
struct VectorFieldJet {
    BiJet zx;
    BiJet zy;

    VectorFieldJet(BiJet zx_, BiJet zy_) : zx(std::move(zx_)), zy(std::move(zy_)) {
        if (std::abs(zx.coeff(0, 0)) != 0.0 || std::abs(zy.coeff(0, 0)) != 0.0)
            throw Error("vector field must be singular at the origin");
    }

    // Pad the partials back to full order: the degree-n slots they lack never
    // reach degree <= n in the product because the field vanishes at 0.
    BiJet derive(const BiJet& f) const {
        const int n = std::min(zx.order(), zy.order());
        return zx * f.partial_x().truncated(n) + zy * f.partial_y().truncated(n);
    }
};

/// Time-1 flow of Z as a jet, by the truncated Lie series sum Z^j(coord)/j!.
inline GermDiffeo exp_vector_field(const VectorFieldJet& z, int max_terms = 400) {
    const int n = std::min(z.zx.order(), z.zy.order());
    BiJet cx = BiJet::variable_x(n), cy = BiJet::variable_y(n);
    BiJet sx = cx, sy = cy;
    int quiet = 0;
    for (int j = 1; j <= max_terms && quiet < 3; ++j) {
        cx = (1.0 / double(j)) * z.derive(cx);
        cy = (1.0 / double(j)) * z.derive(cy);
        sx = sx + cx;
        sy = sy + cy;
        const double t = std::max(cx.max_abs_coeff(), cy.max_abs_coeff());
        const double s = std::max({sx.max_abs_coeff(), sy.max_abs_coeff(), 1.0});
        quiet = (t < 1e-18 * s) ? quiet + 1 : 0;
    }
    return GermDiffeo(sx, sy);
}

// --- coordinate-change log -------------------------------------------------
//
// Each step records the substitution phi with old = phi(new); germs transform
// as F -> phi^{-1} o F o phi. Points push forward (current -> original) through
// phi and pull back through phi^{-1}, exactly where the step allows it.

struct StepLinear {
    LinearMap m;  // old = m * new
};
struct StepShear {
    UniJet q;  // old = (x, y + q(x)), q polynomial jet
};
struct StepXPoly {
    UniJet h;     // old = (h(x), y)
    UniJet hinv;  // jet inverse of h
};
struct StepBlowUp {};  // old = (x, x*y)
struct StepGeneric {
    BiJet f1, f2;        // forward jets
    BiJet inv1, inv2;    // inverse jets
};

struct CoordChangeStep {
    std::variant<StepLinear, StepShear, StepXPoly, StepBlowUp, StepGeneric> op;
    std::string note;

    CPoint push(CPoint p) const {  // current -> original (one step)
        if (auto* l = std::get_if<StepLinear>(&op)) return l->m.apply(p);
        if (auto* s = std::get_if<StepShear>(&op)) return {p.x, p.y + s->q.evaluate(p.x)};
        if (auto* h = std::get_if<StepXPoly>(&op)) return {h->h.evaluate(p.x), p.y};
        if (std::get_if<StepBlowUp>(&op)) return {p.x, p.x * p.y};
        auto& g = std::get<StepGeneric>(op);
        return {g.f1.evaluate(p.x, p.y), g.f2.evaluate(p.x, p.y)};
    }
    CPoint pull(CPoint p) const {  // original -> current (one step)
        if (auto* l = std::get_if<StepLinear>(&op)) return l->m.inverse().apply(p);
        if (auto* s = std::get_if<StepShear>(&op)) return {p.x, p.y - s->q.evaluate(p.x)};
        if (auto* h = std::get_if<StepXPoly>(&op)) return {h->hinv.evaluate(p.x), p.y};
        if (std::get_if<StepBlowUp>(&op)) return {p.x, p.y / p.x};
        auto& g = std::get<StepGeneric>(op);
        return {g.inv1.evaluate(p.x, p.y), g.inv2.evaluate(p.x, p.y)};
    }
    const char* kind() const {
        switch (op.index()) {
            case 0: return "linear";
            case 1: return "shear";
            case 2: return "xpoly";
            case 3: return "blow-up";
            default: return "generic";
        }
    }
};

struct CoordChangeLog {
    std::vector<CoordChangeStep> steps;

    void add(CoordChangeStep s) { steps.push_back(std::move(s)); }

    /// Map a point from the innermost (current) coordinates back to the original ones.
    CPoint push_point(CPoint p) const {
        for (auto it = steps.rbegin(); it != steps.rend(); ++it) p = it->push(p);
        return p;
    }
    /// Map a point from the original coordinates down to the current ones.
    CPoint pull_point(CPoint p) const {
        for (const auto& s : steps) p = s.pull(p);
        return p;
    }
};

} // namespace petal
