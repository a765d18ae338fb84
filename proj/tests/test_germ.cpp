#include "testutil.hpp"

#include "petal/germ.hpp"

using namespace petal;
using namespace petal::testutil;

namespace {

GermDiffeo diag_germ(Complex l, Complex m, int order) {
    return GermDiffeo::linear({l, 0.0, 0.0, m}, order);
}

bool germs_close(const GermDiffeo& a, const GermDiffeo& b, double tol = 1e-10) {
    return jets_close(a.f1(), b.f1(), tol) && jets_close(a.f2(), b.f2(), tol);
}

} // namespace

TEST_CASE("compose_iterate: diagonal squares") {
    const GermDiffeo f = diag_germ(2.0, 3.0, 4);
    const GermDiffeo f2 = compose_iterate(f, 2);
    CHECK(close(f2.f1().coeff(1, 0), 4.0));
    CHECK(close(f2.f2().coeff(0, 1), 9.0));
    CHECK(germs_close(compose_iterate(f, 0), GermDiffeo::identity(4)));
}

TEST_CASE("compose_iterate: (x - x^2, y) squared") {
    BiJet f1(4), f2(4);
    f1.set_coeff(1, 0, 1.0);
    f1.set_coeff(2, 0, -1.0);
    f2.set_coeff(0, 1, 1.0);
    const GermDiffeo f(f1, f2);
    const GermDiffeo ff = compose_iterate(f, 2);
    // (x-x^2) - (x-x^2)^2 = x - 2x^2 + 2x^3 - x^4
    CHECK(close(ff.f1().coeff(1, 0), 1.0));
    CHECK(close(ff.f1().coeff(2, 0), -2.0));
    CHECK(close(ff.f1().coeff(3, 0), 2.0));
    CHECK(close(ff.f1().coeff(4, 0), -1.0));
}

TEST_CASE("compose_iterate: n = -1 solves the linear system") {
    BiJet f1(3), f2(3);
    f1.set_coeff(1, 0, 2.0);
    f1.set_coeff(0, 1, 1.0);
    f2.set_coeff(0, 1, 1.0);
    const GermDiffeo f(f1, f2);
    const GermDiffeo inv = compose_iterate(f, -1);
    CHECK(close(inv.f1().coeff(1, 0), 0.5));
    CHECK(close(inv.f1().coeff(0, 1), -0.5));
    CHECK(close(inv.f2().coeff(0, 1), 1.0));
    CHECK(germs_close(compose(f, inv), GermDiffeo::identity(3)));
}

TEST_CASE("jet_inverse round-trips on random germs") {
    Rng rng(301);
    for (int trial = 0; trial < 8; ++trial) {
        const int n = rng.integer(3, 7);
        BiJet f1 = rng.bijet(n, 0.4, true);
        BiJet f2 = rng.bijet(n, 0.4, true);
        f1.set_coeff(1, 0, f1.coeff(1, 0) + Complex(2.0));
        f2.set_coeff(0, 1, f2.coeff(0, 1) + Complex(2.0));
        const GermDiffeo f(f1, f2);
        const GermDiffeo g = jet_inverse(f);
        CHECK(germs_close(compose(f, g), GermDiffeo::identity(n), 1e-8));
        CHECK(germs_close(compose(g, f), GermDiffeo::identity(n), 1e-8));
    }
}

TEST_CASE("spectrum: diagonal and non-diagonalizable cases") {
    const Spectrum s1 = spectrum_of({0.5, 1.0, 0.0, 2.0});
    CHECK(((close(s1.lambda, 2.0) && close(s1.mu, 0.5)) ||
           (close(s1.lambda, 0.5) && close(s1.mu, 2.0))));

    const Spectrum s2 = spectrum_of({1.0, 1.0, 0.0, 1.0});
    CHECK(s2.repeated);
    CHECK_FALSE(s2.diagonalizable);
    REQUIRE(s2.pairs.size() == 1);
    CHECK(s2.pairs[0].direction.same_as(ProjDirection(1.0, 0.0)));
}

TEST_CASE("spectrum: recovered after similarity conjugation") {
    Rng rng(307);
    for (int trial = 0; trial < 100; ++trial) {
        const Complex l = rng.cplx(2.0), m = rng.cplx(2.0);
        if (std::abs(l - m) < 0.1 || std::abs(l) < 0.1 || std::abs(m) < 0.1) continue;
        LinearMap p{rng.cplx(), rng.cplx(), rng.cplx(), rng.cplx()};
        if (std::abs(p.det()) < 0.1) continue;
        const LinearMap pi = p.inverse();
        // p * diag(l, m) * p^{-1}
        const LinearMap conj{
            (p.a * l * pi.a + p.b * m * pi.c), (p.a * l * pi.b + p.b * m * pi.d),
            (p.c * l * pi.a + p.d * m * pi.c), (p.c * l * pi.b + p.d * m * pi.d)};
        const Spectrum s = spectrum_of(conj);
        const bool match1 = close(s.lambda, l, 1e-9) && close(s.mu, m, 1e-9);
        const bool match2 = close(s.lambda, m, 1e-9) && close(s.mu, l, 1e-9);
        CHECK((match1 || match2));
    }
}

TEST_CASE("blow-up: diagonal germ divides the second eigenvalue") {
    const Complex l(0.8, 0.1), m(1.5, -0.3);
    const GermDiffeo f = diag_germ(l, m, 5);
    const BlowUpResult r = blow_up_transform(f, ProjDirection(1.0, 0.0));
    CHECK(close(r.eigenvalue, l));
    CHECK(close(r.germ.f1().coeff(1, 0), l, 1e-12));
    CHECK(close(r.germ.f2().coeff(0, 1), m / l, 1e-12));
    CHECK(r.germ.order() == 4);
}

TEST_CASE("blow-up: identity stays the identity") {
    const GermDiffeo id = GermDiffeo::identity(5);
    const BlowUpResult r = blow_up_transform(id, ProjDirection(1.0, 0.0));
    CHECK(germs_close(r.germ, GermDiffeo::identity(4)));
}

TEST_CASE("blow-up: geometric-series expansion of the quotient") {
    // F = (x - x^2, y(1+x)) at [1:0] -> (x - x^2, y (1+x)/(1-x)).
    const int n = 6;
    BiJet f1(n), f2(n);
    f1.set_coeff(1, 0, 1.0);
    f1.set_coeff(2, 0, -1.0);
    f2.set_coeff(0, 1, 1.0);
    f2.set_coeff(1, 1, 1.0);
    const GermDiffeo f(f1, f2);
    const BlowUpResult r = blow_up_transform(f, ProjDirection(1.0, 0.0));
    // (1+x)/(1-x) = 1 + 2x + 2x^2 + ...
    CHECK(close(r.germ.f2().coeff(0, 1), 1.0, 1e-12));
    CHECK(close(r.germ.f2().coeff(1, 1), 2.0, 1e-12));
    CHECK(close(r.germ.f2().coeff(2, 1), 2.0, 1e-12));
    CHECK(close(r.germ.f1().coeff(2, 0), -1.0, 1e-12));
}

TEST_CASE("blow-up rejects non-fixed directions") {
    const GermDiffeo f = diag_germ(2.0, 3.0, 4);
    CHECK_THROWS_AS(blow_up_transform(f, ProjDirection(1.0, 1.0)), NotFixedDirection);
}

TEST_CASE("blow-up spectrum law over random germs") {
    Rng rng(311);
    int done = 0;
    while (done < 100) {
        const Complex l = rng.cplx(1.5), m = rng.cplx(1.5);
        if (std::abs(l - m) < 0.05 || std::abs(l) < 0.2 || std::abs(m) < 0.2) continue;
        BiJet f1 = rng.bijet(5, 0.3, true);
        BiJet f2 = rng.bijet(5, 0.3, true);
        // impose linear part diag(l, m) plus a random mixing term fixed on [1:0]
        f1.set_coeff(1, 0, l);
        f1.set_coeff(0, 1, rng.cplx());
        f2.set_coeff(1, 0, 0.0);
        f2.set_coeff(0, 1, m);
        const GermDiffeo f(f1, f2);
        const BlowUpResult r = blow_up_transform(f, ProjDirection(1.0, 0.0));
        const Spectrum s = spectrum_of(r.germ.linear_part());
        const bool match1 = close(s.lambda, l, 1e-12) && close(s.mu, m / l, 1e-12);
        const bool match2 = close(s.lambda, m / l, 1e-12) && close(s.mu, l, 1e-12);
        CHECK((match1 || match2));
        ++done;
    }
}

TEST_CASE("blow-up functoriality for linear conjugations fixing the direction") {
    Rng rng(313);
    for (int trial = 0; trial < 10; ++trial) {
        BiJet f1 = rng.bijet(6, 0.3, true);
        BiJet f2 = rng.bijet(6, 0.3, true);
        f1.set_coeff(1, 0, Complex(0.7, 0.1));
        f1.set_coeff(0, 1, rng.cplx(0.5));
        f2.set_coeff(1, 0, 0.0);  // [1:0] fixed
        f2.set_coeff(0, 1, Complex(1.4, -0.2));
        const GermDiffeo f(f1, f2);

        // phi linear, fixing [1:0]: upper-triangular.
        const LinearMap m{Complex(1.3, 0.2), Complex(0.4, -0.1), 0.0, Complex(0.8, 0.3)};
        const GermDiffeo phi = GermDiffeo::linear(m, 6);
        const GermDiffeo fc = change_coordinates(f, phi);

        const GermDiffeo a = blow_up_transform(fc, ProjDirection(1.0, 0.0)).germ;
        const GermDiffeo braw = blow_up_transform(f, ProjDirection(1.0, 0.0)).germ;
        // The two blow-ups are conjugate by the induced chart map psi with
        // pi o psi = phi o pi: psi(x, y) = (x(a + b y), d y / (a + b y)).
        const int nn = a.order();
        BiJet psi1(nn), psi2(nn);
        psi1.set_coeff(1, 0, m.a);
        psi1.set_coeff(1, 1, m.b);
        // d y (a + b y)^{-1} as a jet in y
        UniJet denom(nn);
        denom.set_coeff(0, m.a);
        denom.set_coeff(1, m.b);
        const UniJet series = m.d * reciprocal(denom);
        for (int i = 0; i + 1 <= nn; ++i) psi2.set_coeff(0, i + 1, series.coeff(i));
        const GermDiffeo psi(psi1, psi2);
        CHECK(germs_close(a, change_coordinates(braw, psi), 1e-9));
    }
}

TEST_CASE("exp_vector_field: linear flow") {
    const int n = 6;
    const Complex alpha(0.3, 0.2), beta(-0.4, 0.1);
    BiJet zx(n), zy(n);
    zx.set_coeff(1, 0, alpha);
    zy.set_coeff(0, 1, beta);
    const GermDiffeo g = exp_vector_field(VectorFieldJet(zx, zy));
    CHECK(close(g.f1().coeff(1, 0), std::exp(alpha), 1e-12));
    CHECK(close(g.f2().coeff(0, 1), std::exp(beta), 1e-12));
}

TEST_CASE("exp_vector_field: -x^2 d/dx flows to x/(1+x)") {
    const int n = 8;
    BiJet zx(n), zy(n);
    zx.set_coeff(2, 0, -1.0);
    const GermDiffeo g = exp_vector_field(VectorFieldJet(zx, zy));
    // x/(1+x) = x - x^2 + x^3 - ...
    for (int i = 1; i <= n; ++i)
        CHECK(close(g.f1().coeff(i, 0), (i % 2 == 1) ? 1.0 : -1.0, 1e-12));
    CHECK(g.f2().y_coefficient_series(1).coeff(0).real() == 1.0);
}

TEST_CASE("exp_vector_field: decoupled closed-form flow") {
    const int n = 8;
    const Complex a0(0.7, -0.3);
    BiJet zx(n), zy(n);
    zx.set_coeff(2, 0, -1.0);
    zy.set_coeff(0, 1, a0);
    const GermDiffeo g = exp_vector_field(VectorFieldJet(zx, zy));
    for (int i = 1; i <= n; ++i)
        CHECK(close(g.f1().coeff(i, 0), (i % 2 == 1) ? 1.0 : -1.0, 1e-12));
    CHECK(close(g.f2().coeff(0, 1), std::exp(a0), 1e-12));
}

TEST_CASE("exp/iterate compatibility: Exp(2Z) = Exp(Z)^2") {
    Rng rng(317);
    const int n = 7;
    BiJet zx = rng.bijet(n, 0.3, true);
    BiJet zy = rng.bijet(n, 0.3, true);
    zx.set_coeff(0, 1, 0.0);
    zy.set_coeff(1, 0, 0.0);
    const GermDiffeo one = exp_vector_field(VectorFieldJet(zx, zy));
    const GermDiffeo two = exp_vector_field(VectorFieldJet(2.0 * zx, 2.0 * zy));
    CHECK(germs_close(two, compose_iterate(one, 2), 1e-9));
}

TEST_CASE("change_coordinates: identity and axis swap") {
    Rng rng(331);
    BiJet f1 = rng.bijet(5, 0.3, true), f2 = rng.bijet(5, 0.3, true);
    f1.set_coeff(1, 0, 2.0);
    f2.set_coeff(0, 1, 3.0);
    const GermDiffeo f(f1, f2);
    CHECK(germs_close(change_coordinates(f, GermDiffeo::identity(5)), f, 1e-10));

    const GermDiffeo swap = GermDiffeo::linear({0.0, 1.0, 1.0, 0.0}, 5);
    const GermDiffeo g = change_coordinates(diag_germ(2.0, 3.0, 5), swap);
    CHECK(close(g.f1().coeff(1, 0), 3.0));
    CHECK(close(g.f2().coeff(0, 1), 2.0));
}

TEST_CASE("change_coordinates: shear bookkeeping against direct expansion") {
    // F = (x, 2y + x^2), phi = (x, y + c x^2): phi^{-1} F phi has
    // F2 = 2(y + c x^2) + x^2 - c x^2 = 2y + (c + 1) x^2.
    const Complex c(0.7, 0.2);
    const int n = 5;
    BiJet f1(n), f2(n);
    f1.set_coeff(1, 0, 1.0);
    f2.set_coeff(0, 1, 2.0);
    f2.set_coeff(2, 0, 1.0);
    BiJet p1(n), p2(n);
    p1.set_coeff(1, 0, 1.0);
    p2.set_coeff(0, 1, 1.0);
    p2.set_coeff(2, 0, c);
    const GermDiffeo g = change_coordinates(GermDiffeo(f1, f2), GermDiffeo(p1, p2));
    CHECK(close(g.f2().coeff(2, 0), c + 1.0, 1e-12));
    CHECK(close(g.f2().coeff(0, 1), 2.0, 1e-12));
}

TEST_CASE("coordinate-change log pushes and pulls points") {
    CoordChangeLog log;
    log.add({StepLinear{{2.0, 0.0, 0.0, 1.0}}, "scale x"});
    UniJet q(3);
    q.set_coeff(2, Complex(1.0));
    log.add({StepShear{q}, "shear"});
    log.add({StepBlowUp{}, "blow-up"});
    const CPoint p{0.25, 0.5};
    const CPoint orig = log.push_point(p);
    // blow-up: (0.25, 0.125); shear: (0.25, 0.125 + 0.0625); linear: (0.5, 0.1875)
    CHECK(close(orig.x, 0.5));
    CHECK(close(orig.y, 0.1875));
    const CPoint back = log.pull_point(orig);
    CHECK(close(back.x, p.x, 1e-12));
    CHECK(close(back.y, p.y, 1e-12));
}
