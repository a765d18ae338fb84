#include "testutil.hpp"

#include "petal/conjugacy.hpp"

using namespace petal;
using namespace petal::testutil;

namespace {

// Residual of A0 rho(x)^k - x^k A(x), as a jet.
double power_conjugacy_residual(const UniJet& A, int k, const UniJet& rho) {
    const int n = rho.order();
    UniJet rk = UniJet::constant(1.0, n);
    for (int i = 0; i < k; ++i) rk = rk * rho;
    UniJet lhs = A.coeff(0) * rk;
    UniJet rhs(n);
    for (int j = 0; j <= A.order() && j + k <= n; ++j) rhs.set_coeff(j + k, A.coeff(j));
    return (lhs - rhs).max_abs_coeff();
}

// Residual of the meromorphic identity, cleared of denominators:
// A0 x^p / p - zeta(x)^p * sum_{j<p} A_j x^j / (p-j).
double meromorphic_residual(const UniJet& A, int p, const UniJet& zeta) {
    const int n = zeta.order();
    UniJet zp = UniJet::constant(1.0, n);
    for (int i = 0; i < p; ++i) zp = zp * zeta;
    UniJet denom(n);
    for (int j = 0; j < p; ++j) denom.set_coeff(j, A.coeff(j) / double(p - j));
    UniJet lhs(n);
    lhs.set_coeff(p, A.coeff(0) / double(p));
    return (lhs - zp * denom).max_abs_coeff();
}

} // namespace

TEST_CASE("power conjugacy: constant A gives rho = x") {
    const UniJet A = UniJet::constant(Complex(2.0, -1.0), 5);
    const UniJet rho = solve_power_conjugacy(A, 3);
    CHECK(jets_close(rho, UniJet::variable(6)));
}

TEST_CASE("power conjugacy: k=1 closed form") {
    UniJet A(4);
    A.set_coeff(0, Complex(0.0, 1.0));  // A0 = i
    A.set_coeff(1, 1.0);                // A1 = 1
    const UniJet rho = solve_power_conjugacy(A, 1);
    CHECK(close(rho.coeff(1), 1.0));
    CHECK(close(rho.coeff(2), Complex(0.0, -1.0)));  // rho_2 = -i
    // Im(A0) * Im(rho_2) = 1 * (-1) < 0
    CHECK(A.coeff(0).imag() * rho.coeff(2).imag() < 0.0);
    CHECK(power_conjugacy_residual(A, 1, rho) < 1e-12);
}

TEST_CASE("power conjugacy: k=2 binomial expansion") {
    UniJet A(3);
    const Complex A0(1.5, 0.5), A1(-0.25, 1.0);
    A.set_coeff(0, A0);
    A.set_coeff(1, A1);
    const UniJet rho = solve_power_conjugacy(A, 2);
    CHECK(close(rho.coeff(2), A1 / (2.0 * A0), 1e-12));
    CHECK(power_conjugacy_residual(A, 2, rho) < 1e-12);
}

TEST_CASE("power conjugacy residual vanishes for random polynomial inputs") {
    Rng rng(211);
    for (int trial = 0; trial < 30; ++trial) {
        const int p = rng.integer(0, 5);
        const int k = rng.integer(1, 4);
        UniJet A(p + 6);
        for (int j = 0; j <= p; ++j) A.set_coeff(j, rng.cplx());
        A.set_coeff(0, A.coeff(0) + Complex(1.2));
        const UniJet rho = solve_power_conjugacy(A, k);
        CHECK(power_conjugacy_residual(A, k, rho) < 1e-10);
    }
}

TEST_CASE("power conjugacy reality structure below the significant order") {
    // Re(A_j) = 0 for j < r, Re(A_r) > 0: rho_2..rho_r real, Im(A0)Im(rho_{r+1}) < 0.
    Rng rng(223);
    for (int trial = 0; trial < 20; ++trial) {
        const int p = rng.integer(2, 5);
        const int r = rng.integer(1, p - 1);
        const int k = rng.integer(1, 3);
        UniJet A(p + 4);
        for (int j = 0; j < r; ++j) A.set_coeff(j, Complex(0.0, rng.real(0.2, 1.0) * (rng.integer(0, 1) ? 1 : -1)));
        A.set_coeff(r, Complex(rng.real(0.2, 1.0), rng.real(-1.0, 1.0)));
        for (int j = r + 1; j <= p; ++j) A.set_coeff(j, rng.cplx());
        const UniJet rho = solve_power_conjugacy(A, k);
        for (int j = 2; j <= r; ++j) CHECK(std::abs(rho.coeff(j).imag()) < 1e-12);
        CHECK(A.coeff(0).imag() * rho.coeff(r + 1).imag() < 0.0);
    }
}

TEST_CASE("meromorphic conjugacy: constant A and p=1 give zeta = x") {
    const UniJet A = UniJet::constant(Complex(2.0, 0.5), 4);
    CHECK(jets_close(solve_meromorphic_conjugacy(A, 3), UniJet::variable(5)));

    UniJet B(4);
    B.set_coeff(0, Complex(1.0, -2.0));
    B.set_coeff(1, Complex(0.7, 0.1));
    CHECK(jets_close(solve_meromorphic_conjugacy(B, 1), UniJet::variable(5)));
}

TEST_CASE("meromorphic conjugacy: p=2 closed form") {
    UniJet A(3);
    const Complex A0(2.0, -0.5), A1(0.3, 0.4);
    A.set_coeff(0, A0);
    A.set_coeff(1, A1);
    const UniJet zeta = solve_meromorphic_conjugacy(A, 2);
    CHECK(close(zeta.coeff(2), -A1 / A0, 1e-12));
    CHECK(meromorphic_residual(A, 2, zeta) < 1e-12);
}

TEST_CASE("meromorphic conjugacy residual vanishes for random inputs") {
    Rng rng(227);
    for (int trial = 0; trial < 30; ++trial) {
        const int p = rng.integer(1, 5);
        UniJet A(p + 6);
        for (int j = 0; j <= p; ++j) A.set_coeff(j, rng.cplx());
        A.set_coeff(0, A.coeff(0) + Complex(1.5));
        const UniJet zeta = solve_meromorphic_conjugacy(A, p);
        CHECK(meromorphic_residual(A, p, zeta) < 1e-10);
    }
}

TEST_CASE("meromorphic conjugacy reality structure below the significant order") {
    // Node-side sign: Re(A_j) = 0 for j < r, Re(A_r) < 0 gives zeta_2..zeta_r real
    // and Im(A0) Im(zeta_{r+1}) < 0, provided r < p.
    Rng rng(229);
    for (int trial = 0; trial < 20; ++trial) {
        const int p = rng.integer(2, 5);
        const int r = rng.integer(1, p - 1);
        UniJet A(p + 4);
        for (int j = 0; j < r; ++j) A.set_coeff(j, Complex(0.0, rng.real(0.2, 1.0) * (rng.integer(0, 1) ? 1 : -1)));
        A.set_coeff(r, Complex(-rng.real(0.2, 1.0), rng.real(-1.0, 1.0)));
        for (int j = r + 1; j <= p; ++j) A.set_coeff(j, rng.cplx());
        const UniJet zeta = solve_meromorphic_conjugacy(A, p);
        for (int j = 2; j <= r; ++j) CHECK(std::abs(zeta.coeff(j).imag()) < 1e-12);
        CHECK(A.coeff(0).imag() * zeta.coeff(r + 1).imag() < 0.0);
    }
}

TEST_CASE("conjugacy solvers reject vanishing leading coefficients") {
    UniJet zero_lead(3);
    zero_lead.set_coeff(1, 1.0);
    CHECK_THROWS_AS(solve_power_conjugacy(zero_lead, 2), ZeroLeadingCoefficient);
    CHECK_THROWS_AS(solve_meromorphic_conjugacy(zero_lead, 2), ZeroLeadingCoefficient);
    CHECK_THROWS_AS(solve_meromorphic_conjugacy(UniJet::constant(1.0, 3), 0), UndefinedForPZero);
}
