#pragma once

#include "petal/unijet.hpp"

namespace petal {

/// Solve A0 * rho(x)^k = x^k * A(x) for a tangent-to-identity jet
/// rho(x) = x + rho_2 x^2 + ... , where A is a polynomial jet with A(0) != 0.
/// Computed as rho = x * (A(x)/A0)^{1/k} on the principal branch.
inline UniJet solve_power_conjugacy(const UniJet& A, int k) {
    assert(k >= 1);
    if (std::abs(A.coeff(0)) == 0.0) throw ZeroLeadingCoefficient();
    const int n = A.order();
    UniJet unit = pow_unit((1.0 / A.coeff(0)) * A, Complex(1.0 / double(k)));
    UniJet rho(n + 1);
    for (int i = 0; i <= n; ++i) rho.set_coeff(i + 1, unit.coeff(i));
    return rho;
}

/// Solve -A0 / (p * zeta(x)^p) = integral of J_{p-1}A(x) / x^{p+1} for a
/// tangent-to-identity jet zeta. Requires p >= 1 and A(0) != 0.
///
/// The primitive of the principal part is -(1/x^p) * sum_{j<p} A_j x^j/(p-j),
/// so zeta = x * (u(x))^{1/p} with u = (A0/p) / (sum_{j<p} A_j x^j/(p-j)).
inline UniJet solve_meromorphic_conjugacy(const UniJet& A, int p) {
    if (p < 1) throw UndefinedForPZero();
    if (std::abs(A.coeff(0)) == 0.0) throw ZeroLeadingCoefficient();
    const int n = A.order();
    UniJet denom(n);
    for (int j = 0; j < p && j <= n; ++j) denom.set_coeff(j, A.coeff(j) / double(p - j));
    UniJet u = (A.coeff(0) / double(p)) * reciprocal(denom);
    UniJet unit = pow_unit(u, Complex(1.0 / double(p)));
    UniJet zeta(n + 1);
    for (int i = 0; i <= n; ++i) zeta.set_coeff(i + 1, unit.coeff(i));
    return zeta;
}

} // namespace petal
