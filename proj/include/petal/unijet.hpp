#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "petal/errors.hpp"

namespace petal {

using Complex = std::complex<double>;

/// Truncated power series in one complex variable.
///
/// A UniJet of order N stores coefficients c0..cN of a series
/// c0 + c1 s + ... + cN s^N. All arithmetic is exact modulo s^{N+1}:
/// the coefficients of a result never depend on discarded terms of the
/// inputs. Values are immutable in practice; operations return new jets.
class UniJet {
public:
    UniJet() : c_(1, Complex(0.0)) {}
    explicit UniJet(int order) : c_(static_cast<size_t>(order) + 1, Complex(0.0)) {
        assert(order >= 0);
    }
    explicit UniJet(std::vector<Complex> coeffs) : c_(std::move(coeffs)) {
        assert(!c_.empty());
    }

    static UniJet constant(Complex value, int order) {
        UniJet j(order);
        j.c_[0] = value;
        return j;
    }

    /// The jet of the identity map s.
    static UniJet variable(int order) {
        UniJet j(order);
        if (order >= 1) j.c_[1] = Complex(1.0);
        return j;
    }

    int order() const { return static_cast<int>(c_.size()) - 1; }

    Complex coeff(int i) const {
        return (i >= 0 && i <= order()) ? c_[static_cast<size_t>(i)] : Complex(0.0);
    }
    void set_coeff(int i, Complex v) {
        assert(i >= 0 && i <= order());
        c_[static_cast<size_t>(i)] = v;
    }

    const std::vector<Complex>& coeffs() const { return c_; }

    UniJet truncated(int new_order) const {
        UniJet j(new_order);
        for (int i = 0; i <= std::min(order(), new_order); ++i) j.c_[static_cast<size_t>(i)] = coeff(i);
        return j;
    }

    /// Order of vanishing at 0 (first index with |c_i| > tol); nullopt if the jet
    /// is zero to truncation.
    std::optional<int> vanishing_order(double tol = 0.0) const {
        for (int i = 0; i <= order(); ++i)
            if (std::abs(coeff(i)) > tol) return i;
        return std::nullopt;
    }

    bool is_zero(double tol = 0.0) const { return !vanishing_order(tol).has_value(); }

    Complex evaluate(Complex z) const {
        Complex acc = 0.0;
        for (int i = order(); i >= 0; --i) acc = acc * z + c_[static_cast<size_t>(i)];
        return acc;
    }

    UniJet derivative() const {
        UniJet d(std::max(order() - 1, 0));
        for (int i = 1; i <= order(); ++i) d.set_coeff(i - 1, coeff(i) * double(i));
        return d;
    }

    /// Antiderivative with zero constant term; gains one order.
    UniJet antiderivative() const {
        UniJet a(order() + 1);
        for (int i = 0; i <= order(); ++i) a.set_coeff(i + 1, coeff(i) / double(i + 1));
        return a;
    }

    friend UniJet operator+(const UniJet& a, const UniJet& b) {
        const int n = std::min(a.order(), b.order());
        UniJet r(n);
        for (int i = 0; i <= n; ++i) r.c_[static_cast<size_t>(i)] = a.coeff(i) + b.coeff(i);
        return r;
    }
    friend UniJet operator-(const UniJet& a, const UniJet& b) {
        const int n = std::min(a.order(), b.order());
        UniJet r(n);
        for (int i = 0; i <= n; ++i) r.c_[static_cast<size_t>(i)] = a.coeff(i) - b.coeff(i);
        return r;
    }
    friend UniJet operator*(const UniJet& a, const UniJet& b) {
        const int n = std::min(a.order(), b.order());
        UniJet r(n);
        for (int i = 0; i <= n; ++i) {
            if (a.coeff(i) == Complex(0.0)) continue;
            for (int j = 0; i + j <= n; ++j)
                r.c_[static_cast<size_t>(i + j)] += a.coeff(i) * b.coeff(j);
        }
        return r;
    }
    friend UniJet operator*(Complex s, const UniJet& a) {
        UniJet r(a.order());
        for (int i = 0; i <= a.order(); ++i) r.c_[static_cast<size_t>(i)] = s * a.coeff(i);
        return r;
    }
    friend UniJet operator*(const UniJet& a, Complex s) { return s * a; }
    friend UniJet operator-(const UniJet& a) { return Complex(-1.0) * a; }

    double max_abs_coeff() const {
        double m = 0.0;
        for (const auto& v : c_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    std::vector<Complex> c_;
};

/// First index whose coefficient is significant against the running prefix
/// magnitude max(1, |c_0|, ..., |c_i|). Robust for jets whose tails blow up
/// (divergent formal series are routine here): noise at index i stems from
/// arithmetic on indices <= i, never from the large tail.
inline std::optional<int> first_significant_index(const UniJet& u, double rel_tol) {
    double run = 1.0;
    for (int i = 0; i <= u.order(); ++i) {
        const double a = std::abs(u.coeff(i));
        run = std::max(run, a);
        if (a > rel_tol * run) return i;
    }
    return std::nullopt;
}

/// f composed with g, truncated to min(order f, order g). Requires g(0)=0.
inline UniJet compose(const UniJet& f, const UniJet& g) {
    if (std::abs(g.coeff(0)) != 0.0) throw NonzeroConstantTerm();
    const int n = std::min(f.order(), g.order());
    // Horner: (((c_n g + c_{n-1}) g + ...) g + c_0
    UniJet acc = UniJet::constant(f.coeff(n), n);
    const UniJet gt = g.truncated(n);
    for (int i = n - 1; i >= 0; --i) {
        acc = acc * gt;
        acc.set_coeff(0, acc.coeff(0) + f.coeff(i));
    }
    return acc;
}

/// Reciprocal 1/u of a unit series.
inline UniJet reciprocal(const UniJet& u) {
    if (std::abs(u.coeff(0)) == 0.0) throw ZeroConstantTerm();
    const int n = u.order();
    UniJet r(n);
    const Complex inv0 = 1.0 / u.coeff(0);
    r.set_coeff(0, inv0);
    for (int i = 1; i <= n; ++i) {
        Complex s = 0.0;
        for (int j = 1; j <= i; ++j) s += u.coeff(j) * r.coeff(i - j);
        r.set_coeff(i, -inv0 * s);
    }
    return r;
}

/// Compositional inverse: g with f(g(s)) = g(f(s)) = s to truncation order.
inline UniJet comp_inverse(const UniJet& f) {
    if (std::abs(f.coeff(0)) != 0.0) throw NotInvertible();
    if (std::abs(f.coeff(1)) == 0.0) throw NotInvertible();
    const int n = f.order();
    UniJet g(n);
    g.set_coeff(1, 1.0 / f.coeff(1));
    for (int m = 2; m <= n; ++m) {
        // With g correct below order m, [s^m] f(g) = f'(0) g_m + (known); force 0.
        const Complex resid = compose(f, g).coeff(m);
        g.set_coeff(m, g.coeff(m) - resid / f.coeff(1));
    }
    return g;
}

/// exp of a jet; the constant term is exponentiated with std::exp.
inline UniJet exp_series(const UniJet& w) {
    const int n = w.order();
    UniJet e(n);
    e.set_coeff(0, std::exp(w.coeff(0)));
    // e' = w' e  =>  i e_i = sum_{j=1..i} j w_j e_{i-j}
    for (int i = 1; i <= n; ++i) {
        Complex s = 0.0;
        for (int j = 1; j <= i; ++j) s += double(j) * w.coeff(j) * e.coeff(i - j);
        e.set_coeff(i, s / double(i));
    }
    return e;
}

/// Principal-branch logarithm of a unit series u, split as
/// (log u(0), zero-constant jet L) with exp(log u(0) + L) = u to truncation.
inline std::pair<Complex, UniJet> log_unit_series(const UniJet& u) {
    if (std::abs(u.coeff(0)) == 0.0) throw ZeroConstantTerm();
    const Complex c0 = u.coeff(0);
    const int n = u.order();
    // L' = u'/u with the unit part normalized away.
    UniJet v = (1.0 / c0) * u;
    UniJet l(n);
    // i l_i = i v_i - sum_{j=1..i-1} j l_j v_{i-j}
    for (int i = 1; i <= n; ++i) {
        Complex s = double(i) * v.coeff(i);
        for (int j = 1; j < i; ++j) s -= double(j) * l.coeff(j) * v.coeff(i - j);
        l.set_coeff(i, s / double(i));
    }
    return {std::log(c0), l};
}

/// u^alpha for a unit series, via exp(alpha log u) on the principal branch.
inline UniJet pow_unit(const UniJet& u, Complex alpha) {
    auto [lc, l] = log_unit_series(u);
    UniJet w = alpha * l;
    w.set_coeff(0, alpha * lc);
    return exp_series(w);
}

/// Quotient a/b where ord(b) <= ord(a); output order shrinks by ord(b).
inline UniJet divide(const UniJet& a, const UniJet& b, double tol = 0.0) {
    auto ob = b.vanishing_order(tol);
    if (!ob) throw ZeroLeadingCoefficient();
    const int v = *ob;
    auto oa = a.vanishing_order(tol);
    if (oa && *oa < v) throw ZeroLeadingCoefficient();
    const int n = std::min(a.order(), b.order()) - v;
    if (n < 0) throw OrderExhausted(v);
    UniJet as(n), bs(n);
    for (int i = 0; i <= n; ++i) {
        as.set_coeff(i, a.coeff(i + v));
        bs.set_coeff(i, b.coeff(i + v));
    }
    return as * reciprocal(bs);
}

} // namespace petal
