#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <vector>

#include "petal/unijet.hpp"

namespace petal {

/// Truncated power series in two complex variables, truncated by total degree.
///
/// A BiJet of order N stores c_{ij} for i+j <= N (coefficient of x^i y^j).
/// The product of two order-N jets agrees with the exact product modulo
/// total degree N+1.
class BiJet {
public:
    BiJet() : n_(0), c_(1, Complex(0.0)) {}
    explicit BiJet(int order)
        : n_(order), c_(static_cast<size_t>(order + 1) * static_cast<size_t>(order + 1), Complex(0.0)) {
        assert(order >= 0);
    }

    static BiJet constant(Complex v, int order) {
        BiJet b(order);
        b.at(0, 0) = v;
        return b;
    }
    static BiJet variable_x(int order) {
        BiJet b(order);
        if (order >= 1) b.at(1, 0) = 1.0;
        return b;
    }
    static BiJet variable_y(int order) {
        BiJet b(order);
        if (order >= 1) b.at(0, 1) = 1.0;
        return b;
    }
    static BiJet monomial(int i, int j, Complex v, int order) {
        BiJet b(order);
        if (i + j <= order) b.at(i, j) = v;
        return b;
    }

    int order() const { return n_; }

    Complex coeff(int i, int j) const {
        if (i < 0 || j < 0 || i + j > n_) return 0.0;
        return c_[idx(i, j)];
    }
    void set_coeff(int i, int j, Complex v) {
        assert(i >= 0 && j >= 0 && i + j <= n_);
        c_[idx(i, j)] = v;
    }

    BiJet truncated(int new_order) const {
        BiJet b(new_order);
        const int m = std::min(new_order, n_);
        for (int i = 0; i <= m; ++i)
            for (int j = 0; i + j <= m; ++j) b.at(i, j) = coeff(i, j);
        return b;
    }

    Complex evaluate(Complex x, Complex y) const {
        // Horner in x of Horner-in-y rows.
        Complex acc = 0.0;
        for (int i = n_; i >= 0; --i) {
            Complex row = 0.0;
            for (int j = n_ - i; j >= 0; --j) row = row * y + coeff(i, j);
            acc = acc * x + row;
        }
        return acc;
    }

    BiJet partial_x() const {
        BiJet d(std::max(n_ - 1, 0));
        for (int i = 1; i <= n_; ++i)
            for (int j = 0; i + j <= n_; ++j) d.at(i - 1, j) = coeff(i, j) * double(i);
        return d;
    }
    BiJet partial_y() const {
        BiJet d(std::max(n_ - 1, 0));
        for (int i = 0; i <= n_; ++i)
            for (int j = 1; i + j <= n_; ++j) d.at(i, j - 1) = coeff(i, j) * double(j);
        return d;
    }

    /// Pure-x slice f(x, 0) as a one-variable jet.
    UniJet slice_y0() const {
        UniJet u(n_);
        for (int i = 0; i <= n_; ++i) u.set_coeff(i, coeff(i, 0));
        return u;
    }

    /// Coefficient series of y^j as a jet in x (order n-j).
    UniJet y_coefficient_series(int j) const {
        const int m = std::max(n_ - j, 0);
        UniJet u(m);
        for (int i = 0; i + j <= n_; ++i) u.set_coeff(i, coeff(i, j));
        return u;
    }

    friend BiJet operator+(const BiJet& a, const BiJet& b) {
        const int n = std::min(a.n_, b.n_);
        BiJet r(n);
        for (int i = 0; i <= n; ++i)
            for (int j = 0; i + j <= n; ++j) r.at(i, j) = a.coeff(i, j) + b.coeff(i, j);
        return r;
    }
    friend BiJet operator-(const BiJet& a, const BiJet& b) {
        const int n = std::min(a.n_, b.n_);
        BiJet r(n);
        for (int i = 0; i <= n; ++i)
            for (int j = 0; i + j <= n; ++j) r.at(i, j) = a.coeff(i, j) - b.coeff(i, j);
        return r;
    }
    friend BiJet operator*(const BiJet& a, const BiJet& b) {
        const int n = std::min(a.n_, b.n_);
        BiJet r(n);
        for (int i1 = 0; i1 <= n; ++i1)
            for (int j1 = 0; i1 + j1 <= n; ++j1) {
                const Complex v = a.coeff(i1, j1);
                if (v == Complex(0.0)) continue;
                const int rem = n - i1 - j1;
                for (int i2 = 0; i2 <= rem; ++i2)
                    for (int j2 = 0; i2 + j2 <= rem; ++j2)
                        r.at(i1 + i2, j1 + j2) += v * b.coeff(i2, j2);
            }
        return r;
    }
    friend BiJet operator*(Complex s, const BiJet& a) {
        BiJet r(a.n_);
        for (int i = 0; i <= a.n_; ++i)
            for (int j = 0; i + j <= a.n_; ++j) r.at(i, j) = s * a.coeff(i, j);
        return r;
    }
    friend BiJet operator*(const BiJet& a, Complex s) { return s * a; }
    friend BiJet operator-(const BiJet& a) { return Complex(-1.0) * a; }

    double max_abs_coeff() const {
        double m = 0.0;
        for (int i = 0; i <= n_; ++i)
            for (int j = 0; i + j <= n_; ++j) m = std::max(m, std::abs(coeff(i, j)));
        return m;
    }

    /// Lowest total degree with a coefficient above tol; nullopt if zero.
    std::optional<int> vanishing_order(double tol = 0.0) const {
        for (int d = 0; d <= n_; ++d)
            for (int i = 0; i <= d; ++i)
                if (std::abs(coeff(i, d - i)) > tol) return d;
        return std::nullopt;
    }

private:
    size_t idx(int i, int j) const {
        return static_cast<size_t>(i) * static_cast<size_t>(n_ + 1) + static_cast<size_t>(j);
    }
    Complex& at(int i, int j) { return c_[idx(i, j)]; }

    int n_;
    std::vector<Complex> c_;
};

/// Reciprocal 1/u of a unit (u(0,0) != 0), by degree-by-degree recursion.
inline BiJet reciprocal(const BiJet& u) {
    const Complex c0 = u.coeff(0, 0);
    if (std::abs(c0) == 0.0) throw ZeroConstantTerm();
    const int n = u.order();
    // r = (1/c0) * 1/(1-h) with h = 1 - u/c0 of positive vanishing order;
    // the fixed point r = 1/c0 + h*r gains one correct degree per pass.
    BiJet h = BiJet::constant(1.0, n) - (1.0 / c0) * u;
    BiJet r = BiJet::constant(1.0 / c0, n);
    for (int pass = 0; pass < n; ++pass) {
        r = h * r;
        r.set_coeff(0, 0, r.coeff(0, 0) + 1.0 / c0);
    }
    return r;
}

/// Substitution f(gx, gy) for jets gx, gy vanishing at the origin.
/// Cost O(N^5) via precomputed powers.
inline BiJet compose(const BiJet& f, const BiJet& gx, const BiJet& gy) {
    if (std::abs(gx.coeff(0, 0)) != 0.0 || std::abs(gy.coeff(0, 0)) != 0.0)
        throw NonzeroConstantTerm();
    const int n = std::min({f.order(), gx.order(), gy.order()});
    std::vector<BiJet> xp(static_cast<size_t>(n) + 1), yp(static_cast<size_t>(n) + 1);
    xp[0] = BiJet::constant(1.0, n);
    yp[0] = BiJet::constant(1.0, n);
    const BiJet gxt = gx.truncated(n), gyt = gy.truncated(n);
    for (int i = 1; i <= n; ++i) {
        xp[static_cast<size_t>(i)] = xp[static_cast<size_t>(i - 1)] * gxt;
        yp[static_cast<size_t>(i)] = yp[static_cast<size_t>(i - 1)] * gyt;
    }
    BiJet acc(n);
    for (int i = 0; i <= n; ++i) {
        // row_i(y) = sum_j c_{ij} yp[j], then acc += xp[i] * row_i
        BiJet row(n);
        bool any = false;
        for (int j = 0; i + j <= n; ++j) {
            const Complex v = f.coeff(i, j);
            if (v == Complex(0.0)) continue;
            row = row + v * yp[static_cast<size_t>(j)];
            any = true;
        }
        if (any) acc = acc + xp[static_cast<size_t>(i)] * row;
    }
    return acc;
}

/// Substitution along a curve: f(g1(s), g2(s)) as a one-variable jet.
inline UniJet compose_curve(const BiJet& f, const UniJet& g1, const UniJet& g2) {
    if (std::abs(g1.coeff(0)) != 0.0 || std::abs(g2.coeff(0)) != 0.0)
        throw NonzeroConstantTerm();
    const int n = std::min({f.order(), g1.order(), g2.order()});
    std::vector<UniJet> xp(static_cast<size_t>(n) + 1), yp(static_cast<size_t>(n) + 1);
    xp[0] = UniJet::constant(1.0, n);
    yp[0] = UniJet::constant(1.0, n);
    const UniJet g1t = g1.truncated(n), g2t = g2.truncated(n);
    for (int i = 1; i <= n; ++i) {
        xp[static_cast<size_t>(i)] = xp[static_cast<size_t>(i - 1)] * g1t;
        yp[static_cast<size_t>(i)] = yp[static_cast<size_t>(i - 1)] * g2t;
    }
    UniJet acc(n);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; i + j <= n; ++j) {
            const Complex v = f.coeff(i, j);
            if (v == Complex(0.0)) continue;
            acc = acc + v * (xp[static_cast<size_t>(i)] * yp[static_cast<size_t>(j)]);
        }
    return acc;
}

/// The substitution f(x, x*y), exact reindexing (monomial x^i y^j -> x^{i+j} y^j).
inline BiJet substitute_xy_to_x_xy(const BiJet& f) {
    const int n = f.order();
    BiJet r(n);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; i + j <= n; ++j) {
            if (f.coeff(i, j) == Complex(0.0)) continue;
            if (i + 2 * j <= n) r.set_coeff(i + j, j, f.coeff(i, j));
        }
    return r;
}

/// Exact division by x; requires every monomial to carry a positive x-power.
/// The quotient is only trustworthy to order n-1 and is returned at that order.
inline BiJet divide_by_x(const BiJet& f, double tol = 0.0) {
    const int n = f.order();
    for (int j = 0; j <= n; ++j)
        if (std::abs(f.coeff(0, j)) > tol) throw ZeroLeadingCoefficient();
    BiJet r(std::max(n - 1, 0));
    for (int i = 1; i <= n; ++i)
        for (int j = 0; i + j <= n; ++j) r.set_coeff(i - 1, j, f.coeff(i, j));
    return r;
}

/// Build a BiJet from a one-variable jet in x.
inline BiJet lift_x(const UniJet& u, int order) {
    BiJet b(order);
    for (int i = 0; i <= std::min(order, u.order()); ++i) b.set_coeff(i, 0, u.coeff(i));
    return b;
}

} // namespace petal
