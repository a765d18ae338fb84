#pragma once

#include <catch2/catch_amalgamated.hpp>
#include <complex>
#include <random>

#include "petal/bijet.hpp"
#include "petal/unijet.hpp"

namespace petal::testutil {

inline bool close(Complex a, Complex b, double tol = 1e-12) { return std::abs(a - b) <= tol; }

inline bool jets_close(const UniJet& a, const UniJet& b, double tol = 1e-12) {
    const int n = std::min(a.order(), b.order());
    for (int i = 0; i <= n; ++i)
        if (!close(a.coeff(i), b.coeff(i), tol)) return false;
    return true;
}

inline bool jets_close(const BiJet& a, const BiJet& b, double tol = 1e-12) {
    const int n = std::min(a.order(), b.order());
    for (int i = 0; i <= n; ++i)
        for (int j = 0; i + j <= n; ++j)
            if (!close(a.coeff(i, j), b.coeff(i, j), tol)) return false;
    return true;
}

struct Rng {
    explicit Rng(uint64_t seed) : gen(seed) {}
    double real(double lo = -1.0, double hi = 1.0) {
        return std::uniform_real_distribution<double>(lo, hi)(gen);
    }
    Complex cplx(double scale = 1.0) { return Complex(real(), real()) * scale; }
    Complex unit_circle() {
        const double t = real(0.0, 6.283185307179586);
        return Complex(std::cos(t), std::sin(t));
    }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }

    UniJet unijet(int order, double scale = 1.0, bool zero_const = false) {
        UniJet u(order);
        for (int i = 0; i <= order; ++i) u.set_coeff(i, cplx(scale));
        if (zero_const) u.set_coeff(0, 0.0);
        return u;
    }
    BiJet bijet(int order, double scale = 1.0, bool zero_const = false) {
        BiJet b(order);
        for (int i = 0; i <= order; ++i)
            for (int j = 0; i + j <= order; ++j) b.set_coeff(i, j, cplx(scale));
        if (zero_const) b.set_coeff(0, 0, 0.0);
        return b;
    }

    std::mt19937_64 gen;
};

} // namespace petal::testutil
