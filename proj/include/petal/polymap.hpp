#pragma once

#include <map>

#include "petal/germ.hpp"

namespace petal {

/// An exact polynomial self-map of C^2. Orbits iterate this, never truncated
/// jets: truncation error would compound over 10^5 iterations.
struct PolyMap {
    struct Term {
        int i, j;
        Complex c;
    };
    std::vector<Term> t1, t2;

    Complex eval_component(const std::vector<Term>& ts, Complex x, Complex y) const {
        Complex acc = 0.0;
        for (const auto& t : ts) {
            Complex m = t.c;
            for (int a = 0; a < t.i; ++a) m *= x;
            for (int b = 0; b < t.j; ++b) m *= y;
            acc += m;
        }
        return acc;
    }
    CPoint evaluate(CPoint p) const {
        return {eval_component(t1, p.x, p.y), eval_component(t2, p.x, p.y)};
    }

    int degree() const {
        int d = 0;
        for (const auto& t : t1) d = std::max(d, t.i + t.j);
        for (const auto& t : t2) d = std::max(d, t.i + t.j);
        return d;
    }

    static PolyMap from_bijets(const BiJet& f1, const BiJet& f2, double drop_tol = 0.0) {
        PolyMap m;
        for (int i = 0; i <= f1.order(); ++i)
            for (int j = 0; i + j <= f1.order(); ++j) {
                if (std::abs(f1.coeff(i, j)) > drop_tol) m.t1.push_back({i, j, f1.coeff(i, j)});
                if (std::abs(f2.coeff(i, j)) > drop_tol) m.t2.push_back({i, j, f2.coeff(i, j)});
            }
        return m;
    }

    GermDiffeo to_germ(int order) const {
        BiJet f1(order), f2(order);
        for (const auto& t : t1)
            if (t.i + t.j <= order) f1.set_coeff(t.i, t.j, t.c);
        for (const auto& t : t2)
            if (t.i + t.j <= order) f2.set_coeff(t.i, t.j, t.c);
        return GermDiffeo(f1, f2);
    }
};

namespace detail {

using PolyGrid = std::map<std::pair<int, int>, Complex>;

inline PolyGrid to_grid(const std::vector<PolyMap::Term>& ts) {
    PolyGrid g;
    for (const auto& t : ts) g[{t.i, t.j}] += t.c;
    return g;
}

inline PolyGrid grid_mul(const PolyGrid& a, const PolyGrid& b) {
    PolyGrid r;
    for (const auto& [ka, va] : a)
        for (const auto& [kb, vb] : b) r[{ka.first + kb.first, ka.second + kb.second}] += va * vb;
    return r;
}

inline PolyGrid grid_pow(const PolyGrid& a, int n) {
    PolyGrid r;
    r[{0, 0}] = 1.0;
    for (int i = 0; i < n; ++i) r = grid_mul(r, a);
    return r;
}

inline std::vector<PolyMap::Term> from_grid(const PolyGrid& g, double drop_tol) {
    std::vector<PolyMap::Term> ts;
    for (const auto& [k, v] : g)
        if (std::abs(v) > drop_tol) ts.push_back({k.first, k.second, v});
    return ts;
}

} // namespace detail

/// Exact polynomial composition f(g). Degrees multiply; intended for the small
/// iterate exponents of the rationally neutral wrapper.
inline PolyMap compose(const PolyMap& f, const PolyMap& g) {
    const auto gx = detail::to_grid(g.t1), gy = detail::to_grid(g.t2);
    PolyMap out;
    auto substitute = [&](const std::vector<PolyMap::Term>& ts) {
        detail::PolyGrid acc;
        for (const auto& t : ts) {
            detail::PolyGrid m = detail::grid_mul(detail::grid_pow(gx, t.i), detail::grid_pow(gy, t.j));
            for (auto& [k, v] : m) acc[k] += t.c * v;
        }
        return detail::from_grid(acc, 1e-300);
    };
    out.t1 = substitute(f.t1);
    out.t2 = substitute(f.t2);
    return out;
}

inline PolyMap iterate_map(const PolyMap& f, int n) {
    PolyMap acc;
    acc.t1 = {{1, 0, 1.0}};
    acc.t2 = {{0, 1, 1.0}};
    for (int i = 0; i < n; ++i) acc = compose(f, acc);
    return acc;
}

} // namespace petal
