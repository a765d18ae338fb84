#pragma once

#include <cctype>
#include <optional>
#include <sstream>
#include <string>

#include "petal/polymap.hpp"

namespace petal {

/// Parsed problem statement: the germ as an exact polynomial map plus the
/// optional curve seed and solver knobs.
struct GermSpec {
    PolyMap map;
    int order = 16;
    std::optional<ProjDirection> tangent;
    std::optional<std::vector<Complex>> gamma1;  // coefficients of s^1, s^2, ... (default: s)
    std::optional<std::vector<Complex>> gamma2;
    int iterate = 1;
    int probes = 20;
    double probe_radius = 0.05;
};

namespace parse_detail {

using Poly = std::map<std::pair<int, int>, Complex>;

inline Poly constant(Complex c) { return {{{0, 0}, c}}; }

inline Poly add(const Poly& a, const Poly& b, double sign = 1.0) {
    Poly r = a;
    for (const auto& [k, v] : b) r[k] += sign * v;
    return r;
}

inline Poly mul(const Poly& a, const Poly& b) {
    Poly r;
    for (const auto& [ka, va] : a)
        for (const auto& [kb, vb] : b) r[{ka.first + kb.first, ka.second + kb.second}] += va * vb;
    return r;
}

struct ExprParser {
    const std::string& s;
    int line;
    size_t pos = 0;
    int col_base;

    ExprParser(const std::string& text, int line_, int col_base_ = 1)
        : s(text), line(line_), col_base(col_base_) {}

    [[noreturn]] void fail(const std::string& expected) {
        throw ParseError(line, col_base + int(pos), expected);
    }
    void skip_ws() {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    }
    bool eat(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }

    Poly parse_expr() {
        Poly acc = parse_term();
        while (true) {
            if (eat('+')) {
                acc = add(acc, parse_term());
            } else if (eat('-')) {
                acc = add(acc, parse_term(), -1.0);
            } else {
                return acc;
            }
        }
    }
    Poly parse_term() {
        Poly acc = parse_factor();
        while (eat('*')) acc = mul(acc, parse_factor());
        return acc;
    }
    Poly parse_factor() {
        Poly base = parse_atom();
        while (eat('^')) {
            skip_ws();
            size_t start = pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
            if (pos == start) fail("integer exponent");
            const int e = std::stoi(s.substr(start, pos - start));
            Poly r = constant(1.0);
            for (int i = 0; i < e; ++i) r = mul(r, base);
            base = r;
        }
        return base;
    }
    Poly parse_atom() {
        skip_ws();
        if (pos >= s.size()) fail("expression");
        const char c = s[pos];
        if (c == '(') {
            ++pos;
            Poly inner = parse_expr();
            if (!eat(')')) fail("')'");
            return inner;
        }
        if (c == '-') {
            ++pos;
            return add(Poly{}, parse_atom(), -1.0);
        }
        if (c == '+') {
            ++pos;
            return parse_atom();
        }
        if (c == 'x') {
            ++pos;
            return {{{1, 0}, Complex(1.0)}};
        }
        if (c == 'y') {
            ++pos;
            return {{{0, 1}, Complex(1.0)}};
        }
        if (c == 'i' && (pos + 1 >= s.size() || !std::isalnum(static_cast<unsigned char>(s[pos + 1])))) {
            ++pos;
            return constant(Complex(0.0, 1.0));
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t start = pos;
            while (pos < s.size() &&
                   (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.' ||
                    ((s[pos] == 'e' || s[pos] == 'E') && pos + 1 < s.size() &&
                     (std::isdigit(static_cast<unsigned char>(s[pos + 1])) || s[pos + 1] == '-' ||
                      s[pos + 1] == '+')) ||
                    ((s[pos] == '-' || s[pos] == '+') && pos > start &&
                     (s[pos - 1] == 'e' || s[pos - 1] == 'E'))))
                ++pos;
            double v;
            try {
                v = std::stod(s.substr(start, pos - start));
            } catch (...) {
                pos = start;
                fail("number");
            }
            if (pos < s.size() && s[pos] == 'i') {
                ++pos;
                return constant(Complex(0.0, v));
            }
            return constant(Complex(v, 0.0));
        }
        fail("number, variable, or '('");
    }
    void expect_end() {
        skip_ws();
        if (pos != s.size()) fail("end of expression");
    }
};

inline Poly parse_poly(const std::string& text, int line, int col_base = 1) {
    ExprParser p(text, line, col_base);
    Poly r = p.parse_expr();
    p.expect_end();
    return r;
}

inline Complex parse_complex_literal(const std::string& text, int line, int col_base = 1) {
    const Poly p = parse_poly(text, line, col_base);
    for (const auto& [k, v] : p)
        if (k.first != 0 || k.second != 0) throw ParseError(line, col_base, "complex literal");
    auto it = p.find({0, 0});
    return it == p.end() ? Complex(0.0) : it->second;
}

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

} // namespace parse_detail

/// Parse a germ specification. Grammar (one statement per line, '#' comments):
///   F1 = <expr>          F2 = <expr>          order = <int>
///   curve.tangent = [a:b]                     curve.gamma2 = c1, c2, ...
///   curve.gamma1 = c1, c2, ...   (parametrization; omitted = the graph (s, gamma2))
///   iterate = <int>                           probes = <count>@<radius>
/// Expressions use +, -, *, ^, parentheses, literals (a, bi, a+bi), x and y.
inline GermSpec parse_germ_spec(const std::string& text) {
    using namespace parse_detail;
    GermSpec spec;
    std::optional<Poly> f1, f2;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    int last_line = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        last_line = line_no;
        const size_t hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        const std::string s = trim(raw);
        if (s.empty()) continue;
        const size_t eq = s.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, 1, "'key = value'");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        const int col = int(raw.find('=')) + 2;
        if (key == "F1") {
            f1 = parse_poly(val, line_no, col);
        } else if (key == "F2") {
            f2 = parse_poly(val, line_no, col);
        } else if (key == "order") {
            try {
                spec.order = std::stoi(val);
            } catch (...) {
                throw ParseError(line_no, col, "integer");
            }
        } else if (key == "iterate") {
            try {
                spec.iterate = std::stoi(val);
            } catch (...) {
                throw ParseError(line_no, col, "integer");
            }
        } else if (key == "curve.tangent") {
            if (val.size() < 2 || val.front() != '[' || val.back() != ']')
                throw ParseError(line_no, col, "'[a:b]'");
            const std::string body = val.substr(1, val.size() - 2);
            const size_t colon = body.find(':');
            if (colon == std::string::npos) throw ParseError(line_no, col, "':' in direction");
            const Complex a = parse_complex_literal(trim(body.substr(0, colon)), line_no, col);
            const Complex b = parse_complex_literal(trim(body.substr(colon + 1)), line_no, col);
            spec.tangent = ProjDirection(a, b);
        } else if (key == "curve.gamma1" || key == "curve.gamma2") {
            std::vector<Complex> cs;
            std::string rest = val;
            while (!rest.empty()) {
                const size_t comma = rest.find(',');
                const std::string piece = trim(rest.substr(0, comma));
                if (!piece.empty()) cs.push_back(parse_complex_literal(piece, line_no, col));
                if (comma == std::string::npos) break;
                rest = rest.substr(comma + 1);
            }
            (key == "curve.gamma1" ? spec.gamma1 : spec.gamma2) = cs;
        } else if (key == "probes") {
            const size_t at = val.find('@');
            if (at == std::string::npos) throw ParseError(line_no, col, "'<count>@<radius>'");
            try {
                spec.probes = std::stoi(trim(val.substr(0, at)));
                spec.probe_radius = std::stod(trim(val.substr(at + 1)));
            } catch (...) {
                throw ParseError(line_no, col, "'<count>@<radius>'");
            }
        } else {
            throw ParseError(line_no, 1, "known key (F1, F2, order, curve.*, iterate, probes)");
        }
    }
    if (!f1) throw ParseError(last_line + 1, 1, "F1 definition");
    if (!f2) throw ParseError(last_line + 1, 1, "F2 definition");
    for (const auto& [k, v] : *f1)
        if (std::abs(v) > 0.0) spec.map.t1.push_back({k.first, k.second, v});
    for (const auto& [k, v] : *f2)
        if (std::abs(v) > 0.0) spec.map.t2.push_back({k.first, k.second, v});
    return spec;
}

/// Semantic validation: zero constant term, invertible linear part.
inline void validate_germ_spec(const GermSpec& spec) {
    Complex c1 = 0.0, c2 = 0.0, a = 0.0, b = 0.0, c = 0.0, d = 0.0;
    for (const auto& t : spec.map.t1) {
        if (t.i == 0 && t.j == 0) c1 += t.c;
        if (t.i == 1 && t.j == 0) a += t.c;
        if (t.i == 0 && t.j == 1) b += t.c;
    }
    for (const auto& t : spec.map.t2) {
        if (t.i == 0 && t.j == 0) c2 += t.c;
        if (t.i == 1 && t.j == 0) c += t.c;
        if (t.i == 0 && t.j == 1) d += t.c;
    }
    if (std::abs(c1) != 0.0 || std::abs(c2) != 0.0)
        throw Error("germ must fix the origin (zero constant terms)");
    if (std::abs(a * d - b * c) < 1e-14) throw Error("linear part is singular");
    if (spec.gamma1.has_value() && !spec.gamma2.has_value())
        throw Error("curve.gamma1 requires curve.gamma2");
    if (spec.order < 4 || spec.order > 64) throw Error("order must be between 4 and 64");
    if (spec.iterate < 1) throw Error("iterate must be >= 1");
}

} // namespace petal
