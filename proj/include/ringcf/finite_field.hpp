#pragma once

// Prime fields F_q and quadratic extensions F_q[x]/(x^2 + c1 x + c0).
// Extension elements are written v1*x + v0.

#include "algebra.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ringcf {

inline int64_t mod_pow(int64_t base, int64_t exp, int64_t q) {
    int64_t r = 1 % q;
    base = detail::floor_mod(base, q);
    while (exp > 0) {
        if (exp & 1) r = r * base % q;
        base = base * base % q;
        exp >>= 1;
    }
    return r;
}

inline int64_t mod_inverse(int64_t x, int64_t q) {
    const detail::ExtGcd e = detail::ext_gcd(detail::floor_mod(x, q), q);
    if (e.g != 1) throw std::domain_error("mod_inverse: element not invertible");
    return detail::floor_mod(e.s, q);
}

struct FieldElement {
    int64_t modulus = 2;
    int64_t value = 0;

    FieldElement() = default;
    FieldElement(int64_t q, int64_t v) : modulus(q), value(detail::floor_mod(v, q)) {
        if (!is_rational_prime(q)) throw std::invalid_argument("FieldElement: modulus not prime");
    }

    friend bool operator==(const FieldElement&, const FieldElement&) = default;
};

inline void require_same_field(const FieldElement& x, const FieldElement& y) {
    if (x.modulus != y.modulus) throw std::invalid_argument("field modulus mismatch");
}

inline FieldElement operator+(const FieldElement& x, const FieldElement& y) {
    require_same_field(x, y);
    return {x.modulus, (x.value + y.value) % x.modulus};
}
inline FieldElement operator-(const FieldElement& x, const FieldElement& y) {
    require_same_field(x, y);
    return {x.modulus, x.value - y.value};
}
inline FieldElement operator-(const FieldElement& x) { return {x.modulus, -x.value}; }
inline FieldElement operator*(const FieldElement& x, const FieldElement& y) {
    require_same_field(x, y);
    return {x.modulus, x.value * y.value % x.modulus};
}
inline FieldElement inverse(const FieldElement& x) {
    if (x.value == 0) throw std::domain_error("inverse of zero");
    return {x.modulus, mod_inverse(x.value, x.modulus)};
}

// Monic x^2 + c1 x + c0 over F_q.
struct QuadPoly {
    int64_t q = 2;
    int64_t c1 = 1;
    int64_t c0 = 1;

    bool has_root() const {
        for (int64_t t = 0; t < q; ++t)
            if ((t * t + c1 * t + c0) % q == 0) return true;
        return false;
    }

    friend bool operator==(const QuadPoly&, const QuadPoly&) = default;
};

// Lexicographically smallest (c1, c0) irreducible quadratic; x^2+2x+4 for q = 5.
inline QuadPoly default_poly(int64_t q) {
    if (!is_rational_prime(q)) throw std::invalid_argument("default_poly: q not prime");
    if (q == 5) return {5, 2, 4};
    for (int64_t c1 = 0; c1 < q; ++c1)
        for (int64_t c0 = 0; c0 < q; ++c0) {
            QuadPoly p{q, c1, c0};
            if (!p.has_root()) return p;
        }
    throw std::logic_error("default_poly: none found");
}

struct ExtFieldElement {
    QuadPoly poly;
    int64_t v1 = 0;  // coefficient of x
    int64_t v0 = 0;

    ExtFieldElement() = default;
    ExtFieldElement(const QuadPoly& p, int64_t x1, int64_t x0)
        : poly(p), v1(detail::floor_mod(x1, p.q)), v0(detail::floor_mod(x0, p.q)) {
        if (!is_rational_prime(p.q)) throw std::invalid_argument("ExtFieldElement: base not prime");
        if (p.has_root()) throw std::invalid_argument("ExtFieldElement: polynomial is reducible");
    }

    int64_t index() const { return v1 * poly.q + v0; }

    friend bool operator==(const ExtFieldElement&, const ExtFieldElement&) = default;
};

inline void require_same_field(const ExtFieldElement& x, const ExtFieldElement& y) {
    if (!(x.poly == y.poly)) throw std::invalid_argument("extension field mismatch");
}

inline ExtFieldElement operator+(const ExtFieldElement& x, const ExtFieldElement& y) {
    require_same_field(x, y);
    return {x.poly, x.v1 + y.v1, x.v0 + y.v0};
}
inline ExtFieldElement operator-(const ExtFieldElement& x, const ExtFieldElement& y) {
    require_same_field(x, y);
    return {x.poly, x.v1 - y.v1, x.v0 - y.v0};
}
inline ExtFieldElement operator*(const ExtFieldElement& x, const ExtFieldElement& y) {
    require_same_field(x, y);
    const int64_t q = x.poly.q;
    // x^2 = -c1 x - c0
    const int64_t hi = x.v1 * y.v1 % q;
    const int64_t mid = (x.v1 * y.v0 + x.v0 * y.v1) % q;
    const int64_t lo = x.v0 * y.v0 % q;
    return {x.poly, mid - hi * x.poly.c1, lo - hi * x.poly.c0};
}
inline ExtFieldElement inverse(const ExtFieldElement& x) {
    if (x.v1 == 0 && x.v0 == 0) throw std::domain_error("inverse of zero");
    // x^(q^2 - 2)
    ExtFieldElement r{x.poly, 0, 1}, b = x;
    int64_t e = x.poly.q * x.poly.q - 2;
    while (e > 0) {
        if (e & 1) r = r * b;
        b = b * b;
        e >>= 1;
    }
    return r;
}

// 2x2 matrix over F_q of multiplication by b on coordinates (v1, v0).
inline std::array<std::array<int64_t, 2>, 2> mult_matrix(const ExtFieldElement& b) {
    const ExtFieldElement x{b.poly, 1, 0}, one{b.poly, 0, 1};
    const ExtFieldElement bx = b * x, b1 = b * one;
    return {{{bx.v1, b1.v1}, {bx.v0, b1.v0}}};
}

} // namespace ringcf
