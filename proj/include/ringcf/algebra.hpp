#pragma once

// Exact arithmetic in Z, Z[i] and Z[w] (w = -1/2 + j*sqrt(3)/2).
//
// Elements are stored as integer coordinates (a, b) in the basis (1, j) or
// (1, w); integers always carry b = 0. Every operation is pure and all
// intermediate products are overflow checked.

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ringcf {

enum class Ring { integers, gaussian, eisenstein };

inline std::string_view to_string(Ring r) {
    switch (r) {
    case Ring::integers: return "integers";
    case Ring::gaussian: return "gaussian";
    case Ring::eisenstein: return "eisenstein";
    }
    return "?";
}

inline Ring ring_from_string(std::string_view s) {
    if (s == "integers" || s == "Z") return Ring::integers;
    if (s == "gaussian" || s == "Z[i]") return Ring::gaussian;
    if (s == "eisenstein" || s == "Z[w]") return Ring::eisenstein;
    throw std::invalid_argument("unknown ring '" + std::string(s) + "'");
}

namespace detail {

inline int64_t add(int64_t x, int64_t y) {
    int64_t r;
    if (__builtin_add_overflow(x, y, &r)) throw std::overflow_error("integer overflow in ring arithmetic");
    return r;
}

inline int64_t sub(int64_t x, int64_t y) {
    int64_t r;
    if (__builtin_sub_overflow(x, y, &r)) throw std::overflow_error("integer overflow in ring arithmetic");
    return r;
}

inline int64_t mul(int64_t x, int64_t y) {
    int64_t r;
    if (__builtin_mul_overflow(x, y, &r)) throw std::overflow_error("integer overflow in ring arithmetic");
    return r;
}

inline int64_t floor_div(int64_t a, int64_t b) {
    int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

// Result in [0, |b|).
inline int64_t floor_mod(int64_t a, int64_t b) {
    int64_t m = a % b;
    if (m < 0) m += (b < 0 ? -b : b);
    return m;
}

struct ExtGcd {
    int64_t g, s, t;
};

// s*x + t*y = g with g >= 0.
inline ExtGcd ext_gcd(int64_t x, int64_t y) {
    int64_t r0 = x, r1 = y, s0 = 1, s1 = 0, t0 = 0, t1 = 1;
    while (r1 != 0) {
        const int64_t q = floor_div(r0, r1);
        r0 = sub(r0, mul(q, r1)); std::swap(r0, r1);
        s0 = sub(s0, mul(q, s1)); std::swap(s0, s1);
        t0 = sub(t0, mul(q, t1)); std::swap(t0, t1);
    }
    if (r0 < 0) return {-r0, -s0, -t0};
    return {r0, s0, t0};
}

} // namespace detail

struct RingElement {
    Ring ring = Ring::integers;
    int64_t a = 0;
    int64_t b = 0;

    constexpr RingElement() = default;
    RingElement(Ring r, int64_t re, int64_t im = 0) : ring(r), a(re), b(im) {
        if (r == Ring::integers && im != 0)
            throw std::invalid_argument("integer ring element must have b = 0");
    }

    static RingElement zero(Ring r) { return {r, 0, 0}; }
    static RingElement one(Ring r) { return {r, 1, 0}; }
    // j for Z[i], w for Z[w]; 1 for Z.
    static RingElement generator(Ring r) { return r == Ring::integers ? one(r) : RingElement{r, 0, 1}; }

    bool is_zero() const { return a == 0 && b == 0; }

    std::complex<double> to_complex() const {
        switch (ring) {
        case Ring::integers: return {double(a), 0.0};
        case Ring::gaussian: return {double(a), double(b)};
        case Ring::eisenstein: return {double(a) - 0.5 * double(b), 0.8660254037844386 * double(b)};
        }
        return {};
    }

    friend bool operator==(const RingElement&, const RingElement&) = default;
};

inline void require_same_ring(const RingElement& x, const RingElement& y) {
    if (x.ring != y.ring) throw std::invalid_argument("ring tag mismatch");
}

inline RingElement operator+(const RingElement& x, const RingElement& y) {
    require_same_ring(x, y);
    RingElement r;
    r.ring = x.ring;
    r.a = detail::add(x.a, y.a);
    r.b = detail::add(x.b, y.b);
    return r;
}

inline RingElement operator-(const RingElement& x) {
    RingElement r = x;
    r.a = detail::sub(0, x.a);
    r.b = detail::sub(0, x.b);
    return r;
}

inline RingElement operator-(const RingElement& x, const RingElement& y) { return x + (-y); }

inline RingElement operator*(const RingElement& x, const RingElement& y) {
    require_same_ring(x, y);
    using namespace detail;
    RingElement r;
    r.ring = x.ring;
    switch (x.ring) {
    case Ring::integers:
        r.a = mul(x.a, y.a);
        break;
    case Ring::gaussian:
        r.a = sub(mul(x.a, y.a), mul(x.b, y.b));
        r.b = add(mul(x.a, y.b), mul(x.b, y.a));
        break;
    case Ring::eisenstein: {
        // w^2 = -1 - w
        const int64_t bd = mul(x.b, y.b);
        r.a = sub(mul(x.a, y.a), bd);
        r.b = sub(add(mul(x.a, y.b), mul(x.b, y.a)), bd);
        break;
    }
    }
    return r;
}

inline RingElement operator*(int64_t k, const RingElement& x) { return RingElement{x.ring, k, 0} * x; }

inline RingElement& operator+=(RingElement& x, const RingElement& y) { return x = x + y; }
inline RingElement& operator-=(RingElement& x, const RingElement& y) { return x = x - y; }
inline RingElement& operator*=(RingElement& x, const RingElement& y) { return x = x * y; }

inline RingElement conj(const RingElement& x) {
    switch (x.ring) {
    case Ring::integers: return x;
    case Ring::gaussian: return {x.ring, x.a, detail::sub(0, x.b)};
    case Ring::eisenstein: return {x.ring, detail::sub(x.a, x.b), detail::sub(0, x.b)};
    }
    return x;
}

inline int64_t norm(const RingElement& x) {
    using namespace detail;
    switch (x.ring) {
    case Ring::integers: return mul(x.a, x.a);
    case Ring::gaussian: return add(mul(x.a, x.a), mul(x.b, x.b));
    case Ring::eisenstein: return add(sub(mul(x.a, x.a), mul(x.a, x.b)), mul(x.b, x.b));
    }
    return 0;
}

// |R / xR|: the algebraic norm for Z[i] and Z[w], |a| for Z.
inline int64_t quotient_size(const RingElement& x) {
    return x.ring == Ring::integers ? (x.a < 0 ? -x.a : x.a) : norm(x);
}

// Exact orderings of the real and imaginary parts (scaled, same ring only).
inline int64_t real_key(const RingElement& x) {
    return x.ring == Ring::eisenstein ? detail::sub(detail::mul(2, x.a), x.b) : x.a;
}
inline int64_t imag_key(const RingElement& x) { return x.b; }

// Lexicographic on (Re, Im).
inline bool lex_less(const RingElement& x, const RingElement& y) {
    const int64_t rx = real_key(x), ry = real_key(y);
    if (rx != ry) return rx < ry;
    return imag_key(x) < imag_key(y);
}

inline std::vector<RingElement> units(Ring r) {
    switch (r) {
    case Ring::integers: return {{r, 1}, {r, -1}};
    case Ring::gaussian: return {{r, 1, 0}, {r, 0, 1}, {r, -1, 0}, {r, 0, -1}};
    case Ring::eisenstein:
        // 1, -w^2 = 1 + w, w, -1, w^2 = -1 - w, -w  (counter-clockwise)
        return {{r, 1, 0}, {r, 1, 1}, {r, 0, 1}, {r, -1, 0}, {r, -1, -1}, {r, 0, -1}};
    }
    return {};
}

inline bool is_unit(const RingElement& x) { return quotient_size(x) == 1; }

struct DivMod {
    RingElement quotient;
    RingElement remainder;
};

// Euclidean division: x = q*m + r with r the minimum-norm remainder among the
// integer roundings of x/m; ties go to the smallest (Re, Im) of r.
inline DivMod euclid_divmod(const RingElement& x, const RingElement& m) {
    require_same_ring(x, m);
    if (m.is_zero()) throw std::domain_error("euclid_divmod: division by zero");
    const Ring R = x.ring;
    int64_t qa_lo, qb_lo;
    int64_t den;
    if (R == Ring::integers) {
        den = m.a;
        qa_lo = detail::floor_div(x.a, den);
        qb_lo = 0;
    } else {
        const RingElement num = x * conj(m);
        den = norm(m);
        qa_lo = detail::floor_div(num.a, den);
        qb_lo = detail::floor_div(num.b, den);
    }
    bool have = false;
    DivMod best;
    int64_t best_norm = 0;
    const int nb = (R == Ring::integers) ? 1 : 2;
    for (int da = 0; da < 2; ++da) {
        for (int db = 0; db < nb; ++db) {
            const RingElement q{R, qa_lo + da, R == Ring::integers ? 0 : qb_lo + db};
            const RingElement r = x - q * m;
            const int64_t n = norm(r);
            if (!have || n < best_norm || (n == best_norm && lex_less(r, best.remainder))) {
                best = {q, r};
                best_norm = n;
                have = true;
            }
        }
    }
    return best;
}

inline RingElement operator%(const RingElement& x, const RingElement& m) { return euclid_divmod(x, m).remainder; }

inline bool divides(const RingElement& d, const RingElement& x) {
    if (d.is_zero()) return x.is_zero();
    return euclid_divmod(x, d).remainder.is_zero();
}

// Exact quotient; throws if m does not divide x.
inline RingElement exact_div(const RingElement& x, const RingElement& m) {
    const DivMod dm = euclid_divmod(x, m);
    if (!dm.remainder.is_zero()) throw std::domain_error("exact_div: not divisible");
    return dm.quotient;
}

inline bool are_associates(const RingElement& x, const RingElement& y) {
    require_same_ring(x, y);
    if (x.is_zero() || y.is_zero()) return x.is_zero() && y.is_zero();
    return divides(x, y) && divides(y, x);
}

struct Bezout {
    RingElement g, s, t;
};

// s*x + t*y = g, g a gcd of x and y (unique up to units).
inline Bezout bezout(const RingElement& x, const RingElement& y) {
    require_same_ring(x, y);
    if (x.is_zero() && y.is_zero()) throw std::invalid_argument("bezout: both arguments are zero");
    const Ring R = x.ring;
    RingElement r0 = x, r1 = y;
    RingElement s0 = RingElement::one(R), s1 = RingElement::zero(R);
    RingElement t0 = RingElement::zero(R), t1 = RingElement::one(R);
    while (!r1.is_zero()) {
        const DivMod dm = euclid_divmod(r0, r1);
        RingElement r2 = dm.remainder;
        RingElement s2 = s0 - dm.quotient * s1;
        RingElement t2 = t0 - dm.quotient * t1;
        r0 = r1; r1 = r2;
        s0 = s1; s1 = s2;
        t0 = t1; t1 = t2;
    }
    return {r0, s0, t0};
}

inline bool relatively_prime(const RingElement& x, const RingElement& y) { return is_unit(bezout(x, y).g); }

inline RingElement unit_inverse(const RingElement& u) {
    for (const RingElement& v : units(u.ring))
        if (u * v == RingElement::one(u.ring)) return v;
    throw std::domain_error("unit_inverse: not a unit");
}

// Exact test for 0 <= arg(x) < 2*pi/|units|.
inline bool in_first_sector(const RingElement& x) {
    switch (x.ring) {
    case Ring::integers: return x.a > 0;
    case Ring::gaussian: return x.a > 0 && x.b >= 0;
    case Ring::eisenstein: return x.b >= 0 && x.a > x.b;
    }
    return false;
}

// The associate of x lying in the first sector.
inline RingElement sector_associate(const RingElement& x) {
    if (x.is_zero()) return x;
    for (const RingElement& u : units(x.ring)) {
        const RingElement y = u * x;
        if (in_first_sector(y)) return y;
    }
    throw std::logic_error("sector_associate: no associate in first sector");
}

inline std::string to_string(const RingElement& x) {
    if (x.ring == Ring::integers) return std::to_string(x.a);
    const char* sym = x.ring == Ring::gaussian ? "j" : "w";
    if (x.b == 0) return std::to_string(x.a);
    std::string s;
    if (x.a != 0) s = std::to_string(x.a);
    if (x.b > 0 && x.a != 0) s += "+";
    if (x.b == -1) s += "-";
    else if (x.b != 1) s += std::to_string(x.b);
    return s + sym;
}

// --- rational primes and their behaviour ----------------------------------

inline bool is_rational_prime(int64_t p) {
    if (p < 2) return false;
    if (p < 4) return true;
    if (p % 2 == 0) return false;
    for (int64_t d = 3; d <= p / d; d += 2)
        if (p % d == 0) return false;
    return true;
}

enum class PrimeBehavior { rational, ramified, inert, split };

inline std::string_view to_string(PrimeBehavior b) {
    switch (b) {
    case PrimeBehavior::rational: return "rational";
    case PrimeBehavior::ramified: return "ramified";
    case PrimeBehavior::inert: return "inert";
    case PrimeBehavior::split: return "split";
    }
    return "?";
}

struct PrimeSpec {
    RingElement element;
    int64_t rational_prime = 0;  // p with element | p
    int64_t residue_size = 0;    // |R / element R|: p or p^2
    PrimeBehavior behavior = PrimeBehavior::rational;

    // Residue ring is the prime field F_p (everything except inert primes).
    bool prime_field() const { return behavior != PrimeBehavior::inert; }

    friend bool operator==(const PrimeSpec&, const PrimeSpec&) = default;
};

// Classifies an explicitly given ring element as a prime; throws otherwise.
inline PrimeSpec make_prime(const RingElement& x) {
    const Ring R = x.ring;
    if (R == Ring::integers) {
        const int64_t p = x.a < 0 ? -x.a : x.a;
        if (!is_rational_prime(p)) throw std::invalid_argument(to_string(x) + " is not prime in Z");
        return {x, p, p, PrimeBehavior::rational};
    }
    const int64_t n = norm(x);
    const int64_t ramified = (R == Ring::eisenstein) ? 3 : 2;
    const int64_t split_class = (R == Ring::eisenstein) ? 3 : 4;  // split iff p = 1 mod this
    if (is_rational_prime(n)) {
        if (n == ramified) return {x, n, n, PrimeBehavior::ramified};
        if (n % split_class == 1) return {x, n, n, PrimeBehavior::split};
    }
    // inert: unit times a rational prime p = -1 mod split_class
    for (const RingElement& u : units(R)) {
        const RingElement y = u * x;
        if (y.b == 0 && y.a > 0 && is_rational_prime(y.a) && y.a % split_class == split_class - 1)
            return {x, y.a, n, PrimeBehavior::inert};
    }
    throw std::invalid_argument(to_string(x) + " is not a prime of " + std::string(to_string(R)));
}

// Primes of R lying over the rational prime p. Split primes return the pair
// (phi, conj(phi)) where phi is the norm-p element of the first sector with
// the smallest real part.
inline std::vector<PrimeSpec> classify_rational_prime(int64_t p, Ring R) {
    if (!is_rational_prime(p)) throw std::invalid_argument(std::to_string(p) + " is not a rational prime");
    if (R == Ring::integers) return {make_prime(RingElement{R, p})};
    const int64_t ramified = (R == Ring::eisenstein) ? 3 : 2;
    const int64_t split_class = (R == Ring::eisenstein) ? 3 : 4;
    if (p == ramified) {
        const RingElement phi = (R == Ring::eisenstein) ? RingElement{R, 1, -1} : RingElement{R, 1, 1};
        return {make_prime(phi)};
    }
    if (p % split_class == split_class - 1) return {make_prime(RingElement{R, p, 0})};

    bool found = false;
    RingElement best;
    int64_t bound = 1;
    while (bound * bound <= 4 * p) ++bound;
    for (int64_t a = -bound; a <= bound; ++a) {
        for (int64_t b = -bound; b <= bound; ++b) {
            const RingElement x{R, a, b};
            if (norm(x) != p || !in_first_sector(x)) continue;
            if (!found || lex_less(x, best)) {
                best = x;
                found = true;
            }
        }
    }
    if (!found) throw std::logic_error("classify_rational_prime: no element of norm p found");
    return {make_prime(best), make_prime(conj(best))};
}

// --- reduction modulo a principal ideal ------------------------------------

// Canonical reduction modulo m*R via the Hermite normal form of m*R viewed as
// a sublattice of Z^2 (or Z). key() is a dense index in [0, |R/mR|).
class IdealReducer {
public:
    IdealReducer() = default;

    explicit IdealReducer(const RingElement& m) : modulus_(m) {
        if (m.is_zero()) throw std::domain_error("IdealReducer: zero modulus");
        if (m.ring == Ring::integers) {
            n1_ = m.a < 0 ? -m.a : m.a;
            g_ = 1;
            a2_ = 0;
            return;
        }
        const RingElement v1 = m;
        const RingElement v2 = m * RingElement::generator(m.ring);
        const detail::ExtGcd e = detail::ext_gcd(v1.b, v2.b);
        g_ = e.g;
        a2_ = detail::add(detail::mul(e.s, v1.a), detail::mul(e.t, v2.a));
        int64_t a1 = detail::sub(detail::mul(v2.b / g_, v1.a), detail::mul(v1.b / g_, v2.a));
        n1_ = a1 < 0 ? -a1 : a1;
        if (detail::mul(n1_, g_) != quotient_size(m)) throw std::logic_error("IdealReducer: index mismatch");
    }

    const RingElement& modulus() const { return modulus_; }
    int64_t index() const { return detail::mul(n1_, g_); }

    RingElement canonical(const RingElement& x) const {
        require_same_ring(x, modulus_);
        if (x.ring == Ring::integers) return {x.ring, detail::floor_mod(x.a, n1_), 0};
        const int64_t k = detail::floor_div(x.b, g_);
        const int64_t xb = detail::sub(x.b, detail::mul(k, g_));
        const int64_t xa = detail::floor_mod(detail::sub(x.a, detail::mul(k, a2_)), n1_);
        return {x.ring, xa, xb};
    }

    int64_t key(const RingElement& x) const {
        const RingElement c = canonical(x);
        return c.b * n1_ + c.a;
    }

    RingElement from_key(int64_t k) const { return {modulus_.ring, k % n1_, k / n1_}; }

    bool contains(const RingElement& x) const { return key(x) == 0; }
    bool congruent(const RingElement& x, const RingElement& y) const { return key(x - y) == 0; }

private:
    RingElement modulus_{};
    int64_t n1_ = 1;  // HNF (n1, 0), (a2, g)
    int64_t g_ = 1;
    int64_t a2_ = 0;
};

// Ring isomorphism R/phi R -> F_p for a prime whose residue ring is a prime field.
class PrimeResidueMap {
public:
    PrimeResidueMap() = default;

    explicit PrimeResidueMap(const PrimeSpec& prime) : p_(prime.rational_prime), reducer_(prime.element) {
        if (!prime.prime_field()) throw std::invalid_argument("PrimeResidueMap: residue ring is not a prime field");
        const Ring R = prime.element.ring;
        if (R == Ring::integers) return;
        const RingElement g = RingElement::generator(R);
        for (int64_t w = 0; w < p_; ++w) {
            if (reducer_.contains(g - RingElement{R, w})) {
                gen_image_ = w;
                return;
            }
        }
        throw std::logic_error("PrimeResidueMap: generator has no rational residue");
    }

    int64_t modulus() const { return p_; }

    int64_t operator()(const RingElement& x) const {
        const int64_t v = detail::add(detail::floor_mod(x.a, p_), detail::mul(detail::floor_mod(x.b, p_), gen_image_));
        return v % p_;
    }

private:
    int64_t p_ = 2;
    int64_t gen_image_ = 0;
    IdealReducer reducer_;
};

} // namespace ringcf
