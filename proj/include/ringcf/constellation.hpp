#pragma once

// Minimum-energy constellations R / Phi R, Phi = phi_1 ... phi_L, and labelings
// between label tuples and constellation points.
//
// A label is a flat digit vector. Primes whose residue ring is F_p contribute a
// single digit; inert primes (residue ring F_{p^2}) contribute two digits
// (v1, v0) standing for v1*x + v0.

#include "algebra.hpp"
#include "finite_field.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ringcf {

using Label = std::vector<int64_t>;

struct Block {
    PrimeSpec prime;
    int first_digit = 0;
    int n_digits = 1;
    QuadPoly poly;  // only meaningful for inert primes
};

// Tie-break between equal-norm representatives. `reflection` starts from the
// lexicographic choice and then makes the point set invariant under
// x -> u conj(x) (u = omega for Z[omega], j for Z[i]) where the ideal allows it.
enum class TieBreak { lexicographic, reflection };

inline std::string_view to_string(TieBreak t) { return t == TieBreak::lexicographic ? "lexicographic" : "reflection"; }

inline TieBreak tie_break_from_string(std::string_view s) {
    if (s == "lexicographic") return TieBreak::lexicographic;
    if (s == "reflection") return TieBreak::reflection;
    throw std::invalid_argument("unknown tie-break '" + std::string(s) + "'");
}

class Constellation {
public:
    Constellation() = default;

    explicit Constellation(std::vector<PrimeSpec> primes, TieBreak tie = TieBreak::lexicographic)
        : primes_(std::move(primes)), tie_(tie) {
        if (primes_.empty()) throw std::invalid_argument("constellation needs at least one prime");
        ring_ = primes_.front().element.ring;
        modulus_ = RingElement::one(ring_);
        for (size_t i = 0; i < primes_.size(); ++i) {
            if (primes_[i].element.ring != ring_) throw std::invalid_argument("primes from different rings");
            for (size_t j = 0; j < i; ++j)
                if (!relatively_prime(primes_[i].element, primes_[j].element))
                    throw std::invalid_argument("primes " + to_string(primes_[j].element) + " and " +
                                                to_string(primes_[i].element) + " are not relatively prime");
            modulus_ *= primes_[i].element;
        }
        reducer_ = IdealReducer(modulus_);
        build_points();
    }

    Ring ring() const { return ring_; }
    TieBreak tie_break() const { return tie_; }
    const std::vector<PrimeSpec>& primes() const { return primes_; }
    const RingElement& modulus() const { return modulus_; }
    const IdealReducer& reducer() const { return reducer_; }
    size_t size() const { return points_.size(); }

    // points()[k] is the representative of the class with reducer key k.
    const std::vector<RingElement>& points() const { return points_; }

    int64_t index_of(const RingElement& x) const { return reducer_.key(x); }
    const RingElement& representative(const RingElement& x) const { return points_[size_t(index_of(x))]; }

    double mean_energy() const {
        long double s = 0;
        for (const RingElement& p : points_) s += (long double)norm(p);
        return double(s / (long double)points_.size());
    }

private:
    void build_points() {
        const int64_t n = reducer_.index();
        if (n > 2'000'000) throw std::length_error("constellation too large");
        points_.assign(size_t(n), RingElement{});
        std::vector<char> seen(size_t(n), 0);
        auto offer = [&](const RingElement& x) {
            const size_t k = size_t(reducer_.key(x));
            if (!seen[k] || norm(x) < norm(points_[k]) ||
                (norm(x) == norm(points_[k]) && lex_less(x, points_[k]))) {
                points_[k] = x;
                seen[k] = 1;
            }
        };
        if (ring_ == Ring::integers) {
            for (int64_t a = -n; a <= n; ++a) offer({ring_, a});
        } else {
            // every class has a representative of norm <= norm(Phi); norm >= (a^2+b^2)/2
            const int64_t B = int64_t(std::ceil(std::sqrt(2.0 * double(n)))) + 1;
            for (int64_t a = -B; a <= B; ++a)
                for (int64_t b = -B; b <= B; ++b) offer({ring_, a, b});
        }
        for (char s : seen)
            if (!s) throw std::logic_error("constellation: residue class without representative");
        if (tie_ == TieBreak::reflection) reflect_ties();
    }

    void reflect_ties() {
        if (ring_ == Ring::integers) return;
        const RingElement u = RingElement::generator(ring_);
        if (!reducer_.contains(u * conj(modulus_))) return;  // ideal not mapped to itself
        for (size_t k = 0; k < points_.size(); ++k) {
            const RingElement r = u * conj(points_[k]);
            const size_t kr = size_t(reducer_.key(r));
            if (kr > k) points_[kr] = r;
        }
    }

    Ring ring_ = Ring::integers;
    std::vector<PrimeSpec> primes_;
    TieBreak tie_ = TieBreak::lexicographic;
    RingElement modulus_;
    IdealReducer reducer_;
    std::vector<RingElement> points_;
};

// e_l = 1 mod phi_l, 0 mod phi_l' (l' != l); canonical reduced representatives.
inline std::vector<RingElement> crt_idempotents(const std::vector<PrimeSpec>& primes) {
    if (primes.empty()) throw std::invalid_argument("crt_idempotents: no primes");
    const Ring R = primes.front().element.ring;
    RingElement Phi = RingElement::one(R);
    for (const PrimeSpec& p : primes) Phi *= p.element;
    const IdealReducer red(Phi);
    std::vector<RingElement> out;
    for (size_t l = 0; l < primes.size(); ++l) {
        RingElement rest = RingElement::one(R);
        for (size_t k = 0; k < primes.size(); ++k)
            if (k != l) rest *= primes[k].element;
        const Bezout bz = bezout(primes[l].element, rest);
        if (!is_unit(bz.g)) throw std::invalid_argument("crt_idempotents: primes not relatively prime");
        out.push_back(red.canonical(bz.t * rest * unit_inverse(bz.g)));
    }
    return out;
}

enum class LabelKind { crt_ring_iso, module_iso_general, module_iso_custom, extfield_ring_iso, naive_ungerboeck };

inline std::string_view to_string(LabelKind k) {
    switch (k) {
    case LabelKind::crt_ring_iso: return "crt-ring-iso";
    case LabelKind::module_iso_general: return "module-iso-general";
    case LabelKind::module_iso_custom: return "module-iso-custom";
    case LabelKind::extfield_ring_iso: return "extfield-ring-iso";
    case LabelKind::naive_ungerboeck: return "naive-ungerboeck";
    }
    return "?";
}

inline LabelKind label_kind_from_string(std::string_view s) {
    for (LabelKind k : {LabelKind::crt_ring_iso, LabelKind::module_iso_general, LabelKind::module_iso_custom,
                        LabelKind::extfield_ring_iso, LabelKind::naive_ungerboeck})
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown labeling kind '" + std::string(s) + "'");
}

inline bool is_ring_kind(LabelKind k) { return k == LabelKind::crt_ring_iso || k == LabelKind::extfield_ring_iso; }

// Smallest (Re, Im) minimum-energy representative of R/phi that is a root of poly.
inline RingElement poly_root_mod(const PrimeSpec& prime, const QuadPoly& poly) {
    const Constellation c({prime});
    const Ring R = prime.element.ring;
    std::optional<RingElement> best;
    for (const RingElement& t : c.points()) {
        const RingElement v = t * t + RingElement{R, poly.c1} * t + RingElement{R, poly.c0};
        if (!c.reducer().contains(v)) continue;
        if (!best || lex_less(t, *best)) best = t;
    }
    if (!best) throw std::invalid_argument("polynomial has no root modulo " + to_string(prime.element));
    return *best;
}

struct HomCheck {
    bool pass = true;
    std::optional<std::pair<Label, Label>> counterexample;
};

struct HomReport {
    HomCheck additive;
    std::optional<HomCheck> multiplicative;  // only for ring kinds
};

class Labeling {
public:
    Labeling() = default;

    // generators: one per digit for module-iso-custom, ignored otherwise.
    // polys: per inert prime (in order); defaults used when missing.
    Labeling(Constellation c, LabelKind kind, std::vector<RingElement> generators = {},
             std::vector<QuadPoly> polys = {})
        : con_(std::move(c)), kind_(kind) {
        size_t inert_seen = 0;
        int digit = 0;
        for (const PrimeSpec& p : con_.primes()) {
            Block b;
            b.prime = p;
            b.first_digit = digit;
            b.n_digits = p.prime_field() ? 1 : 2;
            if (!p.prime_field()) {
                b.poly = inert_seen < polys.size() ? polys[inert_seen] : default_poly(p.rational_prime);
                if (b.poly.q != p.rational_prime || b.poly.has_root())
                    throw std::invalid_argument("extension polynomial must be irreducible over F_" +
                                                std::to_string(p.rational_prime));
                ++inert_seen;
            }
            for (int d = 0; d < b.n_digits; ++d) digit_modulus_.push_back(p.rational_prime), digit_block_.push_back(int(blocks_.size()));
            digit += b.n_digits;
            blocks_.push_back(b);
        }
        switch (kind_) {
        case LabelKind::extfield_ring_iso:
            if (con_.primes().size() != 1 || con_.primes()[0].prime_field())
                throw std::invalid_argument("extfield-ring-iso needs a single inert prime");
            [[fallthrough]];
        case LabelKind::crt_ring_iso: {
            const std::vector<RingElement> e = crt_idempotents(con_.primes());
            for (size_t l = 0; l < blocks_.size(); ++l) {
                if (blocks_[l].n_digits == 1) {
                    generators_.push_back(e[l]);
                } else {
                    const RingElement theta = poly_root_mod(blocks_[l].prime, blocks_[l].poly);
                    generators_.push_back(con_.reducer().canonical(theta * e[l]));
                    generators_.push_back(e[l]);
                }
            }
            break;
        }
        case LabelKind::module_iso_general: {
            for (size_t l = 0; l < blocks_.size(); ++l) {
                RingElement g = RingElement::one(con_.ring());
                for (size_t k = 0; k < blocks_.size(); ++k)
                    if (k != l) g *= blocks_[k].prime.element;
                if (blocks_[l].n_digits == 2) generators_.push_back(g * RingElement::generator(con_.ring()));
                generators_.push_back(g);
            }
            break;
        }
        case LabelKind::module_iso_custom:
            if (generators.size() != digit_modulus_.size())
                throw std::invalid_argument("module-iso-custom needs " + std::to_string(digit_modulus_.size()) +
                                            " generators");
            for (const RingElement& g : generators)
                if (g.ring != con_.ring()) throw std::invalid_argument("generator from a different ring");
            generators_ = std::move(generators);
            break;
        case LabelKind::naive_ungerboeck:
            build_naive();
            return;
        }
        build_from_generators();
    }

    const Constellation& constellation() const { return con_; }
    LabelKind kind() const { return kind_; }
    const std::vector<Block>& blocks() const { return blocks_; }
    const std::vector<RingElement>& generators() const { return generators_; }
    size_t n_digits() const { return digit_modulus_.size(); }
    int64_t digit_modulus(size_t d) const { return digit_modulus_[d]; }
    int digit_block(size_t d) const { return digit_block_[d]; }
    size_t size() const { return con_.size(); }

    // Flat label index, first digit most significant.
    int64_t label_index(const Label& v) const {
        if (v.size() != n_digits()) throw std::invalid_argument("label has wrong number of digits");
        int64_t k = 0;
        for (size_t d = 0; d < v.size(); ++d) k = k * digit_modulus_[d] + detail::floor_mod(v[d], digit_modulus_[d]);
        return k;
    }

    Label label_at(int64_t k) const {
        Label v(n_digits());
        for (size_t d = n_digits(); d-- > 0;) {
            v[d] = k % digit_modulus_[d];
            k /= digit_modulus_[d];
        }
        return v;
    }

    // Point index (constellation order) of a flat label index and back.
    int64_t point_of(int64_t label) const { return point_of_label_[size_t(label)]; }
    int64_t label_of(int64_t point) const { return label_of_point_[size_t(point)]; }

    const RingElement& map(const Label& v) const { return con_.points()[size_t(point_of(label_index(v)))]; }

    Label demap(const RingElement& x) const { return label_at(label_of(con_.index_of(x))); }

    Label add(const Label& u, const Label& v) const {
        Label r(n_digits());
        for (size_t d = 0; d < r.size(); ++d) r[d] = detail::floor_mod(u[d] + v[d], digit_modulus_[d]);
        return r;
    }

    // Componentwise product in F_{q_1} x ... (extension-field product on inert blocks).
    Label mul(const Label& u, const Label& v) const {
        Label r(n_digits());
        for (const Block& b : blocks_) {
            const int d = b.first_digit;
            const int64_t q = b.prime.rational_prime;
            if (b.n_digits == 1) {
                r[size_t(d)] = detail::floor_mod(u[size_t(d)] * v[size_t(d)], q);
            } else {
                const ExtFieldElement x{b.poly, u[size_t(d)], u[size_t(d) + 1]};
                const ExtFieldElement y{b.poly, v[size_t(d)], v[size_t(d) + 1]};
                const ExtFieldElement z = x * y;
                r[size_t(d)] = z.v1;
                r[size_t(d) + 1] = z.v0;
            }
        }
        return r;
    }

    HomReport verify_homomorphism() const {
        HomReport rep;
        const int64_t n = int64_t(size());
        const IdealReducer& red = con_.reducer();
        const auto& pts = con_.points();
        auto check = [&](bool multiplicative) {
            HomCheck hc;
            for (int64_t i = 0; i < n && hc.pass; ++i) {
                const Label u = label_at(i);
                const RingElement& xu = pts[size_t(point_of(i))];
                for (int64_t j = 0; j < n; ++j) {
                    const Label v = label_at(j);
                    const RingElement& xv = pts[size_t(point_of(j))];
                    const Label w = multiplicative ? mul(u, v) : add(u, v);
                    const RingElement xw = multiplicative ? xu * xv : xu + xv;
                    if (red.key(xw) != point_of(label_index(w))) {
                        hc.pass = false;
                        hc.counterexample = std::make_pair(u, v);
                        break;
                    }
                }
            }
            return hc;
        };
        rep.additive = check(false);
        if (is_ring_kind(kind_)) rep.multiplicative = check(true);
        return rep;
    }

private:
    void set_tables(const std::vector<int64_t>& point_of_label) {
        const size_t n = size();
        point_of_label_ = point_of_label;
        label_of_point_.assign(n, -1);
        for (size_t k = 0; k < n; ++k) {
            const int64_t p = point_of_label_[k];
            if (p < 0 || label_of_point_[size_t(p)] != -1)
                throw std::invalid_argument("labeling is not a bijection (generators not independent)");
            label_of_point_[size_t(p)] = int64_t(k);
        }
    }

    void build_from_generators() {
        const size_t n = size();
        std::vector<int64_t> pol(n);
        for (size_t k = 0; k < n; ++k) {
            const Label v = label_at(int64_t(k));
            RingElement x = RingElement::zero(con_.ring());
            for (size_t d = 0; d < v.size(); ++d) x += v[d] * generators_[d];
            pol[k] = con_.index_of(x);
        }
        set_tables(pol);
    }

    // Level 1 is the residue mod phi; level 2 the residue mod psi of the
    // quotient after removing the minimum-energy representative mod phi.
    void build_naive() {
        const auto& ps = con_.primes();
        if (ps.size() != 2 || !ps[0].prime_field() || !ps[1].prime_field() || ps[0].residue_size != ps[1].residue_size)
            throw std::invalid_argument("naive-ungerboeck needs two primes with equal prime residue fields");
        const Constellation inner({ps[0]});
        const PrimeResidueMap s1(ps[0]), s2(ps[1]);
        const size_t n = size();
        std::vector<int64_t> pol(n, -1);
        for (size_t p = 0; p < n; ++p) {
            const RingElement& x = con_.points()[p];
            const RingElement& r = inner.representative(x);
            const RingElement k = exact_div(x - r, ps[0].element);
            const Label v{s1(r), s2(k)};
            pol[size_t(label_index(v))] = int64_t(p);
        }
        set_tables(pol);
    }

    Constellation con_;
    LabelKind kind_ = LabelKind::crt_ring_iso;
    std::vector<Block> blocks_;
    std::vector<int64_t> digit_modulus_;
    std::vector<int> digit_block_;
    std::vector<RingElement> generators_;
    std::vector<int64_t> point_of_label_;
    std::vector<int64_t> label_of_point_;
};

inline Labeling make_naive_ungerboeck(const Constellation& c) { return Labeling(c, LabelKind::naive_ungerboeck); }

} // namespace ringcf
