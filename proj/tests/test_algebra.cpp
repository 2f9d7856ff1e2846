#include "ringcf/algebra.hpp"
#include "ringcf/finite_field.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

using namespace ringcf;

namespace {

const Ring kRings[] = {Ring::integers, Ring::gaussian, Ring::eisenstein};

RingElement random_element(std::mt19937_64& rng, Ring R, int64_t span) {
    std::uniform_int_distribution<int64_t> U(-span, span);
    const int64_t a = U(rng);
    return {R, a, R == Ring::integers ? 0 : U(rng)};
}

} // namespace

TEST(Ring, ArithmeticMatchesComplexNumbers) {
    std::mt19937_64 rng(1);
    for (Ring R : kRings) {
        for (int t = 0; t < 500; ++t) {
            const RingElement x = random_element(rng, R, 50), y = random_element(rng, R, 50);
            const std::complex<double> cx = x.to_complex(), cy = y.to_complex();
            EXPECT_NEAR(std::abs((x * y).to_complex() - cx * cy), 0.0, 1e-9);
            EXPECT_NEAR(std::abs((x + y).to_complex() - (cx + cy)), 0.0, 1e-9);
            EXPECT_NEAR(std::abs(conj(x).to_complex() - std::conj(cx)), 0.0, 1e-9);
            EXPECT_NEAR(double(norm(x)), std::norm(cx), 1e-6);
        }
    }
}

TEST(Ring, OmegaSquared) {
    const RingElement w{Ring::eisenstein, 0, 1};
    EXPECT_EQ(w * w, (RingElement{Ring::eisenstein, -1, -1}));
    EXPECT_EQ(w * w * w, RingElement::one(Ring::eisenstein));
}

TEST(Ring, OverflowIsDetected) {
    const RingElement big{Ring::gaussian, int64_t(1) << 40, 0};
    EXPECT_THROW(big * big, std::overflow_error);
}

TEST(Ring, UnitsHaveNormOne) {
    EXPECT_EQ(units(Ring::integers).size(), 2u);
    EXPECT_EQ(units(Ring::gaussian).size(), 4u);
    EXPECT_EQ(units(Ring::eisenstein).size(), 6u);
    for (Ring R : kRings)
        for (const RingElement& u : units(R)) {
            EXPECT_EQ(norm(u), 1);
            EXPECT_EQ(u * unit_inverse(u), RingElement::one(R));
        }
}

// Oracle: the smallest remainder norm over a window of quotients around x/m.
TEST(Ring, EuclidRemainderIsMinimal) {
    std::mt19937_64 rng(2);
    for (Ring R : kRings) {
        for (int t = 0; t < 300; ++t) {
            const RingElement x = random_element(rng, R, 60);
            RingElement m = random_element(rng, R, 9);
            if (m.is_zero()) continue;
            const auto [q, r] = euclid_divmod(x, m);
            EXPECT_EQ(q * m + r, x);
            EXPECT_LT(norm(r), norm(m));
            const std::complex<double> z = x.to_complex() / m.to_complex();
            int64_t best = norm(x);
            // z in (1, w) or (1, i) coordinates
            const double zb = R == Ring::eisenstein ? 2 * z.imag() / std::sqrt(3.0) : z.imag();
            const double za = R == Ring::eisenstein ? z.real() + zb / 2 : z.real();
            const int64_t a0 = int64_t(std::floor(za)) - 3, b0 = int64_t(std::floor(zb)) - 3;
            for (int64_t a = a0; a <= a0 + 6; ++a)
                for (int64_t b = b0; b <= b0 + 6; ++b) {
                    if (R == Ring::integers && b != 0) continue;
                    const RingElement qq{R, a, b};
                    best = std::min(best, norm(x - qq * m));
                }
            EXPECT_EQ(norm(r), best);
        }
    }
}

TEST(Ring, EuclidTieBreakIsLexicographic) {
    // 3 mod 2 in Z: remainders 1 and -1 tie; the smaller one wins.
    const auto r = euclid_divmod(RingElement{Ring::integers, 3}, RingElement{Ring::integers, 2}).remainder;
    EXPECT_EQ(r.a, -1);
}

TEST(Ring, BezoutIdentity) {
    std::mt19937_64 rng(3);
    for (Ring R : kRings) {
        for (int t = 0; t < 200; ++t) {
            const RingElement x = random_element(rng, R, 40), y = random_element(rng, R, 40);
            if (x.is_zero() && y.is_zero()) continue;
            const Bezout b = bezout(x, y);
            EXPECT_EQ(b.s * x + b.t * y, b.g);
            EXPECT_TRUE(divides(b.g, x));
            EXPECT_TRUE(divides(b.g, y));
        }
    }
    EXPECT_THROW(bezout(RingElement::zero(Ring::gaussian), RingElement::zero(Ring::gaussian)), std::invalid_argument);
}

TEST(Ring, UnitMultipleIsAssociate) {
    std::mt19937_64 rng(4);
    for (Ring R : kRings)
        for (int t = 0; t < 50; ++t) {
            const RingElement x = random_element(rng, R, 30);
            if (x.is_zero()) continue;
            for (const RingElement& u : units(R)) EXPECT_TRUE(are_associates(x, u * x));
            EXPECT_TRUE(in_first_sector(sector_associate(x)));
        }
}

TEST(Primes, CanonicalSplitFactors) {
    const auto e7 = classify_rational_prime(7, Ring::eisenstein);
    ASSERT_EQ(e7.size(), 2u);
    EXPECT_EQ(e7[0].element, (RingElement{Ring::eisenstein, 3, 2}));
    EXPECT_EQ(e7[1].element, (RingElement{Ring::eisenstein, 1, -2}));
    EXPECT_EQ(e7[0].behavior, PrimeBehavior::split);

    const auto g5 = classify_rational_prime(5, Ring::gaussian);
    EXPECT_EQ(g5[0].element, (RingElement{Ring::gaussian, 1, 2}));
    EXPECT_EQ(g5[1].element, (RingElement{Ring::gaussian, 1, -2}));
    const auto g13 = classify_rational_prime(13, Ring::gaussian);
    EXPECT_EQ(g13[0].element, (RingElement{Ring::gaussian, 2, 3}));
    EXPECT_EQ(g13[1].element, (RingElement{Ring::gaussian, 2, -3}));
}

TEST(Primes, RamifiedAndInert) {
    const auto e3 = classify_rational_prime(3, Ring::eisenstein);
    ASSERT_EQ(e3.size(), 1u);
    EXPECT_EQ(e3[0].element, (RingElement{Ring::eisenstein, 1, -1}));
    EXPECT_EQ(e3[0].behavior, PrimeBehavior::ramified);
    const auto g2 = classify_rational_prime(2, Ring::gaussian);
    EXPECT_EQ(g2[0].element, (RingElement{Ring::gaussian, 1, 1}));

    const auto e5 = classify_rational_prime(5, Ring::eisenstein);
    ASSERT_EQ(e5.size(), 1u);
    EXPECT_EQ(e5[0].behavior, PrimeBehavior::inert);
    EXPECT_EQ(e5[0].residue_size, 25);
    EXPECT_EQ(classify_rational_prime(3, Ring::gaussian)[0].residue_size, 9);
    EXPECT_EQ(classify_rational_prime(7, Ring::integers)[0].residue_size, 7);
    EXPECT_THROW(classify_rational_prime(9, Ring::eisenstein), std::invalid_argument);
}

// Split behaviour follows p mod 3 (Eisenstein) and p mod 4 (Gaussian).
TEST(Primes, SplittingLawProperty) {
    for (int64_t p = 2; p < 200; ++p) {
        if (!is_rational_prime(p)) continue;
        for (Ring R : {Ring::gaussian, Ring::eisenstein}) {
            const auto f = classify_rational_prime(p, R);
            int64_t prod_norm = 1;
            for (const auto& s : f) prod_norm *= norm(s.element);
            const int64_t m = R == Ring::gaussian ? 4 : 3;
            const bool ramified = (R == Ring::gaussian && p == 2) || (R == Ring::eisenstein && p == 3);
            EXPECT_EQ(prod_norm, ramified ? p : p * p) << p;
            if (p % m == 1) EXPECT_EQ(f.size(), 2u) << p;
            if (f.size() == 2) EXPECT_TRUE(relatively_prime(f[0].element, f[1].element)) << p;
        }
    }
}

TEST(Primes, MakePrimeRejectsComposites) {
    EXPECT_THROW(make_prime(RingElement{Ring::gaussian, 2, 0}), std::invalid_argument);
    EXPECT_THROW(make_prime(RingElement{Ring::eisenstein, 7, 0}), std::invalid_argument);
    EXPECT_NO_THROW(make_prime(RingElement{Ring::eisenstein, 2, 0}));
}

TEST(Reducer, KeysAreDenseAndCompatible) {
    std::mt19937_64 rng(5);
    for (const RingElement& m : {RingElement{Ring::eisenstein, 7, 0}, RingElement{Ring::eisenstein, 3, 2},
                                 RingElement{Ring::gaussian, 5, 8}, RingElement{Ring::integers, 6}}) {
        const IdealReducer red(m);
        EXPECT_EQ(red.index(), quotient_size(m));
        for (int64_t k = 0; k < red.index(); ++k) EXPECT_EQ(red.key(red.from_key(k)), k);
        for (int t = 0; t < 200; ++t) {
            const RingElement x = random_element(rng, m.ring, 100);
            const RingElement z = random_element(rng, m.ring, 20);
            EXPECT_EQ(red.key(x), red.key(x + z * m));
            EXPECT_EQ(red.contains(x), divides(m, x));
        }
    }
}

TEST(Reducer, ResidueMapIsARingHomomorphism) {
    std::mt19937_64 rng(6);
    for (const auto& p : {classify_rational_prime(7, Ring::eisenstein)[1], classify_rational_prime(13, Ring::gaussian)[0],
                          classify_rational_prime(3, Ring::eisenstein)[0]}) {
        const PrimeResidueMap s(p);
        for (int t = 0; t < 200; ++t) {
            const RingElement x = random_element(rng, p.element.ring, 50), y = random_element(rng, p.element.ring, 50);
            EXPECT_EQ(s(x + y), (s(x) + s(y)) % s.modulus());
            EXPECT_EQ(s(x * y), (s(x) * s(y)) % s.modulus());
            EXPECT_EQ(s(x) == 0, divides(p.element, x));
        }
    }
}

TEST(FiniteField, PrimeFieldInverses) {
    for (int64_t q : {2, 3, 5, 7, 13})
        for (int64_t x = 1; x < q; ++x) EXPECT_EQ((FieldElement{q, x} * inverse(FieldElement{q, x})).value, 1);
    EXPECT_THROW(inverse(FieldElement{5, 0}), std::domain_error);
}

TEST(FiniteField, DefaultPolynomials) {
    const QuadPoly p5 = default_poly(5);
    EXPECT_EQ(p5.c1, 2);
    EXPECT_EQ(p5.c0, 4);
    for (int64_t q : {2, 3, 5, 7, 11}) EXPECT_FALSE(default_poly(q).has_root()) << q;
}

// Oracle: schoolbook polynomial product reduced by x^2 = -c1 x - c0.
TEST(FiniteField, ExtensionProductMatchesPolynomialOracle) {
    for (int64_t q : {2, 3, 5}) {
        const QuadPoly P = default_poly(q);
        for (int64_t a = 0; a < q * q; ++a)
            for (int64_t b = 0; b < q * q; ++b) {
                const ExtFieldElement x{P, a / q, a % q}, y{P, b / q, b % q};
                const int64_t s2 = x.v1 * y.v1, s1 = x.v1 * y.v0 + x.v0 * y.v1, s0 = x.v0 * y.v0;
                const int64_t r1 = detail::floor_mod(s1 - s2 * P.c1, q);
                const int64_t r0 = detail::floor_mod(s0 - s2 * P.c0, q);
                const ExtFieldElement z = x * y;
                EXPECT_EQ(z.v1, r1);
                EXPECT_EQ(z.v0, r0);
                if (a) EXPECT_EQ(x * inverse(x), (ExtFieldElement{P, 0, 1}));
            }
    }
}

TEST(FiniteField, MultiplicationMatrixConvention) {
    // In F_5[x]/(x^2 + 2x + 4): x^2 = 3x + 1, so b * c has matrix [[b2 + 3 b1, b1], [b1, b2]] on (c1, c0).
    const QuadPoly P = default_poly(5);
    for (int64_t b1 = 0; b1 < 5; ++b1)
        for (int64_t b2 = 0; b2 < 5; ++b2) {
            const auto M = mult_matrix(ExtFieldElement{P, b1, b2});
            EXPECT_EQ(M[0][0], (b2 + 3 * b1) % 5);
            EXPECT_EQ(M[0][1], b1);
            EXPECT_EQ(M[1][0], b1);
            EXPECT_EQ(M[1][1], b2);
        }
}
