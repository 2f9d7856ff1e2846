#include "ringcf/rates.hpp"
#include "ringcf/sweep.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace ringcf;

namespace {

const Ring E = Ring::eisenstein;

std::vector<PrimeSpec> primes_49() {
    const auto s = classify_rational_prime(7, E);
    return {s[0], s[1]};
}

Labeling labeling_21() {
    const PrimeSpec p1 = make_prime({E, 1, 2}), p2 = make_prime({E, 3, 2});
    return Labeling(Constellation({p1, p2}), LabelKind::module_iso_custom,
                    {RingElement{E, 2} * p2.element, RingElement{E, 3} * p1.element});
}

double db(double x) { return std::pow(10.0, x / 10.0); }

// Oracle: rate from (|a|^2 - P|h^H a|^2 / (1 + P|h|^2))^{-1} directly.
double rate_oracle(const CVec& h, const CVec& a, double P) {
    cplx ha = 0;
    double aa = 0, hh = 0;
    for (size_t k = 0; k < h.size(); ++k) {
        ha += std::conj(h[k]) * a[k];
        aa += std::norm(a[k]);
        hh += std::norm(h[k]);
    }
    return std::max(0.0, -std::log2(aa - P * std::norm(ha) / (1 + P * hh)));
}

// Oracle: I(Y; b1 c1 + b2 c2) by quadrature over a grid in the plane, with
// y = gamma (h1 x1 + h2 x2) + z, z ~ CN(0, 1).
double mi_quadrature(const Labeling& lab, const ChannelConfig& ch, const Label& b1, const Label& b2) {
    const size_t n = lab.size();
    const double g = std::sqrt(ch.P / lab.constellation().mean_energy());
    std::vector<cplx> s;
    std::vector<int64_t> v;
    int64_t nv = 1;
    for (size_t d = 0; d < lab.n_digits(); ++d) nv *= lab.digit_modulus(d);
    double lo_r = 1e300, hi_r = -1e300, lo_i = 1e300, hi_i = -1e300;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            const Label u = lab.label_at(int64_t(i)), w = lab.label_at(int64_t(j));
            int64_t key = 0;
            for (size_t d = 0; d < u.size(); ++d)
                key = key * lab.digit_modulus(d) +
                      detail::floor_mod(b1[d] * u[d] + b2[d] * w[d], lab.digit_modulus(d));
            const cplx p = g * (ch.h[0] * lab.map(u).to_complex() + ch.h[1] * lab.map(w).to_complex());
            s.push_back(p);
            v.push_back(key);
            lo_r = std::min(lo_r, p.real()), hi_r = std::max(hi_r, p.real());
            lo_i = std::min(lo_i, p.imag()), hi_i = std::max(hi_i, p.imag());
        }
    const double step = 0.04, pad = 6.0;
    const double pv = 1.0 / double(s.size());
    std::vector<double> pmf(size_t(nv), 0.0);
    for (int64_t k : v) pmf[size_t(k)] += pv;
    double hv = 0;
    for (double p : pmf)
        if (p > 0) hv -= p * std::log2(p);
    double cond = 0;
    std::vector<double> m(static_cast<size_t>(nv));
    for (double yr = lo_r - pad; yr <= hi_r + pad; yr += step)
        for (double yi = lo_i - pad; yi <= hi_i + pad; yi += step) {
            std::fill(m.begin(), m.end(), 0.0);
            double py = 0;
            for (size_t k = 0; k < s.size(); ++k) {
                const double f = pv * std::exp(-std::norm(cplx(yr, yi) - s[k])) / M_PI;
                m[size_t(v[k])] += f;
                py += f;
            }
            if (py <= 0) continue;
            for (double x : m)
                if (x > 0) cond -= x * std::log2(x / py) * step * step;
        }
    return hv - cond;
}

} // namespace

TEST(ClosedForm, MmseCoefficient) {
    const cplx a = alpha_mmse({1.0, 1.0}, {1.0, 1.0}, 10.0);
    EXPECT_NEAR(std::abs(a - cplx(20.0 / 21.0)), 0.0, 1e-15);
    EXPECT_THROW(alpha_mmse({1.0}, {1.0, 1.0}, 1.0), std::invalid_argument);
}

TEST(ClosedForm, EqualGainsGiveLogHalfPlusP) {
    for (double P : {0.5, 1.0, 10.0, 1000.0})
        EXPECT_NEAR(computation_rate({1.0, 1.0}, {1.0, 1.0}, P), std::max(0.0, std::log2(0.5 + P)), 1e-12);
}

TEST(ClosedForm, MatchesDirectFormAndUnitInvariance) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> N(0.0, 1.0);
    const RingElement w{E, 0, 1};
    for (int t = 0; t < 200; ++t) {
        const CVec h{cplx(N(rng), N(rng)), cplx(N(rng), N(rng))};
        const RingElement a1{E, int64_t(rng() % 5) - 2, int64_t(rng() % 5) - 2};
        const RingElement a2{E, int64_t(rng() % 5) - 2, int64_t(rng() % 5) - 2};
        if (a1.is_zero() && a2.is_zero()) continue;
        const double P = db(double(rng() % 40));
        const CVec a{a1.to_complex(), a2.to_complex()};
        const double r = computation_rate(h, a, P);
        EXPECT_NEAR(r, rate_oracle(h, a, P), 1e-6 * std::max(1.0, r));
        RingElement u = RingElement::one(E);
        for (int k = 0; k < 6; ++k, u = -(u * w)) {
            const CVec au{(u * a1).to_complex(), (u * a2).to_complex()};
            EXPECT_NEAR(computation_rate(h, au, P), r, 1e-9);
        }
    }
    EXPECT_THROW(computation_rate({1.0, 1.0}, {0.0, 0.0}, 1.0), std::invalid_argument);
}

// Oracle: exhaustive enumeration without sector reduction.
TEST(ClosedForm, SearchFindsTheBestCoefficients) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> N(0.0, 1.0);
    for (Ring R : {Ring::eisenstein, Ring::gaussian})
        for (int t = 0; t < 10; ++t) {
            const CVec h{cplx(N(rng), N(rng)), cplx(N(rng), N(rng))};
            const double P = db(20.0);
            const CoeffSearchResult res = search_coeffs(h, P, R, 2);
            double best = 0;
            for (int64_t a = -4; a <= 4; ++a)
                for (int64_t b = -4; b <= 4; ++b)
                    for (int64_t c = -4; c <= 4; ++c)
                        for (int64_t d = -4; d <= 4; ++d) {
                            const RingElement x{R, a, b}, y{R, c, d};
                            if (norm(x) > 4 || norm(y) > 4 || (x.is_zero() && y.is_zero())) continue;
                            best = std::max(best, computation_rate(h, {x.to_complex(), y.to_complex()}, P));
                        }
            EXPECT_NEAR(res.rate, best, 1e-12);
            EXPECT_NEAR(computation_rate(h, {res.a[0].to_complex(), res.a[1].to_complex()}, P), res.rate, 1e-12);
        }
    EXPECT_THROW(search_coeffs({1.0, 1.0, 1.0, 1.0}, 1.0, E, 5, 1e3), std::length_error);
}

TEST(MonteCarlo, DirectMatchesQuadratureOnThreePoints) {
    const Labeling z3(Constellation({make_prime({Ring::integers, 3})}), LabelKind::crt_ring_iso);
    const Labeling e3(Constellation({classify_rational_prime(3, E)[0]}), LabelKind::crt_ring_iso);
    const std::vector<std::pair<const Labeling*, ChannelConfig>> cases{
        {&z3, {{1.0, 1.0}, db(10.0)}},
        {&z3, {{cplx(1.0, 0.0), cplx(0.6, 0.5)}, db(5.0)}},
        {&e3, {{cplx(1.0, 0.0), cplx(0.6, 0.3)}, db(10.0)}},
        {&e3, {{1.0, 1.0}, db(0.0)}},
    };
    for (const auto& [lab, ch] : cases) {
        const RateEstimate r = mi_direct(*lab, ch, {1}, {1}, 200000, 3);
        const double o = mi_quadrature(*lab, ch, {1}, {1});
        EXPECT_NEAR(r.value, o, 4 * r.stderr + 0.002);
        EXPECT_LT(r.stderr, 0.005);
    }
}

TEST(MonteCarlo, VanishesAtLowPowerAndIsBounded) {
    const Labeling lab(Constellation(primes_49()), LabelKind::module_iso_general);
    const RateEstimate lo = mi_direct(lab, {{1.0, 1.0}, 1e-6}, {1, 1}, {1, 1}, 20000, 4);
    EXPECT_NEAR(lo.value, 0.0, 1e-3);
    const RateEstimate hi = mi_direct(lab, {{1.0, 1.0}, db(40.0)}, {1, 1}, {1, 1}, 20000, 4);
    EXPECT_LE(hi.value, std::log2(49.0) + 3 * hi.stderr + 1e-12);
    EXPECT_GT(hi.value, std::log2(49.0) - 0.05);
    EXPECT_THROW(mi_direct(lab, {{1.0, 1.0}, 1.0}, {0, 0}, {0, 0}, 100, 1), std::invalid_argument);
    EXPECT_THROW(mi_direct(lab, {{1.0, 1.0}, 0.0}, {1, 1}, {1, 1}, 100, 1), std::invalid_argument);
}

// With shared samples the per-level log ratios telescope to the joint one.
TEST(MonteCarlo, ChainRuleHoldsPerSample) {
    const Labeling lab(Constellation(primes_49()), LabelKind::module_iso_general);
    const LevelCoeffs b{{1, 3}, {2, 5}};
    for (double snr : {0.0, 10.0, 25.0}) {
        const ChannelConfig ch{{cplx(1.0, 0.1), cplx(0.8, -0.4)}, db(snr)};
        const MlcRates m = mi_mlc(lab, ch, b, 8000, 5);
        const RateEstimate j = mi_joint(lab, ch, b, 8000, 5);
        EXPECT_NEAR(m.sum.value, j.value, 1e-9) << snr;
    }
}

TEST(MonteCarlo, DecoderOrdering) {
    const Labeling lab(Constellation(primes_49()), LabelKind::module_iso_general);
    const ChannelConfig ch{{cplx(1.0), RingElement{E, 2, 1}.to_complex()}, db(10.0)};
    const MiEngine eng(lab, ch);
    const auto r = estimate_modes(eng, {RateMode::mlc, RateMode::sub, RateMode::para}, CoeffSpec{}, 20000, 6);
    ASSERT_EQ(r.size(), 3u);
    EXPECT_LE(r[2].sum.value, r[1].sum.value + 1e-9);
    EXPECT_LE(r[1].sum.value, r[0].sum.value + 1e-9);
    for (const ModeResult& m : r) EXPECT_EQ(m.levels.size(), 2u);
}

TEST(MonteCarlo, ThreadCountDoesNotChangeEstimates) {
    const Labeling lab(Constellation(primes_49()), LabelKind::module_iso_general);
    const MiEngine eng(lab, {{cplx(1.0), RingElement{E, 0, 1}.to_complex()}, db(12.0)});
    const std::vector<RateMode> modes{RateMode::direct, RateMode::mlc, RateMode::sub, RateMode::para,
                                      RateMode::flex};
    const auto a = estimate_modes(eng, modes, CoeffSpec{}, 5000, 7, 1);
    const auto b = estimate_modes(eng, modes, CoeffSpec{}, 5000, 7, 4);
    ASSERT_EQ(a.size(), b.size());
    for (size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].sum.value, b[k].sum.value);
        EXPECT_EQ(a[k].sum.stderr, b[k].sum.stderr);
        EXPECT_EQ(a[k].b, b[k].b);
        EXPECT_EQ(a[k].direct_b, b[k].direct_b);
    }
}

TEST(MonteCarlo, FixedCoefficientsMatchStandaloneEstimators) {
    const Labeling lab(Constellation(primes_49()), LabelKind::module_iso_general);
    const ChannelConfig ch{{cplx(1.0), cplx(0.5, 0.7)}, db(8.0)};
    const MiEngine eng(lab, ch);
    CoeffSpec spec;
    spec.direct = std::array<Label, 2>{Label{1, 2}, Label{3, 1}};
    spec.levels = LevelCoeffs{{1, 2}, {3, 1}};
    const auto r = estimate_modes(eng, {RateMode::direct, RateMode::mlc}, spec, 6000, 8);
    EXPECT_EQ(r[0].sum.value, mi_direct(lab, ch, {1, 2}, {3, 1}, 6000, 8).value);
    EXPECT_EQ(r[1].sum.value, mi_mlc(lab, ch, {{1, 2}, {3, 1}}, 6000, 8).sum.value);
}

// With the extension-field multiplication matrices (r1, r2) is the label of
// b1 u1 + b2 u2, so the joint flexible term is the direct rate.
TEST(MonteCarlo, FlexibleWithFieldMatricesAgreesWithDirect) {
    const Labeling lab(Constellation(classify_rational_prime(5, E)), LabelKind::extfield_ring_iso);
    const ChannelConfig ch{{cplx(1.0), cplx(0.4, 0.9)}, db(10.0)};
    const QuadPoly P = default_poly(5);
    const Mat2 B1 = extfield_matrix(P, 0, 1), B2 = extfield_matrix(P, 1, 2);
    const FlexRates f = mi_flexible(lab, ch, B1, B2, 20000, 9);
    const RateEstimate d = mi_direct(lab, ch, {0, 1}, {1, 2}, 20000, 9);
    EXPECT_NEAR(2 * f.terms[2].value, d.value, 1e-9);
    double mn = f.terms[0].value;
    for (const auto& t : f.terms) mn = std::min(mn, t.value);
    EXPECT_EQ(f.value.value, mn);
    EXPECT_THROW(mi_flexible(lab, ch, Mat2{{{1, 1}, {1, 1}}}, B2, 100, 9), std::invalid_argument);
}

TEST(Maximize, EqualGainsPickEqualPairs) {
    const Labeling lab(Constellation(primes_49()), LabelKind::module_iso_general);
    const ModeResult r = maximize_coeffs_mi(lab, {{1.0, 1.0}, db(20.0)}, RateMode::mlc, 8000, 10);
    for (const auto& p : r.b) EXPECT_EQ(p, (std::array<int64_t, 2>{1, 1}));
    const Labeling f25(Constellation(classify_rational_prime(5, E)), LabelKind::extfield_ring_iso);
    const ModeResult d = maximize_coeffs_mi(f25, {{1.0, 0.0}, db(20.0)}, RateMode::direct, 4000, 10);
    EXPECT_EQ(d.direct_b[0], (Label{0, 1}));
    EXPECT_EQ(d.direct_b[1], (Label{0, 0}));
}

TEST(Maximize, RingGainsPickTheirLabels) {
    const Labeling lab = labeling_21();
    const RingElement w{E, 0, 1};
    const Label a1 = lab.demap(RingElement::one(E)), a2 = lab.demap(w);
    EXPECT_EQ(a1, (Label{1, 1}));
    EXPECT_EQ(a2, (Label{1, 2}));
    const ModeResult r = maximize_coeffs_mi(lab, {{1.0, w.to_complex()}, db(30.0)}, RateMode::mlc, 8000, 11);
    ASSERT_EQ(r.b.size(), 2u);
    for (size_t l = 0; l < 2; ++l) EXPECT_EQ(r.b[l], (std::array<int64_t, 2>{a1[l], a2[l]})) << l;
}

TEST(Maximize, CandidatesAreNormalized) {
    EXPECT_EQ(normalized_pairs(3).size(), 4u);
    const Labeling f25(Constellation(classify_rational_prime(5, E)), LabelKind::extfield_ring_iso);
    EXPECT_EQ(direct_candidates(f25).size(), 26u);
    const Labeling l49(Constellation(primes_49()), LabelKind::crt_ring_iso);
    EXPECT_EQ(direct_candidates(l49).size(), 64u);
    EXPECT_THROW(direct_candidates(l49, 10), std::length_error);
    EXPECT_EQ(rate_mode_from_string("sub"), RateMode::sub);
    EXPECT_THROW(rate_mode_from_string("x"), std::invalid_argument);
}

TEST(Sweep, RowLayoutAndSeeds) {
    const Labeling lab(Constellation(primes_49()), LabelKind::module_iso_general);
    SweepConfig cfg;
    cfg.snr_db = {0.0, 10.0};
    cfg.channel.random_count = 3;
    cfg.channel.random_seed = 12;
    cfg.modes = {RateMode::direct, RateMode::mlc};
    cfg.n_samples = 1000;
    cfg.seed = 13;
    const auto rows = sweep(lab, cfg, 2);
    ASSERT_EQ(rows.size(), 2u * 3u * (1u + 3u));
    EXPECT_EQ(rows[0].mode, RateMode::direct);
    EXPECT_EQ(rows[1].level, 0);
    EXPECT_EQ(rows[2].level, 1);
    EXPECT_EQ(rows[3].level, 2);
    EXPECT_EQ(rows[4].realization, 1u);
    EXPECT_EQ(rows[1].rate.seed, cell_seed(13, 0, 0, 3));
    EXPECT_EQ(rows[12].rate.seed, cell_seed(13, 1, 0, 3));
    EXPECT_NE(cfg.channel.gains(0)[0], cfg.channel.gains(1)[0]);
    EXPECT_EQ(cfg.channel.gains(2), cfg.channel.gains(2));
    cfg.snr_db.clear();
    EXPECT_TRUE(sweep(lab, cfg).empty());
    cfg.modes.clear();
    EXPECT_THROW(sweep(lab, cfg), std::invalid_argument);
}

TEST(Sweep, CoefficientText) {
    ModeResult m;
    m.mode = RateMode::mlc;
    m.b = {{1, 2}, {0, 1}};
    EXPECT_EQ(coeff_text(m), "1 2;0 1");
    m.mode = RateMode::direct;
    m.direct_b = {Label{1, 0}, Label{3, 4}};
    EXPECT_EQ(coeff_text(m), "1 0;3 4");
}
