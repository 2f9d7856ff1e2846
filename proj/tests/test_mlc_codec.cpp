#include "ringcf/mlc_codec.hpp"
#include "ringcf/periodic_gaussian.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace ringcf;

namespace {

const Ring E = Ring::eisenstein;

Labeling general49() {
    const auto s = classify_rational_prime(7, E);
    return Labeling(Constellation({s[0], s[1]}), LabelKind::module_iso_general);
}

MlcEncoderConfig config49(size_t N) {
    MlcEncoderConfig cfg;
    cfg.labeling = general49();
    IntMat G(N, IntVec(1, 1));
    for (size_t i = 0; i < N; ++i) G[i][0] = int64_t(i + 1);
    cfg.codes = {LinearCode(7, G), LinearCode(7, G)};
    cfg.gamma = 1.0;
    return cfg;
}

// Function word of level l: b1 c1 + b2 c2 over F_q.
IntVec function_word(const IntVec& a, const IntVec& b, int64_t b1, int64_t b2, int64_t q) {
    IntVec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = detail::floor_mod(b1 * a[i] + b2 * b[i], q);
    return r;
}

} // namespace

TEST(MlcEncoder, SymbolsFollowTheLabeling) {
    const MlcEncoderConfig cfg = config49(3);
    const auto words = mlc_codewords({{2}, {5}}, cfg);
    const CVec x = mlc_encode({{2}, {5}}, cfg);
    ASSERT_EQ(x.size(), 3u);
    for (size_t n = 0; n < 3; ++n)
        EXPECT_NEAR(std::abs(x[n] - cfg.labeling.map({words[0][n], words[1][n]}).to_complex()), 0.0, 1e-12);
    MlcEncoderConfig bad = cfg;
    bad.codes.pop_back();
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

// Oracle: direct posterior from the definition, summing exp(-|y - s|^2) by label pair.
TEST(MlcDecoder, LevelPosteriorMatchesDefinition) {
    const MlcEncoderConfig cfg = config49(1);
    const Labeling& lab = cfg.labeling;
    const LevelCoeffs b{{1, 2}, {3, 1}};
    const std::array<cplx, 2> h{cplx(1.0, 0.2), cplx(0.7, -0.1)};
    const cplx y(0.9, -1.3);
    for (size_t l = 0; l < 2; ++l) {
        std::vector<int64_t> prefix;
        if (l == 1) prefix.push_back(4);
        const SymbolPosterior p = app_level(y, l, prefix, h, b, cfg, 2.0);
        std::vector<double> w(7, 0.0);
        for (int64_t i = 0; i < 49; ++i)
            for (int64_t j = 0; j < 49; ++j) {
                const Label u = lab.label_at(i), v = lab.label_at(j);
                if (l == 1 && detail::floor_mod(b[0][0] * u[0] + b[0][1] * v[0], 7) != 4) continue;
                const cplx s = h[0] * lab.map(u).to_complex() + h[1] * lab.map(v).to_complex();
                w[size_t(detail::floor_mod(b[l][0] * u[l] + b[l][1] * v[l], 7))] += std::exp(-std::norm(y - s) / 2.0);
            }
        double tot = 0;
        for (double v : w) tot += v;
        for (size_t c = 0; c < 7; ++c) EXPECT_NEAR(p.pmf[c], w[c] / tot, 1e-12);
    }
}

TEST(MlcDecoder, NoiselessMultistageRecoversFunctions) {
    const MlcEncoderConfig cfg = config49(2);
    const IntVec m1a{3}, m1b{6}, m2a{1}, m2b{4};
    const auto w1 = mlc_codewords({m1a, m1b}, cfg);
    const auto w2 = mlc_codewords({m2a, m2b}, cfg);
    const CVec x1 = mlc_encode_words(w1, cfg), x2 = mlc_encode_words(w2, cfg);
    CVec y(2);
    for (size_t n = 0; n < 2; ++n) y[n] = x1[n] + x2[n];
    const LevelCoeffs b{{1, 1}, {1, 1}};
    const auto dec = multistage_decode(y, cfg, {1.0, 1.0}, b, 1e-4);
    EXPECT_EQ(dec[0], function_word(w1[0], w2[0], 1, 1, 7));
    EXPECT_EQ(dec[1], function_word(w1[1], w2[1], 1, 1, 7));
}

TEST(MlcDecoder, FoldedDecodersRecoverFunctionsAtHighSnr) {
    const MlcEncoderConfig cfg = config49(3);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> N(0.0, std::sqrt(0.5) * 0.01);
    const RingElement h1{E, 1}, h2{E, 2, 1};
    for (int t = 0; t < 5; ++t) {
        const std::vector<IntVec> s1{{int64_t(rng() % 7)}, {int64_t(rng() % 7)}};
        const std::vector<IntVec> s2{{int64_t(rng() % 7)}, {int64_t(rng() % 7)}};
        const auto w1 = mlc_codewords(s1, cfg), w2 = mlc_codewords(s2, cfg);
        const CVec x1 = mlc_encode_words(w1, cfg), x2 = mlc_encode_words(w2, cfg);
        CVec y(3);
        for (size_t n = 0; n < 3; ++n) y[n] = h1.to_complex() * x1[n] + h2.to_complex() * x2[n] + cplx(N(rng), N(rng));
        const std::array<cplx, 2> h{h1.to_complex(), h2.to_complex()};
        const auto par = parallel_decode(y, cfg, h, 1e-4);
        const auto sub = suboptimal_decode(y, cfg, h, 1e-4);
        for (size_t l = 0; l < 2; ++l) {
            const PrimeResidueMap sig(cfg.labeling.blocks()[l].prime);
            const IntVec expect = function_word(w1[l], w2[l], sig(h1), sig(h2), 7);
            EXPECT_EQ(par[l], expect) << l;
            EXPECT_EQ(sub[l], expect) << l;
        }
    }
}

TEST(MlcDecoder, FoldedDecodersNeedRingGainsAndGeneralKind) {
    MlcEncoderConfig cfg = config49(1);
    EXPECT_THROW(parallel_decode({cplx(0.0)}, cfg, {cplx(0.5, 0.1), 1.0}), std::invalid_argument);
    const auto s = classify_rational_prime(7, E);
    cfg.labeling = Labeling(Constellation({s[0], s[1]}), LabelKind::naive_ungerboeck);
    EXPECT_THROW(parallel_decode({cplx(0.0)}, cfg, {1.0, 1.0}), std::invalid_argument);
}

TEST(PeriodicGaussian, DirectAndDualAgree) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(-4.0, 4.0);
    for (const RingElement& m : {RingElement{E, 3, 2}, RingElement{Ring::gaussian, 1, 2}, RingElement{Ring::integers, 5}})
        for (double g2 : {0.05, 0.5, 3.0}) {
            const PeriodicGaussian a(m, g2, PeriodicGaussian::Method::direct);
            const PeriodicGaussian b(m, g2, PeriodicGaussian::Method::dual);
            for (int t = 0; t < 50; ++t) {
                const cplx d(U(rng), m.ring == Ring::integers ? 0.0 : U(rng));
                EXPECT_NEAR(a(d), b(d), 1e-9 * std::max(1.0, a(d)));
                EXPECT_NEAR(a(d), a(d + m.to_complex()), 1e-9 * std::max(1.0, a(d)));
            }
        }
}

// With b = b1 x + b0 in F_25 the level functions are linear maps of the labels.
TEST(Flexible, ExtensionFieldMatrixReproducesFieldProduct) {
    const QuadPoly P = default_poly(5);
    for (int64_t b1 = 0; b1 < 5; ++b1)
        for (int64_t b0 = 0; b0 < 5; ++b0) {
            const Mat2 M = extfield_matrix(P, b1, b0);
            for (int64_t c = 0; c < 25; ++c) {
                const ExtFieldElement prod = ExtFieldElement{P, b1, b0} * ExtFieldElement{P, c / 5, c % 5};
                EXPECT_EQ(detail::floor_mod(M[0][0] * (c / 5) + M[0][1] * (c % 5), 5), prod.v1);
                EXPECT_EQ(detail::floor_mod(M[1][0] * (c / 5) + M[1][1] * (c % 5), 5), prod.v0);
            }
        }
}

TEST(Flexible, TargetsAndRank) {
    const Mat2 I{{{1, 0}, {0, 1}}};
    const auto t = flexible_targets({1, 2}, {3, 4}, {4, 4}, {0, 1}, I, I, 5);
    EXPECT_EQ(t[0], (IntVec{0, 1}));
    EXPECT_EQ(t[1], (IntVec{3, 0}));
    EXPECT_THROW(flexible_targets({1}, {1}, {1}, {1}, Mat2{{{1, 1}, {1, 1}}}, I, 5), std::invalid_argument);
}
