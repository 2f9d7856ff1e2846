#pragma once

// Multilevel encoder, multistage / suboptimal / parallel decoders and the
// flexible-decoding combination targets for two users.
//
// Levels are label digits: a prime with residue field F_p is one level, an
// inert prime contributes two F_p levels.

#include "constellation.hpp"
#include "linear_code.hpp"
#include "periodic_gaussian.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ringcf {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

struct MlcEncoderConfig {
    Labeling labeling;
    std::vector<LinearCode> codes;  // one per level, common length N
    double gamma = 1;

    size_t levels() const { return codes.size(); }
    size_t length() const { return codes.empty() ? 0 : codes.front().length(); }

    void validate() const {
        if (codes.size() != labeling.n_digits()) throw std::invalid_argument("one code per label level required");
        for (size_t l = 0; l < codes.size(); ++l) {
            if (codes[l].q() != labeling.digit_modulus(l)) throw std::invalid_argument("code field does not match level");
            if (codes[l].length() != length()) throw std::invalid_argument("code lengths differ");
        }
    }
};

// Per-level coefficient pair (b1, b2) over F_{q_l}.
using LevelCoeffs = std::vector<std::array<int64_t, 2>>;

inline int64_t level_function(const LevelCoeffs& b, size_t l, int64_t q, int64_t c1, int64_t c2) {
    return detail::floor_mod(b[l][0] * c1 + b[l][1] * c2, q);
}

// Per-level codewords (levels x N) -> label words per symbol.
inline CVec mlc_encode_words(const std::vector<IntVec>& words, const MlcEncoderConfig& cfg) {
    cfg.validate();
    if (words.size() != cfg.levels()) throw std::invalid_argument("mlc_encode: one word per level");
    CVec x(cfg.length());
    for (size_t n = 0; n < x.size(); ++n) {
        Label v(cfg.levels());
        for (size_t l = 0; l < v.size(); ++l) v[l] = words[l].at(n);
        x[n] = cfg.gamma * cfg.labeling.map(v).to_complex();
    }
    return x;
}

inline std::vector<IntVec> mlc_codewords(const std::vector<IntVec>& streams, const MlcEncoderConfig& cfg) {
    cfg.validate();
    if (streams.size() != cfg.levels()) throw std::invalid_argument("mlc_encode: one stream per level");
    std::vector<IntVec> words;
    for (size_t l = 0; l < streams.size(); ++l) words.push_back(cfg.codes[l].encode(streams[l]));
    return words;
}

inline CVec mlc_encode(const std::vector<IntVec>& streams, const MlcEncoderConfig& cfg) {
    return mlc_encode_words(mlc_codewords(streams, cfg), cfg);
}

struct SymbolPosterior {
    size_t level = 0;
    std::vector<double> pmf;
    std::vector<double> log_pmf;
};

inline SymbolPosterior normalize_log(size_t level, std::vector<double> logw) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : logw) mx = std::max(mx, v);
    SymbolPosterior p;
    p.level = level;
    p.pmf.resize(logw.size());
    if (!std::isfinite(mx)) {
        std::fill(p.pmf.begin(), p.pmf.end(), 1.0 / double(logw.size()));
    } else {
        double s = 0;
        for (size_t i = 0; i < logw.size(); ++i) s += (p.pmf[i] = std::exp(logw[i] - mx));
        for (double& v : p.pmf) v /= s;
    }
    p.log_pmf.resize(p.pmf.size());
    for (size_t i = 0; i < p.pmf.size(); ++i) p.log_pmf[i] = std::log(p.pmf[i]);
    return p;
}

// Posterior of the level-l function value given the decoded values of levels < l.
inline SymbolPosterior app_level(cplx y, size_t l, const std::vector<int64_t>& prefix, std::array<cplx, 2> h,
                                 const LevelCoeffs& b, const MlcEncoderConfig& cfg, double noise_var = 1.0) {
    const Labeling& lab = cfg.labeling;
    if (prefix.size() != l) throw std::invalid_argument("app_level: prefix must hold the l previous decisions");
    if (b.size() != lab.n_digits()) throw std::invalid_argument("app_level: one coefficient pair per level");
    const int64_t q = lab.digit_modulus(l);
    if (detail::floor_mod(b[l][0], q) == 0 && detail::floor_mod(b[l][1], q) == 0)
        throw std::invalid_argument("app_level: coefficient pair (0,0)");
    const size_t n = lab.size();
    std::vector<Label> labels(n);
    std::vector<cplx> pts(n);
    for (size_t k = 0; k < n; ++k) {
        labels[k] = lab.label_at(int64_t(k));
        pts[k] = cfg.gamma * lab.constellation().points()[size_t(lab.point_of(int64_t(k)))].to_complex();
    }
    std::vector<double> logw(size_t(q), -std::numeric_limits<double>::infinity());
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            bool ok = true;
            for (size_t s = 0; s < l && ok; ++s)
                ok = level_function(b, s, lab.digit_modulus(s), labels[i][s], labels[j][s]) ==
                     detail::floor_mod(prefix[s], lab.digit_modulus(s));
            if (!ok) continue;
            const int64_t c = level_function(b, l, q, labels[i][l], labels[j][l]);
            const double e = -std::norm(h[0] * pts[i] + h[1] * pts[j] - y) / noise_var;
            double& w = logw[size_t(c)];
            w = std::isinf(w) ? e : std::max(w, e) + std::log1p(std::exp(-std::abs(w - e)));
        }
    }
    return normalize_log(l, logw);
}

// Codeword of `code` maximizing sum_n log_post[n][c[n]].
inline IntVec ml_codeword(const LinearCode& code, const std::vector<std::vector<double>>& log_post, double budget = 1e5) {
    const auto words = code.codewords(budget);
    double best = -std::numeric_limits<double>::infinity();
    IntVec arg = words.front();
    for (const IntVec& c : words) {
        double s = 0;
        for (size_t n = 0; n < c.size(); ++n) s += log_post[n][size_t(c[n])];
        if (s > best) {
            best = s;
            arg = c;
        }
    }
    return arg;
}

inline std::vector<IntVec> multistage_decode(const CVec& y, const MlcEncoderConfig& cfg, std::array<cplx, 2> h,
                                             const LevelCoeffs& b, double noise_var = 1.0) {
    cfg.validate();
    const size_t N = cfg.length();
    if (y.size() != N) throw std::invalid_argument("multistage_decode: length mismatch");
    std::vector<IntVec> out;
    for (size_t l = 0; l < cfg.levels(); ++l) {
        std::vector<std::vector<double>> lp(N);
        for (size_t n = 0; n < N; ++n) {
            std::vector<int64_t> prefix;
            for (size_t s = 0; s < l; ++s) prefix.push_back(out[s][n]);
            lp[n] = app_level(y[n], l, prefix, h, b, cfg, noise_var).log_pmf;
        }
        out.push_back(ml_codeword(cfg.codes[l], lp));
    }
    return out;
}

namespace detail {

// Nearest ring element to a complex number (exact h for the folded decoders).
inline RingElement nearest_ring_element(Ring R, cplx z) {
    if (R == Ring::integers) return {R, int64_t(std::llround(z.real()))};
    if (R == Ring::gaussian) return {R, int64_t(std::llround(z.real())), int64_t(std::llround(z.imag()))};
    const double bb = z.imag() / 0.8660254037844386;
    const double aa = z.real() + 0.5 * bb;
    RingElement best{R, int64_t(std::floor(aa)), int64_t(std::floor(bb))};
    double bd = std::norm(best.to_complex() - z);
    for (int da = 0; da < 2; ++da)
        for (int db = 0; db < 2; ++db) {
            const RingElement c{R, int64_t(std::floor(aa)) + da, int64_t(std::floor(bb)) + db};
            const double d = std::norm(c.to_complex() - z);
            if (d < bd) {
                bd = d;
                best = c;
            }
        }
    return best;
}

inline RingElement exact_gain(Ring R, cplx h) {
    const RingElement e = nearest_ring_element(R, h);
    if (std::abs(e.to_complex() - h) > 1e-9)
        throw std::invalid_argument("folded decoders need channel gains that are ring elements");
    return e;
}

inline void require_general_kind(const Labeling& lab) {
    if (lab.kind() != LabelKind::module_iso_general)
        throw std::invalid_argument("suboptimal/parallel decoding needs the module-iso-general labeling");
    for (const Block& bl : lab.blocks())
        if (bl.n_digits != 1) throw std::invalid_argument("suboptimal/parallel decoding needs prime-field levels");
}

} // namespace detail

// Folded single-level detection at level l for the observation z = y / gamma.
// With ring-valued gains the class of h1 x1 + h2 x2 mod phi_l is
// (s(h1) c1 + s(h2) c2) g_l, so the decision is that function value.
inline std::vector<double> folded_log_likelihood(cplx z, size_t l, const MlcEncoderConfig& cfg, double noise_var) {
    const Labeling& lab = cfg.labeling;
    const Block& bl = lab.blocks()[size_t(lab.digit_block(l))];
    const int64_t q = lab.digit_modulus(l);
    const IdealReducer red(bl.prime.element);
    const Constellation single({bl.prime});
    const PeriodicGaussian W(bl.prime.element, cfg.gamma * cfg.gamma / noise_var);
    std::vector<double> ll(static_cast<size_t>(q));
    for (int64_t c = 0; c < q; ++c) {
        const RingElement r = single.representative(c * lab.generators()[l]);
        ll[size_t(c)] = std::log(std::max(W(z - r.to_complex()), std::numeric_limits<double>::min()));
    }
    return ll;
}

inline std::vector<IntVec> parallel_decode(const CVec& y, const MlcEncoderConfig& cfg, std::array<cplx, 2> h,
                                           double noise_var = 1.0) {
    cfg.validate();
    detail::require_general_kind(cfg.labeling);
    const Ring R = cfg.labeling.constellation().ring();
    detail::exact_gain(R, h[0]);
    detail::exact_gain(R, h[1]);
    std::vector<IntVec> out;
    for (size_t l = 0; l < cfg.levels(); ++l) {
        std::vector<std::vector<double>> lp;
        for (const cplx& yn : y) lp.push_back(folded_log_likelihood(yn / cfg.gamma, l, cfg, noise_var));
        out.push_back(ml_codeword(cfg.codes[l], lp));
    }
    return out;
}

inline std::vector<IntVec> suboptimal_decode(const CVec& y, const MlcEncoderConfig& cfg, std::array<cplx, 2> h,
                                             double noise_var = 1.0) {
    cfg.validate();
    detail::require_general_kind(cfg.labeling);
    const Labeling& lab = cfg.labeling;
    const Ring R = lab.constellation().ring();
    const std::array<RingElement, 2> he{detail::exact_gain(R, h[0]), detail::exact_gain(R, h[1])};
    const size_t L = cfg.levels();
    std::vector<IntVec> out;
    for (size_t l = 0; l + 1 < L; ++l) {
        std::vector<std::vector<double>> lp;
        for (size_t n = 0; n < y.size(); ++n) {
            cplx z = y[n] / cfg.gamma;
            for (size_t s = 0; s < l; ++s) z -= double(out[s][n]) * lab.generators()[s].to_complex();
            lp.push_back(folded_log_likelihood(z, l, cfg, noise_var));
        }
        out.push_back(ml_codeword(cfg.codes[l], lp));
    }
    // Last level: unfolded, against the pair points shifted by the same subtraction.
    LevelCoeffs b(L);
    for (size_t s = 0; s < L; ++s) {
        const PrimeResidueMap sig(lab.blocks()[size_t(lab.digit_block(s))].prime);
        b[s] = {sig(he[0]), sig(he[1])};
    }
    const size_t n = lab.size();
    const size_t last = L - 1;
    const int64_t q = lab.digit_modulus(last);
    std::vector<std::vector<double>> lp;
    for (size_t k = 0; k < y.size(); ++k) {
        cplx z = y[k] / cfg.gamma;
        for (size_t s = 0; s < last; ++s) z -= double(out[s][k]) * lab.generators()[s].to_complex();
        std::vector<double> logw(size_t(q), -std::numeric_limits<double>::infinity());
        for (size_t i = 0; i < n; ++i) {
            const Label ui = lab.label_at(int64_t(i));
            const RingElement xi = lab.map(ui);
            for (size_t j = 0; j < n; ++j) {
                const Label uj = lab.label_at(int64_t(j));
                const RingElement xj = lab.map(uj);
                RingElement s = he[0] * xi + he[1] * xj;
                for (size_t t = 0; t < last; ++t)
                    s -= level_function(b, t, lab.digit_modulus(t), ui[t], uj[t]) * lab.generators()[t];
                const int64_t c = level_function(b, last, q, ui[last], uj[last]);
                const double e = -cfg.gamma * cfg.gamma * std::norm(z - s.to_complex()) / noise_var;
                double& w = logw[size_t(c)];
                w = std::isinf(w) ? e : std::max(w, e) + std::log1p(std::exp(-std::abs(w - e)));
            }
        }
        lp.push_back(normalize_log(last, logw).log_pmf);
    }
    out.push_back(ml_codeword(cfg.codes[last], lp));
    return out;
}

using Mat2 = std::array<std::array<int64_t, 2>, 2>;

inline bool full_rank(const Mat2& B, int64_t q) {
    return detail::floor_mod(B[0][0] * B[1][1] - B[0][1] * B[1][0], q) != 0;
}

// [c_R^1; c_R^2] = [B1 B2] [c_1^1; c_1^2; c_2^1; c_2^2] symbolwise over F_q.
inline std::array<IntVec, 2> flexible_targets(const IntVec& c11, const IntVec& c12, const IntVec& c21,
                                              const IntVec& c22, const Mat2& B1, const Mat2& B2, int64_t q) {
    if (!full_rank(B1, q) || !full_rank(B2, q)) throw std::invalid_argument("flexible_targets: rank-deficient matrix");
    const size_t N = c11.size();
    if (c12.size() != N || c21.size() != N || c22.size() != N)
        throw std::invalid_argument("flexible_targets: word lengths differ");
    std::array<IntVec, 2> r{IntVec(N), IntVec(N)};
    for (size_t n = 0; n < N; ++n)
        for (size_t row = 0; row < 2; ++row)
            r[row][n] = detail::floor_mod(B1[row][0] * c11[n] + B1[row][1] * c12[n] + B2[row][0] * c21[n] +
                                              B2[row][1] * c22[n],
                                          q);
    return r;
}

// Matrix of multiplication by b = b1 x + b0 in F_q[x]/poly on (c1, c0).
inline Mat2 extfield_matrix(const QuadPoly& poly, int64_t b1, int64_t b0) {
    const auto m = mult_matrix(ExtFieldElement{poly, b1, b0});
    return {{{m[0][0], m[0][1]}, {m[1][0], m[1][1]}}};
}

} // namespace ringcf
