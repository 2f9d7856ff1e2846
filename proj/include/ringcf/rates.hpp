#pragma once

// Computation rates: the closed-form lattice rate with MMSE scaling, integer
// coefficient search, and Monte-Carlo mutual information for two users
// transmitting uniform constellation points over y = h1 x1 + h2 x2 + z,
// z ~ CN(0, 1), E|x_k|^2 = P.

#include "constellation.hpp"
#include "mlc_codec.hpp"
#include "parallel.hpp"
#include "periodic_gaussian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ringcf {

struct RateEstimate {
    double value = 0;  // bits per complex dimension
    double stderr = 0;
    int64_t n_samples = 0;
    uint64_t seed = 0;
};

// ---- closed form ------------------------------------------------------------

inline cplx alpha_mmse(const CVec& h, const CVec& a, double P) {
    if (h.size() != a.size()) throw std::invalid_argument("alpha_mmse: length mismatch");
    cplx ha = 0;
    double hh = 0;
    for (size_t k = 0; k < h.size(); ++k) {
        ha += std::conj(h[k]) * a[k];
        hh += std::norm(h[k]);
    }
    return P * ha / (1.0 + P * hh);
}

// log2+ of (1 + P|h|^2) / (|a|^2 + P sum_{i<j} |a_i h_j - a_j h_i|^2), the
// Lagrange-identity form of (|a|^2 - P|h^H a|^2 / (1 + P|h|^2))^{-1}.
inline double computation_rate(const CVec& h, const CVec& a, double P) {
    if (h.size() != a.size()) throw std::invalid_argument("computation_rate: length mismatch");
    double aa = 0, hh = 0, cross = 0;
    for (size_t k = 0; k < a.size(); ++k) {
        aa += std::norm(a[k]);
        hh += std::norm(h[k]);
    }
    if (aa == 0) throw std::invalid_argument("computation_rate: a must be nonzero");
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = i + 1; j < a.size(); ++j) cross += std::norm(a[i] * h[j] - a[j] * h[i]);
    const double r = std::log2((1.0 + P * hh) / (aa + P * cross));
    return r > 0 ? r : 0.0;
}

struct CoeffSearchResult {
    std::vector<RingElement> a;
    double rate = 0;
    int64_t candidates = 0;
};

// Exhaustive search over nonzero a with entries of norm <= radius^2; the first
// nonzero entry is taken in the first unit sector (one representative per
// unit multiple). Ties: smaller |a|^2, then lexicographic on (Re, Im).
inline CoeffSearchResult search_coeffs(const CVec& h, double P, Ring R, int64_t radius, double budget = 1e6) {
    if (h.empty()) throw std::invalid_argument("search_coeffs: empty channel");
    if (radius < 1) throw std::invalid_argument("search_coeffs: radius must be >= 1");
    std::vector<RingElement> entries;
    for (int64_t a = -2 * radius; a <= 2 * radius; ++a)
        for (int64_t b = (R == Ring::integers ? 0 : -2 * radius); b <= (R == Ring::integers ? 0 : 2 * radius); ++b) {
            const RingElement x{R, a, b};
            if (norm(x) <= radius * radius) entries.push_back(x);
        }
    std::sort(entries.begin(), entries.end(), [](const RingElement& x, const RingElement& y) { return lex_less(x, y); });
    const double space = std::pow(double(entries.size()), double(h.size()));
    if (space > budget) throw std::length_error("search_coeffs: search space exceeds budget");
    const size_t K = h.size();
    std::vector<size_t> idx(K, 0);
    CoeffSearchResult best;
    bool have = false;
    int64_t best_norm = 0;
    CVec ac(K);
    std::vector<RingElement> a(K);
    for (;;) {
        bool valid = false, lead_ok = true;
        int64_t nrm = 0;
        for (size_t k = 0; k < K; ++k) {
            a[k] = entries[idx[k]];
            if (!valid && !a[k].is_zero()) {
                valid = true;
                lead_ok = in_first_sector(a[k]);
            }
            nrm += norm(a[k]);
            ac[k] = a[k].to_complex();
        }
        if (valid && lead_ok) {
            ++best.candidates;
            const double r = computation_rate(h, ac, P);
            bool better = !have || r > best.rate;
            if (have && r == best.rate) {
                if (nrm != best_norm) better = nrm < best_norm;
                else better = std::lexicographical_compare(a.begin(), a.end(), best.a.begin(), best.a.end(), lex_less);
            }
            if (better) {
                best.a = a;
                best.rate = r;
                best_norm = nrm;
                have = true;
            }
        }
        size_t k = K;
        while (k > 0) {
            --k;
            if (++idx[k] < entries.size()) break;
            idx[k] = 0;
            if (k == 0) return best;
        }
    }
}

// ---- Monte-Carlo mutual information -----------------------------------------

struct ChannelConfig {
    std::array<cplx, 2> h{1.0, 1.0};
    double P = 1;
};

inline double entropy_bits(const std::vector<int64_t>& counts) {
    int64_t tot = 0;
    for (int64_t c : counts) tot += c;
    double H = 0;
    for (int64_t c : counts)
        if (c > 0) {
            const double p = double(c) / double(tot);
            H -= p * std::log2(p);
        }
    return H;
}

// I(Y; A | C) where (A, C) is a function of the label pair, evaluated on the
// posterior over all pairs. `jb` maps pair index i*n+j to a joint (A, C) bin,
// `cond` maps joint bins to C bins. A non-empty shift makes the observation
// y - shift[true pair] with pair points s_ij - shift[ij].
struct PairTerm {
    std::vector<int32_t> jb;
    std::vector<int32_t> cond;
    int32_t n_joint = 1;
    int32_t n_cond = 1;
    double h_cond = 0;  // H(A | C) in bits
    std::vector<cplx> shift;
};

// I(Y mod phi; A) for a prime phi. `cls` maps the pair to the residue class of
// h1 x_i + h2 x_j mod phi, `target` to A.
struct FoldTerm {
    std::vector<int32_t> target;
    std::vector<int32_t> cls;
    int32_t n_target = 1;
    int32_t n_cls = 1;
    std::vector<int64_t> count;  // n_target * n_cls
    std::vector<cplx> class_rep;
    RingElement modulus;
    double h_target = 0;
};

inline void finish_pair_term(PairTerm& t) {
    std::vector<int64_t> cj(size_t(t.n_joint), 0), cc(size_t(t.n_cond), 0);
    for (int32_t b : t.jb) {
        ++cj[size_t(b)];
        ++cc[size_t(t.cond[size_t(b)])];
    }
    t.h_cond = entropy_bits(cj) - entropy_bits(cc);
}

inline void finish_fold_term(FoldTerm& t) {
    t.count.assign(size_t(t.n_target) * size_t(t.n_cls), 0);
    std::vector<int64_t> ca(size_t(t.n_target), 0);
    for (size_t k = 0; k < t.target.size(); ++k) {
        ++t.count[size_t(t.target[k]) * size_t(t.n_cls) + size_t(t.cls[k])];
        ++ca[size_t(t.target[k])];
    }
    t.h_target = entropy_bits(ca);
}

class MiEngine {
public:
    MiEngine(const Labeling& lab, ChannelConfig ch) : lab_(&lab), ch_(ch) {
        if (!(ch_.P > 0)) throw std::invalid_argument("channel power P must be positive");
        n_ = lab.size();
        labels_.resize(n_);
        pts_.resize(n_);
        elems_.resize(n_);
        for (size_t k = 0; k < n_; ++k) {
            labels_[k] = lab.label_at(int64_t(k));
            elems_[k] = lab.map(labels_[k]);
            pts_[k] = elems_[k].to_complex();
        }
        gamma_ = std::sqrt(ch_.P / lab.constellation().mean_energy());
        pair_pts_.resize(n_ * n_);
        for (size_t i = 0; i < n_; ++i)
            for (size_t j = 0; j < n_; ++j) pair_pts_[i * n_ + j] = ch_.h[0] * pts_[i] + ch_.h[1] * pts_[j];
    }

    const Labeling& labeling() const { return *lab_; }
    size_t size() const { return n_; }
    double gamma() const { return gamma_; }
    const std::vector<Label>& labels() const { return labels_; }

    // Function digit d of the pair under per-level coefficients.
    int64_t fdigit(const LevelCoeffs& b, size_t d, size_t i, size_t j) const {
        return level_function(b, d, lab_->digit_modulus(d), labels_[i][d], labels_[j][d]);
    }

    // A = f_l, C = (f_0 .. f_{l-1}); with conditional = false, C is trivial.
    PairTerm level_term(const LevelCoeffs& b, size_t l, bool conditional = true) const {
        check_coeffs(b);
        PairTerm t;
        t.jb.resize(n_ * n_);
        int64_t nc = 1;
        if (conditional)
            for (size_t d = 0; d < l; ++d) nc *= lab_->digit_modulus(d);
        const int64_t q = lab_->digit_modulus(l);
        t.n_cond = int32_t(nc);
        t.n_joint = int32_t(nc * q);
        t.cond.resize(size_t(t.n_joint));
        for (int32_t x = 0; x < t.n_joint; ++x) t.cond[size_t(x)] = int32_t(x / q);
        for (size_t i = 0; i < n_; ++i)
            for (size_t j = 0; j < n_; ++j) {
                int64_t c = 0;
                if (conditional)
                    for (size_t d = 0; d < l; ++d) c = c * lab_->digit_modulus(d) + fdigit(b, d, i, j);
                t.jb[i * n_ + j] = int32_t(c * q + fdigit(b, l, i, j));
            }
        finish_pair_term(t);
        return t;
    }

    // A = all function digits.
    PairTerm joint_term(const LevelCoeffs& b) const {
        check_coeffs(b);
        PairTerm t;
        t.jb.resize(n_ * n_);
        int64_t nj = 1;
        for (size_t d = 0; d < lab_->n_digits(); ++d) nj *= lab_->digit_modulus(d);
        t.n_joint = int32_t(nj);
        t.cond.assign(size_t(nj), 0);
        for (size_t i = 0; i < n_; ++i)
            for (size_t j = 0; j < n_; ++j) {
                int64_t c = 0;
                for (size_t d = 0; d < lab_->n_digits(); ++d) c = c * lab_->digit_modulus(d) + fdigit(b, d, i, j);
                t.jb[i * n_ + j] = int32_t(c);
            }
        finish_pair_term(t);
        return t;
    }

    // A = b1 u1 + b2 u2 in the label ring (componentwise field products).
    PairTerm direct_term(const Label& b1, const Label& b2) const {
        PairTerm t;
        t.jb.resize(n_ * n_);
        t.n_joint = int32_t(n_);
        t.cond.assign(n_, 0);
        std::vector<Label> m1(n_), m2(n_);
        for (size_t k = 0; k < n_; ++k) {
            m1[k] = lab_->mul(b1, labels_[k]);
            m2[k] = lab_->mul(b2, labels_[k]);
        }
        for (size_t i = 0; i < n_; ++i)
            for (size_t j = 0; j < n_; ++j) t.jb[i * n_ + j] = int32_t(lab_->label_index(lab_->add(m1[i], m2[j])));
        finish_pair_term(t);
        return t;
    }

    enum class FlexPart { given_r2, given_r1, joint, joint_given_sum };

    // Targets (r1, r2) = B1 u1 + B2 u2 over F_q on a two-level q x q labeling.
    PairTerm flex_term(const Mat2& B1, const Mat2& B2, FlexPart part) const {
        if (lab_->n_digits() != 2 || lab_->digit_modulus(0) != lab_->digit_modulus(1))
            throw std::invalid_argument("flexible decoding needs two levels over the same field");
        const int64_t q = lab_->digit_modulus(0);
        if (!full_rank(B1, q) || !full_rank(B2, q)) throw std::invalid_argument("flexible decoding: rank-deficient matrix");
        PairTerm t;
        t.jb.resize(n_ * n_);
        t.n_joint = int32_t(q * q);
        t.cond.resize(size_t(q * q));
        for (int64_t r1 = 0; r1 < q; ++r1)
            for (int64_t r2 = 0; r2 < q; ++r2) {
                int64_t c = 0;
                switch (part) {
                case FlexPart::given_r2: c = r2; break;
                case FlexPart::given_r1: c = r1; break;
                case FlexPart::joint: c = 0; break;
                case FlexPart::joint_given_sum: c = (r1 + r2) % q; break;
                }
                t.cond[size_t(r1 * q + r2)] = int32_t(c);
            }
        t.n_cond = part == FlexPart::joint ? 1 : int32_t(q);
        for (size_t i = 0; i < n_; ++i)
            for (size_t j = 0; j < n_; ++j) {
                const Label& u = labels_[i];
                const Label& v = labels_[j];
                const int64_t r1 = detail::floor_mod(B1[0][0] * u[0] + B1[0][1] * u[1] + B2[0][0] * v[0] + B2[0][1] * v[1], q);
                const int64_t r2 = detail::floor_mod(B1[1][0] * u[0] + B1[1][1] * u[1] + B2[1][0] * v[0] + B2[1][1] * v[1], q);
                t.jb[i * n_ + j] = int32_t(r1 * q + r2);
            }
        finish_pair_term(t);
        return t;
    }

    // Exact ring-valued gains required by the folded observables.
    std::array<RingElement, 2> exact_gains() const {
        const Ring R = lab_->constellation().ring();
        return {detail::exact_gain(R, ch_.h[0]), detail::exact_gain(R, ch_.h[1])};
    }

    // Parallel-decoder observable at level l: Y mod phi_l, A = f_l.
    FoldTerm fold_term(const LevelCoeffs& b, size_t l) const {
        check_coeffs(b);
        detail::require_general_kind(*lab_);
        const auto he = exact_gains();
        const Block& bl = lab_->blocks()[size_t(lab_->digit_block(l))];
        const Constellation single({bl.prime});
        FoldTerm t;
        t.modulus = bl.prime.element;
        t.n_target = int32_t(lab_->digit_modulus(l));
        t.n_cls = int32_t(single.size());
        for (const RingElement& r : single.points()) t.class_rep.push_back(r.to_complex());
        t.target.resize(n_ * n_);
        t.cls.resize(n_ * n_);
        for (size_t i = 0; i < n_; ++i)
            for (size_t j = 0; j < n_; ++j) {
                t.target[i * n_ + j] = int32_t(fdigit(b, l, i, j));
                t.cls[i * n_ + j] = int32_t(single.index_of(he[0] * elems_[i] + he[1] * elems_[j]));
            }
        finish_fold_term(t);
        return t;
    }

    // Suboptimal-decoder observable at the last level: previous function
    // values times their generators are subtracted and no fold is applied.
    PairTerm subtracted_last_term(const LevelCoeffs& b) const {
        check_coeffs(b);
        detail::require_general_kind(*lab_);
        exact_gains();
        const size_t last = lab_->n_digits() - 1;
        PairTerm t = level_term(b, last, false);
        t.shift.resize(n_ * n_);
        for (size_t i = 0; i < n_; ++i)
            for (size_t j = 0; j < n_; ++j) {
                cplx s = 0;
                for (size_t d = 0; d < last; ++d) s += double(fdigit(b, d, i, j)) * lab_->generators()[d].to_complex();
                t.shift[i * n_ + j] = s;
            }
        return t;
    }

    struct Result {
        std::vector<RateEstimate> pair;
        std::vector<RateEstimate> fold;
    };

    Result evaluate(const std::vector<PairTerm>& pts, const std::vector<FoldTerm>& fts, int64_t n_samples,
                    uint64_t seed, int threads = 0) const {
        if (n_samples <= 0) throw std::invalid_argument("Monte-Carlo sample count must be positive");
        const int64_t blocks = (n_samples + kSampleBlock - 1) / kSampleBlock;
        const double g2 = gamma_ * gamma_;
        std::vector<PeriodicGaussian> W;
        for (const FoldTerm& f : fts) W.emplace_back(f.modulus, g2);
        bool need_plain = false;
        for (const PairTerm& t : pts) need_plain |= t.shift.empty();
        const size_t nt = pts.size() + fts.size();

        auto parts = parallel_map<std::vector<MeanAcc>>(
            size_t(blocks),
            [&](size_t blk) {
                std::vector<MeanAcc> acc(nt);
                std::mt19937_64 rng(derive_seed(seed, blk));
                std::uniform_int_distribution<int64_t> U(0, int64_t(n_) - 1);
                std::normal_distribution<double> G(0.0, std::sqrt(0.5));
                const int64_t lo = int64_t(blk) * kSampleBlock;
                const int64_t hi = std::min(n_samples, lo + kSampleBlock);
                std::vector<double> w(n_ * n_), ws(n_ * n_);
                std::vector<double> mass, cmass;
                for (int64_t s = lo; s < hi; ++s) {
                    const size_t i = size_t(U(rng));
                    const size_t j = size_t(U(rng));
                    const double zr = G(rng);
                    const double zi = G(rng);
                    const size_t tp = i * n_ + j;
                    const cplx noise{zr / gamma_, zi / gamma_};
                    const cplx y = pair_pts_[tp] + noise;
                    if (need_plain) fill_weights(w, y, nullptr, g2);
                    for (size_t k = 0; k < pts.size(); ++k) {
                        const PairTerm& t = pts[k];
                        const std::vector<double>* wk = &w;
                        if (!t.shift.empty()) {
                            fill_weights(ws, y - t.shift[tp], &t.shift, g2);
                            wk = &ws;
                        }
                        mass.assign(size_t(t.n_joint), 0.0);
                        for (size_t p = 0; p < wk->size(); ++p) mass[size_t(t.jb[p])] += (*wk)[p];
                        const int32_t jt = t.jb[tp];
                        const int32_t ct = t.cond[size_t(jt)];
                        double cm = 0;
                        for (int32_t x = 0; x < t.n_joint; ++x)
                            if (t.cond[size_t(x)] == ct) cm += mass[size_t(x)];
                        acc[k].add(t.h_cond + std::log2(mass[size_t(jt)] / cm));
                    }
                    for (size_t k = 0; k < fts.size(); ++k) {
                        const FoldTerm& f = fts[k];
                        cmass.resize(size_t(f.n_cls));
                        for (int32_t c = 0; c < f.n_cls; ++c) cmass[size_t(c)] = W[k](y - f.class_rep[size_t(c)]);
                        double tot = 0, mt = 0;
                        const int32_t at = f.target[tp];
                        for (int32_t a = 0; a < f.n_target; ++a) {
                            double m = 0;
                            for (int32_t c = 0; c < f.n_cls; ++c)
                                m += double(f.count[size_t(a) * size_t(f.n_cls) + size_t(c)]) * cmass[size_t(c)];
                            tot += m;
                            if (a == at) mt = m;
                        }
                        acc[pts.size() + k].add(f.h_target + std::log2(mt / tot));
                    }
                }
                return acc;
            },
            threads);
        std::vector<MeanAcc> total(nt);
        for (const auto& p : parts)
            for (size_t k = 0; k < nt; ++k) total[k].merge(p[k]);
        Result r;
        for (size_t k = 0; k < nt; ++k) {
            RateEstimate e{total[k].mean(), total[k].stderr_of_mean(), total[k].n, seed};
            (k < pts.size() ? r.pair : r.fold).push_back(e);
        }
        return r;
    }

private:
    void check_coeffs(const LevelCoeffs& b) const {
        if (b.size() != lab_->n_digits()) throw std::invalid_argument("one coefficient pair per level required");
        for (size_t d = 0; d < b.size(); ++d) {
            const int64_t q = lab_->digit_modulus(d);
            if (detail::floor_mod(b[d][0], q) == 0 && detail::floor_mod(b[d][1], q) == 0)
                throw std::invalid_argument("coefficient pair (0,0) at level " + std::to_string(d + 1));
        }
    }

    void fill_weights(std::vector<double>& w, cplx y, const std::vector<cplx>* shift, double g2) const {
        const size_t m = n_ * n_;
        for (size_t p = 0; p < m; ++p) {
            const cplx s = shift ? pair_pts_[p] - (*shift)[p] : pair_pts_[p];
            const double d = g2 * std::norm(y - s);
            w[p] = d > 745.0 ? 0.0 : std::exp(-d);
        }
    }

    const Labeling* lab_;
    ChannelConfig ch_;
    size_t n_ = 0;
    double gamma_ = 1;
    std::vector<Label> labels_;
    std::vector<RingElement> elems_;
    std::vector<cplx> pts_;
    std::vector<cplx> pair_pts_;
};

// ---- estimators ----------------------------------------------------------------

inline RateEstimate mi_direct(const Labeling& lab, const ChannelConfig& ch, const Label& b1, const Label& b2,
                              int64_t n_samples, uint64_t seed, int threads = 0) {
    bool nz = false;
    for (size_t d = 0; d < b1.size(); ++d) nz |= b1[d] != 0 || b2[d] != 0;
    if (!nz) throw std::invalid_argument("mi_direct: coefficients (0,0)");
    const MiEngine eng(lab, ch);
    return eng.evaluate({eng.direct_term(b1, b2)}, {}, n_samples, seed, threads).pair.at(0);
}

enum class MlcMode { mlc, sub, para };

inline std::string_view to_string(MlcMode m) {
    switch (m) {
    case MlcMode::mlc: return "mlc";
    case MlcMode::sub: return "sub";
    case MlcMode::para: return "para";
    }
    return "?";
}

struct MlcRates {
    std::vector<RateEstimate> levels;
    RateEstimate sum;
};

inline RateEstimate sum_of(const std::vector<RateEstimate>& v) {
    RateEstimate s;
    for (const RateEstimate& e : v) {
        s.value += e.value;
        s.stderr += e.stderr;  // levels share samples: bound by the sum of stderrs
        s.n_samples = e.n_samples;
        s.seed = e.seed;
    }
    return s;
}

inline MlcRates mlc_from_engine(const MiEngine& eng, const LevelCoeffs& b, MlcMode mode, int64_t n_samples,
                                uint64_t seed, int threads = 0) {
    const size_t L = eng.labeling().n_digits();
    std::vector<PairTerm> pt;
    std::vector<FoldTerm> ft;
    if (mode == MlcMode::mlc) {
        for (size_t l = 0; l < L; ++l) pt.push_back(eng.level_term(b, l));
    } else {
        // Levels before the last see Y mod phi_l in both decoders: the
        // subtracted terms are multiples of phi_l.
        const size_t folded = mode == MlcMode::para ? L : L - 1;
        for (size_t l = 0; l < folded; ++l) ft.push_back(eng.fold_term(b, l));
        if (mode == MlcMode::sub) pt.push_back(eng.subtracted_last_term(b));
    }
    const auto r = eng.evaluate(pt, ft, n_samples, seed, threads);
    MlcRates out;
    for (const auto& e : r.fold) out.levels.push_back(e);
    for (const auto& e : r.pair) out.levels.push_back(e);
    out.sum = sum_of(out.levels);
    return out;
}

inline MlcRates mi_mlc(const Labeling& lab, const ChannelConfig& ch, const LevelCoeffs& b, int64_t n_samples,
                       uint64_t seed, MlcMode mode = MlcMode::mlc, int threads = 0) {
    const MiEngine eng(lab, ch);
    return mlc_from_engine(eng, b, mode, n_samples, seed, threads);
}

// I(Y; all function digits) for fixed per-level coefficients.
inline RateEstimate mi_joint(const Labeling& lab, const ChannelConfig& ch, const LevelCoeffs& b, int64_t n_samples,
                             uint64_t seed, int threads = 0) {
    const MiEngine eng(lab, ch);
    return eng.evaluate({eng.joint_term(b)}, {}, n_samples, seed, threads).pair.at(0);
}

// I(Y; f_l) without conditioning, per level.
inline std::vector<RateEstimate> mi_level_marginals(const Labeling& lab, const ChannelConfig& ch, const LevelCoeffs& b,
                                                    int64_t n_samples, uint64_t seed, int threads = 0) {
    const MiEngine eng(lab, ch);
    std::vector<PairTerm> pt;
    for (size_t l = 0; l < lab.n_digits(); ++l) pt.push_back(eng.level_term(b, l, false));
    return eng.evaluate(pt, {}, n_samples, seed, threads).pair;
}

struct FlexRates {
    std::array<RateEstimate, 4> terms;  // I(Y;R1|R2), I(Y;R2|R1), 1/2 I(Y;R1,R2), I(Y;R1,R2|R1+R2)
    RateEstimate value;                 // minimum
};

inline FlexRates mi_flexible(const Labeling& lab, const ChannelConfig& ch, const Mat2& B1, const Mat2& B2,
                             int64_t n_samples, uint64_t seed, int threads = 0) {
    const MiEngine eng(lab, ch);
    using P = MiEngine::FlexPart;
    const auto r = eng.evaluate({eng.flex_term(B1, B2, P::given_r2), eng.flex_term(B1, B2, P::given_r1),
                                 eng.flex_term(B1, B2, P::joint), eng.flex_term(B1, B2, P::joint_given_sum)},
                                {}, n_samples, seed, threads);
    FlexRates out;
    for (size_t k = 0; k < 4; ++k) out.terms[k] = r.pair[k];
    out.terms[2].value *= 0.5;
    out.terms[2].stderr *= 0.5;
    size_t arg = 0;
    for (size_t k = 1; k < 4; ++k)
        if (out.terms[k].value < out.terms[arg].value) arg = k;
    out.value = out.terms[arg];
    return out;
}

// ---- coefficient maximization ----------------------------------------------------

// Nonzero pairs up to a common nonzero scalar: (1, b) for all b and (0, 1).
inline std::vector<std::array<int64_t, 2>> normalized_pairs(int64_t q) {
    std::vector<std::array<int64_t, 2>> v;
    for (int64_t b = 0; b < q; ++b) v.push_back({1, b});
    v.push_back({0, 1});
    return v;
}

// Direct-mode candidates: per block either (1, b) or (0, 1) in that block's field.
inline std::vector<std::array<Label, 2>> direct_candidates(const Labeling& lab, double budget = 1e4) {
    std::vector<std::vector<std::array<Label, 2>>> per_block;
    double total = 1;
    for (const Block& bl : lab.blocks()) {
        std::vector<std::array<Label, 2>> c;
        const int64_t q = bl.prime.rational_prime;
        if (bl.n_digits == 1) {
            for (auto p : normalized_pairs(q)) c.push_back({Label{p[0]}, Label{p[1]}});
        } else {
            for (int64_t v1 = 0; v1 < q; ++v1)
                for (int64_t v0 = 0; v0 < q; ++v0) c.push_back({Label{0, 1}, Label{v1, v0}});
            c.push_back({Label{0, 0}, Label{0, 1}});
        }
        total *= double(c.size());
        per_block.push_back(c);
    }
    if (total > budget) throw std::length_error("direct coefficient search exceeds budget");
    std::vector<std::array<Label, 2>> out;
    std::vector<size_t> idx(per_block.size(), 0);
    for (;;) {
        std::array<Label, 2> b;
        for (size_t k = 0; k < per_block.size(); ++k)
            for (size_t u = 0; u < 2; ++u)
                b[u].insert(b[u].end(), per_block[k][idx[k]][u].begin(), per_block[k][idx[k]][u].end());
        out.push_back(b);
        size_t k = per_block.size();
        while (k > 0) {
            --k;
            if (++idx[k] < per_block[k].size()) break;
            idx[k] = 0;
            if (k == 0) return out;
        }
    }
}

enum class RateMode { direct, mlc, sub, para, flex };

inline std::string_view to_string(RateMode m) {
    switch (m) {
    case RateMode::direct: return "direct";
    case RateMode::mlc: return "mlc";
    case RateMode::sub: return "sub";
    case RateMode::para: return "para";
    case RateMode::flex: return "flex";
    }
    return "?";
}

inline RateMode rate_mode_from_string(std::string_view s) {
    for (RateMode m : {RateMode::direct, RateMode::mlc, RateMode::sub, RateMode::para, RateMode::flex})
        if (to_string(m) == s) return m;
    throw std::invalid_argument("unknown rate mode '" + std::string(s) + "'");
}

// Fixed coefficients per mode; missing entries are searched.
struct CoeffSpec {
    std::optional<std::array<Label, 2>> direct;
    std::optional<LevelCoeffs> levels;  // mlc / sub / para
    Mat2 B1{{{1, 0}, {0, 1}}};          // flex
    Mat2 B2{{{1, 0}, {0, 1}}};
};

struct ModeResult {
    RateMode mode = RateMode::direct;
    std::vector<RateEstimate> levels;  // empty for direct / flex
    RateEstimate sum;
    std::array<Label, 2> direct_b;
    LevelCoeffs b;
};

// Estimates the requested modes with one shared set of samples. Coefficients
// not fixed in `spec` are maximized over the Monte-Carlo estimates:
//  - direct: all normalized pairs;
//  - mlc: jointly over all per-level normalized pairs (the sum is maximized);
//  - para: each folded level independently;
//  - sub: folded levels as para, then the last level given those.
inline std::vector<ModeResult> estimate_modes(const MiEngine& eng, const std::vector<RateMode>& modes,
                                              const CoeffSpec& spec, int64_t n_samples, uint64_t seed,
                                              int threads = 0, double term_budget = 4096) {
    const Labeling& lab = eng.labeling();
    const size_t L = lab.n_digits();
    std::vector<PairTerm> pt;
    std::vector<FoldTerm> ft;

    struct DirectPlan { std::vector<std::array<Label, 2>> cands; size_t first = 0; };
    struct MlcPlan {
        std::vector<std::vector<std::array<int64_t, 2>>> cands;  // per level
        std::vector<size_t> first;                               // first term index of level l
        std::vector<size_t> stride;                              // number of prefixes before level l
    };
    struct FoldPlan {
        std::vector<std::vector<std::array<int64_t, 2>>> cands;
        std::vector<size_t> first;
        size_t folded = 0;
    };
    std::optional<DirectPlan> dplan;
    std::optional<MlcPlan> mplan;
    std::optional<FoldPlan> fplan;
    size_t flex_first = 0;
    bool want_flex = false, want_sub = false, want_para = false;

    for (RateMode m : modes) {
        if (m == RateMode::direct && !dplan) {
            DirectPlan d;
            d.cands = spec.direct ? std::vector<std::array<Label, 2>>{*spec.direct} : direct_candidates(lab);
            d.first = pt.size();
            for (const auto& c : d.cands) pt.push_back(eng.direct_term(c[0], c[1]));
            dplan = d;
        } else if (m == RateMode::mlc && !mplan) {
            MlcPlan p;
            for (size_t l = 0; l < L; ++l)
                p.cands.push_back(spec.levels ? std::vector<std::array<int64_t, 2>>{(*spec.levels)[l]}
                                              : normalized_pairs(lab.digit_modulus(l)));
            size_t prefixes = 1, total = 0;
            for (size_t l = 0; l < L; ++l) {
                prefixes *= p.cands[l].size();
                total += prefixes;
            }
            if (double(total) > term_budget) throw std::length_error("mlc coefficient search exceeds budget");
            prefixes = 1;
            for (size_t l = 0; l < L; ++l) {
                p.first.push_back(pt.size());
                p.stride.push_back(prefixes);
                const size_t count = prefixes * p.cands[l].size();
                for (size_t k = 0; k < count; ++k) {
                    // k enumerates choices for levels 0..l, level 0 most significant
                    LevelCoeffs b(L, {1, 1});
                    size_t r = k;
                    for (size_t s = l + 1; s-- > 0;) {
                        b[s] = p.cands[s][r % p.cands[s].size()];
                        r /= p.cands[s].size();
                    }
                    pt.push_back(eng.level_term(b, l));
                }
                prefixes = count;
            }
            mplan = p;
        } else if (m == RateMode::sub) {
            want_sub = true;
        } else if (m == RateMode::para) {
            want_para = true;
        } else if (m == RateMode::flex && !want_flex) {
            want_flex = true;
            using P = MiEngine::FlexPart;
            flex_first = pt.size();
            for (P part : {P::given_r2, P::given_r1, P::joint, P::joint_given_sum})
                pt.push_back(eng.flex_term(spec.B1, spec.B2, part));
        }
    }
    if (want_sub || want_para) {
        FoldPlan f;
        f.folded = want_para ? L : L - 1;
        for (size_t l = 0; l < f.folded; ++l) {
            f.cands.push_back(spec.levels ? std::vector<std::array<int64_t, 2>>{(*spec.levels)[l]}
                                          : normalized_pairs(lab.digit_modulus(l)));
            f.first.push_back(ft.size());
            for (const auto& c : f.cands.back()) {
                LevelCoeffs b(L, {1, 1});
                b[l] = c;
                ft.push_back(eng.fold_term(b, l));
            }
        }
        fplan = f;
    }

    const auto res = eng.evaluate(pt, ft, n_samples, seed, threads);

    auto argmax = [](const std::vector<RateEstimate>& v, size_t lo, size_t n) {
        size_t a = lo;
        for (size_t k = lo + 1; k < lo + n; ++k)
            if (v[k].value > v[a].value) a = k;
        return a;
    };

    std::vector<ModeResult> out;
    for (RateMode m : modes) {
        ModeResult r;
        r.mode = m;
        if (m == RateMode::direct) {
            const size_t a = argmax(res.pair, dplan->first, dplan->cands.size());
            r.direct_b = dplan->cands[a - dplan->first];
            r.sum = res.pair[a];
        } else if (m == RateMode::mlc) {
            const MlcPlan& p = *mplan;
            const size_t full = p.stride[L - 1] * p.cands[L - 1].size();
            size_t best = 0;
            double best_v = -1e300;
            for (size_t k = 0; k < full; ++k) {
                double v = 0;
                size_t prefix = k;
                for (size_t l = L; l-- > 0;) {
                    v += res.pair[p.first[l] + prefix].value;
                    prefix /= p.cands[l].size();
                }
                if (v > best_v) {
                    best_v = v;
                    best = k;
                }
            }
            r.b.assign(L, {1, 1});
            r.levels.resize(L);
            size_t prefix = best;
            for (size_t l = L; l-- > 0;) {
                r.levels[l] = res.pair[p.first[l] + prefix];
                r.b[l] = p.cands[l][prefix % p.cands[l].size()];
                prefix /= p.cands[l].size();
            }
            r.sum = sum_of(r.levels);
        } else if (m == RateMode::para || m == RateMode::sub) {
            const FoldPlan& f = *fplan;
            r.b.assign(L, {1, 1});
            r.levels.resize(L);
            const size_t folded = m == RateMode::para ? L : L - 1;
            for (size_t l = 0; l < folded; ++l) {
                const size_t a = argmax(res.fold, f.first[l], f.cands[l].size());
                r.levels[l] = res.fold[a];
                r.b[l] = f.cands[l][a - f.first[l]];
            }
            if (m == RateMode::sub) {
                const auto cands = spec.levels ? std::vector<std::array<int64_t, 2>>{(*spec.levels)[L - 1]}
                                               : normalized_pairs(lab.digit_modulus(L - 1));
                std::vector<PairTerm> last;
                for (const auto& c : cands) {
                    LevelCoeffs b = r.b;
                    b[L - 1] = c;
                    last.push_back(eng.subtracted_last_term(b));
                }
                const auto lr = eng.evaluate(last, {}, n_samples, seed, threads).pair;
                const size_t a = argmax(lr, 0, lr.size());
                r.levels[L - 1] = lr[a];
                r.b[L - 1] = cands[a];
            }
            r.sum = sum_of(r.levels);
        } else {
            std::array<RateEstimate, 4> t;
            for (size_t k = 0; k < 4; ++k) t[k] = res.pair[flex_first + k];
            t[2].value *= 0.5;
            t[2].stderr *= 0.5;
            size_t a = 0;
            for (size_t k = 1; k < 4; ++k)
                if (t[k].value < t[a].value) a = k;
            r.sum = t[a];
        }
        out.push_back(r);
    }
    return out;
}

inline ModeResult maximize_coeffs_mi(const Labeling& lab, const ChannelConfig& ch, RateMode mode, int64_t n_samples,
                                     uint64_t seed, int threads = 0) {
    const MiEngine eng(lab, ch);
    return estimate_modes(eng, {mode}, CoeffSpec{}, n_samples, seed, threads).at(0);
}

} // namespace ringcf
