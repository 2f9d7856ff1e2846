#pragma once

// Product-construction lattices over Z:
//   Lambda = gamma/Q * M(C^1, ..., C^L) + gamma Z^N,  Q = p_1 ... p_L,
// where M is the CRT ring isomorphism F_{p_1} x ... x F_{p_L} -> Z/QZ applied
// coordinatewise. Integer coordinates ("unscaled") refer to Q/gamma * Lambda.

#include "algebra.hpp"
#include "constellation.hpp"
#include "linear_code.hpp"
#include "parallel.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace ringcf {

using RealVec = std::vector<double>;

class ProductLattice {
public:
    ProductLattice() = default;

    // primes may be empty (gamma Z^N); then N comes from `dim`.
    ProductLattice(std::vector<int64_t> primes, std::vector<LinearCode> codes, double gamma, size_t dim = 0)
        : primes_(std::move(primes)), codes_(std::move(codes)), gamma_(gamma) {
        if (!(gamma_ > 0)) throw std::invalid_argument("ProductLattice: gamma must be positive");
        if (codes_.size() != primes_.size()) throw std::invalid_argument("ProductLattice: one code per prime");
        n_ = codes_.empty() ? dim : codes_.front().length();
        if (n_ == 0) throw std::invalid_argument("ProductLattice: dimension must be positive");
        Q_ = 1;
        for (size_t l = 0; l < primes_.size(); ++l) {
            if (!is_rational_prime(primes_[l])) throw std::invalid_argument("ProductLattice: prime list");
            for (size_t k = 0; k < l; ++k)
                if (primes_[k] == primes_[l]) throw std::invalid_argument("ProductLattice: primes must be distinct");
            if (codes_[l].q() != primes_[l]) throw std::invalid_argument("ProductLattice: code field mismatch");
            if (codes_[l].length() != n_) throw std::invalid_argument("ProductLattice: code lengths differ");
            Q_ = detail::mul(Q_, primes_[l]);
        }
        if (!primes_.empty()) {
            std::vector<PrimeSpec> ps;
            for (int64_t p : primes_) ps.push_back(make_prime(RingElement{Ring::integers, p}));
            for (const RingElement& e : crt_idempotents(ps)) idem_.push_back(e.a);
        }
    }

    size_t dim() const { return n_; }
    int64_t modulus() const { return Q_; }
    double gamma() const { return gamma_; }
    const std::vector<int64_t>& primes() const { return primes_; }
    const std::vector<LinearCode>& codes() const { return codes_; }

    ProductLattice scaled(double factor) const {
        ProductLattice r = *this;
        r.gamma_ *= factor;
        return r;
    }

    // Coordinatewise M(c^1[n], ..., c^L[n]) in [0, Q).
    IntVec combine(const std::vector<IntVec>& words) const {
        if (words.size() != primes_.size()) throw std::invalid_argument("combine: one word per level");
        IntVec x(n_, 0);
        for (size_t l = 0; l < words.size(); ++l) {
            if (words[l].size() != n_) throw std::invalid_argument("combine: dimension mismatch");
            for (size_t i = 0; i < n_; ++i)
                x[i] = detail::floor_mod(x[i] + detail::floor_mod(words[l][i], primes_[l]) * idem_[l], Q_);
        }
        return x;
    }

    // Messages per level -> integer lattice point in [0, Q)^N.
    IntVec encode(const std::vector<IntVec>& messages) const {
        std::vector<IntVec> words;
        for (size_t l = 0; l < codes_.size(); ++l) words.push_back(codes_[l].encode(messages.at(l)));
        return combine(words);
    }

    struct Decomposition {
        std::vector<IntVec> words;
        IntVec carry;
    };

    Decomposition decompose(const IntVec& y) const {
        if (y.size() != n_) throw std::invalid_argument("decompose: dimension mismatch");
        Decomposition d;
        for (int64_t p : primes_) {
            IntVec w(n_);
            for (size_t i = 0; i < n_; ++i) w[i] = detail::floor_mod(y[i], p);
            d.words.push_back(w);
        }
        const IntVec m = combine(d.words);
        d.carry.resize(n_);
        for (size_t i = 0; i < n_; ++i) d.carry[i] = (y[i] - m[i]) / Q_;
        return d;
    }

    bool is_member(const IntVec& x) const {
        if (x.size() != n_) throw std::invalid_argument("is_member: dimension mismatch");
        const Decomposition d = decompose(x);
        for (size_t l = 0; l < codes_.size(); ++l)
            if (!codes_[l].contains(d.words[l])) return false;
        return true;
    }

    RealVec to_real(const IntVec& x) const {
        RealVec r(n_);
        for (size_t i = 0; i < n_; ++i) r[i] = gamma_ * double(x[i]) / double(Q_);
        return r;
    }

    // gamma^N * prod p_l^{-m_l}
    double volume() const {
        double v = std::pow(gamma_, double(n_));
        for (size_t l = 0; l < primes_.size(); ++l) v *= std::pow(double(primes_[l]), -double(codes_[l].dimension()));
        return v;
    }

    // Integer coset leaders M(C) in [0, Q)^N, enumerated once.
    const std::vector<IntVec>& coset_leaders(double budget = 1e6) const {
        if (leaders_.empty()) {
            double total = 1;
            for (const LinearCode& c : codes_) total *= c.codebook_size();
            if (total > budget) throw std::length_error("lattice enumeration budget exceeded");
            std::vector<std::vector<IntVec>> books;
            for (const LinearCode& c : codes_) books.push_back(c.codewords(budget));
            std::vector<size_t> idx(books.size(), 0);
            for (;;) {
                std::vector<IntVec> words;
                for (size_t l = 0; l < books.size(); ++l) words.push_back(books[l][idx[l]]);
                leaders_.push_back(books.empty() ? IntVec(n_, 0) : combine(words));
                size_t l = 0;
                while (l < books.size() && ++idx[l] == books[l].size()) idx[l++] = 0;
                if (l == books.size()) break;
            }
        }
        return leaders_;
    }

    // Exact nearest lattice point: for every coset leader the nearest point of
    // leader + gamma Z^N is a coordinatewise rounding.
    RealVec quantize_nn(const RealVec& y) const {
        if (y.size() != n_) throw std::invalid_argument("quantize_nn: dimension mismatch");
        const auto& L = coset_leaders();
        RealVec best(n_), cand(n_);
        double best_d = std::numeric_limits<double>::infinity();
        const double step = gamma_ / double(Q_);
        for (const IntVec& c : L) {
            double d = 0;
            for (size_t i = 0; i < n_; ++i) {
                const double base = step * double(c[i]);
                cand[i] = base + gamma_ * std::nearbyint((y[i] - base) / gamma_);
                const double e = y[i] - cand[i];
                d += e * e;
                if (d >= best_d) break;
            }
            if (d < best_d) {
                best_d = d;
                best = cand;
            }
        }
        return best;
    }

    RealVec mod(const RealVec& y) const {
        const RealVec q = quantize_nn(y);
        RealVec r(n_);
        for (size_t i = 0; i < n_; ++i) r[i] = y[i] - q[i];
        return r;
    }

private:
    std::vector<int64_t> primes_;
    std::vector<LinearCode> codes_;
    std::vector<int64_t> idem_;
    double gamma_ = 1;
    size_t n_ = 0;
    int64_t Q_ = 1;
    mutable std::vector<IntVec> leaders_;
};

struct SecondMoment {
    double sigma2 = 0;  // per dimension
    double G = 0;
    double stderr_sigma2 = 0;
    double stderr_G = 0;
    int64_t n_samples = 0;
};

inline SecondMoment second_moment_mc(const ProductLattice& lat, int64_t n_samples, uint64_t seed, int threads = 0) {
    if (n_samples <= 0) throw std::invalid_argument("second_moment_mc: n_samples must be positive");
    lat.coset_leaders();
    const size_t N = lat.dim();
    const int64_t blocks = (n_samples + kSampleBlock - 1) / kSampleBlock;
    const auto parts = parallel_map<MeanAcc>(
        size_t(blocks),
        [&](size_t b) {
            std::mt19937_64 rng(derive_seed(seed, b));
            std::uniform_real_distribution<double> U(0.0, 1.0);
            const int64_t lo = int64_t(b) * kSampleBlock;
            const int64_t hi = std::min(n_samples, lo + kSampleBlock);
            MeanAcc acc;
            RealVec u(N);
            for (int64_t s = lo; s < hi; ++s) {
                for (size_t i = 0; i < N; ++i) u[i] = lat.gamma() * U(rng);
                const RealVec e = lat.mod(u);
                double en = 0;
                for (double x : e) en += x * x;
                acc.add(en / double(N));
            }
            return acc;
        },
        threads);
    MeanAcc total;
    for (const MeanAcc& a : parts) total.merge(a);
    SecondMoment r;
    r.sigma2 = total.mean();
    r.stderr_sigma2 = total.stderr_of_mean();
    const double vn = std::pow(lat.volume(), 2.0 / double(N));
    r.G = r.sigma2 / vn;
    r.stderr_G = r.stderr_sigma2 / vn;
    r.n_samples = total.n;
    return r;
}

// Fine lattice generated by [G_c | G~] per level, coarse by G_c.
struct NestedPair {
    std::vector<int64_t> primes;
    std::vector<IntMat> coarse;    // N x m_c per level
    std::vector<IntMat> extension; // N x (m_f - m_c) per level
    size_t N = 0;
    double gamma = 1;

    static IntMat hcat(const IntMat& a, const IntMat& b, size_t N) {
        IntMat r(N);
        for (size_t i = 0; i < N; ++i) {
            if (i < a.size()) r[i].insert(r[i].end(), a[i].begin(), a[i].end());
            if (i < b.size()) r[i].insert(r[i].end(), b[i].begin(), b[i].end());
        }
        return r;
    }

    static LinearCode code_of(int64_t p, const IntMat& G, size_t N) {
        if (G.empty() || G[0].empty()) return LinearCode::zero(p, N);
        return LinearCode(p, G);
    }

    ProductLattice fine() const {
        std::vector<LinearCode> cs;
        for (size_t l = 0; l < primes.size(); ++l) cs.push_back(code_of(primes[l], hcat(coarse[l], extension[l], N), N));
        return ProductLattice(primes, cs, gamma, N);
    }

    ProductLattice coarse_lattice() const {
        std::vector<LinearCode> cs;
        for (size_t l = 0; l < primes.size(); ++l) cs.push_back(code_of(primes[l], coarse[l], N));
        return ProductLattice(primes, cs, gamma, N);
    }

    // bits per real dimension
    double design_rate() const {
        double r = 0;
        for (size_t l = 0; l < primes.size(); ++l) {
            const size_t k = extension[l].empty() ? 0 : extension[l][0].size();
            r += double(k) / double(N) * std::log2(double(primes[l]));
        }
        return r;
    }
};

// Coset representatives of Lambda_f / Lambda_c inside the Voronoi region of Lambda_c.
inline std::vector<RealVec> nested_codebook(const NestedPair& pair, double budget = 1e5) {
    const ProductLattice fine = pair.fine();
    const ProductLattice coarse = pair.coarse_lattice();
    double total = 1;
    for (const LinearCode& c : fine.codes()) total *= c.codebook_size();
    if (total > budget) throw std::length_error("nested codebook budget exceeded");
    // Every extension message gives one coset of Lambda_c.
    std::vector<std::vector<IntVec>> ext_books;
    for (size_t l = 0; l < pair.primes.size(); ++l)
        ext_books.push_back(NestedPair::code_of(pair.primes[l], NestedPair::hcat({}, pair.extension[l], pair.N), pair.N)
                                .codewords(budget));
    std::vector<RealVec> out;
    std::vector<size_t> idx(ext_books.size(), 0);
    for (;;) {
        std::vector<IntVec> words;
        for (size_t l = 0; l < ext_books.size(); ++l) words.push_back(ext_books[l][idx[l]]);
        const IntVec x = ext_books.empty() ? IntVec(pair.N, 0) : fine.combine(words);
        out.push_back(coarse.mod(fine.to_real(x)));
        size_t l = 0;
        while (l < ext_books.size() && ++idx[l] == ext_books[l].size()) idx[l++] = 0;
        if (l == ext_books.size()) break;
    }
    return out;
}

// (alpha y + sum_k a_k u_k) mod Lambda_c
inline RealVec cf_frontend(const RealVec& y, double alpha, const std::vector<RealVec>& dithers,
                           const std::vector<double>& a, const ProductLattice& coarse) {
    if (dithers.size() != a.size()) throw std::invalid_argument("cf_frontend: one coefficient per dither");
    RealVec v(y.size());
    for (size_t i = 0; i < y.size(); ++i) v[i] = alpha * y[i];
    for (size_t k = 0; k < dithers.size(); ++k) {
        if (dithers[k].size() != y.size()) throw std::invalid_argument("cf_frontend: dimension mismatch");
        for (size_t i = 0; i < y.size(); ++i) v[i] += a[k] * dithers[k][i];
    }
    return coarse.mod(v);
}

} // namespace ringcf
