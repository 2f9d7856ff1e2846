#pragma once

// Linear codes over F_q given by an N x m generator matrix: c = G w.

#include "algebra.hpp"
#include "finite_field.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ringcf {

using IntVec = std::vector<int64_t>;
using IntMat = std::vector<IntVec>;  // row-major

// Rank over F_q by Gaussian elimination.
inline int rank_mod(IntMat A, int64_t q) {
    const size_t rows = A.size();
    const size_t cols = rows ? A[0].size() : 0;
    int r = 0;
    for (size_t c = 0; c < cols && size_t(r) < rows; ++c) {
        size_t piv = size_t(r);
        while (piv < rows && detail::floor_mod(A[piv][c], q) == 0) ++piv;
        if (piv == rows) continue;
        std::swap(A[piv], A[size_t(r)]);
        const int64_t inv = mod_inverse(A[size_t(r)][c], q);
        for (auto& x : A[size_t(r)]) x = detail::floor_mod(x * inv, q);
        for (size_t i = 0; i < rows; ++i) {
            if (i == size_t(r)) continue;
            const int64_t f = detail::floor_mod(A[i][c], q);
            if (!f) continue;
            for (size_t k = 0; k < cols; ++k) A[i][k] = detail::floor_mod(A[i][k] - f * A[size_t(r)][k], q);
        }
        ++r;
    }
    return r;
}

class LinearCode {
public:
    LinearCode() = default;

    LinearCode(int64_t q, IntMat G) : q_(q), G_(std::move(G)) {
        if (!is_rational_prime(q_)) throw std::invalid_argument("LinearCode: q must be prime");
        n_ = G_.size();
        m_ = n_ ? G_[0].size() : 0;
        for (auto& row : G_) {
            if (row.size() != m_) throw std::invalid_argument("LinearCode: ragged generator matrix");
            for (auto& x : row) x = detail::floor_mod(x, q_);
        }
        if (m_ > 0 && rank_mod(G_, q_) != int(m_)) throw std::invalid_argument("LinearCode: generator matrix not full rank");
    }

    // Length-N code of dimension 0.
    static LinearCode zero(int64_t q, size_t N) {
        LinearCode c;
        c.q_ = q;
        c.n_ = N;
        c.m_ = 0;
        c.G_.assign(N, IntVec{});
        return c;
    }

    // Identity code of length 1 (uncoded symbol).
    static LinearCode identity(int64_t q, size_t N = 1) {
        IntMat G(N, IntVec(N, 0));
        for (size_t i = 0; i < N; ++i) G[i][i] = 1;
        return LinearCode(q, G);
    }

    int64_t q() const { return q_; }
    size_t length() const { return n_; }
    size_t dimension() const { return m_; }
    const IntMat& generator() const { return G_; }

    double codebook_size() const { return std::pow(double(q_), double(m_)); }

    IntVec encode(const IntVec& w) const {
        if (w.size() != m_) throw std::invalid_argument("LinearCode::encode: message length mismatch");
        IntVec c(n_, 0);
        for (size_t i = 0; i < n_; ++i) {
            int64_t s = 0;
            for (size_t j = 0; j < m_; ++j) s = (s + G_[i][j] * detail::floor_mod(w[j], q_)) % q_;
            c[i] = s;
        }
        return c;
    }

    bool contains(const IntVec& c) const {
        if (c.size() != n_) throw std::invalid_argument("LinearCode::contains: length mismatch");
        IntMat A = G_;
        for (size_t i = 0; i < n_; ++i) A[i].push_back(c[i]);
        return rank_mod(A, q_) == int(m_);
    }

    // Message with index k (base-q digits, first entry least significant).
    IntVec message_at(int64_t k) const {
        IntVec w(m_);
        for (size_t j = 0; j < m_; ++j) {
            w[j] = k % q_;
            k /= q_;
        }
        return w;
    }

    std::vector<IntVec> codewords(double budget = 1e6) const {
        if (codebook_size() > budget) throw std::length_error("codebook enumeration budget exceeded");
        const int64_t n = int64_t(codebook_size());
        std::vector<IntVec> out;
        out.reserve(size_t(n));
        for (int64_t k = 0; k < n; ++k) out.push_back(encode(message_at(k)));
        return out;
    }

private:
    int64_t q_ = 2;
    size_t n_ = 0;
    size_t m_ = 0;
    IntMat G_;
};

} // namespace ringcf
