#pragma once

// W(d) = sum over lambda in (m R) of exp(-g2 |d - lambda|^2), the likelihood of a
// Gaussian folded onto the ideal lattice m R. Evaluated either by the direct
// lattice sum or by its Poisson dual, whichever needs fewer terms.

#include "algebra.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace ringcf {

class PeriodicGaussian {
public:
    enum class Method { automatic, direct, dual };

    PeriodicGaussian() = default;

    PeriodicGaussian(const RingElement& m, double g2, Method method = Method::automatic) : g2_(g2) {
        if (!(g2 > 0)) throw std::invalid_argument("PeriodicGaussian: g2 must be positive");
        if (m.is_zero()) throw std::invalid_argument("PeriodicGaussian: zero modulus");
        one_dim_ = m.ring == Ring::integers;
        const double cut = 40.0;  // exp(-40) relative truncation
        if (one_dim_) {
            p_ = std::abs(double(m.a));
            const double r = std::sqrt(cut / g2) + p_;
            const double rm = std::sqrt(cut * g2) / M_PI * p_;
            dual_ = method == Method::dual || (method == Method::automatic && rm < r / p_);
            const int K = int(std::ceil(dual_ ? rm : r / p_)) + 1;
            for (int k = -K; k <= K; ++k) ks_.push_back(k);
            return;
        }
        b1_ = m.to_complex();
        b2_ = (m * RingElement::generator(m.ring)).to_complex();
        area_ = std::abs(b1_.real() * b2_.imag() - b1_.imag() * b2_.real());
        det_ = b1_.real() * b2_.imag() - b1_.imag() * b2_.real();
        const double diam = std::abs(b1_) + std::abs(b2_);
        const double r = std::sqrt(cut / g2) + diam;
        const double rm = std::sqrt(cut * g2) / M_PI;
        const double n_direct = M_PI * r * r / area_;
        const double n_dual = M_PI * rm * rm * area_;
        dual_ = method == Method::dual || (method == Method::automatic && n_dual < n_direct);
        // dual basis: rows of B^{-1}
        const std::complex<double> d1{b2_.imag() / det_, -b2_.real() / det_};
        const std::complex<double> d2{-b1_.imag() / det_, b1_.real() / det_};
        const std::complex<double> e1 = dual_ ? d1 : b1_, e2 = dual_ ? d2 : b2_;
        const double rad = dual_ ? rm : r;
        // enumerate lattice points of basis (e1, e2) within rad
        const double minlen = dual_ ? 1.0 / std::max(std::abs(b1_), std::abs(b2_)) : area_ / diam;
        const int K = int(std::ceil(rad / std::max(minlen, 1e-12) * 2.0)) + 2;
        for (int i = -K; i <= K; ++i)
            for (int j = -K; j <= K; ++j) {
                const std::complex<double> v = double(i) * e1 + double(j) * e2;
                if (std::abs(v) <= rad) pts_.push_back(v);
            }
    }

    bool uses_dual() const { return dual_; }
    size_t terms() const { return one_dim_ ? ks_.size() : pts_.size(); }

    double operator()(std::complex<double> d) const {
        if (one_dim_) {
            double x = d.real();
            x -= p_ * std::nearbyint(x / p_);
            double s = 0;
            if (dual_) {
                for (int k : ks_) s += std::exp(-M_PI * M_PI * double(k) * double(k) / (g2_ * p_ * p_)) *
                                       std::cos(2.0 * M_PI * double(k) * x / p_);
                return s * std::sqrt(M_PI / g2_) / p_;
            }
            for (int k : ks_) {
                const double e = x - double(k) * p_;
                s += std::exp(-g2_ * e * e);
            }
            return s;
        }
        // coordinates of d in the primal basis, reduce to a near-origin representative
        const double a = (d.real() * b2_.imag() - d.imag() * b2_.real()) / det_;
        const double b = (b1_.real() * d.imag() - b1_.imag() * d.real()) / det_;
        d -= std::nearbyint(a) * b1_ + std::nearbyint(b) * b2_;
        double s = 0;
        if (dual_) {
            for (const auto& mu : pts_)
                s += std::exp(-M_PI * M_PI * std::norm(mu) / g2_) *
                     std::cos(2.0 * M_PI * (mu.real() * d.real() + mu.imag() * d.imag()));
            return s * M_PI / (g2_ * area_);
        }
        for (const auto& l : pts_) s += std::exp(-g2_ * std::norm(d - l));
        return s;
    }

private:
    double g2_ = 1;
    bool one_dim_ = false;
    bool dual_ = false;
    double p_ = 1;
    std::vector<int> ks_;
    std::complex<double> b1_, b2_;
    double area_ = 1, det_ = 1;
    std::vector<std::complex<double>> pts_;
};

} // namespace ringcf
