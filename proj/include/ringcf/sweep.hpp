#pragma once

// SNR grid x channel realizations, one estimator cell each.

#include "parallel.hpp"
#include "rates.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ringcf {

struct ChannelSpec {
    std::vector<std::array<cplx, 2>> fixed;  // one entry per realization
    int64_t random_count = 0;                // used when `fixed` is empty
    uint64_t random_seed = 0;

    size_t realizations() const { return fixed.empty() ? size_t(random_count) : fixed.size(); }

    // Random gains are i.i.d. CN(0, 1), one stream per realization.
    std::array<cplx, 2> gains(size_t r) const {
        if (!fixed.empty()) return fixed.at(r);
        std::mt19937_64 rng(derive_seed(random_seed, r));
        std::normal_distribution<double> N(0.0, std::sqrt(0.5));
        std::array<cplx, 2> h;
        for (auto& x : h) {
            const double re = N(rng);
            x = {re, N(rng)};
        }
        return h;
    }
};

struct SweepConfig {
    std::vector<double> snr_db;
    ChannelSpec channel;
    std::vector<RateMode> modes;
    CoeffSpec coeffs;
    int64_t n_samples = 200000;
    uint64_t seed = 0;
};

struct SweepRow {
    double snr_db = 0;
    size_t realization = 0;
    RateMode mode = RateMode::direct;
    int level = 0;  // 0 = sum, otherwise 1-based level
    RateEstimate rate;
    std::string coeffs;
};

inline std::string coeff_text(const Label& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
    return s;
}

inline std::string coeff_text(const ModeResult& r) {
    switch (r.mode) {
    case RateMode::direct: return coeff_text(r.direct_b[0]) + ";" + coeff_text(r.direct_b[1]);
    case RateMode::flex: return "";
    default: break;
    }
    std::string s;
    for (size_t l = 0; l < r.b.size(); ++l)
        s += (l ? ";" : "") + std::to_string(r.b[l][0]) + " " + std::to_string(r.b[l][1]);
    return s;
}

inline uint64_t cell_seed(uint64_t master, size_t snr_index, size_t realization, size_t n_real) {
    return derive_seed(master, uint64_t(snr_index) * uint64_t(n_real) + uint64_t(realization));
}

// Cells run in order; each estimator spreads its sample blocks over `threads`.
inline std::vector<SweepRow> sweep(const Labeling& lab, const SweepConfig& cfg, int threads = 0) {
    if (cfg.n_samples <= 0) throw std::invalid_argument("n_samples must be positive");
    if (cfg.modes.empty()) throw std::invalid_argument("no estimator modes selected");
    std::vector<SweepRow> rows;
    const size_t R = cfg.channel.realizations();
    for (size_t s = 0; s < cfg.snr_db.size(); ++s) {
        for (size_t r = 0; r < R; ++r) {
            const ChannelConfig ch{cfg.channel.gains(r), std::pow(10.0, cfg.snr_db[s] / 10.0)};
            const MiEngine eng(lab, ch);
            const uint64_t seed = cell_seed(cfg.seed, s, r, R);
            for (const ModeResult& m : estimate_modes(eng, cfg.modes, cfg.coeffs, cfg.n_samples, seed, threads)) {
                const std::string ct = coeff_text(m);
                rows.push_back({cfg.snr_db[s], r, m.mode, 0, m.sum, ct});
                for (size_t l = 0; l < m.levels.size(); ++l)
                    rows.push_back({cfg.snr_db[s], r, m.mode, int(l + 1), m.levels[l], ct});
            }
        }
    }
    return rows;
}

} // namespace ringcf
