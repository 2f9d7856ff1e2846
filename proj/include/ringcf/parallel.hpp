#pragma once

// Seed derivation and a small fixed-order parallel map.
// Work is split into blocks that each get their own derived seed, so results
// never depend on how many threads run them.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ringcf {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t parent, uint64_t index) {
    return splitmix64(splitmix64(parent) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline std::atomic<int>& default_thread_slot() {
    static std::atomic<int> n{0};
    return n;
}

inline int default_threads() {
    const int n = default_thread_slot().load();
    if (n > 0) return n;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
}

inline void set_default_threads(int n) { default_thread_slot().store(n < 0 ? 0 : n); }

// out[i] = f(i) for i in [0, n); f must be safe to call concurrently.
template <class T, class F>
std::vector<T> parallel_map(size_t n, F&& f, int threads = 0) {
    std::vector<T> out(n);
    if (threads <= 0) threads = default_threads();
    const size_t workers = std::min<size_t>(size_t(threads), n);
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) out[i] = f(i);
        return out;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto run = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                out[i] = f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!err) err = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
    return out;
}

struct MeanAcc {
    double sum = 0;
    double sumsq = 0;
    int64_t n = 0;

    void add(double x) {
        sum += x;
        sumsq += x * x;
        ++n;
    }
    void merge(const MeanAcc& o) {
        sum += o.sum;
        sumsq += o.sumsq;
        n += o.n;
    }
    double mean() const { return n ? sum / double(n) : 0.0; }
    double stderr_of_mean() const {
        if (n < 2) return 0.0;
        const double m = mean();
        const double var = std::max(0.0, (sumsq - double(n) * m * m) / double(n - 1));
        return std::sqrt(var / double(n));
    }
};

constexpr int64_t kSampleBlock = 2048;

} // namespace ringcf
