#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace effectlab {

// ============================== RNG ==========================================
//
// SplitMix64: a counter-based 64-bit generator (Steele, Lea, Flood 2014).
// The state advances by a fixed odd increment and each output is a finalizer
// hash of the counter, so streams are reproducible across platforms and can
// be split cheaply by mixing a stream tag into the seed.

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // uniform integer in [0, n)
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(next_u64() % n);
    }

    // Box-Muller transform; one draw per call, the sine branch is discarded
    // so the stream stays a pure function of the call sequence.
    double normal(double mu = 0.0, double sigma = 1.0) {
        double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mu + sigma * r * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    std::uint64_t state_;
};

// Derive an independent child seed from a master seed and a stream tag.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    Rng r(master ^ (0xD1B54A32D192ED03ULL * (stream + 1)));
    return r.next_u64();
}

// ============================== Threading ====================================

// Worker count: EFFECTLAB_THREADS caps parallelism, default hardware threads.
inline unsigned max_threads() {
    static const unsigned cached = [] {
        if (const char* env = std::getenv("EFFECTLAB_THREADS")) {
            long v = std::strtol(env, nullptr, 10);
            if (v >= 1) return static_cast<unsigned>(v);
        }
        unsigned hc = std::thread::hardware_concurrency();
        return hc ? hc : 1u;
    }();
    return cached;
}

namespace detail {
inline bool& in_parallel_region() {
    thread_local bool flag = false;
    return flag;
}
}  // namespace detail

// Index-parallel loop. Each index writes its own output slot, so results are
// independent of the worker count. Nested calls run serially.
template <typename F>
void parallel_for(std::size_t n, F&& fn) {
    const std::size_t workers = std::min<std::size_t>(max_threads(), n);
    if (workers <= 1 || detail::in_parallel_region()) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr error;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            detail::in_parallel_region() = true;
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// ============================== Small numerics ===============================

inline double mean(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("mean of empty range");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// population variance (divide by N)
inline double variance(std::span<const double> v) {
    double m = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / static_cast<double>(v.size());
}

inline double stddev(std::span<const double> v) { return std::sqrt(variance(v)); }

// standard error of the mean (sample std / sqrt(N)); 0 for a single value
inline double standard_error(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    double m = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size() - 1)) /
           std::sqrt(static_cast<double>(v.size()));
}

// standard normal CDF via erfc, accurate to ~1e-16
inline double normal_cdf(double t) {
    return 0.5 * std::erfc(-t / std::sqrt(2.0));
}

// shortest decimal form with the requested significant digits
inline std::string format_real(double v, int digits = 12) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

}  // namespace effectlab
