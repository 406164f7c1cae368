#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "common.hpp"

namespace jumpflow {

/// Mean / variance accumulator with a deterministic merge.
struct MeanVar {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::int64_t n = 0;

    void add(double v) {
        sum += v;
        sum_sq += v * v;
        ++n;
    }
    void merge(const MeanVar& o) {
        sum += o.sum;
        sum_sq += o.sum_sq;
        n += o.n;
    }
    double mean() const { return n > 0 ? sum / n : 0.0; }
    double variance() const {
        if (n < 2) return 0.0;
        const double m = mean();
        return std::max(0.0, (sum_sq - n * m * m) / (n - 1));
    }
    double stderr_mean() const { return n > 0 ? std::sqrt(variance() / n) : 0.0; }
};

inline int resolve_threads(int threads) {
    if (threads > 0) return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Partial results are produced per fixed-size block and folded in block
// order, so the result is identical for every thread count.
inline constexpr std::int64_t reduce_block_size = 256;

template <class T, class MapBlock, class Merge>
T parallel_map_reduce(std::int64_t count, int threads, MapBlock&& map_block, Merge&& merge, T init) {
    if (count <= 0) return init;
    const std::int64_t blocks = (count + reduce_block_size - 1) / reduce_block_size;
    std::vector<T> partial(static_cast<std::size_t>(blocks));
    const int workers = std::min<std::int64_t>(resolve_threads(threads), blocks);
    if (workers <= 1) {
        for (std::int64_t b = 0; b < blocks; ++b) {
            const std::int64_t lo = b * reduce_block_size;
            const std::int64_t hi = std::min(count, lo + reduce_block_size);
            partial[static_cast<std::size_t>(b)] = map_block(lo, hi);
        }
    } else {
        std::atomic<std::int64_t> next{0};
        auto work = [&]() {
            for (;;) {
                const std::int64_t b = next.fetch_add(1);
                if (b >= blocks) return;
                const std::int64_t lo = b * reduce_block_size;
                const std::int64_t hi = std::min(count, lo + reduce_block_size);
                partial[static_cast<std::size_t>(b)] = map_block(lo, hi);
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    T acc = std::move(init);
    for (auto& p : partial) merge(acc, p);
    return acc;
}

/// Ordinary least squares fit y = intercept + slope * x.
struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    std::int64_t n = 0;
};

inline OlsFit ols_fit(const std::vector<double>& x, const std::vector<double>& y) {
    OlsFit fit;
    fit.n = static_cast<std::int64_t>(x.size());
    if (x.size() != y.size() || x.size() < 3) throw argument_error("ols_fit: need >= 3 paired points");
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw argument_error("ols_fit: degenerate abscissae");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        rss += r * r;
    }
    fit.slope_stderr = std::sqrt(rss / (n - 2.0) / sxx);
    return fit;
}

/// Standard error of an empirical proportion.
inline double binomial_stderr(double p_hat, std::int64_t n) {
    if (n <= 0) return 0.0;
    return std::sqrt(std::max(0.0, p_hat * (1.0 - p_hat)) / static_cast<double>(n));
}

}  // namespace jumpflow
