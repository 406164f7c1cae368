#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace jumpflow {

/// Tags separating the independent random streams of one run.  Every draw is
/// a pure function of (seed, path_index, tag, draw counter), so two streams
/// never interact no matter how many values are consumed from either.
enum class StreamTag : std::uint64_t {
    brownian = 1,
    small_jumps = 2,
    large_jumps = 3,
    marks = 4,
    quadrature = 5,
    probe = 6,
    triples = 7,
    inner = 8,
    general = 9,
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_mix(std::uint64_t a, std::uint64_t b) {
    a ^= b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2);
    std::uint64_t s = a;
    return splitmix64(s);
}

struct PhiloxBlock {
    std::array<std::uint32_t, 4> v;
};

// One block of philox4x32-10 (Salmon et al. counter-based generator).
inline PhiloxBlock philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t mul_a = 0xD2511F53u, mul_b = 0xCD9E8D57u;
    constexpr std::uint32_t bump_a = 0x9E3779B9u, bump_b = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(mul_a) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(mul_b) * ctr[2];
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += bump_a;
        key[1] += bump_b;
    }
    return {ctr};
}

}  // namespace detail

/// Counter-based generator over a (seed, path_index, tag) stream.  Cheap to
/// construct, no shared state; regenerating with the same triple replays the
/// identical sequence bit for bit.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t path_index, StreamTag tag) {
        std::uint64_t chain = detail::hash_mix(detail::hash_mix(seed, path_index),
                                               static_cast<std::uint64_t>(tag));
        const std::uint64_t key64 = detail::splitmix64(chain);
        const std::uint64_t stream64 = detail::splitmix64(chain);
        key_ = {static_cast<std::uint32_t>(key64), static_cast<std::uint32_t>(key64 >> 32)};
        stream_ = {static_cast<std::uint32_t>(stream64), static_cast<std::uint32_t>(stream64 >> 32)};
    }

    std::uint64_t next_u64() {
        if (word_pos_ == 0) refill();
        const int base = 2 * (2 - word_pos_);  // words consumed pairwise
        --word_pos_;
        return static_cast<std::uint64_t>(block_.v[base]) |
               (static_cast<std::uint64_t>(block_.v[base + 1]) << 32);
    }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1]; safe to pass through log().
    double uniform_open() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; second value of each pair is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform_open()));
        const double theta = 6.283185307179586476925286766559 * uniform();
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double exponential(double rate) { return -std::log(uniform_open()) / rate; }

    /// Uniform point on the unit sphere in dimension n (sign for n == 1).
    void unit_direction(int n, double* out) {
        if (n == 1) {
            out[0] = uniform() < 0.5 ? -1.0 : 1.0;
            return;
        }
        double s = 0.0;
        do {
            s = 0.0;
            for (int i = 0; i < n; ++i) {
                out[i] = normal();
                s += out[i] * out[i];
            }
        } while (s == 0.0);
        s = std::sqrt(s);
        for (int i = 0; i < n; ++i) out[i] /= s;
    }

private:
    void refill() {
        detail::PhiloxBlock b = detail::philox4x32(
            {static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
             stream_[0], stream_[1]},
            key_);
        block_ = b;
        ++counter_;
        word_pos_ = 2;
    }

    std::array<std::uint32_t, 2> key_{};
    std::array<std::uint32_t, 2> stream_{};
    std::uint64_t counter_ = 0;
    detail::PhiloxBlock block_{};
    int word_pos_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Derives a child seed for a named sub-computation (documented substream
/// scheme: everything flows from the single run seed).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    return detail::hash_mix(seed, salt ^ 0xA5A5A5A5A5A5A5A5ull);
}

}  // namespace jumpflow
