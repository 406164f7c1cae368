#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <jumpflow/rng.hpp>
#include <jumpflow/stats.hpp>

#include <cmath>
#include <set>
#include <vector>

using namespace jumpflow;

TEST_CASE("same stream replays identically") {
    CounterRng a(42, 7, StreamTag::brownian);
    CounterRng b(42, 7, StreamTag::brownian);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct streams differ") {
    CounterRng a(42, 7, StreamTag::brownian);
    CounterRng b(42, 7, StreamTag::small_jumps);
    CounterRng c(42, 8, StreamTag::brownian);
    CounterRng d(43, 7, StreamTag::brownian);
    int equal_ab = 0, equal_ac = 0, equal_ad = 0;
    for (int i = 0; i < 64; ++i) {
        const std::uint64_t va = a.next_u64();
        equal_ab += va == b.next_u64();
        equal_ac += va == c.next_u64();
        equal_ad += va == d.next_u64();
    }
    CHECK(equal_ab == 0);
    CHECK(equal_ac == 0);
    CHECK(equal_ad == 0);
}

TEST_CASE("uniform moments") {
    CounterRng rng(1, 0, StreamTag::general);
    MeanVar mv;
    for (int i = 0; i < 200000; ++i) mv.add(rng.uniform());
    CHECK(std::abs(mv.mean() - 0.5) < 3.0 * mv.stderr_mean() + 1e-3);
    CHECK(std::abs(mv.variance() - 1.0 / 12.0) < 2e-3);
}

TEST_CASE("normal moments and tail") {
    CounterRng rng(2, 0, StreamTag::general);
    MeanVar mv;
    int beyond3 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        mv.add(z);
        if (std::abs(z) > 3.0) ++beyond3;
    }
    CHECK(std::abs(mv.mean()) < 3.0 * mv.stderr_mean());
    CHECK(std::abs(mv.variance() - 1.0) < 1.5e-2);
    // P(|Z| > 3) = 0.0027
    const double p = static_cast<double>(beyond3) / n;
    CHECK(std::abs(p - 0.0027) < 3.0 * binomial_stderr(0.0027, n) + 1e-4);
}

TEST_CASE("exponential mean") {
    CounterRng rng(3, 0, StreamTag::general);
    MeanVar mv;
    for (int i = 0; i < 100000; ++i) mv.add(rng.exponential(2.0));
    CHECK(std::abs(mv.mean() - 0.5) < 3.0 * mv.stderr_mean());
}

TEST_CASE("unit direction is normalized") {
    CounterRng rng(4, 0, StreamTag::general);
    double v[3];
    for (int i = 0; i < 100; ++i) {
        rng.unit_direction(3, v);
        const double r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        CHECK(std::abs(r - 1.0) < 1e-12);
    }
    rng.unit_direction(1, v);
    CHECK(std::abs(std::abs(v[0]) - 1.0) == 0.0);
}

TEST_CASE("parallel map reduce is thread-count independent") {
    auto run = [](int threads) {
        return parallel_map_reduce<double>(
            10000, threads,
            [](std::int64_t lo, std::int64_t hi) {
                double s = 0.0;
                for (std::int64_t i = lo; i < hi; ++i) s += std::sin(static_cast<double>(i)) * 1e-3;
                return s;
            },
            [](double& a, double b) { a += b; }, 0.0);
    };
    const double s1 = run(1);
    const double s4 = run(4);
    const double s7 = run(7);
    CHECK(s1 == s4);
    CHECK(s1 == s7);
}

TEST_CASE("ols recovers a line") {
    std::vector<double> x, y;
    for (int i = 0; i < 50; ++i) {
        x.push_back(0.1 * i);
        y.push_back(3.0 + 2.0 * 0.1 * i);
    }
    const OlsFit fit = ols_fit(x, y);
    CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(fit.slope_stderr < 1e-10);
}
