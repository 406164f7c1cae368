#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "common.hpp"
#include "distributions.hpp"
#include "rng.hpp"

namespace jumpflow {

enum class JumpRegion { small, large };

/// Jump measure split into a finite-activity small-mark region (|z| <= 1,
/// integrated compensated) and a large-mark region (|z| > 1, integrated raw).
struct LevyMeasureSpec {
    double small_intensity = 0.0;  // events per unit time in the small region
    double large_intensity = 1.0;  // events per unit time in the large region, > 0
    MarkDistribution small_mark_dist;
    MarkDistribution large_mark_dist;
    int mark_dim = 1;

    void validate() const {
        if (mark_dim < 1) throw config_error("noise: mark_dim must be >= 1");
        if (!(small_intensity >= 0.0) || !std::isfinite(small_intensity))
            throw config_error("noise: small_intensity must be finite and >= 0");
        if (!(large_intensity > 0.0) || !std::isfinite(large_intensity))
            throw config_error("noise: large_intensity must be finite and > 0");
        if (small_intensity > 0.0 && (!small_mark_dist.sampler || small_mark_dist.dim != mark_dim))
            throw config_error("noise: small mark distribution missing or dimension mismatch");
        if (!large_mark_dist.sampler || large_mark_dist.dim != mark_dim)
            throw config_error("noise: large mark distribution missing or dimension mismatch");
    }
};

struct JumpEvent {
    double time = 0.0;  // in (0, horizon]
    Vec mark;
    JumpRegion region = JumpRegion::small;
};

/// One frozen realization of the driving noise: Brownian increments on the
/// dyadic grid plus a time-ordered marked jump list.  Immutable once built and
/// safe to share across threads; the same (seed, path_index) always rebuilds
/// the identical scenario.
struct LevyNoiseScenario {
    double horizon = 1.0;
    double grid_step = 0.0;
    int level = 0;          // grid_step == horizon / 2^level
    int brownian_dim = 1;
    int mark_dim = 1;
    std::vector<double> brownian_increments;  // (2^level) x brownian_dim, row-major
    std::vector<JumpEvent> jumps;             // strictly increasing in time
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;

    // Quadrature sample of the small-mark distribution used by the
    // compensator; identical across path indices of the same run seed.
    std::vector<Vec> compensator_marks;
    double small_intensity = 0.0;

    int cell_count() const { return 1 << level; }
    double grid_time(int k) const { return horizon * static_cast<double>(k) / cell_count(); }
    const double* increment(int cell) const { return brownian_increments.data() + static_cast<std::size_t>(cell) * brownian_dim; }
};

namespace detail {

inline std::vector<double> sample_arrival_times(double rate, double horizon, CounterRng& rng) {
    std::vector<double> times;
    if (rate <= 0.0) return times;
    double t = rng.exponential(rate);
    while (t < horizon) {
        times.push_back(t);
        t += rng.exponential(rate);
    }
    return times;
}

inline Vec sample_mark_in_region(const MarkDistribution& dist, JumpRegion region, CounterRng& rng) {
    // Region membership is rejection-checked: the catalog distributions honor
    // it by construction, but user parameters may not.
    for (int attempt = 0; attempt < 10000; ++attempt) {
        Vec z = dist.sample(rng);
        const double r = norm2(z);
        if (region == JumpRegion::small ? (r <= 1.0) : (r > 1.0)) return z;
    }
    throw config_error("mark distribution '" + dist.name + "' does not respect its jump region");
}

}  // namespace detail

/// Number of dyadic levels implied by (horizon, grid_step); throws unless
/// grid_step == horizon / 2^m for some integer m.
inline int dyadic_level_for(double horizon, double grid_step) {
    if (!(horizon > 0.0) || !(grid_step > 0.0)) throw config_error("noise: horizon and grid_step must be positive");
    const double ratio = horizon / grid_step;
    const int m = static_cast<int>(std::lround(std::log2(ratio)));
    if (m < 0 || m > 30 || std::abs(std::ldexp(1.0, m) - ratio) > 1e-9 * ratio)
        throw config_error("noise: grid_step must equal horizon / 2^m");
    return m;
}

/// Builds one frozen noise realization.  Brownian increments, the two jump
/// streams and the marks each consume their own counter stream, so e.g.
/// changing the small intensity never perturbs the large-jump arrivals.
inline LevyNoiseScenario build_scenario(const LevyMeasureSpec& spec, double horizon, double grid_step,
                                        std::uint64_t seed, std::uint64_t path_index, int brownian_dim = 1,
                                        int quadrature_points = 32) {
    spec.validate();
    if (brownian_dim < 1) throw config_error("noise: brownian_dim must be >= 1");
    const int level = dyadic_level_for(horizon, grid_step);

    LevyNoiseScenario sc;
    sc.horizon = horizon;
    sc.grid_step = grid_step;
    sc.level = level;
    sc.brownian_dim = brownian_dim;
    sc.mark_dim = spec.mark_dim;
    sc.seed = seed;
    sc.path_index = path_index;
    sc.small_intensity = spec.small_intensity;

    // Large-jump arrivals: Poisson process with the large-region intensity.
    // An arrival exactly at the horizon is resampled (probability zero).
    CounterRng rng_large(seed, path_index, StreamTag::large_jumps);
    std::vector<double> large_times;
    do {
        large_times = detail::sample_arrival_times(spec.large_intensity, horizon, rng_large);
    } while (!large_times.empty() && large_times.back() == horizon);

    // Small-jump arrivals, resampled on collision with a large arrival or the
    // horizon (again probability zero, ties are forbidden in the jump list).
    CounterRng rng_small(seed, path_index, StreamTag::small_jumps);
    std::vector<double> small_times;
    for (;;) {
        small_times = detail::sample_arrival_times(spec.small_intensity, horizon, rng_small);
        bool clean = small_times.empty() || small_times.back() != horizon;
        if (clean) {
            for (double t : small_times)
                if (std::binary_search(large_times.begin(), large_times.end(), t)) { clean = false; break; }
        }
        if (clean) break;
    }

    CounterRng rng_marks(seed, path_index, StreamTag::marks);
    sc.jumps.reserve(large_times.size() + small_times.size());
    for (double t : large_times)
        sc.jumps.push_back({t, detail::sample_mark_in_region(spec.large_mark_dist, JumpRegion::large, rng_marks), JumpRegion::large});
    for (double t : small_times)
        sc.jumps.push_back({t, detail::sample_mark_in_region(spec.small_mark_dist, JumpRegion::small, rng_marks), JumpRegion::small});
    std::sort(sc.jumps.begin(), sc.jumps.end(),
              [](const JumpEvent& a, const JumpEvent& b) { return a.time < b.time; });

    const int cells = sc.cell_count();
    sc.brownian_increments.resize(static_cast<std::size_t>(cells) * brownian_dim);
    CounterRng rng_b(seed, path_index, StreamTag::brownian);
    const double scale = std::sqrt(grid_step);
    for (std::size_t i = 0; i < sc.brownian_increments.size(); ++i)
        sc.brownian_increments[i] = scale * rng_b.normal();

    if (spec.small_intensity > 0.0) {
        // Quadrature marks depend on the run seed only, not on path_index.
        CounterRng rng_q(seed, 0, StreamTag::quadrature);
        sc.compensator_marks = quadrature_marks(spec.small_mark_dist, quadrature_points, rng_q);
    }
    return sc;
}

inline std::vector<double> large_jump_times(const LevyNoiseScenario& sc) {
    std::vector<double> out;
    for (const JumpEvent& e : sc.jumps)
        if (e.region == JumpRegion::large) out.push_back(e.time);
    return out;
}

/// Drops one dyadic level by summing adjacent Brownian increments; jumps and
/// quadrature are shared.  Used for coupled step-size comparisons.
inline LevyNoiseScenario coarsen_scenario(const LevyNoiseScenario& fine) {
    if (fine.level < 1) throw argument_error("coarsen_scenario: level must be >= 1");
    LevyNoiseScenario sc = fine;
    sc.level = fine.level - 1;
    sc.grid_step = fine.grid_step * 2.0;
    const int cells = sc.cell_count();
    sc.brownian_increments.assign(static_cast<std::size_t>(cells) * sc.brownian_dim, 0.0);
    for (int k = 0; k < cells; ++k)
        for (int j = 0; j < sc.brownian_dim; ++j)
            sc.brownian_increments[static_cast<std::size_t>(k) * sc.brownian_dim + j] =
                fine.increment(2 * k)[j] + fine.increment(2 * k + 1)[j];
    return sc;
}

/// Setup shared by every Monte Carlo operation: the measure plus grid geometry.
struct NoiseSetup {
    LevyMeasureSpec measure;
    double horizon = 1.0;
    int level = 8;
    int brownian_dim = 1;

    double grid_step() const { return horizon / static_cast<double>(1 << level); }
    LevyNoiseScenario scenario(std::uint64_t seed, std::uint64_t path_index) const {
        return build_scenario(measure, horizon, grid_step(), seed, path_index, brownian_dim);
    }
};

}  // namespace jumpflow
