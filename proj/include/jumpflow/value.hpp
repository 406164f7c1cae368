#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"
#include "controls.hpp"
#include "costs.hpp"
#include "integrator.hpp"
#include "noise.hpp"
#include "regularity.hpp"
#include "stats.hpp"

namespace jumpflow {

struct GainEstimate {
    double estimate = 0.0;
    double stderr_mean = 0.0;
    std::int64_t samples = 0;
};

namespace detail {

// Left-endpoint rule for int_s^stop h(r, X_r, a_r) dr on the path's node set.
inline double running_cost_along(const CadlagPath& path, const RunningCost& h, double s, double stop) {
    double acc = 0.0;
    static const Vec no_action;
    for (int i = 0; i + 1 < path.node_count(); ++i) {
        const double t0 = path.node_time(i);
        const double t1 = path.node_time(i + 1);
        if (t0 < s || t0 >= stop) continue;
        const double* a = path.control_dim > 0 ? path.action(i) : no_action.data();
        acc += h.eval(t0, path.value(i), a) * (std::min(t1, stop) - t0);
    }
    return acc;
}

}  // namespace detail

/// Monte Carlo estimate of the gain E[int_s^T h dr + j(X_T)] under the given
/// control, on scenarios path_index = 0..count-1 of the given seed.
inline GainEstimate gain(const CoefficientSet& coeffs, const NoiseSetup& noise, double s, const Vec& x,
                         const ControlInput& control, const CostSet& costs, std::int64_t scenario_count,
                         std::uint64_t seed, int threads = 0) {
    MeanVar mv = parallel_map_reduce<MeanVar>(
        scenario_count, threads,
        [&](std::int64_t lo, std::int64_t hi) {
            MeanVar acc;
            for (std::int64_t p = lo; p < hi; ++p) {
                const LevyNoiseScenario sc = noise.scenario(seed, static_cast<std::uint64_t>(p));
                const CadlagPath path = integrate(coeffs, s, x, control, sc);
                const double g = detail::running_cost_along(path, costs.running, path.start_time, noise.horizon) +
                                 costs.terminal.eval(path.end_value());
                acc.add(g);
            }
            return acc;
        },
        [](MeanVar& a, const MeanVar& b) { a.merge(b); }, MeanVar{});
    return {mv.mean(), mv.stderr_mean(), mv.n};
}

/// Value function v(t_i, x_j) on dyadic time nodes and a rectangular state
/// grid, with the greedy policy and a per-node inner-MC standard error.
struct ValueGrid {
    int dyadic_level = 0;
    double horizon = 1.0;
    StateGrid grid;
    std::vector<double> values;       // (2^n + 1) x points
    std::vector<int> policy;          // 2^n x points (argmax by lowest index)
    std::vector<double> node_stderr;  // (2^n + 1) x points
    double h_sup = 0.0, j_sup = 0.0;
    std::uint64_t interp_clamp_count = 0;

    int slice_count() const { return (1 << dyadic_level) + 1; }
    double time_step() const { return horizon / static_cast<double>(1 << dyadic_level); }
    double slice_time(int i) const { return horizon * static_cast<double>(i) / (1 << dyadic_level); }

    const double* slice(int i) const { return values.data() + static_cast<std::size_t>(i) * grid.point_count(); }
    double* slice(int i) { return values.data() + static_cast<std::size_t>(i) * grid.point_count(); }

    double node_value(int i, std::int64_t j) const { return values[static_cast<std::size_t>(i) * grid.point_count() + j]; }
    int greedy_action(int i, std::int64_t j) const { return policy[static_cast<std::size_t>(i) * grid.point_count() + j]; }

    /// Bilinear in time, multilinear in state; out-of-grid queries clamp.
    double value_at(double s, const double* x, std::uint64_t* clamp_count = nullptr) const {
        const double dt = time_step();
        double pos = s / dt;
        int i = static_cast<int>(std::floor(pos));
        i = std::clamp(i, 0, slice_count() - 2);
        const double w = std::clamp(pos - i, 0.0, 1.0);
        const double lo = grid.interpolate(slice(i), x, clamp_count);
        if (w == 0.0) return lo;
        const double hi = grid.interpolate(slice(i + 1), x, clamp_count);
        return (1.0 - w) * lo + w * hi;
    }

    FeedbackPolicy greedy_policy() const {
        FeedbackPolicy p;
        p.dyadic_level = dyadic_level;
        p.grid = grid;
        p.table = policy;
        return p;
    }

    /// Interpolation-error estimate from the largest second differences along
    /// the time axis and each state axis (h^2 |f''| / 8 heuristic).
    double interpolation_modulus() const {
        const std::int64_t points = grid.point_count();
        double time_dd = 0.0;
        for (int i = 1; i + 1 < slice_count(); ++i)
            for (std::int64_t j = 0; j < points; ++j)
                time_dd = std::max(time_dd, std::abs(node_value(i - 1, j) - 2.0 * node_value(i, j) + node_value(i + 1, j)));
        double space_dd = 0.0;
        const int d = grid.dim();
        std::vector<std::int64_t> stride(d, 1);
        for (int k = d - 2; k >= 0; --k) stride[k] = stride[k + 1] * grid.axes[k + 1].count;
        for (int i = 0; i < slice_count(); ++i) {
            const double* v = slice(i);
            for (int k = 0; k < d; ++k) {
                if (grid.axes[k].count < 3) continue;
                for (std::int64_t j = 0; j < points; ++j) {
                    const std::int64_t idx = (j / stride[k]) % grid.axes[k].count;
                    if (idx == 0 || idx + 1 >= grid.axes[k].count) continue;
                    space_dd = std::max(space_dd,
                                        std::abs(v[j - stride[k]] - 2.0 * v[j] + v[j + stride[k]]));
                }
            }
        }
        return (time_dd + space_dd) / 8.0;
    }

    double max_node_stderr() const {
        double worst = 0.0;
        for (double s : node_stderr) worst = std::max(worst, s);
        return worst;
    }
};

struct SolveOptions {
    int inner_scenarios = 200;
    std::uint64_t seed = 0;
    int threads = 0;
};

/// One-step dynamic-programming backward induction:
///   v(t_i, x) = max_a E[ int_{t_i}^{t_{i+1}} h dr + v(t_{i+1}, X_{t_{i+1}}^{t_i, x, a}) ]
/// with the inner expectation over fresh slab scenarios (shared across grid
/// points and actions of a slice) and multilinear interpolation of the next
/// slice.  Ties in the argmax resolve to the lowest action index.
inline ValueGrid solve_value(const CoefficientSet& coeffs, const NoiseSetup& noise, const CostSet& costs,
                             const ActionSet& actions, const StateGrid& grid, int dyadic_level,
                             const SolveOptions& opts = {}) {
    actions.validate();
    if (dyadic_level < 0 || dyadic_level > noise.level)
        throw config_error("solve_value: dyadic level must lie in [0, grid level]");
    if (grid.dim() != coeffs.dims.state) throw argument_error("solve_value: grid dimension mismatch");
    if (actions.dim() != coeffs.dims.control) throw argument_error("solve_value: action dimension mismatch");

    ValueGrid vg;
    vg.dyadic_level = dyadic_level;
    vg.horizon = noise.horizon;
    vg.grid = grid;
    const std::int64_t points = grid.point_count();
    const int slabs = 1 << dyadic_level;
    vg.values.assign(static_cast<std::size_t>(slabs + 1) * points, 0.0);
    vg.policy.assign(static_cast<std::size_t>(slabs) * points, 0);
    vg.node_stderr.assign(static_cast<std::size_t>(slabs + 1) * points, 0.0);
    vg.h_sup = costs.running.sup_box(grid, &actions);
    vg.j_sup = costs.terminal.sup_box(grid);

    // Terminal slice: v(T, x_j) = j(x_j) exactly.
    {
        double* last = vg.slice(slabs);
        Vec x(grid.dim());
        for (std::int64_t j = 0; j < points; ++j) {
            grid.point(j, x.data());
            last[j] = costs.terminal.eval(x.data());
        }
    }

    for (int i = slabs - 1; i >= 0; --i) {
        const double t0 = vg.slice_time(i);
        const double t1 = vg.slice_time(i + 1);

        // Fresh inner scenarios for this slab, shared by every (point, action).
        const std::uint64_t slab_seed = derive_seed(opts.seed, static_cast<std::uint64_t>(i) + 101);
        std::vector<LevyNoiseScenario> inner;
        inner.reserve(opts.inner_scenarios);
        for (int r = 0; r < opts.inner_scenarios; ++r)
            inner.push_back(noise.scenario(slab_seed, static_cast<std::uint64_t>(r)));

        std::vector<SimpleControl> constant_controls;
        for (int a = 0; a < actions.size(); ++a) constant_controls.push_back(SimpleControl::constant(0, a));

        const double* next = vg.slice(i + 1);
        double* cur = vg.slice(i);
        int* pol = vg.policy.data() + static_cast<std::size_t>(i) * points;
        double* serr = vg.node_stderr.data() + static_cast<std::size_t>(i) * points;

        IntegrateOptions iopts;
        iopts.stop_time = t1;

        vg.interp_clamp_count += parallel_map_reduce<std::uint64_t>(
            points, opts.threads,
            [&](std::int64_t lo, std::int64_t hi) {
                std::uint64_t clamps = 0;
                Vec x(grid.dim());
                for (std::int64_t j = lo; j < hi; ++j) {
                    grid.point(j, x.data());
                    double best = 0.0;
                    double best_stderr = 0.0;
                    int best_action = 0;
                    for (int a = 0; a < actions.size(); ++a) {
                        const ControlInput ctl = ControlInput::open_loop(actions, constant_controls[a]);
                        MeanVar mv;
                        for (const LevyNoiseScenario& sc : inner) {
                            const CadlagPath path = integrate(coeffs, t0, x, ctl, sc, iopts);
                            const double rcost = detail::running_cost_along(path, costs.running, t0, t1);
                            mv.add(rcost + grid.interpolate(next, path.end_value(), &clamps));
                        }
                        const double q = mv.mean();
                        if (a == 0 || q > best) {
                            best = q;
                            best_action = a;
                            best_stderr = mv.stderr_mean();
                        }
                    }
                    cur[j] = best;
                    pol[j] = best_action;
                    serr[j] = best_stderr;
                }
                return clamps;
            },
            [](std::uint64_t& a, std::uint64_t b) { a += b; }, std::uint64_t{0});
    }

    // Boundedness invariant |v| <= ||h||_inf T + ||j||_inf on every node.
    const double bound = vg.h_sup * noise.horizon + vg.j_sup + 1e-9 * (1.0 + vg.h_sup + vg.j_sup);
    for (double v : vg.values)
        if (!(std::abs(v) <= bound))
            throw integration_error("solve_value: value bound violated (" + std::to_string(v) + " vs " +
                                    std::to_string(bound) + ")");
    return vg;
}

struct EnumerationResult {
    GainEstimate best;
    SimpleControl best_control;
};

/// Brute-force sup over all |A|^{2^n} deterministic step controls at dyadic
/// level n, every gain computed on the same scenario set.
inline EnumerationResult enumerate_value(const CoefficientSet& coeffs, const NoiseSetup& noise, double s,
                                         const Vec& x, const CostSet& costs, const ActionSet& actions,
                                         int dyadic_level, std::int64_t scenario_count, std::uint64_t seed,
                                         int threads = 0) {
    actions.validate();
    const int slots = 1 << dyadic_level;
    double combos = std::pow(static_cast<double>(actions.size()), slots);
    if (!(combos <= 1e4))
        throw argument_error("enumerate_value: |A|^(2^n) exceeds 10^4; lower the dyadic level or the action count");

    EnumerationResult result;
    SimpleControl control;
    control.dyadic_level = dyadic_level;
    control.action_index.assign(slots, 0);
    bool first = true;
    for (;;) {
        const GainEstimate g =
            gain(coeffs, noise, s, x, ControlInput::open_loop(actions, control), costs, scenario_count, seed, threads);
        if (first || g.estimate > result.best.estimate) {
            result.best = g;
            result.best_control = control;
            first = false;
        }
        // odometer over action indices
        int k = slots - 1;
        while (k >= 0) {
            if (++control.action_index[k] < actions.size()) break;
            control.action_index[k] = 0;
            --k;
        }
        if (k < 0) break;
    }
    return result;
}

struct DyadicShiftResult {
    StepControl shifted;
    double l2_distance = 0.0;  // value of the exact squared-L2 formula
};

/// Shifts an arbitrary-cut step control onto the dyadic lattice of the given
/// level: each interior cut moves to the smallest dyadic point at or above
/// it, and the reported distance is sum_i (q_i - t_i) |Z_i - Z_{i-1}|^2.
inline DyadicShiftResult dyadic_shift(const StepControl& control, int target_level, double horizon) {
    control.validate(horizon);
    const int cells = 1 << target_level;
    DyadicShiftResult out;
    out.shifted.values = control.values;
    out.shifted.cut_times = control.cut_times;
    for (std::size_t i = 1; i + 1 < control.cut_times.size(); ++i) {
        const double t = control.cut_times[i];
        const double pos = t * cells / horizon;
        double q;
        if (pos == std::floor(pos)) {
            q = t;  // already dyadic at this level
        } else {
            q = horizon * (std::floor(pos) + 1.0) / cells;
        }
        if (!(q < control.cut_times[i + 1]))
            throw argument_error("dyadic_shift: target lattice too coarse to interleave the cuts");
        out.shifted.cut_times[i] = q;
        const Vec& cur = control.values[i];
        const Vec& prev = control.values[i - 1];
        out.l2_distance += (q - t) * std::pow(dist2(cur.data(), prev.data(), static_cast<int>(cur.size())), 2);
    }
    out.shifted.validate(horizon);
    return out;
}

/// Stopping rules taking values on the dyadic time lattice, clipped into
/// (s, T); a rule whose defining event never happens clips to T - dt.
struct StoppingTimeSpec {
    enum class Kind { deterministic, first_exit, first_large_jump_after };
    Kind kind = Kind::deterministic;
    double when = 0.0;  // target time (deterministic) or watch-from time (first_large_jump_after)
    Vec center;         // first_exit ball
    double radius = 1.0;

    static StoppingTimeSpec deterministic(double t) { return {Kind::deterministic, t, {}, 0.0}; }
    static StoppingTimeSpec first_exit(Vec c, double r) { return {Kind::first_exit, 0.0, std::move(c), r}; }
    static StoppingTimeSpec first_large_jump_after(double t) { return {Kind::first_large_jump_after, t, {}, 0.0}; }

    std::string describe() const {
        switch (kind) {
            case Kind::deterministic: return "deterministic(" + std::to_string(when) + ")";
            case Kind::first_exit: return "first_exit(r=" + std::to_string(radius) + ")";
            case Kind::first_large_jump_after: return "first_large_jump_after(" + std::to_string(when) + ")";
        }
        return "?";
    }
};

/// Evaluates the stopping rule on one realized path; the result is a dyadic
/// node time in (s, T).
inline double stopping_time(const StoppingTimeSpec& spec, const CadlagPath& path, const LevyNoiseScenario& sc,
                            double s, int dyadic_level, double horizon) {
    const int cells = 1 << dyadic_level;
    const double dt = horizon / cells;
    const int ks = static_cast<int>(std::lround(s / dt));
    const int k_lo = ks + 1;           // first admissible node, > s
    const int k_hi = cells - 1;        // last admissible node, < T
    if (k_lo > k_hi) throw argument_error("stopping_time: no dyadic node strictly inside (s, T)");
    auto node_time = [&](int k) { return horizon * static_cast<double>(k) / cells; };

    int k = k_hi;
    switch (spec.kind) {
        case StoppingTimeSpec::Kind::deterministic: {
            k = std::clamp(static_cast<int>(std::ceil(spec.when / dt - 1e-12)), k_lo, k_hi);
            break;
        }
        case StoppingTimeSpec::Kind::first_exit: {
            if (static_cast<int>(spec.center.size()) != path.state_dim)
                throw argument_error("stopping_time: first_exit center dimension mismatch");
            k = k_hi;
            for (int c = k_lo; c <= k_hi; ++c) {
                const double* x = path.value_at_time(node_time(c));
                if (dist2(x, spec.center.data(), path.state_dim) >= spec.radius) {
                    k = c;
                    break;
                }
            }
            break;
        }
        case StoppingTimeSpec::Kind::first_large_jump_after: {
            k = k_hi;
            for (const JumpEvent& e : sc.jumps) {
                if (e.region != JumpRegion::large || e.time <= spec.when) continue;
                k = std::clamp(static_cast<int>(std::ceil(e.time / dt - 1e-12)), k_lo, k_hi);
                break;
            }
            break;
        }
    }
    const double theta = node_time(k);
    if (!(theta > s && theta < horizon))
        throw integration_error("stopping_time: internal clipping invariant breached");
    return theta;
}

struct DppResult {
    double residual = 0.0;
    double stderr_mean = 0.0;
    double allowance = 0.0;
    double value = 0.0;  // v(s, x) from the grid
    double rhs = 0.0;    // best candidate estimate
    bool pass = false;
    std::string theta;
};

/// One battery entry for the dynamic programming principle: compares v(s,x)
/// against sup over {greedy policy, all constant controls} of
/// E[int_s^theta h dr + v(theta, X_theta)] on fresh common scenarios.  The
/// true residual is zero for every stopping rule, so the check is two-sided.
inline DppResult dpp_residual(const CoefficientSet& coeffs, const NoiseSetup& noise, double s, const Vec& x,
                              const CostSet& costs, const ActionSet& actions, const StoppingTimeSpec& theta,
                              const ValueGrid& vg, std::int64_t scenario_count, std::uint64_t seed,
                              int threads = 0, std::optional<double> allowance_override = {}) {
    const int n = vg.dyadic_level;
    const double dt = vg.time_step();
    if (std::abs(s / dt - std::lround(s / dt)) > 1e-9)
        throw argument_error("dpp_residual: s must sit on the value grid's time lattice");

    std::vector<ControlInput> candidates;
    std::vector<std::string> names;
    const FeedbackPolicy greedy = vg.greedy_policy();
    candidates.push_back(ControlInput::policy(actions, greedy));
    names.push_back("greedy");
    std::vector<SimpleControl> constants;
    constants.reserve(actions.size());
    for (int a = 0; a < actions.size(); ++a) constants.push_back(SimpleControl::constant(0, a));
    for (int a = 0; a < actions.size(); ++a) {
        candidates.push_back(ControlInput::open_loop(actions, constants[a]));
        names.push_back("constant_" + std::to_string(a));
    }

    double best = 0.0, best_stderr = 0.0;
    bool first = true;
    for (const ControlInput& ctl : candidates) {
        MeanVar mv = parallel_map_reduce<MeanVar>(
            scenario_count, threads,
            [&](std::int64_t lo, std::int64_t hi) {
                MeanVar acc;
                std::uint64_t scratch_clamps = 0;
                for (std::int64_t p = lo; p < hi; ++p) {
                    const LevyNoiseScenario sc = noise.scenario(seed, static_cast<std::uint64_t>(p));
                    const CadlagPath path = integrate(coeffs, s, x, ctl, sc);
                    const double th = stopping_time(theta, path, sc, s, n, noise.horizon);
                    const double rcost = detail::running_cost_along(path, costs.running, s, th);
                    acc.add(rcost + vg.value_at(th, path.value_at_time(th), &scratch_clamps));
                }
                return acc;
            },
            [](MeanVar& a, const MeanVar& b) { a.merge(b); }, MeanVar{});
        if (first || mv.mean() > best) {
            best = mv.mean();
            best_stderr = mv.stderr_mean();
            first = false;
        }
    }

    DppResult out;
    out.theta = theta.describe();
    out.value = vg.value_at(s, x.data());
    out.rhs = best;
    out.residual = out.value - out.rhs;
    out.stderr_mean = best_stderr;
    out.allowance = allowance_override.value_or(vg.interpolation_modulus() + vg.h_sup * dt +
                                                2.576 * vg.max_node_stderr() + 1e-9);
    out.pass = std::abs(out.residual) <= 2.576 * out.stderr_mean + out.allowance;
    return out;
}

namespace detail {

// Median absolute second difference over the whole table: a curvature scale
// that an isolated defective node cannot inflate.
inline double median_second_difference(const ValueGrid& vg) {
    std::vector<double> diffs;
    const std::int64_t points = vg.grid.point_count();
    for (int i = 1; i + 1 < vg.slice_count(); ++i)
        for (std::int64_t j = 0; j < points; ++j)
            diffs.push_back(std::abs(vg.node_value(i - 1, j) - 2.0 * vg.node_value(i, j) + vg.node_value(i + 1, j)));
    const int d = vg.grid.dim();
    std::vector<std::int64_t> stride(d, 1);
    for (int k = d - 2; k >= 0; --k) stride[k] = stride[k + 1] * vg.grid.axes[k + 1].count;
    for (int i = 0; i < vg.slice_count(); ++i) {
        const double* v = vg.slice(i);
        for (int k = 0; k < d; ++k) {
            if (vg.grid.axes[k].count < 3) continue;
            for (std::int64_t j = 0; j < points; ++j) {
                const std::int64_t idx = (j / stride[k]) % vg.grid.axes[k].count;
                if (idx == 0 || idx + 1 >= vg.grid.axes[k].count) continue;
                diffs.push_back(std::abs(v[j - stride[k]] - 2.0 * v[j] + v[j + stride[k]]));
            }
        }
    }
    if (diffs.empty()) return 0.0;
    std::nth_element(diffs.begin(), diffs.begin() + diffs.size() / 2, diffs.end());
    return diffs[diffs.size() / 2];
}

}  // namespace detail

/// Spot check of lower semicontinuity: approaching (s, x) from sampled nearby
/// points must not find values below v(s, x) - tolerance.  The tolerance is
/// the local legitimate variation over the approach radius (taking per-axis
/// the smaller one-sided slope, so a one-node pit cannot widen it) plus a
/// robust curvature scale and the inner-MC band.
inline RegularityReport lsc_spot_check(const ValueGrid& vg, double s, const Vec& x, int approach_count,
                                       std::uint64_t seed) {
    if (approach_count < 1) throw argument_error("lsc_spot_check: need at least one approach point");
    const double dt = vg.time_step();
    double rho0 = 0.5 * dt;
    for (const auto& ax : vg.grid.axes)
        if (ax.count > 1) rho0 = std::min(rho0, 0.5 * (ax.hi - ax.lo) / (ax.count - 1));

    // Local slope scales at the nearest node, per axis and in time.
    const std::int64_t j0 = vg.grid.nearest_index(x.data());
    const int i0 = std::clamp(static_cast<int>(std::lround(s / dt)), 0, vg.slice_count() - 1);
    double grad_term = 0.0;
    {
        double side_lo = -1.0, side_hi = -1.0;
        if (i0 > 0) side_lo = std::abs(vg.node_value(i0, j0) - vg.node_value(i0 - 1, j0));
        if (i0 + 1 < vg.slice_count()) side_hi = std::abs(vg.node_value(i0 + 1, j0) - vg.node_value(i0, j0));
        double slope = side_lo < 0.0 ? side_hi : (side_hi < 0.0 ? side_lo : std::min(side_lo, side_hi));
        if (slope > 0.0) grad_term += slope * (rho0 / dt);
    }
    const int d = vg.grid.dim();
    std::vector<std::int64_t> stride(d, 1);
    for (int k = d - 2; k >= 0; --k) stride[k] = stride[k + 1] * vg.grid.axes[k + 1].count;
    for (int k = 0; k < d; ++k) {
        const auto& ax = vg.grid.axes[k];
        if (ax.count < 2) continue;
        const double h = (ax.hi - ax.lo) / (ax.count - 1);
        const std::int64_t idx = (j0 / stride[k]) % ax.count;
        double side_lo = -1.0, side_hi = -1.0;
        if (idx > 0) side_lo = std::abs(vg.node_value(i0, j0) - vg.node_value(i0, j0 - stride[k]));
        if (idx + 1 < ax.count) side_hi = std::abs(vg.node_value(i0, j0 + stride[k]) - vg.node_value(i0, j0));
        double slope = side_lo < 0.0 ? side_hi : (side_hi < 0.0 ? side_lo : std::min(side_lo, side_hi));
        if (slope > 0.0) grad_term += slope * (rho0 / h);
    }
    const double tolerance =
        detail::median_second_difference(vg) + 1.05 * grad_term + 2.576 * vg.max_node_stderr() + 1e-12;

    const double center = vg.value_at(s, x.data());
    double min_nearby = center;
    CounterRng rng(seed, 0, StreamTag::general);
    Vec probe(x.size());
    for (int k = 0; k < approach_count; ++k) {
        const double rho = rho0 * std::ldexp(1.0, -k);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const auto& ax = vg.grid.axes[i];
            probe[i] = std::clamp(x[i] + rho * (2.0 * rng.uniform() - 1.0), ax.lo, ax.hi);
        }
        const double sk = std::clamp(s + rho * (2.0 * rng.uniform() - 1.0), 0.0, vg.horizon);
        min_nearby = std::min(min_nearby, vg.value_at(sk, probe.data()));
    }

    RegularityReport rep;
    rep.test_name = "lsc_spot_check";
    rep.statistic = center - min_nearby;
    rep.threshold = tolerance;
    rep.pass = rep.statistic <= tolerance;
    rep.sample_count = approach_count;
    rep.details.emplace_back("value", center);
    rep.details.emplace_back("min_nearby", min_nearby);
    return rep;
}

}  // namespace jumpflow
