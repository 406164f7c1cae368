#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"
#include "controls.hpp"
#include "model.hpp"
#include "noise.hpp"

namespace jumpflow {

namespace node_kind {
inline constexpr std::uint8_t small_jump = 1;
inline constexpr std::uint8_t large_jump = 2;   // large jump present in the scenario
inline constexpr std::uint8_t applied_jump = 4; // large jump actually applied to the path
inline constexpr std::uint8_t control_cut = 8;
inline constexpr std::uint8_t grid = 16;
}  // namespace node_kind

/// Right-continuous path on the augmented node set (grid times, jump times,
/// non-grid control cuts).  values[i] is the right limit at node i; applied
/// large-jump nodes additionally carry the left limit.  The path is constant
/// equal to start_state on [0, start_time].
struct CadlagPath {
    double start_time = 0.0;
    Vec start_state;
    int state_dim = 1;
    int control_dim = 0;

    std::vector<double> times;
    std::vector<std::uint8_t> kinds;
    std::vector<double> values;  // times.size() x state_dim, row-major
    std::vector<std::pair<std::int32_t, Vec>> pre_jump_values;  // sorted by node index
    // Control value in effect on (times[i], times[i+1]]; empty when uncontrolled.
    std::vector<double> action_values;

    bool snapped_start = false;
    std::uint64_t clamp_count = 0;

    int node_count() const { return static_cast<int>(times.size()); }
    double node_time(int i) const { return times[i]; }
    const double* value(int i) const { return values.data() + static_cast<std::size_t>(i) * state_dim; }
    const double* end_value() const { return value(node_count() - 1); }

    /// Exact node lookup; throws if t is not a node time.
    int find_node(double t) const {
        auto it = std::lower_bound(times.begin(), times.end(), t);
        if (it == times.end() || *it != t) throw argument_error("CadlagPath: " + std::to_string(t) + " is not a node");
        return static_cast<int>(it - times.begin());
    }

    /// State at time t (right-continuous lookup on the node set).
    const double* value_at_time(double t) const {
        auto it = std::upper_bound(times.begin(), times.end(), t);
        if (it == times.begin()) return value(0);
        return value(static_cast<int>(it - times.begin()) - 1);
    }

    const double* action(int i) const {
        return action_values.data() + static_cast<std::size_t>(i) * control_dim;
    }

    const Vec* pre_jump_at(int node) const {
        auto it = std::lower_bound(pre_jump_values.begin(), pre_jump_values.end(), node,
                                   [](const auto& p, int n) { return p.first < n; });
        if (it == pre_jump_values.end() || it->first != node) return nullptr;
        return &it->second;
    }

    /// Sup over nodes in [from, horizon] of |this - other| (shared node sets).
    double sup_distance(const CadlagPath& other) const {
        double sup = 0.0;
        const int n = std::min(node_count(), other.node_count());
        for (int i = 0; i < n; ++i)
            sup = std::max(sup, dist2(value(i), other.value(i), state_dim));
        return sup;
    }
};

struct IntegrateOptions {
    double stop_time = -1.0;           // < 0 means the scenario horizon
    std::optional<Vec> clamp_lo, clamp_hi;
};

namespace detail {

// Canonical Euler assembly for one in-segment evaluation at offset theta from
// the segment start.  frac scales the full-cell Brownian increment.  Keeping
// one formula for partial and full steps makes restarted paths bit-identical.
inline void assemble_state(double* out, const double* base, double theta, double frac,
                           const double* drift, const double* comp, const double* diff_dw,
                           const double* jump_sum, int d) {
    for (int i = 0; i < d; ++i)
        out[i] = base[i] + theta * drift[i] + frac * diff_dw[i] + jump_sum[i] - theta * comp[i];
}

}  // namespace detail

/// One compensated Euler step over [t, t + dt]: drift + diffusion + the small
/// jumps of the cell (coefficients frozen at the cell start) minus the
/// compensator drift dt * lambda0 * E[g].
inline Vec step_small(const CoefficientSet& coeffs, double t, double dt, const Vec& state, const Vec& dw,
                      const std::vector<JumpEvent>& small_jumps_in_cell, const Vec& control_value,
                      const std::vector<Vec>& quadrature, double small_intensity) {
    const int d = coeffs.dims.state;
    const int m = coeffs.dims.brownian;
    if (!(dt > 0.0)) throw argument_error("step_small: dt must be positive");
    if (static_cast<int>(dw.size()) != m) throw argument_error("step_small: dW dimension mismatch");
    const double* a = control_value.empty() ? nullptr : control_value.data();

    Vec drift(d, 0.0), diff_dw(d, 0.0), comp(d, 0.0), jump_sum(d, 0.0), alpha(static_cast<std::size_t>(d) * m);
    if (coeffs.drift) coeffs.drift(t, state.data(), a, drift.data());
    if (coeffs.diffusion) {
        coeffs.diffusion(t, state.data(), a, alpha.data());
        for (int i = 0; i < d; ++i) {
            double s = 0.0;
            for (int j = 0; j < m; ++j) s += alpha[static_cast<std::size_t>(i) * m + j] * dw[j];
            diff_dw[i] = s;
        }
    }
    if (coeffs.has_small_jump() && small_intensity > 0.0 && !quadrature.empty()) {
        Vec g(d);
        for (const Vec& z : quadrature) {
            coeffs.small_jump(state.data(), t, z.data(), a, g.data());
            for (int i = 0; i < d; ++i) comp[i] += g[i];
        }
        const double w = small_intensity / static_cast<double>(quadrature.size());
        for (int i = 0; i < d; ++i) comp[i] *= w;
    }
    if (coeffs.has_small_jump()) {
        Vec g(d);
        for (const JumpEvent& e : small_jumps_in_cell) {
            if (e.region != JumpRegion::small) continue;
            coeffs.small_jump(state.data(), e.time, e.mark.data(), a, g.data());
            for (int i = 0; i < d; ++i) jump_sum[i] += g[i];
        }
    }
    Vec out(d);
    detail::assemble_state(out.data(), state.data(), dt, 1.0, drift.data(), comp.data(), diff_dw.data(),
                           jump_sum.data(), d);
    if (!all_finite(out.data(), d))
        throw integration_error("step_small: non-finite state after the cell at t=" + std::to_string(t));
    return out;
}

/// Integrates the controlled SDE on a frozen scenario from (s, x): Euler
/// between large-jump times, exact jump application X_tau = X_tau- + f at
/// each applied large jump, restart of the small-jump recursion after it.
/// s is snapped DOWN to the grid when off-grid (flagged on the path).  With
/// a null large-jump coefficient the scenario's large jumps are inert: no
/// segmentation happens, so the path matches small-jump-only integration on
/// the same noise bit for bit.
inline CadlagPath integrate(const CoefficientSet& coeffs, double s, const Vec& x, const ControlInput& control,
                            const LevyNoiseScenario& sc, const IntegrateOptions& opts = {}) {
    const int d = coeffs.dims.state;
    const int m = coeffs.dims.brownian;
    const int l = coeffs.dims.control;
    if (static_cast<int>(x.size()) != d) throw argument_error("integrate: state dimension mismatch");
    if (sc.brownian_dim != m) throw argument_error("integrate: scenario Brownian dimension mismatch");
    if ((coeffs.has_small_jump() || coeffs.has_large_jump()) && sc.mark_dim != coeffs.dims.mark)
        throw argument_error("integrate: scenario mark dimension mismatch");
    if (control.engaged() && l == 0) throw argument_error("integrate: control given for uncontrolled coefficients");
    if ((control.simple || control.feedback) && !control.actions)
        throw argument_error("integrate: indexed control needs an action set");
    if (control.actions && control.actions->dim() != l)
        throw argument_error("integrate: action dimension mismatch");
    if (control.step && !control.step->values.empty() &&
        static_cast<int>(control.step->values.front().size()) != l)
        throw argument_error("integrate: step control value dimension mismatch");
    if (opts.clamp_lo.has_value() != opts.clamp_hi.has_value())
        throw argument_error("integrate: clamp box needs both bounds");
    if (opts.clamp_lo && (static_cast<int>(opts.clamp_lo->size()) != d ||
                          static_cast<int>(opts.clamp_hi->size()) != d))
        throw argument_error("integrate: clamp box dimension mismatch");

    const double horizon = sc.horizon;
    const double dt = sc.grid_step;
    const int cells = sc.cell_count();
    double stop = opts.stop_time < 0.0 ? horizon : opts.stop_time;
    if (stop > horizon) stop = horizon;

    CadlagPath path;
    path.state_dim = d;
    path.start_state = x;

    // Snap the start time down to the grid.
    int start_cell = static_cast<int>(std::floor(s / dt + 1e-9));
    start_cell = std::clamp(start_cell, 0, cells);
    const double s_eff = sc.grid_time(start_cell);
    path.snapped_start = std::abs(s - s_eff) > 1e-12 * std::max(1.0, horizon);
    path.start_time = s_eff;

    int stop_cell = static_cast<int>(std::lround(stop / dt));
    stop_cell = std::clamp(stop_cell, start_cell, cells);
    if (std::abs(sc.grid_time(stop_cell) - stop) > 1e-12 * std::max(1.0, horizon))
        throw argument_error("integrate: stop_time must be a grid time");
    const double stop_eff = sc.grid_time(stop_cell);

    // Node set: grid times up to stop, jump times, non-grid control cuts.
    struct NodeRef {
        double time;
        std::uint8_t kind;
        std::int32_t jump = -1;
    };
    std::vector<NodeRef> nodes;
    nodes.reserve(static_cast<std::size_t>(stop_cell) + sc.jumps.size() + 8);
    for (int k = 0; k <= stop_cell; ++k) nodes.push_back({sc.grid_time(k), node_kind::grid, -1});
    for (std::size_t j = 0; j < sc.jumps.size(); ++j) {
        if (sc.jumps[j].time > stop_eff) break;
        const std::uint8_t kind =
            sc.jumps[j].region == JumpRegion::small ? node_kind::small_jump : node_kind::large_jump;
        nodes.push_back({sc.jumps[j].time, kind, static_cast<std::int32_t>(j)});
    }
    if (control.step) {
        control.step->validate(horizon);
        for (std::size_t i = 1; i + 1 < control.step->cut_times.size(); ++i) {
            const double c = control.step->cut_times[i];
            if (c <= stop_eff) nodes.push_back({c, node_kind::control_cut, -1});
        }
    }
    std::sort(nodes.begin(), nodes.end(), [](const NodeRef& a, const NodeRef& b) { return a.time < b.time; });
    // Merge exact ties (e.g. a jump landing on a grid node keeps one node).
    std::vector<NodeRef> merged;
    merged.reserve(nodes.size());
    for (const NodeRef& n : nodes) {
        if (!merged.empty() && merged.back().time == n.time) {
            merged.back().kind |= n.kind;
            if (n.jump >= 0) merged.back().jump = n.jump;
        } else {
            merged.push_back(n);
        }
    }

    const int node_count = static_cast<int>(merged.size());
    path.times.resize(node_count);
    path.kinds.resize(node_count);
    path.values.assign(static_cast<std::size_t>(node_count) * d, 0.0);
    path.control_dim = l;
    if (l > 0) path.action_values.assign(static_cast<std::size_t>(node_count) * l, 0.0);
    for (int i = 0; i < node_count; ++i) {
        path.times[i] = merged[i].time;
        path.kinds[i] = merged[i].kind;
    }

    // Control bookkeeping.
    const int control_level = control.simple ? control.simple->dyadic_level
                              : control.feedback ? control.feedback->dyadic_level
                                                 : 0;
    if ((control.simple || control.feedback) && control_level > sc.level)
        throw argument_error("integrate: control dyadic level exceeds the grid level");
    const int cells_per_slot = (control.simple || control.feedback) ? (cells >> control_level) : cells;

    Vec action(std::max(l, 1), 0.0);
    auto set_action_from_index = [&](int idx) {
        const Vec& a = control.actions->actions[idx];
        std::copy(a.begin(), a.end(), action.begin());
    };
    auto refresh_cell_action = [&](int cell, const double* state) {
        if (control.simple) {
            set_action_from_index(control.simple->action_index[cell / cells_per_slot]);
        } else if (control.feedback) {
            set_action_from_index(control.feedback->action_at(cell / cells_per_slot, state));
        } else if (control.step) {
            const Vec& v = control.step->value_right_of(sc.grid_time(cell));
            std::copy(v.begin(), v.end(), action.begin());
        }
    };

    // Fill nodes at or before the start: the path is constant there.
    Vec state = x;
    int node = 0;
    while (node < node_count && merged[node].time <= s_eff) {
        std::copy(state.begin(), state.end(), path.values.begin() + static_cast<std::size_t>(node) * d);
        ++node;
    }

    const bool apply_large = coeffs.has_large_jump();
    const bool apply_small = coeffs.has_small_jump();
    Vec drift(d), comp(d), diff_dw(d), jump_sum(d), alpha(static_cast<std::size_t>(d) * m), g(d), work(d);

    const bool has_compensator = apply_small && sc.small_intensity > 0.0 && !sc.compensator_marks.empty();
    Vec frozen_comp;
    if (has_compensator && coeffs.small_jump_autonomous) {
        frozen_comp.assign(d, 0.0);
        for (const Vec& z : sc.compensator_marks) {
            coeffs.small_jump(x.data(), s_eff, z.data(), nullptr, g.data());
            for (int i = 0; i < d; ++i) frozen_comp[i] += g[i];
        }
        const double w = sc.small_intensity / static_cast<double>(sc.compensator_marks.size());
        for (int i = 0; i < d; ++i) frozen_comp[i] *= w;
    }

    auto clamp_state = [&](double* v) {
        if (!opts.clamp_lo) return;
        bool changed = false;
        for (int i = 0; i < d; ++i) {
            const double c = std::clamp(v[i], (*opts.clamp_lo)[i], (*opts.clamp_hi)[i]);
            if (c != v[i]) changed = true;
            v[i] = c;
        }
        if (changed) ++path.clamp_count;
    };

    auto record_action = [&](int node_idx) {
        if (l > 0 && node_idx >= 0 && node_idx < node_count)
            std::copy(action.begin(), action.end(),
                      path.action_values.begin() + static_cast<std::size_t>(node_idx) * l);
    };

    for (int cell = start_cell; cell < stop_cell; ++cell) {
        const double t0 = sc.grid_time(cell);
        const double t1 = sc.grid_time(cell + 1);
        const double width = t1 - t0;
        const double* dw = sc.increment(cell);

        // Slot-constant controls are refreshed at (or, when the integration
        // starts mid-slot, from) the slot start.
        if (cell == start_cell || !control.feedback || cell % cells_per_slot == 0)
            refresh_cell_action(cell, state.data());
        record_action(node - 1);

        // Segment state, re-evaluated after each applied large jump or cut.
        double seg_start = t0;
        Vec seg_state = state;
        bool fresh = true;
        std::fill(jump_sum.begin(), jump_sum.end(), 0.0);

        auto begin_segment = [&](double at) {
            seg_start = at;
            fresh = true;
            std::fill(jump_sum.begin(), jump_sum.end(), 0.0);
        };
        auto ensure_coeffs = [&]() {
            if (!fresh) return;
            fresh = false;
            const double* a = l > 0 ? action.data() : nullptr;
            if (coeffs.drift) coeffs.drift(seg_start, seg_state.data(), a, drift.data());
            else std::fill(drift.begin(), drift.end(), 0.0);
            std::fill(diff_dw.begin(), diff_dw.end(), 0.0);
            if (coeffs.diffusion) {
                coeffs.diffusion(seg_start, seg_state.data(), a, alpha.data());
                for (int i = 0; i < d; ++i) {
                    double acc = 0.0;
                    for (int j = 0; j < m; ++j) acc += alpha[static_cast<std::size_t>(i) * m + j] * dw[j];
                    diff_dw[i] = acc;
                }
            }
            std::fill(comp.begin(), comp.end(), 0.0);
            if (has_compensator) {
                if (!frozen_comp.empty()) {
                    comp = frozen_comp;
                } else {
                    for (const Vec& z : sc.compensator_marks) {
                        coeffs.small_jump(seg_state.data(), seg_start, z.data(), a, g.data());
                        for (int i = 0; i < d; ++i) comp[i] += g[i];
                    }
                    const double w = sc.small_intensity / static_cast<double>(sc.compensator_marks.size());
                    for (int i = 0; i < d; ++i) comp[i] *= w;
                }
            }
        };

        for (; node < node_count && merged[node].time <= t1; ++node) {
            const NodeRef& ev = merged[node];
            double* out = path.values.data() + static_cast<std::size_t>(node) * d;
            const double* a = l > 0 ? action.data() : nullptr;

            if (apply_small && (ev.kind & node_kind::small_jump)) {
                const JumpEvent& je = sc.jumps[ev.jump];
                coeffs.small_jump(seg_state.data(), je.time, je.mark.data(), a, g.data());
                for (int i = 0; i < d; ++i) jump_sum[i] += g[i];
            }

            ensure_coeffs();
            const double theta = ev.time - seg_start;
            const double frac = theta / width;
            detail::assemble_state(out, seg_state.data(), theta, frac, drift.data(), comp.data(),
                                   diff_dw.data(), jump_sum.data(), d);

            bool reset = false;
            if (apply_large && (ev.kind & node_kind::large_jump)) {
                const JumpEvent& je = sc.jumps[ev.jump];
                Vec pre(out, out + d);
                coeffs.large_jump(pre.data(), je.time, je.mark.data(), a, work.data());
                for (int i = 0; i < d; ++i) out[i] = pre[i] + work[i];
                path.kinds[node] |= node_kind::applied_jump;
                path.pre_jump_values.emplace_back(node, std::move(pre));
                clamp_state(out);
                seg_state.assign(out, out + d);
                begin_segment(ev.time);
                reset = true;
            } else {
                clamp_state(out);
            }
            if (ev.kind & node_kind::control_cut) {
                if (!reset) {
                    seg_state.assign(out, out + d);
                    begin_segment(ev.time);
                }
                const Vec& v = control.step->value_right_of(ev.time);
                std::copy(v.begin(), v.end(), action.begin());
            }
            record_action(node);

            if (ev.time == t1) {
                state.assign(out, out + d);
                ++node;
                break;
            }
        }

        if (!all_finite(state.data(), d))
            throw integration_error("integrate: non-finite state at t=" + std::to_string(t1) +
                                    " (cell " + std::to_string(cell) + ")");
    }

    return path;
}

/// Restarts the dynamics at grid time u from the path's own state there, on
/// the identical scenario tail.
inline CadlagPath flow_restart(const CoefficientSet& coeffs, double u, const CadlagPath& path,
                               const ControlInput& control, const LevyNoiseScenario& sc,
                               const IntegrateOptions& opts = {}) {
    if (u < path.start_time) throw argument_error("flow_restart: u before the path start");
    const int node = path.find_node(u);
    Vec state(path.value(node), path.value(node) + path.state_dim);
    return integrate(coeffs, u, state, control, sc, opts);
}

/// The one-noise flow map evaluated on grids of (s, x, t).
struct FlowField {
    std::vector<double> start_times;
    std::vector<Vec> start_states;
    std::vector<double> eval_times;
    int state_dim = 1;
    std::vector<double> data;  // s x x x t x d

    const double* at(int is, int ix, int it) const {
        const std::size_t idx =
            ((static_cast<std::size_t>(is) * start_states.size() + ix) * eval_times.size() + it) * state_dim;
        return data.data() + idx;
    }
};

inline FlowField evaluate_flow_field(const CoefficientSet& coeffs, const std::vector<double>& s_list,
                                     const std::vector<Vec>& x_list, const std::vector<double>& t_list,
                                     const ControlInput& control, const LevyNoiseScenario& sc,
                                     const IntegrateOptions& opts = {}) {
    if (s_list.empty() || x_list.empty() || t_list.empty())
        throw argument_error("evaluate_flow_field: empty grids");
    FlowField field;
    field.start_times = s_list;
    field.start_states = x_list;
    field.eval_times = t_list;
    field.state_dim = coeffs.dims.state;
    field.data.resize(s_list.size() * x_list.size() * t_list.size() * coeffs.dims.state);
    std::size_t pos = 0;
    for (double s : s_list) {
        for (const Vec& x : x_list) {
            const CadlagPath path = integrate(coeffs, s, x, control, sc, opts);
            for (double t : t_list) {
                const double* v = path.value_at_time(t);
                std::copy(v, v + coeffs.dims.state, field.data.begin() + pos);
                pos += coeffs.dims.state;
            }
        }
    }
    return field;
}

}  // namespace jumpflow
