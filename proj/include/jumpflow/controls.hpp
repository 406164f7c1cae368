#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "common.hpp"

namespace jumpflow {

/// Rectangular state grid with multilinear interpolation.  Queries outside
/// the box clamp to the nearest face; callers can count clamps.
struct StateGrid {
    struct Axis {
        double lo = 0.0, hi = 1.0;
        int count = 2;  // grid points along the axis
    };
    std::vector<Axis> axes;

    StateGrid() = default;
    StateGrid(Vec lo, Vec hi, std::vector<int> counts) {
        if (lo.size() != hi.size() || lo.size() != counts.size())
            throw argument_error("StateGrid: dimension mismatch");
        for (std::size_t i = 0; i < lo.size(); ++i) {
            if (counts[i] < 1 || (counts[i] > 1 && !(lo[i] < hi[i])))
                throw argument_error("StateGrid: bad axis");
            axes.push_back({lo[i], hi[i], counts[i]});
        }
    }

    int dim() const { return static_cast<int>(axes.size()); }

    std::int64_t point_count() const {
        std::int64_t n = 1;
        for (const Axis& a : axes) n *= a.count;
        return n;
    }

    double coordinate(int axis, int i) const {
        const Axis& a = axes[axis];
        if (a.count == 1) return a.lo;
        return a.lo + (a.hi - a.lo) * static_cast<double>(i) / (a.count - 1);
    }

    void point(std::int64_t flat, double* out) const {
        for (int k = dim() - 1; k >= 0; --k) {
            const int c = axes[k].count;
            out[k] = coordinate(k, static_cast<int>(flat % c));
            flat /= c;
        }
    }

    /// Index of the grid point nearest to x (ties resolve to the lower index).
    std::int64_t nearest_index(const double* x) const {
        std::int64_t flat = 0;
        for (int k = 0; k < dim(); ++k) {
            const Axis& a = axes[k];
            int i = 0;
            if (a.count > 1) {
                const double step = (a.hi - a.lo) / (a.count - 1);
                const double pos = (std::clamp(x[k], a.lo, a.hi) - a.lo) / step;
                const int lo = std::clamp(static_cast<int>(std::floor(pos)), 0, a.count - 2);
                i = (pos - lo <= 0.5) ? lo : lo + 1;
            }
            flat = flat * a.count + i;
        }
        return flat;
    }

    /// Multilinear interpolation of nodal values; clamps out-of-box queries
    /// and bumps *clamp_count when it does.
    double interpolate(const double* values, const double* x, std::uint64_t* clamp_count = nullptr) const {
        const int d = dim();
        // corner weights per axis
        int base_index[16];
        double frac[16];
        if (d > 16) throw argument_error("StateGrid: dimension too large");
        for (int k = 0; k < d; ++k) {
            const Axis& a = axes[k];
            if (a.count == 1) {
                base_index[k] = 0;
                frac[k] = 0.0;
                continue;
            }
            double q = x[k];
            if (q < a.lo || q > a.hi) {
                if (clamp_count) ++*clamp_count;
                q = std::clamp(q, a.lo, a.hi);
            }
            const double step = (a.hi - a.lo) / (a.count - 1);
            const double pos = (q - a.lo) / step;
            int lo = std::clamp(static_cast<int>(std::floor(pos)), 0, a.count - 2);
            base_index[k] = lo;
            frac[k] = std::clamp(pos - lo, 0.0, 1.0);
        }
        double acc = 0.0;
        const int corners = 1 << d;
        for (int c = 0; c < corners; ++c) {
            double w = 1.0;
            std::int64_t flat = 0;
            for (int k = 0; k < d; ++k) {
                const int bit = (c >> k) & 1;
                w *= bit ? frac[k] : (1.0 - frac[k]);
                int idx = base_index[k] + (axes[k].count == 1 ? 0 : bit);
                flat = flat * axes[k].count + idx;
            }
            if (w != 0.0) acc += w * values[flat];
        }
        return acc;
    }
};

/// Finite action catalog for the control problem.
struct ActionSet {
    std::vector<Vec> actions;
    std::vector<std::string> labels;

    void validate() const {
        if (actions.empty()) throw config_error("action set must be nonempty");
        const std::size_t l = actions.front().size();
        for (std::size_t i = 0; i < actions.size(); ++i) {
            if (actions[i].size() != l) throw config_error("action set: inconsistent dimensions");
            for (std::size_t j = 0; j < i; ++j)
                if (actions[i] == actions[j]) throw config_error("action set: duplicate action");
        }
    }

    int dim() const { return actions.empty() ? 0 : static_cast<int>(actions.front().size()); }
    int size() const { return static_cast<int>(actions.size()); }
};

/// Deterministic (open-loop) step control, constant on each dyadic interval
/// (t_i, t_{i+1}] of the given level; stores action indices.
struct SimpleControl {
    int dyadic_level = 0;
    std::vector<int> action_index;  // 2^level entries

    static SimpleControl constant(int level, int index) {
        SimpleControl c;
        c.dyadic_level = level;
        c.action_index.assign(std::size_t{1} << level, index);
        return c;
    }

    void validate(const ActionSet& actions) const {
        if (action_index.size() != (std::size_t{1} << dyadic_level))
            throw config_error("simple control: needs 2^level values");
        for (int idx : action_index)
            if (idx < 0 || idx >= actions.size()) throw config_error("simple control: bad action index");
    }
};

/// Deterministic step control on arbitrary cut points 0 = c_0 < ... < c_K = T,
/// constant (value_i) on (c_i, c_{i+1}].  Used by the dyadic-shift machinery.
struct StepControl {
    std::vector<double> cut_times;
    std::vector<Vec> values;

    void validate(double horizon) const {
        if (cut_times.size() < 2 || cut_times.size() != values.size() + 1)
            throw config_error("step control: needs K+1 cuts for K values");
        if (cut_times.front() != 0.0 || cut_times.back() != horizon)
            throw config_error("step control: cuts must span [0, horizon]");
        for (std::size_t i = 1; i < cut_times.size(); ++i)
            if (!(cut_times[i - 1] < cut_times[i])) throw config_error("step control: cuts must increase");
    }

    /// Value on the interval containing t (left-open convention); t in (0, T].
    const Vec& value_at(double t) const {
        auto it = std::lower_bound(cut_times.begin(), cut_times.end(), t);
        std::size_t i = static_cast<std::size_t>(it - cut_times.begin());
        if (i == 0) i = 1;
        if (i > values.size()) i = values.size();
        return values[i - 1];
    }

    /// Value on the interval just to the right of t, i.e. on (c_i, c_{i+1}]
    /// with c_i <= t < c_{i+1}.
    const Vec& value_right_of(double t) const {
        auto it = std::upper_bound(cut_times.begin(), cut_times.end(), t);
        std::size_t i = static_cast<std::size_t>(it - cut_times.begin());
        if (i == 0) i = 1;
        if (i > values.size()) i = values.size();
        return values[i - 1];
    }
};

/// Markov feedback surrogate: one action index per (dyadic time slot, state
/// grid point); the state is looked up at the slot start, nearest grid point.
struct FeedbackPolicy {
    int dyadic_level = 0;
    StateGrid grid;
    std::vector<int> table;  // 2^level x grid.point_count()

    int action_at(int slot, const double* x) const {
        const std::int64_t cell = grid.nearest_index(x);
        return table[static_cast<std::size_t>(slot) * grid.point_count() + cell];
    }
};

/// What the integrator consumes: at most one of the four control kinds.
struct ControlInput {
    const ActionSet* actions = nullptr;
    const SimpleControl* simple = nullptr;
    const StepControl* step = nullptr;
    const FeedbackPolicy* feedback = nullptr;

    static ControlInput none() { return {}; }
    static ControlInput open_loop(const ActionSet& a, const SimpleControl& c) { return {&a, &c, nullptr, nullptr}; }
    static ControlInput steps(const StepControl& c) { return {nullptr, nullptr, &c, nullptr}; }
    static ControlInput policy(const ActionSet& a, const FeedbackPolicy& p) { return {&a, nullptr, nullptr, &p}; }

    bool engaged() const { return simple || step || feedback; }
};

}  // namespace jumpflow
