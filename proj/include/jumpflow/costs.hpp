#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>

#include "common.hpp"
#include "controls.hpp"

namespace jumpflow {

/// Bounded running cost h(t, x, a) and terminal cost j(x) picked from a small
/// catalog.  Boundedness is relative to the state grid box: sup_box reports
/// the exact supremum of |cost| over the box (and the action set for h).
struct RunningCost {
    std::string id;
    std::function<double(double, const double*, const double*)> eval;
    std::function<double(const StateGrid&, const ActionSet*)> sup_box;
};

struct TerminalCost {
    std::string id;
    std::function<double(const double*)> eval;
    std::function<double(const StateGrid&)> sup_box;
};

namespace detail {

inline double cost_param(const std::map<std::string, double>& p, const std::string& k, double fallback) {
    auto it = p.find(k);
    return it == p.end() ? fallback : it->second;
}

// |w . x + c| is extremal at a box corner.
inline double linear_sup_on_box(const StateGrid& g, const Vec& w, double c) {
    double best = 0.0;
    const int d = g.dim();
    for (int corner = 0; corner < (1 << d); ++corner) {
        double v = c;
        for (int k = 0; k < d; ++k) {
            const auto& ax = g.axes[k];
            v += w[k] * (((corner >> k) & 1) ? ax.hi : ax.lo);
        }
        best = std::max(best, std::abs(v));
    }
    return best;
}

inline double radial_sup_on_box(const StateGrid& g, const Vec& center) {
    double worst = 0.0;
    const int d = g.dim();
    for (int corner = 0; corner < (1 << d); ++corner) {
        double s = 0.0;
        for (int k = 0; k < d; ++k) {
            const auto& ax = g.axes[k];
            const double x = ((corner >> k) & 1) ? ax.hi : ax.lo;
            s += (x - center[k]) * (x - center[k]);
        }
        worst = std::max(worst, s);
    }
    return std::sqrt(worst);
}

}  // namespace detail

/// Running cost ids: zero, constant(c), linear(w, c), action_penalty(rho).
inline RunningCost make_running_cost(const std::string& id, const std::map<std::string, double>& params,
                                     int state_dim, int control_dim) {
    using detail::cost_param;
    RunningCost h;
    h.id = id;
    if (id == "zero") {
        h.eval = [](double, const double*, const double*) { return 0.0; };
        h.sup_box = [](const StateGrid&, const ActionSet*) { return 0.0; };
    } else if (id == "constant") {
        const double c = cost_param(params, "c", 1.0);
        h.eval = [c](double, const double*, const double*) { return c; };
        h.sup_box = [c](const StateGrid&, const ActionSet*) { return std::abs(c); };
    } else if (id == "linear") {
        Vec w(state_dim, cost_param(params, "w", 1.0));
        for (int i = 0; i < state_dim; ++i)
            if (auto it = params.find("w" + std::to_string(i)); it != params.end()) w[i] = it->second;
        const double c = cost_param(params, "c", 0.0);
        h.eval = [w, c, state_dim](double, const double* x, const double*) {
            double v = c;
            for (int i = 0; i < state_dim; ++i) v += w[i] * x[i];
            return v;
        };
        h.sup_box = [w, c](const StateGrid& g, const ActionSet*) { return detail::linear_sup_on_box(g, w, c); };
    } else if (id == "action_penalty") {
        const double rho = cost_param(params, "rho", 1.0);
        const int l = control_dim;
        h.eval = [rho, l](double, const double*, const double* a) {
            double s = 0.0;
            for (int i = 0; i < l; ++i) s += a[i] * a[i];
            return -rho * s;
        };
        h.sup_box = [rho, l](const StateGrid&, const ActionSet* actions) {
            double worst = 0.0;
            if (actions)
                for (const Vec& a : actions->actions) {
                    double s = 0.0;
                    for (int i = 0; i < l && i < static_cast<int>(a.size()); ++i) s += a[i] * a[i];
                    worst = std::max(worst, s);
                }
            return rho * worst;
        };
    } else {
        throw config_error("unknown running cost id '" + id + "'");
    }
    return h;
}

/// Terminal cost ids: zero, constant(c), linear(w, c), neg_abs(center),
/// neg_square(center).
inline TerminalCost make_terminal_cost(const std::string& id, const std::map<std::string, double>& params,
                                       int state_dim) {
    using detail::cost_param;
    TerminalCost j;
    j.id = id;
    if (id == "zero") {
        j.eval = [](const double*) { return 0.0; };
        j.sup_box = [](const StateGrid&) { return 0.0; };
    } else if (id == "constant") {
        const double c = cost_param(params, "c", 1.0);
        j.eval = [c](const double*) { return c; };
        j.sup_box = [c](const StateGrid&) { return std::abs(c); };
    } else if (id == "linear") {
        Vec w(state_dim, cost_param(params, "w", 1.0));
        for (int i = 0; i < state_dim; ++i)
            if (auto it = params.find("w" + std::to_string(i)); it != params.end()) w[i] = it->second;
        const double c = cost_param(params, "c", 0.0);
        j.eval = [w, c, state_dim](const double* x) {
            double v = c;
            for (int i = 0; i < state_dim; ++i) v += w[i] * x[i];
            return v;
        };
        j.sup_box = [w, c](const StateGrid& g) { return detail::linear_sup_on_box(g, w, c); };
    } else if (id == "neg_abs" || id == "neg_square") {
        Vec center(state_dim, cost_param(params, "center", 0.0));
        for (int i = 0; i < state_dim; ++i)
            if (auto it = params.find("center" + std::to_string(i)); it != params.end()) center[i] = it->second;
        const bool square = id == "neg_square";
        j.eval = [center, square, state_dim](const double* x) {
            const double r = dist2(x, center.data(), state_dim);
            return square ? -r * r : -r;
        };
        j.sup_box = [center, square](const StateGrid& g) {
            const double r = detail::radial_sup_on_box(g, center);
            return square ? r * r : r;
        };
    } else {
        throw config_error("unknown terminal cost id '" + id + "'");
    }
    return j;
}

struct CostSet {
    RunningCost running;
    TerminalCost terminal;
};

}  // namespace jumpflow
