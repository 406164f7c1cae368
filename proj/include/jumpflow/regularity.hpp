#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"
#include "integrator.hpp"
#include "noise.hpp"
#include "stats.hpp"

namespace jumpflow {

/// Outcome of one statistical check.  `pass` encodes the per-test semantics
/// of `statistic` vs `threshold`; `details` carries the raw numbers for the
/// JSONL report.
struct RegularityReport {
    std::string test_name;
    double statistic = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::int64_t sample_count = 0;
    std::string config_snapshot;
    std::vector<std::pair<std::string, double>> details;
};

struct FlowCheckOptions {
    double restart_perturbation = 0.0;  // nonzero only for detector sanity checks
    int threads = 0;
};

/// Flow identity X^{s,x}_t == X^{u, X^{s,x}_u}_t on shared noise.  The
/// deterministic recursion restarted at its own state must reproduce itself,
/// so the pass criterion is exact: statistic == 0.
inline RegularityReport check_flow_property(const CoefficientSet& coeffs, const NoiseSetup& noise,
                                            double s, double u, double t, const std::vector<Vec>& x_list,
                                            const ControlInput& control, std::int64_t scenario_count,
                                            std::uint64_t seed, const FlowCheckOptions& opts = {}) {
    if (!(s < u && u < t && t <= noise.horizon)) throw argument_error("check_flow_property: need s < u < t <= T");
    const int d = coeffs.dims.state;
    const double stat = parallel_map_reduce<double>(
        scenario_count, opts.threads,
        [&](std::int64_t lo, std::int64_t hi) {
            double worst = 0.0;
            for (std::int64_t p = lo; p < hi; ++p) {
                const LevyNoiseScenario sc = noise.scenario(seed, static_cast<std::uint64_t>(p));
                for (const Vec& x : x_list) {
                    const CadlagPath base = integrate(coeffs, s, x, control, sc);
                    const int node = base.find_node(u);
                    Vec restart_state(base.value(node), base.value(node) + d);
                    for (double& v : restart_state) v += opts.restart_perturbation;
                    const CadlagPath restarted = integrate(coeffs, u, restart_state, control, sc);
                    worst = std::max(worst, dist2(base.value_at_time(t), restarted.value_at_time(t), d));
                }
            }
            return worst;
        },
        [](double& acc, double v) { acc = std::max(acc, v); }, 0.0);

    RegularityReport rep;
    rep.test_name = "flow_property";
    rep.statistic = stat;
    rep.threshold = 0.0;
    rep.pass = stat == 0.0;
    rep.sample_count = scenario_count * static_cast<std::int64_t>(x_list.size());
    rep.config_snapshot = coeffs.catalog_id + " s=" + std::to_string(s) + " u=" + std::to_string(u) +
                          " t=" + std::to_string(t);
    return rep;
}

struct LipschitzMomentOptions {
    double margin = 3.0;           // agreement factor on top of 4^{p-1}
    bool allow_large_jumps = false;  // opt into the parameter-dependent extension
    int threads = 0;
};

/// Moment bound E[sup_t |X^{s,x} - X^{s,y}|^p] <= C |x-y|^p: the ratio is
/// measured at separations |x-y|, |x-y|/2, |x-y|/4 and must be stable within
/// a factor 4^{p-1} * margin as the separation shrinks.
inline RegularityReport estimate_lipschitz_moment(const CoefficientSet& coeffs, const NoiseSetup& noise,
                                                  double s, const Vec& x, const Vec& y, double p,
                                                  const ControlInput& control, std::int64_t scenario_count,
                                                  std::uint64_t seed, const LipschitzMomentOptions& opts = {}) {
    if (p < 2.0) throw argument_error("estimate_lipschitz_moment: p must be >= 2");
    if (coeffs.has_large_jump() && !opts.allow_large_jumps)
        throw argument_error("estimate_lipschitz_moment: large jumps present; the moment bound targets the "
                             "small-jump dynamics (set allow_large_jumps to opt into the extension)");
    const int d = coeffs.dims.state;
    if (static_cast<int>(y.size()) != d) throw argument_error("estimate_lipschitz_moment: y dimension mismatch");

    std::vector<Vec> targets;
    for (int k = 0; k < 3; ++k) {
        Vec yk(d);
        const double scale = std::ldexp(1.0, -k);  // 1, 1/2, 1/4
        for (int i = 0; i < d; ++i) yk[i] = x[i] + scale * (y[i] - x[i]);
        targets.push_back(std::move(yk));
    }

    std::vector<double> ratios;
    RegularityReport rep;
    for (int k = 0; k < 3; ++k) {
        const Vec& yk = targets[k];
        const double sep = dist2(x.data(), yk.data(), d);
        if (sep == 0.0) throw argument_error("estimate_lipschitz_moment: x == y");
        MeanVar acc = parallel_map_reduce<MeanVar>(
            scenario_count, opts.threads,
            [&](std::int64_t lo, std::int64_t hi) {
                MeanVar mv;
                for (std::int64_t pi = lo; pi < hi; ++pi) {
                    const LevyNoiseScenario sc = noise.scenario(seed, static_cast<std::uint64_t>(pi));
                    const CadlagPath a = integrate(coeffs, s, x, control, sc);
                    const CadlagPath b = integrate(coeffs, s, yk, control, sc);
                    mv.add(std::pow(a.sup_distance(b), p));
                }
                return mv;
            },
            [](MeanVar& a, const MeanVar& b) { a.merge(b); }, MeanVar{});
        const double ratio = acc.mean() / std::pow(sep, p);
        ratios.push_back(ratio);
        rep.details.emplace_back("ratio_h" + std::to_string(k), ratio);
        rep.details.emplace_back("separation_h" + std::to_string(k), sep);
    }

    const double lo = *std::min_element(ratios.begin(), ratios.end());
    const double hi = *std::max_element(ratios.begin(), ratios.end());
    rep.test_name = "lipschitz_moment";
    rep.statistic = hi;
    rep.threshold = std::pow(4.0, p - 1.0) * opts.margin;
    // All-zero ratios (identical paths) count as stable.
    rep.pass = lo == 0.0 ? hi == 0.0 : (hi / lo) <= rep.threshold;
    rep.sample_count = scenario_count * 3;
    rep.config_snapshot = coeffs.catalog_id + " p=" + std::to_string(p);
    return rep;
}

struct StochasticContinuityOptions {
    int lattice_points_per_dim = 5;
    int threads = 0;
};

/// P(sup_{x in lattice, t <= T} |X^{r,x}_t - X^{s,x}_t| > eps) for r = s +/-
/// offset; the estimates must fall monotonically (within a 3-sigma binomial
/// band) as the offset shrinks.
inline RegularityReport estimate_stochastic_continuity(const CoefficientSet& coeffs, const NoiseSetup& noise,
                                                       double s, double lattice_radius, double epsilon,
                                                       std::vector<double> offsets, const ControlInput& control,
                                                       std::int64_t scenario_count, std::uint64_t seed,
                                                       const StochasticContinuityOptions& opts = {}) {
    const int d = coeffs.dims.state;
    const double dt = noise.grid_step();
    std::sort(offsets.begin(), offsets.end(), std::greater<>());
    for (double& off : offsets) {
        if (off < dt * (1.0 - 1e-9))
            throw argument_error("estimate_stochastic_continuity: offset below grid resolution");
        off = std::max(1.0, std::round(off / dt)) * dt;  // align to the grid
    }

    // Cubic lattice on the centered box of the given radius.
    std::vector<Vec> lattice;
    const int per_dim = std::max(1, opts.lattice_points_per_dim);
    std::int64_t total = 1;
    for (int i = 0; i < d; ++i) total *= per_dim;
    for (std::int64_t flat = 0; flat < total; ++flat) {
        Vec pt(d);
        std::int64_t rem = flat;
        for (int i = d - 1; i >= 0; --i) {
            const int idx = static_cast<int>(rem % per_dim);
            rem /= per_dim;
            pt[i] = per_dim == 1 ? 0.0
                                 : -lattice_radius + 2.0 * lattice_radius * idx / (per_dim - 1);
        }
        lattice.push_back(std::move(pt));
    }

    struct Side {
        double r;
        double offset;
        const char* label;
    };
    std::vector<Side> sides;
    for (double off : offsets) {
        if (s - off >= 0.0) sides.push_back({s - off, off, "minus"});
        if (s + off < noise.horizon) sides.push_back({s + off, off, "plus"});
    }
    if (sides.empty()) throw argument_error("estimate_stochastic_continuity: no admissible offsets");

    struct Counts {
        std::vector<std::int64_t> exceed;
        std::int64_t n = 0;
        void merge(const Counts& o) {
            if (exceed.empty()) exceed.assign(o.exceed.size(), 0);
            for (std::size_t i = 0; i < o.exceed.size(); ++i) exceed[i] += o.exceed[i];
            n += o.n;
        }
    };
    Counts counts = parallel_map_reduce<Counts>(
        scenario_count, opts.threads,
        [&](std::int64_t lo, std::int64_t hi) {
            Counts c;
            c.exceed.assign(sides.size(), 0);
            for (std::int64_t p = lo; p < hi; ++p) {
                const LevyNoiseScenario sc = noise.scenario(seed, static_cast<std::uint64_t>(p));
                std::vector<CadlagPath> base;
                base.reserve(lattice.size());
                for (const Vec& x : lattice) base.push_back(integrate(coeffs, s, x, control, sc));
                for (std::size_t si = 0; si < sides.size(); ++si) {
                    double sup = 0.0;
                    for (std::size_t xi = 0; xi < lattice.size(); ++xi) {
                        const CadlagPath moved = integrate(coeffs, sides[si].r, lattice[xi], control, sc);
                        sup = std::max(sup, base[xi].sup_distance(moved));
                        if (sup > epsilon) break;
                    }
                    if (sup > epsilon) ++c.exceed[si];
                }
                ++c.n;
            }
            return c;
        },
        [](Counts& a, const Counts& b) { a.merge(b); }, Counts{});

    RegularityReport rep;
    rep.test_name = "stochastic_continuity";
    rep.sample_count = counts.n;
    rep.config_snapshot = coeffs.catalog_id + " s=" + std::to_string(s) + " eps=" + std::to_string(epsilon);
    std::map<std::string, std::vector<std::pair<double, double>>> by_side;  // label -> (offset, estimate)
    for (std::size_t si = 0; si < sides.size(); ++si) {
        const double est = static_cast<double>(counts.exceed[si]) / counts.n;
        rep.details.emplace_back(std::string(sides[si].label) + "_offset_" + std::to_string(sides[si].offset), est);
        by_side[sides[si].label].push_back({sides[si].offset, est});
    }
    // Monotonicity within the binomial band, per side, offsets descending.
    double worst_violation = -1e300;
    for (auto& [label, seq] : by_side) {
        for (std::size_t i = 1; i < seq.size(); ++i) {
            const double se = std::sqrt(std::pow(binomial_stderr(seq[i - 1].second, counts.n), 2) +
                                        std::pow(binomial_stderr(seq[i].second, counts.n), 2));
            worst_violation = std::max(worst_violation, seq[i].second - seq[i - 1].second - 3.0 * se);
        }
    }
    if (worst_violation == -1e300) worst_violation = 0.0;  // single offset: nothing to compare
    rep.statistic = worst_violation;
    rep.threshold = 0.0;
    rep.pass = worst_violation <= 0.0;
    return rep;
}

struct CadlagExponentOptions {
    double rho_min_factor = 4.0;   // smallest gap, in grid steps
    double rho_max_fraction = 0.5; // largest gap, as a fraction of the horizon
    int threads = 0;
};

/// Three-point moment test behind the cadlag criterion: fits the exponent in
/// E[D(X_s,X_u)^q D(X_u,X_v)^q] ~ C (v-s)^{1+r} over random grid triples,
/// where D is the sup distance over a state lattice and all of [0, T].
/// Passes when slope - 2 * stderr > 1, i.e. evidence that r > 0.
inline RegularityReport estimate_cadlag_exponent(const CoefficientSet& coeffs, const NoiseSetup& noise,
                                                 const std::vector<Vec>& lattice, double q,
                                                 std::int64_t triple_count, std::int64_t scenario_count,
                                                 std::uint64_t seed, const CadlagExponentOptions& opts = {}) {
    if (!(q > 0.5)) throw argument_error("estimate_cadlag_exponent: q must exceed 1/2");
    if (lattice.empty()) throw argument_error("estimate_cadlag_exponent: empty lattice");
    const double dt = noise.grid_step();
    const double rho_min = opts.rho_min_factor * dt;
    const double rho_max = opts.rho_max_fraction * noise.horizon;
    if (rho_max / rho_min < 100.0 * (1.0 - 1e-9))
        throw argument_error("estimate_cadlag_exponent: gaps must span at least two decades above the grid step");

    const int cells = 1 << noise.level;
    // Grid-index triples is < iu < iv, gap log-uniform in [rho_min, rho_max].
    struct Triple {
        int is, iu, iv;
    };
    std::vector<Triple> triples;
    CounterRng rng(seed, 0, StreamTag::triples);
    const double log_lo = std::log(rho_min), log_hi = std::log(rho_max);
    while (static_cast<std::int64_t>(triples.size()) < triple_count) {
        const double rho = std::exp(log_lo + (log_hi - log_lo) * rng.uniform());
        const double s = (noise.horizon - rho) * rng.uniform();
        const double u = s + rho * rng.uniform();
        const int is = static_cast<int>(std::floor(s / dt));
        const int iu = static_cast<int>(std::floor(u / dt));
        const int iv = std::min(cells, static_cast<int>(std::lround((s + rho) / dt)));
        if (is < iu && iu < iv) triples.push_back({is, iu, iv});
    }

    // Distinct start indices and distinct index pairs used by the triples.
    std::set<int> time_set;
    std::set<std::pair<int, int>> pair_set;
    for (const Triple& tr : triples) {
        time_set.insert(tr.is);
        time_set.insert(tr.iu);
        time_set.insert(tr.iv);
        pair_set.insert({tr.is, tr.iu});
        pair_set.insert({tr.iu, tr.iv});
    }
    std::vector<int> times(time_set.begin(), time_set.end());
    std::vector<std::pair<int, int>> pairs(pair_set.begin(), pair_set.end());
    std::map<int, int> time_slot;
    for (std::size_t i = 0; i < times.size(); ++i) time_slot[times[i]] = static_cast<int>(i);
    std::map<std::pair<int, int>, int> pair_slot;
    for (std::size_t i = 0; i < pairs.size(); ++i) pair_slot[pairs[i]] = static_cast<int>(i);

    struct Moments {
        std::vector<double> sum;  // per triple: sum over scenarios of D^q * D^q
        std::int64_t n = 0;
        void merge(const Moments& o) {
            if (sum.empty()) sum.assign(o.sum.size(), 0.0);
            for (std::size_t i = 0; i < o.sum.size(); ++i) sum[i] += o.sum[i];
            n += o.n;
        }
    };

    Moments acc = parallel_map_reduce<Moments>(
        scenario_count, opts.threads,
        [&](std::int64_t lo, std::int64_t hi) {
            Moments mo;
            mo.sum.assign(triples.size(), 0.0);
            std::vector<std::vector<CadlagPath>> flows(times.size());
            std::vector<double> pair_dist(pairs.size());
            for (std::int64_t p = lo; p < hi; ++p) {
                const LevyNoiseScenario sc = noise.scenario(seed, static_cast<std::uint64_t>(p));
                for (std::size_t ti = 0; ti < times.size(); ++ti) {
                    flows[ti].clear();
                    for (const Vec& x : lattice)
                        flows[ti].push_back(integrate(coeffs, sc.grid_time(times[ti]), x, ControlInput::none(), sc));
                }
                for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
                    const auto& [ia, ib] = pairs[pi];
                    double sup = 0.0;
                    const int sa = time_slot.at(ia), sb = time_slot.at(ib);
                    for (std::size_t xi = 0; xi < lattice.size(); ++xi)
                        sup = std::max(sup, flows[sa][xi].sup_distance(flows[sb][xi]));
                    pair_dist[pi] = sup;
                }
                for (std::size_t k = 0; k < triples.size(); ++k) {
                    const Triple& tr = triples[k];
                    const double d1 = pair_dist[pair_slot.at({tr.is, tr.iu})];
                    const double d2 = pair_dist[pair_slot.at({tr.iu, tr.iv})];
                    mo.sum[k] += std::pow(d1, q) * std::pow(d2, q);
                }
                ++mo.n;
            }
            return mo;
        },
        [](Moments& a, const Moments& b) { a.merge(b); }, Moments{});

    std::vector<double> log_rho, log_moment;
    for (std::size_t k = 0; k < triples.size(); ++k) {
        const double moment = acc.sum[k] / acc.n;
        if (moment > 0.0) {
            log_rho.push_back(std::log((triples[k].iv - triples[k].is) * dt));
            log_moment.push_back(std::log(moment));
        }
    }

    RegularityReport rep;
    rep.test_name = "cadlag_exponent";
    rep.sample_count = scenario_count * triple_count;
    rep.config_snapshot = coeffs.catalog_id + " q=" + std::to_string(q);
    if (log_rho.size() < 3) {
        // Deterministic-in-s family: all moments vanish, nothing to fit.
        rep.statistic = 0.0;
        rep.threshold = 0.0;
        rep.pass = true;
        rep.details.emplace_back("degenerate", 1.0);
        return rep;
    }
    const OlsFit fit = ols_fit(log_rho, log_moment);
    rep.statistic = fit.slope - 2.0 * fit.slope_stderr;
    rep.threshold = 1.0;
    rep.pass = rep.statistic > 1.0;
    rep.details.emplace_back("slope", fit.slope);
    rep.details.emplace_back("slope_stderr", fit.slope_stderr);
    rep.details.emplace_back("regression_points", static_cast<double>(log_rho.size()));
    return rep;
}

}  // namespace jumpflow
