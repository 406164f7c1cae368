#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"
#include "distributions.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace jumpflow {

struct Dims {
    int state = 1;     // d
    int brownian = 1;  // columns of the diffusion matrix
    int mark = 1;
    int control = 0;   // 0 = uncontrolled
};

/// Evaluable drift / diffusion / jump coefficient maps.  All callbacks write
/// into caller-provided storage; a null small_jump (large_jump) means the map
/// is identically zero and lets the integrator skip that term entirely.
struct CoefficientSet {
    Dims dims;
    // drift(t, x, a) -> R^d ; diffusion(t, x, a) -> R^{d x brownian} row-major
    std::function<void(double, const double*, const double*, double*)> drift;
    std::function<void(double, const double*, const double*, double*)> diffusion;
    // small_jump(x, t, z, a) -> R^d ; large_jump(x, t, z, a) -> R^d
    std::function<void(const double*, double, const double*, const double*, double*)> small_jump;
    std::function<void(const double*, double, const double*, const double*, double*)> large_jump;

    double declared_lipschitz = 0.0;  // in the state argument, over the declared box
    double declared_growth = 0.0;     // sup |coef| / (1 + |x|)
    // g depends on the mark only; the compensator is then a path constant.
    bool small_jump_autonomous = false;
    std::string catalog_id;
    std::map<std::string, double> params;

    // Box the control values live in, used by the hypothesis probe.
    Vec action_lo, action_hi;

    bool has_small_jump() const { return static_cast<bool>(small_jump); }
    bool has_large_jump() const { return static_cast<bool>(large_jump); }
};

/// Estimated Lipschitz / growth constants per coefficient; the estimates are
/// suprema of finite-difference ratios, so nested sample sets can only push
/// them upward.
struct HypothesisProbeReport {
    std::map<std::string, double> estimated_lipschitz_x;
    std::map<std::string, double> estimated_lipschitz_a;
    std::map<std::string, double> estimated_growth;
    long sample_count = 0;
    Vec box_lo, box_hi;
};

struct ProbeOptions {
    double time_horizon = 1.0;
    // Mark samples for probing the jump coefficients; empty skips them.
    std::vector<Vec> small_marks;
    std::vector<Vec> large_marks;
    int threads = 0;
};

namespace detail {

struct ProbePartial {
    std::map<std::string, double> lip_x, lip_a, growth;
    std::string error;

    ProbePartial() {
        for (const char* key : {"drift", "diffusion", "small_jump", "large_jump"}) {
            lip_x[key] = 0.0;
            lip_a[key] = 0.0;
            growth[key] = 0.0;
        }
    }
    void merge(const ProbePartial& o) {
        for (auto& [key, value] : lip_x) value = std::max(value, o.lip_x.at(key));
        for (auto& [key, value] : lip_a) value = std::max(value, o.lip_a.at(key));
        for (auto& [key, value] : growth) value = std::max(value, o.growth.at(key));
        if (error.empty()) error = o.error;
    }
};

}  // namespace detail

/// Numerically probes the Lipschitz / growth hypotheses by central finite
/// differences, pair distance log-uniform in [1e-4, 1].  Sample i draws from
/// its own substream, so estimates at increasing sample counts are nested and
/// the tuples parallelize (the maxima are merge-order independent).
inline HypothesisProbeReport probe_hypotheses(const CoefficientSet& coeffs, const Vec& box_lo,
                                              const Vec& box_hi, long samples, std::uint64_t seed,
                                              const ProbeOptions& opts = {}) {
    const int d = coeffs.dims.state;
    const int bd = coeffs.dims.brownian;
    const int l = coeffs.dims.control;
    if (samples < 2) throw argument_error("probe_hypotheses: samples must be >= 2");
    if (static_cast<int>(box_lo.size()) != d || static_cast<int>(box_hi.size()) != d)
        throw argument_error("probe_hypotheses: box dimension mismatch");
    for (int i = 0; i < d; ++i)
        if (!(box_lo[i] < box_hi[i])) throw argument_error("probe_hypotheses: degenerate box");

    detail::ProbePartial acc = parallel_map_reduce<detail::ProbePartial>(
        samples, opts.threads,
        [&](std::int64_t lo, std::int64_t hi) {
            detail::ProbePartial part;
            Vec x(d), dir(d), a1(std::max(l, 1), 0.0), a2(std::max(l, 1), 0.0);
            Vec out_x(std::max(d, d * bd)), out_y(std::max(d, d * bd));
            try {
                for (std::int64_t it = lo; it < hi; ++it) {
                    CounterRng rng(seed, static_cast<std::uint64_t>(it), StreamTag::probe);
                    const double t = opts.time_horizon * rng.uniform();
                    for (int i = 0; i < d; ++i) x[i] = box_lo[i] + (box_hi[i] - box_lo[i]) * rng.uniform();
                    rng.unit_direction(d, dir.data());
                    const double h = std::pow(10.0, -4.0 + 4.0 * rng.uniform());  // log-uniform in [1e-4, 1]
                    for (int i = 0; i < l; ++i) {
                        const double alo = i < static_cast<int>(coeffs.action_lo.size()) ? coeffs.action_lo[i] : -1.0;
                        const double ahi = i < static_cast<int>(coeffs.action_hi.size()) ? coeffs.action_hi[i] : 1.0;
                        a1[i] = alo + (ahi - alo) * rng.uniform();
                        a2[i] = alo + (ahi - alo) * rng.uniform();
                    }

                    // Central pair around x, clamped back into the box.
                    Vec xa = x, xb = x;
                    for (int i = 0; i < d; ++i) {
                        xa[i] -= 0.5 * h * dir[i];
                        xb[i] += 0.5 * h * dir[i];
                        xa[i] = std::clamp(xa[i], box_lo[i], box_hi[i]);
                        xb[i] = std::clamp(xb[i], box_lo[i], box_hi[i]);
                    }
                    const double sep = dist2(xa.data(), xb.data(), d);
                    const double asep = l > 0 ? dist2(a1.data(), a2.data(), l) : 0.0;

                    auto account = [&](const char* key, int out_dim, auto&& eval) {
                        eval(t, x, a1, out_x.data());
                        if (!all_finite(out_x.data(), out_dim))
                            throw probe_error(std::string("probe: coefficient '") + key +
                                              "' returned a non-finite value at t=" + std::to_string(t) +
                                              ", x0=" + std::to_string(x[0]));
                        part.growth[key] =
                            std::max(part.growth[key], norm2(out_x.data(), out_dim) / (1.0 + norm2(x)));
                        if (sep > 0.0) {
                            eval(t, xa, a1, out_x.data());
                            eval(t, xb, a1, out_y.data());
                            if (!all_finite(out_x.data(), out_dim) || !all_finite(out_y.data(), out_dim))
                                throw probe_error(std::string("probe: coefficient '") + key +
                                                  "' returned a non-finite value at t=" + std::to_string(t) +
                                                  ", x0=" + std::to_string(xa[0]));
                            part.lip_x[key] = std::max(part.lip_x[key],
                                                       dist2(out_x.data(), out_y.data(), out_dim) / sep);
                        }
                        if (asep > 0.0) {
                            eval(t, x, a1, out_x.data());
                            eval(t, x, a2, out_y.data());
                            part.lip_a[key] = std::max(part.lip_a[key],
                                                       dist2(out_x.data(), out_y.data(), out_dim) / asep);
                        }
                    };

                    if (coeffs.drift)
                        account("drift", d, [&](double tt, const Vec& xx, const Vec& aa, double* out) {
                            coeffs.drift(tt, xx.data(), aa.data(), out);
                        });
                    if (coeffs.diffusion)
                        account("diffusion", d * bd, [&](double tt, const Vec& xx, const Vec& aa, double* out) {
                            coeffs.diffusion(tt, xx.data(), aa.data(), out);
                        });
                    // The jump coefficients are probed at sampled marks; the
                    // supremum over z dominates the measure-integrated constant.
                    if (coeffs.small_jump && !opts.small_marks.empty()) {
                        const Vec& z = opts.small_marks[static_cast<std::size_t>(it) % opts.small_marks.size()];
                        account("small_jump", d, [&](double tt, const Vec& xx, const Vec& aa, double* out) {
                            coeffs.small_jump(xx.data(), tt, z.data(), aa.data(), out);
                        });
                    }
                    if (coeffs.large_jump && !opts.large_marks.empty()) {
                        const Vec& z = opts.large_marks[static_cast<std::size_t>(it) % opts.large_marks.size()];
                        account("large_jump", d, [&](double tt, const Vec& xx, const Vec& aa, double* out) {
                            coeffs.large_jump(xx.data(), tt, z.data(), aa.data(), out);
                        });
                    }
                }
            } catch (const std::exception& e) {
                part.error = e.what();
            }
            return part;
        },
        [](detail::ProbePartial& a, const detail::ProbePartial& b) { a.merge(b); }, detail::ProbePartial{});

    if (!acc.error.empty()) throw probe_error(acc.error);

    HypothesisProbeReport rep;
    rep.sample_count = samples;
    rep.box_lo = box_lo;
    rep.box_hi = box_hi;
    rep.estimated_lipschitz_x = acc.lip_x;
    rep.estimated_lipschitz_a = acc.lip_a;
    rep.estimated_growth = acc.growth;
    return rep;
}

namespace detail {

inline double param(const std::map<std::string, double>& p, const std::string& key, double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

inline void require(bool ok, const std::string& what) {
    if (!ok) throw config_error(what);
}

inline double mean_component(const double* z, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += z[i];
    return s / n;
}

}  // namespace detail

/// Coefficient catalog.  Ids and parameters:
///   affine          b = a_scale*x + b_gain*a + c, alpha = sigma (constant)
///   ornstein-uhlenbeck  b = -theta*x, alpha = sigma
///   controlled-drift    b = a (needs control_dim == state_dim), alpha = sigma
///   bilinear-drift      b = a0*x (needs control_dim == 1), alpha = sigma
///   geometric-like      b = mu*x, alpha = sigma_rel*clamp(x, box_lo..box_hi)
///   jump-linear         b = mu*x + control_gain*a, alpha = sigma,
///                       g = gamma_x*mean(z)*x + gamma_z*z, f = f_scale*z
/// Constant diffusion means sigma on the leading diagonal of the d x m matrix.
inline CoefficientSet make_coefficients(const std::string& catalog_id,
                                        const std::map<std::string, double>& params, Dims dims) {
    using detail::param;
    using detail::require;
    require(dims.state >= 1 && dims.brownian >= 1 && dims.mark >= 1 && dims.control >= 0,
            "catalog: invalid dimensions");
    CoefficientSet c;
    c.dims = dims;
    c.catalog_id = catalog_id;
    c.params = params;
    c.action_lo.assign(std::max(dims.control, 0), -1.0);
    c.action_hi.assign(std::max(dims.control, 0), 1.0);
    if (auto it = params.find("action_bound"); it != params.end()) {
        for (auto& v : c.action_lo) v = -it->second;
        for (auto& v : c.action_hi) v = it->second;
    }

    const int d = dims.state, m = dims.brownian;
    auto const_diffusion = [d, m](double sigma) {
        return [d, m, sigma](double, const double*, const double*, double* out) {
            std::fill(out, out + d * m, 0.0);
            for (int i = 0; i < std::min(d, m); ++i) out[i * m + i] = sigma;
        };
    };

    if (catalog_id == "affine") {
        const double a_scale = param(params, "a_scale", 0.0);
        const double b_gain = param(params, "b_gain", 0.0);
        const double cc = param(params, "c", 0.0);
        const double sigma = param(params, "sigma", 0.0);
        const int l = dims.control;
        require(b_gain == 0.0 || l == d, "affine: b_gain needs control_dim == state_dim");
        c.drift = [a_scale, b_gain, cc, d, l](double, const double* x, const double* a, double* out) {
            for (int i = 0; i < d; ++i) out[i] = a_scale * x[i] + (l > 0 ? b_gain * a[i] : 0.0) + cc;
        };
        c.diffusion = const_diffusion(sigma);
        c.declared_lipschitz = std::abs(a_scale);
        c.declared_growth = std::abs(a_scale) + std::abs(cc) +
                            std::abs(b_gain) * (l > 0 ? norm2(c.action_hi) : 0.0) + std::abs(sigma);
    } else if (catalog_id == "ornstein-uhlenbeck") {
        const double theta = param(params, "theta", 1.0);
        const double sigma = param(params, "sigma", 1.0);
        c.drift = [theta, d](double, const double* x, const double*, double* out) {
            for (int i = 0; i < d; ++i) out[i] = -theta * x[i];
        };
        c.diffusion = const_diffusion(sigma);
        c.declared_lipschitz = std::abs(theta);
        c.declared_growth = std::abs(theta) + std::abs(sigma);
    } else if (catalog_id == "controlled-drift") {
        require(dims.control == d, "controlled-drift: needs control_dim == state_dim");
        const double sigma = param(params, "sigma", 0.0);
        c.drift = [d](double, const double*, const double* a, double* out) {
            for (int i = 0; i < d; ++i) out[i] = a[i];
        };
        c.diffusion = const_diffusion(sigma);
        c.declared_lipschitz = 0.0;
        c.declared_growth = norm2(c.action_hi) + std::abs(sigma);
    } else if (catalog_id == "bilinear-drift") {
        require(dims.control == 1, "bilinear-drift: needs control_dim == 1");
        const double sigma = param(params, "sigma", 0.0);
        c.drift = [d](double, const double* x, const double* a, double* out) {
            for (int i = 0; i < d; ++i) out[i] = a[0] * x[i];
        };
        c.diffusion = const_diffusion(sigma);
        c.declared_lipschitz = std::max(std::abs(c.action_lo[0]), std::abs(c.action_hi[0]));
        c.declared_growth = c.declared_lipschitz + std::abs(sigma);
    } else if (catalog_id == "geometric-like") {
        const double mu = param(params, "mu", 0.05);
        const double sigma_rel = param(params, "sigma_rel", 0.2);
        const double blo = param(params, "box_lo", -10.0);
        const double bhi = param(params, "box_hi", 10.0);
        require(blo < bhi, "geometric-like: box_lo < box_hi required");
        c.drift = [mu, d](double, const double* x, const double*, double* out) {
            for (int i = 0; i < d; ++i) out[i] = mu * x[i];
        };
        c.diffusion = [sigma_rel, blo, bhi, d, m](double, const double* x, const double*, double* out) {
            std::fill(out, out + d * m, 0.0);
            for (int i = 0; i < std::min(d, m); ++i)
                out[i * m + i] = sigma_rel * std::clamp(x[i], blo, bhi);
        };
        c.declared_lipschitz = std::abs(mu) + std::abs(sigma_rel);
        c.declared_growth = std::abs(mu) + std::abs(sigma_rel) * std::max(std::abs(blo), std::abs(bhi));
    } else if (catalog_id == "jump-linear") {
        const double mu = param(params, "mu", 0.0);
        const double control_gain = param(params, "control_gain", 0.0);
        const double sigma = param(params, "sigma", 0.0);
        const double gamma_x = param(params, "gamma_x", 0.0);
        const double gamma_z = param(params, "gamma_z", 0.0);
        const double f_scale = param(params, "f_scale", 0.0);
        const int l = dims.control, mk = dims.mark;
        require(control_gain == 0.0 || l == d, "jump-linear: control_gain needs control_dim == state_dim");
        require((gamma_z == 0.0 && f_scale == 0.0) || mk == d,
                "jump-linear: gamma_z / f_scale need mark_dim == state_dim");
        c.drift = [mu, control_gain, d, l](double, const double* x, const double* a, double* out) {
            for (int i = 0; i < d; ++i) out[i] = mu * x[i] + (l > 0 ? control_gain * a[i] : 0.0);
        };
        c.diffusion = const_diffusion(sigma);
        if (gamma_x != 0.0 || gamma_z != 0.0) {
            c.small_jump = [gamma_x, gamma_z, d, mk](const double* x, double, const double* z,
                                                     const double*, double* out) {
                const double zbar = detail::mean_component(z, mk);
                for (int i = 0; i < d; ++i)
                    out[i] = gamma_x * zbar * x[i] + (gamma_z != 0.0 ? gamma_z * z[i] : 0.0);
            };
            c.small_jump_autonomous = gamma_x == 0.0;
        }
        if (f_scale != 0.0) {
            c.large_jump = [f_scale, d](const double*, double, const double* z, const double*, double* out) {
                for (int i = 0; i < d; ++i) out[i] = f_scale * z[i];
            };
        }
        c.declared_lipschitz = std::abs(mu) + std::abs(gamma_x);  // |mean(z)| <= 1 on the small region
        c.declared_growth = std::abs(mu) + std::abs(sigma) + std::abs(gamma_x) + std::abs(gamma_z) +
                            std::abs(control_gain) * (l > 0 ? norm2(c.action_hi) : 0.0);
    } else {
        throw config_error("unknown coefficient catalog id '" + catalog_id + "'");
    }
    return c;
}

}  // namespace jumpflow
