#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <utility>

#include "common.hpp"
#include "rng.hpp"

namespace jumpflow {

/// A named, samplable mark distribution.  `symmetric` declares mirror
/// invariance (z ~ -z), which the compensator quadrature exploits with
/// antithetic pairs so that odd integrands average to exactly zero.
struct MarkDistribution {
    std::string name;
    int dim = 1;
    bool symmetric = false;
    std::function<void(CounterRng&, double*)> sampler;

    Vec sample(CounterRng& rng) const {
        Vec z(dim);
        sampler(rng, z.data());
        return z;
    }
};

/// Catalog ids: uniform_ball(radius), uniform_shell(inner, outer),
/// rademacher(magnitude), point_mass(value | v0..v{dim-1}).
inline MarkDistribution make_mark_distribution(const std::string& id,
                                               const std::map<std::string, double>& params,
                                               int dim) {
    if (dim < 1) throw config_error("mark distribution: dim must be >= 1");
    auto get = [&](const std::string& key, double fallback) {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };
    MarkDistribution d;
    d.name = id;
    d.dim = dim;
    if (id == "uniform_ball") {
        const double radius = get("radius", 1.0);
        if (radius <= 0.0) throw config_error("uniform_ball: radius must be positive");
        d.symmetric = true;
        d.sampler = [radius, dim](CounterRng& rng, double* out) {
            rng.unit_direction(dim, out);
            const double r = radius * std::pow(rng.uniform_open(), 1.0 / dim);
            for (int i = 0; i < dim; ++i) out[i] *= r;
        };
    } else if (id == "uniform_shell") {
        const double inner = get("inner", 1.0);
        const double outer = get("outer", 2.0);
        if (!(0.0 < inner && inner < outer)) throw config_error("uniform_shell: need 0 < inner < outer");
        d.symmetric = true;
        d.sampler = [inner, outer, dim](CounterRng& rng, double* out) {
            rng.unit_direction(dim, out);
            const double r = inner + (outer - inner) * rng.uniform();
            for (int i = 0; i < dim; ++i) out[i] *= r;
        };
    } else if (id == "rademacher") {
        const double magnitude = get("magnitude", 1.0);
        if (magnitude <= 0.0) throw config_error("rademacher: magnitude must be positive");
        const double component = magnitude / std::sqrt(static_cast<double>(dim));
        d.symmetric = true;
        d.sampler = [component, dim](CounterRng& rng, double* out) {
            for (int i = 0; i < dim; ++i) out[i] = rng.uniform() < 0.5 ? -component : component;
        };
    } else if (id == "point_mass") {
        Vec value(dim, 0.0);
        if (auto it = params.find("value"); it != params.end()) {
            for (int i = 0; i < dim; ++i) value[i] = it->second;
        } else {
            for (int i = 0; i < dim; ++i) value[i] = get("v" + std::to_string(i), 0.0);
        }
        d.symmetric = false;
        d.sampler = [value](CounterRng&, double* out) {
            for (std::size_t i = 0; i < value.size(); ++i) out[i] = value[i];
        };
    } else {
        throw config_error("unknown mark distribution '" + id + "'");
    }
    return d;
}

/// Draws `points` quadrature marks used to estimate the small-jump
/// compensator.  Symmetric distributions get antithetic pairs.
inline std::vector<Vec> quadrature_marks(const MarkDistribution& dist, int points, CounterRng& rng) {
    std::vector<Vec> marks;
    marks.reserve(points);
    if (dist.symmetric) {
        for (int i = 0; i < points / 2; ++i) {
            Vec z = dist.sample(rng);
            Vec zm(z.size());
            for (std::size_t k = 0; k < z.size(); ++k) zm[k] = -z[k];
            marks.push_back(std::move(z));
            marks.push_back(std::move(zm));
        }
        if (points % 2 == 1) marks.push_back(dist.sample(rng));
    } else {
        for (int i = 0; i < points; ++i) marks.push_back(dist.sample(rng));
    }
    return marks;
}

}  // namespace jumpflow
