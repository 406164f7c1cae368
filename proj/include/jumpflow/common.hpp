#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace jumpflow {

using Vec = std::vector<double>;

/// Bad or inconsistent user-supplied configuration (CLI maps this to exit 2).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid argument to a library operation.
struct argument_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Non-finite state or coefficient detected while stepping a path.
struct integration_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Coefficient evaluation failed during hypothesis probing.
struct probe_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double norm2(const double* v, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += v[i] * v[i];
    return std::sqrt(s);
}

inline double norm2(const Vec& v) { return norm2(v.data(), static_cast<int>(v.size())); }

inline double dist2(const double* a, const double* b, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline bool all_finite(const double* v, int n) {
    for (int i = 0; i < n; ++i)
        if (!std::isfinite(v[i])) return false;
    return true;
}

inline constexpr const char* library_version = "0.1.0";

}  // namespace jumpflow
