#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "controls.hpp"
#include "costs.hpp"
#include "model.hpp"
#include "noise.hpp"
#include "value.hpp"

namespace jumpflow {

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char c : s) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == sep && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

inline double parse_real(const std::string& s, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (trim(s.substr(used)).empty()) return v;
    } catch (...) {
    }
    throw config_error("config: expected a real number for " + where + ", got '" + s + "'");
}

inline long long parse_int(const std::string& s, const std::string& where) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (trim(s.substr(used)).empty()) return v;
    } catch (...) {
    }
    throw config_error("config: expected an integer for " + where + ", got '" + s + "'");
}

inline std::string canonical_number(const std::string& token) {
    try {
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        if (trim(token.substr(used)).empty()) {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return buf;
        }
    } catch (...) {
    }
    return token;
}

}  // namespace detail

/// name(key=value, ...) — a compact spec literal used for mark distributions,
/// cost functions and stopping rules.  A single bare value maps to "value".
struct SpecLiteral {
    std::string name;
    std::map<std::string, double> params;
};

inline SpecLiteral parse_spec_literal(const std::string& text, const std::string& where) {
    const std::string s = detail::trim(text);
    SpecLiteral lit;
    const auto open = s.find('(');
    if (open == std::string::npos) {
        lit.name = s;
        return lit;
    }
    if (s.back() != ')') throw config_error("config: malformed spec '" + s + "' for " + where);
    lit.name = detail::trim(s.substr(0, open));
    const std::string inner = s.substr(open + 1, s.size() - open - 2);
    if (detail::trim(inner).empty()) return lit;
    for (const std::string& part : detail::split(inner, ',')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos) {
            lit.params["value"] = detail::parse_real(part, where);
        } else {
            lit.params[detail::trim(part.substr(0, eq))] = detail::parse_real(part.substr(eq + 1), where);
        }
    }
    return lit;
}

/// Parsed experiment configuration; see the README for the grammar and the
/// full key reference.  Unknown sections or keys are rejected.
class ExperimentConfig {
public:
    static ExperimentConfig parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw config_error("config: cannot open '" + path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_text(ss.str());
    }

    static ExperimentConfig parse_text(const std::string& text) {
        ExperimentConfig cfg;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw config_error("config: bad section header at line " + std::to_string(lineno));
                section = detail::trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos || section.empty())
                throw config_error("config: expected 'key = value' at line " + std::to_string(lineno));
            const std::string key = detail::trim(line.substr(0, eq));
            const std::string value = detail::trim(line.substr(eq + 1));
            if (cfg.entries_[section].count(key))
                throw config_error("config: duplicate key '" + section + "." + key + "'");
            cfg.entries_[section][key] = value;
        }
        cfg.check_schema();
        return cfg;
    }

    // ---- typed getters -------------------------------------------------
    bool has(const std::string& section, const std::string& key) const {
        auto s = entries_.find(section);
        return s != entries_.end() && s->second.count(key) > 0;
    }

    std::string get_string(const std::string& section, const std::string& key, const std::string& fallback = "") const {
        auto s = entries_.find(section);
        if (s == entries_.end()) return fallback;
        auto k = s->second.find(key);
        return k == s->second.end() ? fallback : k->second;
    }

    std::string require_string(const std::string& section, const std::string& key) const {
        if (!has(section, key)) throw config_error("config: missing required key '" + section + "." + key + "'");
        return get_string(section, key);
    }

    double get_real(const std::string& section, const std::string& key, double fallback) const {
        if (!has(section, key)) return fallback;
        return detail::parse_real(get_string(section, key), section + "." + key);
    }

    long long get_int(const std::string& section, const std::string& key, long long fallback) const {
        if (!has(section, key)) return fallback;
        return detail::parse_int(get_string(section, key), section + "." + key);
    }

    std::vector<double> get_reals(const std::string& section, const std::string& key,
                                  std::vector<double> fallback = {}) const {
        if (!has(section, key)) return fallback;
        std::vector<double> out;
        for (const std::string& tok : detail::split(get_string(section, key), ','))
            out.push_back(detail::parse_real(tok, section + "." + key));
        return out;
    }

    /// Semicolon-separated vectors with comma-separated components.
    std::vector<Vec> get_vectors(const std::string& section, const std::string& key,
                                 std::vector<Vec> fallback = {}) const {
        if (!has(section, key)) return fallback;
        std::vector<Vec> out;
        for (const std::string& group : detail::split(get_string(section, key), ';')) {
            Vec v;
            for (const std::string& tok : detail::split(group, ','))
                v.push_back(detail::parse_real(tok, section + "." + key));
            out.push_back(std::move(v));
        }
        return out;
    }

    std::vector<SpecLiteral> get_spec_list(const std::string& section, const std::string& key) const {
        std::vector<SpecLiteral> out;
        if (!has(section, key)) return out;
        for (const std::string& group : detail::split(get_string(section, key), ';'))
            out.push_back(parse_spec_literal(group, section + "." + key));
        return out;
    }

    // ---- semantic builders ---------------------------------------------
    Dims dims() const {
        Dims d;
        d.state = static_cast<int>(get_int("model", "state_dim", 1));
        d.brownian = static_cast<int>(get_int("model", "brownian_dim", 1));
        d.mark = static_cast<int>(get_int("model", "mark_dim", 1));
        d.control = static_cast<int>(get_int("model", "control_dim", 0));
        return d;
    }

    CoefficientSet coefficients() const {
        std::map<std::string, double> params;
        auto s = entries_.find("model");
        if (s != entries_.end())
            for (const auto& [key, value] : s->second)
                if (key.rfind("param.", 0) == 0)
                    params[key.substr(6)] = detail::parse_real(value, "model." + key);
        return make_coefficients(require_string("model", "catalog"), params, dims());
    }

    NoiseSetup noise_setup() const {
        NoiseSetup n;
        n.horizon = get_real("noise", "horizon", 1.0);
        n.level = static_cast<int>(get_int("noise", "level", 8));
        n.brownian_dim = dims().brownian;
        n.measure.mark_dim = dims().mark;
        n.measure.small_intensity = get_real("noise", "small_intensity", 0.0);
        n.measure.large_intensity = get_real("noise", "large_intensity", 1.0);
        const SpecLiteral small = parse_spec_literal(get_string("noise", "small_mark", "uniform_ball"), "noise.small_mark");
        const SpecLiteral large = parse_spec_literal(get_string("noise", "large_mark", "uniform_shell"), "noise.large_mark");
        n.measure.small_mark_dist = make_mark_distribution(small.name, small.params, dims().mark);
        n.measure.large_mark_dist = make_mark_distribution(large.name, large.params, dims().mark);
        if (n.level < 0 || n.level > 24) throw config_error("config: noise.level out of range [0, 24]");
        return n;
    }

    std::uint64_t seed() const { return static_cast<std::uint64_t>(get_int("noise", "seed", 0)); }

    StateGrid state_grid() const {
        const int d = dims().state;
        auto expand = [&](std::vector<double> v, double fallback) {
            if (v.empty()) v.assign(d, fallback);
            if (static_cast<int>(v.size()) == 1 && d > 1) v.assign(d, v[0]);
            if (static_cast<int>(v.size()) != d) throw config_error("config: grid bounds must have state_dim entries");
            return v;
        };
        const Vec lo = expand(get_reals("grid", "state_lo"), -1.0);
        const Vec hi = expand(get_reals("grid", "state_hi"), 1.0);
        std::vector<double> counts_raw = get_reals("grid", "state_count", {21.0});
        if (counts_raw.size() == 1 && d > 1) counts_raw.assign(d, counts_raw[0]);
        if (static_cast<int>(counts_raw.size()) != d)
            throw config_error("config: grid.state_count must have state_dim entries");
        std::vector<int> counts;
        for (double c : counts_raw) counts.push_back(static_cast<int>(c));
        return StateGrid(lo, hi, counts);
    }

    int dyadic_level() const { return static_cast<int>(get_int("grid", "dyadic_level", 2)); }

    ActionSet actions() const {
        ActionSet a;
        a.actions = get_vectors("control", "actions");
        for (std::size_t i = 0; i < a.actions.size(); ++i) a.labels.push_back("a" + std::to_string(i));
        return a;
    }

    CostSet costs() const {
        const SpecLiteral h = parse_spec_literal(get_string("control", "h", "zero"), "control.h");
        const SpecLiteral j = parse_spec_literal(get_string("control", "j", "zero"), "control.j");
        CostSet cs;
        cs.running = make_running_cost(h.name, h.params, dims().state, dims().control);
        cs.terminal = make_terminal_cost(j.name, j.params, dims().state);
        return cs;
    }

    std::vector<StoppingTimeSpec> stopping_specs() const {
        std::vector<StoppingTimeSpec> out;
        const int d = dims().state;
        for (const SpecLiteral& lit : get_spec_list("run", "dpp_theta")) {
            if (lit.name == "deterministic") {
                auto it = lit.params.find("value");
                if (it == lit.params.end()) throw config_error("config: deterministic(...) needs a time");
                out.push_back(StoppingTimeSpec::deterministic(it->second));
            } else if (lit.name == "first_exit") {
                Vec center(d, 0.0);
                if (auto it = lit.params.find("center"); it != lit.params.end()) center.assign(d, it->second);
                for (int i = 0; i < d; ++i)
                    if (auto it = lit.params.find("center" + std::to_string(i)); it != lit.params.end())
                        center[i] = it->second;
                double radius = 1.0;
                if (auto it = lit.params.find("radius"); it != lit.params.end()) radius = it->second;
                out.push_back(StoppingTimeSpec::first_exit(center, radius));
            } else if (lit.name == "first_large_jump_after") {
                auto it = lit.params.find("value");
                if (it == lit.params.end()) it = lit.params.find("after");
                if (it == lit.params.end()) throw config_error("config: first_large_jump_after(...) needs a time");
                out.push_back(StoppingTimeSpec::first_large_jump_after(it->second));
            } else {
                throw config_error("config: unknown stopping rule '" + lit.name + "'");
            }
        }
        return out;
    }

    /// Full cross-validation of the schema-level invariants.
    void validate() const {
        const Dims d = dims();
        if (d.state < 1 || d.brownian < 1 || d.mark < 1 || d.control < 0)
            throw config_error("config: invalid dimensions");
        coefficients();
        const NoiseSetup n = noise_setup();
        if (dyadic_level() > n.level)
            throw config_error("config: grid.dyadic_level must not exceed noise.level");
        state_grid();
        costs();
        if (d.control > 0) {
            const ActionSet a = actions();
            if (a.actions.empty()) throw config_error("config: control_dim > 0 needs control.actions");
            a.validate();
            if (a.dim() != d.control) throw config_error("config: action dimension mismatch");
        }
        stopping_specs();
    }

    /// FNV-1a hash over the canonicalized semantic content; whitespace,
    /// comments and key order do not contribute.
    std::uint64_t semantic_hash() const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        auto feed = [&h](const std::string& s) {
            for (unsigned char c : s) {
                h ^= c;
                h *= 0x100000001b3ull;
            }
        };
        for (const auto& [section, keys] : entries_) {
            for (const auto& [key, value] : keys) {
                feed(section);
                feed(".");
                feed(key);
                feed("=");
                for (const std::string& group : detail::split(value, ';')) {
                    for (const std::string& tok : detail::split(group, ','))
                        feed(detail::canonical_number(tok) + ",");
                    feed(";");
                }
                feed("\n");
            }
        }
        return h;
    }

    int threads() const { return static_cast<int>(get_int("run", "threads", 0)); }

private:
    void check_schema() const {
        static const std::map<std::string, std::set<std::string>> known = {
            {"model", {"catalog", "state_dim", "brownian_dim", "mark_dim", "control_dim"}},
            {"noise", {"horizon", "level", "small_intensity", "large_intensity", "small_mark", "large_mark", "seed"}},
            {"grid", {"state_lo", "state_hi", "state_count", "dyadic_level"}},
            {"control", {"actions", "h", "j"}},
            {"run",
             {"scenarios", "inner_scenarios", "threads", "out_dir", "x_values", "s_values", "flow_triples",
              "epsilon", "offsets", "lattice_radius", "lattice_points", "lip_p", "lip_x", "lip_y",
              "cadlag_q", "cadlag_triples", "cadlag_scenarios", "probe_samples", "probe_lo", "probe_hi",
              "dpp_theta", "dpp_s", "dpp_x", "dpp_scenarios", "sim_s", "sim_x", "dump_paths", "dump_scenarios"}},
        };
        for (const auto& [section, keys] : entries_) {
            auto s = known.find(section);
            if (s == known.end()) throw config_error("config: unknown section [" + section + "]");
            for (const auto& [key, value] : keys) {
                (void)value;
                if (section == "model" && key.rfind("param.", 0) == 0) continue;
                if (!s->second.count(key))
                    throw config_error("config: unknown key '" + section + "." + key + "'");
            }
        }
    }

    std::map<std::string, std::map<std::string, std::string>> entries_;
};

}  // namespace jumpflow
