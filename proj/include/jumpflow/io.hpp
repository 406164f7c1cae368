#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "integrator.hpp"
#include "noise.hpp"
#include "regularity.hpp"
#include "value.hpp"

namespace jumpflow {

/// Round-trip-exact, locale-independent number formatting ('.' decimal).
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// write-then-rename so readers never observe a partial artifact.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

inline std::string path_to_csv(const CadlagPath& path) {
    std::string out = "node_time";
    for (int i = 0; i < path.state_dim; ++i) out += ",state_" + std::to_string(i);
    out += ",is_jump";
    for (int i = 0; i < path.state_dim; ++i) out += ",pre_jump_" + std::to_string(i);
    out += "\n";
    for (int n = 0; n < path.node_count(); ++n) {
        out += format_double(path.node_time(n));
        for (int i = 0; i < path.state_dim; ++i) out += "," + format_double(path.value(n)[i]);
        const int jump = (path.kinds[n] & node_kind::applied_jump) ? 2
                         : (path.kinds[n] & node_kind::small_jump) ? 1
                                                                   : 0;
        out += "," + std::to_string(jump);
        const Vec* pre = path.pre_jump_at(n);
        for (int i = 0; i < path.state_dim; ++i) out += pre ? "," + format_double((*pre)[i]) : ",";
        out += "\n";
    }
    return out;
}

inline std::string flow_field_to_csv(const FlowField& field) {
    std::string out = "s,x_index,t";
    for (int i = 0; i < field.state_dim; ++i) out += ",state_" + std::to_string(i);
    out += "\n";
    for (std::size_t is = 0; is < field.start_times.size(); ++is)
        for (std::size_t ix = 0; ix < field.start_states.size(); ++ix)
            for (std::size_t it = 0; it < field.eval_times.size(); ++it) {
                out += format_double(field.start_times[is]) + "," + std::to_string(ix) + "," +
                       format_double(field.eval_times[it]);
                const double* v = field.at(static_cast<int>(is), static_cast<int>(ix), static_cast<int>(it));
                for (int i = 0; i < field.state_dim; ++i) out += "," + format_double(v[i]);
                out += "\n";
            }
    return out;
}

inline std::string value_grid_to_csv(const ValueGrid& vg) {
    const int d = vg.grid.dim();
    std::string out = "t";
    for (int i = 0; i < d; ++i) out += ",x_" + std::to_string(i);
    out += ",value,greedy_action_index\n";
    Vec x(d);
    for (int i = 0; i < vg.slice_count(); ++i) {
        for (std::int64_t j = 0; j < vg.grid.point_count(); ++j) {
            vg.grid.point(j, x.data());
            out += format_double(vg.slice_time(i));
            for (int k = 0; k < d; ++k) out += "," + format_double(x[k]);
            out += "," + format_double(vg.node_value(i, j));
            out += "," + (i < vg.slice_count() - 1 ? std::to_string(vg.greedy_action(i, j)) : std::string("-1"));
            out += "\n";
        }
    }
    return out;
}

inline nlohmann::json scenario_to_json(const LevyNoiseScenario& sc) {
    nlohmann::json rec;
    rec["seed"] = sc.seed;
    rec["path_index"] = sc.path_index;
    rec["m"] = sc.level;
    nlohmann::json jumps = nlohmann::json::array();
    for (const JumpEvent& e : sc.jumps) {
        nlohmann::json j;
        j["t"] = e.time;
        j["mark"] = e.mark;
        j["region"] = e.region == JumpRegion::small ? "small" : "large";
        jumps.push_back(std::move(j));
    }
    rec["jumps"] = std::move(jumps);
    return rec;
}

inline nlohmann::json report_to_json(const RegularityReport& rep) {
    nlohmann::json j;
    j["test"] = rep.test_name;
    j["statistic"] = rep.statistic;
    j["threshold"] = rep.threshold;
    j["pass"] = rep.pass;
    j["samples"] = rep.sample_count;
    j["config"] = rep.config_snapshot;
    nlohmann::json details;
    for (const auto& [key, value] : rep.details) details[key] = value;
    j["details"] = std::move(details);
    return j;
}

inline std::string jsonl(const std::vector<nlohmann::json>& records) {
    std::string out;
    for (const nlohmann::json& r : records) out += r.dump() + "\n";
    return out;
}

}  // namespace jumpflow
