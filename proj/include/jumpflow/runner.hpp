#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "io.hpp"
#include "regularity.hpp"
#include "value.hpp"

namespace jumpflow {

struct RunnerOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<int> threads_override;
    std::optional<std::string> out_dir_override;
    std::ostream* log = &std::cout;
};

namespace detail {

struct RunContext {
    ExperimentConfig cfg;
    std::uint64_t seed = 0;
    int threads = 0;
    std::filesystem::path out_dir;
    std::vector<std::string> artifacts;
    std::ostream* log = nullptr;

    void write_artifact(const std::string& name, const std::string& content) {
        atomic_write_file(out_dir / name, content);
        artifacts.push_back(name);
    }

    void finish() {
        nlohmann::json manifest;
        char hash_hex[20];
        std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                      static_cast<unsigned long long>(cfg.semantic_hash()));
        manifest["config_hash"] = hash_hex;
        manifest["seed"] = seed;
        manifest["version"] = library_version;
        manifest["artifacts"] = artifacts;
        atomic_write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
        // Timestamps stay out of the manifest so reruns are byte-identical.
        const auto now = std::chrono::system_clock::now().time_since_epoch();
        atomic_write_file(out_dir / "run_stamp.txt",
                          std::to_string(std::chrono::duration_cast<std::chrono::seconds>(now).count()) + "\n");
    }
};

inline RunContext make_context(const RunnerOptions& opts) {
    RunContext ctx;
    ctx.cfg = ExperimentConfig::parse_file(opts.config_path);
    ctx.cfg.validate();
    ctx.seed = opts.seed_override.value_or(ctx.cfg.seed());
    ctx.threads = opts.threads_override.value_or(ctx.cfg.threads());
    std::string out = ctx.cfg.get_string("run", "out_dir", "out");
    if (const char* env = std::getenv("JUMPFLOW_OUT"); env && *env) out = env;
    if (opts.out_dir_override) out = *opts.out_dir_override;
    ctx.out_dir = out;
    ctx.log = opts.log;
    return ctx;
}

inline void log_report(RunContext& ctx, const RegularityReport& rep) {
    (*ctx.log) << (rep.pass ? "[PASS] " : "[FAIL] ") << rep.test_name << "  statistic=" << rep.statistic
               << " threshold=" << rep.threshold << "  (" << rep.config_snapshot << ")\n";
}

inline int run_probe(RunContext& ctx) {
    const CoefficientSet coeffs = ctx.cfg.coefficients();
    const NoiseSetup noise = ctx.cfg.noise_setup();
    const StateGrid grid = ctx.cfg.state_grid();
    Vec lo = ctx.cfg.get_reals("run", "probe_lo"), hi = ctx.cfg.get_reals("run", "probe_hi");
    if (lo.empty() || hi.empty()) {
        lo.clear();
        hi.clear();
        for (const auto& ax : grid.axes) {
            lo.push_back(ax.lo);
            hi.push_back(ax.hi);
        }
    }
    ProbeOptions popts;
    popts.time_horizon = noise.horizon;
    if (noise.measure.small_intensity > 0.0) {
        CounterRng rng(ctx.seed, 0, StreamTag::quadrature);
        popts.small_marks = quadrature_marks(noise.measure.small_mark_dist, 64, rng);
    }
    {
        CounterRng rng(ctx.seed, 1, StreamTag::quadrature);
        for (int i = 0; i < 64; ++i)
            popts.large_marks.push_back(
                detail::sample_mark_in_region(noise.measure.large_mark_dist, JumpRegion::large, rng));
    }
    const long samples = static_cast<long>(ctx.cfg.get_int("run", "probe_samples", 10000));
    const HypothesisProbeReport rep = probe_hypotheses(coeffs, lo, hi, samples, ctx.seed, popts);

    // The hypothesis covers drift, diffusion and the small-jump map; the
    // large-jump estimate is informational only.
    const double slack = 1.0 + 1e-9;
    bool pass = true;
    for (const char* key : {"drift", "diffusion", "small_jump"})
        if (rep.estimated_lipschitz_x.at(key) > coeffs.declared_lipschitz * slack + 1e-12) pass = false;

    nlohmann::json j;
    j["catalog"] = coeffs.catalog_id;
    j["declared_lipschitz"] = coeffs.declared_lipschitz;
    j["declared_growth"] = coeffs.declared_growth;
    j["estimated_lipschitz_x"] = rep.estimated_lipschitz_x;
    j["estimated_lipschitz_a"] = rep.estimated_lipschitz_a;
    j["estimated_growth"] = rep.estimated_growth;
    j["sample_count"] = rep.sample_count;
    j["box_lo"] = rep.box_lo;
    j["box_hi"] = rep.box_hi;
    j["pass"] = pass;
    ctx.write_artifact("probe_report.jsonl", jsonl({j}));
    (*ctx.log) << (pass ? "[PASS] " : "[FAIL] ") << "probe  lipschitz_x(drift)=" << rep.estimated_lipschitz_x.at("drift")
               << " declared=" << coeffs.declared_lipschitz << "\n";
    ctx.finish();
    return pass ? 0 : 1;
}

inline int run_simulate(RunContext& ctx) {
    const CoefficientSet coeffs = ctx.cfg.coefficients();
    const NoiseSetup noise = ctx.cfg.noise_setup();
    const double s = ctx.cfg.get_real("run", "sim_s", 0.0);
    Vec x = ctx.cfg.get_vectors("run", "sim_x", {Vec(coeffs.dims.state, 0.0)}).front();
    const int n_paths = static_cast<int>(ctx.cfg.get_int("run", "dump_paths", 1));
    const int n_scen = static_cast<int>(ctx.cfg.get_int("run", "dump_scenarios", 1));

    std::vector<nlohmann::json> scen_records;
    for (int p = 0; p < std::max(n_paths, n_scen); ++p) {
        const LevyNoiseScenario sc = noise.scenario(ctx.seed, static_cast<std::uint64_t>(p));
        if (p < n_scen) scen_records.push_back(scenario_to_json(sc));
        if (p < n_paths) {
            const CadlagPath path = integrate(coeffs, s, x, ControlInput::none(), sc);
            ctx.write_artifact("path_" + std::to_string(p) + ".csv", path_to_csv(path));
        }
    }
    if (!scen_records.empty()) ctx.write_artifact("scenarios.jsonl", jsonl(scen_records));

    // Flow-field slice over the configured start times and states, scenario 0.
    if (ctx.cfg.has("run", "s_values") && ctx.cfg.has("run", "x_values")) {
        const std::vector<double> s_list = ctx.cfg.get_reals("run", "s_values");
        const std::vector<Vec> x_list = ctx.cfg.get_vectors("run", "x_values");
        std::vector<double> t_list;
        const int step = std::max(1, (1 << noise.level) >> 4);
        for (int k = 0; k <= (1 << noise.level); k += step) t_list.push_back(noise.horizon * k / (1 << noise.level));
        const FlowField field = evaluate_flow_field(coeffs, s_list, x_list, t_list, ControlInput::none(),
                                                    noise.scenario(ctx.seed, 0));
        ctx.write_artifact("flow_field.csv", flow_field_to_csv(field));
    }
    (*ctx.log) << "[PASS] simulate  wrote " << n_paths << " path(s)\n";
    ctx.finish();
    return 0;
}

inline int run_flow_check(RunContext& ctx) {
    const CoefficientSet coeffs = ctx.cfg.coefficients();
    const NoiseSetup noise = ctx.cfg.noise_setup();
    const std::vector<Vec> x_values = ctx.cfg.get_vectors("run", "x_values", {Vec(coeffs.dims.state, 0.0)});
    const std::vector<Vec> triples = ctx.cfg.get_vectors("run", "flow_triples",
                                                         {{0.0, noise.horizon * 0.25, noise.horizon}});
    const std::int64_t scenarios = ctx.cfg.get_int("run", "scenarios", 100);

    std::vector<nlohmann::json> records;
    bool all_pass = true;
    FlowCheckOptions fopts;
    fopts.threads = ctx.threads;
    for (const Vec& tri : triples) {
        if (tri.size() != 3) throw config_error("config: run.flow_triples entries must be s,u,t");
        const RegularityReport rep = check_flow_property(coeffs, noise, tri[0], tri[1], tri[2], x_values,
                                                         ControlInput::none(), scenarios, ctx.seed, fopts);
        log_report(ctx, rep);
        records.push_back(report_to_json(rep));
        all_pass = all_pass && rep.pass;
    }
    ctx.write_artifact("flow_reports.jsonl", jsonl(records));
    ctx.finish();
    return all_pass ? 0 : 1;
}

inline int run_regularity(RunContext& ctx) {
    const CoefficientSet coeffs = ctx.cfg.coefficients();
    const NoiseSetup noise = ctx.cfg.noise_setup();
    const std::int64_t scenarios = ctx.cfg.get_int("run", "scenarios", 200);
    std::vector<nlohmann::json> records;
    bool all_pass = true;

    // Lipschitz moment stability.
    const Vec lip_x = ctx.cfg.get_vectors("run", "lip_x", {Vec(coeffs.dims.state, 0.0)}).front();
    Vec lip_y_default(coeffs.dims.state, 0.0);
    lip_y_default[0] = 1.0;
    const Vec lip_y = ctx.cfg.get_vectors("run", "lip_y", {lip_y_default}).front();
    LipschitzMomentOptions lopts;
    lopts.threads = ctx.threads;
    lopts.allow_large_jumps = coeffs.has_large_jump();
    for (double p : ctx.cfg.get_reals("run", "lip_p", {2.0})) {
        const RegularityReport rep = estimate_lipschitz_moment(coeffs, noise, 0.0, lip_x, lip_y, p,
                                                               ControlInput::none(), scenarios, ctx.seed, lopts);
        log_report(ctx, rep);
        records.push_back(report_to_json(rep));
        all_pass = all_pass && rep.pass;
    }

    // Stochastic continuity in the start time.
    {
        StochasticContinuityOptions sopts;
        sopts.threads = ctx.threads;
        sopts.lattice_points_per_dim = static_cast<int>(ctx.cfg.get_int("run", "lattice_points", 5));
        const double dt = noise.grid_step();
        const std::vector<double> offsets = ctx.cfg.get_reals("run", "offsets", {8 * dt, 4 * dt, 2 * dt, dt});
        const RegularityReport rep = estimate_stochastic_continuity(
            coeffs, noise, ctx.cfg.get_reals("run", "s_values", {noise.horizon * 0.25}).front(),
            ctx.cfg.get_real("run", "lattice_radius", 1.0), ctx.cfg.get_real("run", "epsilon", 0.5), offsets,
            ControlInput::none(), scenarios, ctx.seed, sopts);
        log_report(ctx, rep);
        records.push_back(report_to_json(rep));
        all_pass = all_pass && rep.pass;
    }

    // Cadlag three-point exponent.
    {
        CadlagExponentOptions copts;
        copts.threads = ctx.threads;
        std::vector<Vec> lattice;
        const double radius = ctx.cfg.get_real("run", "lattice_radius", 1.0);
        for (double c : {-radius, 0.0, radius}) lattice.push_back(Vec(coeffs.dims.state, c));
        const RegularityReport rep = estimate_cadlag_exponent(
            coeffs, noise, lattice, ctx.cfg.get_real("run", "cadlag_q", 1.0),
            ctx.cfg.get_int("run", "cadlag_triples", 2000),
            ctx.cfg.get_int("run", "cadlag_scenarios", std::min<std::int64_t>(scenarios, 100)), ctx.seed, copts);
        log_report(ctx, rep);
        records.push_back(report_to_json(rep));
        all_pass = all_pass && rep.pass;
    }

    ctx.write_artifact("regularity_reports.jsonl", jsonl(records));
    ctx.finish();
    return all_pass ? 0 : 1;
}

inline int run_solve(RunContext& ctx) {
    const CoefficientSet coeffs = ctx.cfg.coefficients();
    const NoiseSetup noise = ctx.cfg.noise_setup();
    const CostSet costs = ctx.cfg.costs();
    const ActionSet actions = ctx.cfg.actions();
    SolveOptions sopts;
    sopts.inner_scenarios = static_cast<int>(ctx.cfg.get_int("run", "inner_scenarios", 200));
    sopts.seed = ctx.seed;
    sopts.threads = ctx.threads;
    const ValueGrid vg = solve_value(coeffs, noise, costs, actions, ctx.cfg.state_grid(), ctx.cfg.dyadic_level(), sopts);
    ctx.write_artifact("value_grid.csv", value_grid_to_csv(vg));

    // Lower-semicontinuity spot check at the interior of the grid.
    Vec target(coeffs.dims.state);
    for (int i = 0; i < coeffs.dims.state; ++i)
        target[i] = 0.5 * (vg.grid.axes[i].lo + vg.grid.axes[i].hi);
    const RegularityReport lsc = lsc_spot_check(vg, 0.5 * noise.horizon, target, 6, derive_seed(ctx.seed, 99));
    log_report(ctx, lsc);
    nlohmann::json j = report_to_json(lsc);
    j["interp_clamp_count"] = vg.interp_clamp_count;
    j["interpolation_modulus"] = vg.interpolation_modulus();
    ctx.write_artifact("solve_report.jsonl", jsonl({j}));
    (*ctx.log) << "[" << (lsc.pass ? "PASS" : "FAIL") << "] solve  nodes=" << vg.values.size()
               << " interp_clamps=" << vg.interp_clamp_count << "\n";
    ctx.finish();
    return lsc.pass ? 0 : 1;
}

inline int run_dpp_check(RunContext& ctx) {
    const CoefficientSet coeffs = ctx.cfg.coefficients();
    const NoiseSetup noise = ctx.cfg.noise_setup();
    const CostSet costs = ctx.cfg.costs();
    const ActionSet actions = ctx.cfg.actions();
    SolveOptions sopts;
    sopts.inner_scenarios = static_cast<int>(ctx.cfg.get_int("run", "inner_scenarios", 200));
    sopts.seed = ctx.seed;
    sopts.threads = ctx.threads;
    const ValueGrid vg = solve_value(coeffs, noise, costs, actions, ctx.cfg.state_grid(), ctx.cfg.dyadic_level(), sopts);

    const std::vector<StoppingTimeSpec> thetas = ctx.cfg.stopping_specs();
    if (thetas.empty()) throw config_error("config: dpp-check needs run.dpp_theta entries");
    const std::vector<double> s_values = ctx.cfg.get_reals("run", "dpp_s", {0.0});
    const std::vector<Vec> x_values = ctx.cfg.get_vectors("run", "dpp_x", {Vec(coeffs.dims.state, 0.0)});
    const std::int64_t scenarios = ctx.cfg.get_int("run", "dpp_scenarios", ctx.cfg.get_int("run", "scenarios", 1000));

    std::vector<nlohmann::json> records;
    bool all_pass = true;
    int combo = 0;
    for (const StoppingTimeSpec& theta : thetas)
        for (double s : s_values)
            for (const Vec& x : x_values) {
                const DppResult res = dpp_residual(coeffs, noise, s, x, costs, actions, theta, vg, scenarios,
                                                   derive_seed(ctx.seed, 7000 + combo), ctx.threads);
                ++combo;
                nlohmann::json j;
                j["theta"] = res.theta;
                j["s"] = s;
                j["x"] = x;
                j["residual"] = res.residual;
                j["stderr"] = res.stderr_mean;
                j["allowance"] = res.allowance;
                j["value"] = res.value;
                j["rhs"] = res.rhs;
                j["pass"] = res.pass;
                records.push_back(std::move(j));
                all_pass = all_pass && res.pass;
                (*ctx.log) << (res.pass ? "[PASS] " : "[FAIL] ") << "dpp " << res.theta << " s=" << s
                           << " x0=" << x[0] << "  residual=" << res.residual << " (ci=" << 2.576 * res.stderr_mean
                           << "+" << res.allowance << ")\n";
            }
    ctx.write_artifact("dpp_battery.jsonl", jsonl(records));
    ctx.finish();
    return all_pass ? 0 : 1;
}

}  // namespace detail

inline const std::vector<std::string>& subcommand_names() {
    static const std::vector<std::string> names = {"simulate", "flow-check", "regularity",
                                                   "solve", "dpp-check", "probe"};
    return names;
}

/// Runs one subcommand end to end.  Exit codes: 0 all checks passed, 1 a
/// check failed or a runtime error occurred, 2 configuration error.
inline int run_subcommand(const std::string& name, const RunnerOptions& opts) {
    try {
        detail::RunContext ctx = detail::make_context(opts);
        if (name == "probe") return detail::run_probe(ctx);
        if (name == "simulate") return detail::run_simulate(ctx);
        if (name == "flow-check") return detail::run_flow_check(ctx);
        if (name == "regularity") return detail::run_regularity(ctx);
        if (name == "solve") return detail::run_solve(ctx);
        if (name == "dpp-check") return detail::run_dpp_check(ctx);
        (*opts.log) << "unknown subcommand '" << name << "'\n";
        return 2;
    } catch (const config_error& e) {
        (*opts.log) << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        (*opts.log) << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace jumpflow
