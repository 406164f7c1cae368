#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <jumpflow/regularity.hpp>

#include <cmath>

using namespace jumpflow;

namespace {

NoiseSetup setup(double lambda0, double lambda1, int level, double horizon = 1.0) {
    NoiseSetup n;
    n.measure.mark_dim = 1;
    n.measure.small_intensity = lambda0;
    n.measure.large_intensity = lambda1;
    n.measure.small_mark_dist = make_mark_distribution("uniform_ball", {{"radius", 1.0}}, 1);
    n.measure.large_mark_dist = make_mark_distribution("uniform_shell", {{"inner", 1.0}, {"outer", 2.0}}, 1);
    n.horizon = horizon;
    n.level = level;
    n.brownian_dim = 1;
    return n;
}

}  // namespace

TEST_CASE("flow property holds exactly for drift-only dynamics") {
    const CoefficientSet drift = make_coefficients("affine", {{"c", 1.0}}, Dims{});
    const NoiseSetup noise = setup(0.0, 1.0, 5);
    const RegularityReport rep = check_flow_property(drift, noise, 0.0, 0.25, 1.0, {{0.0}, {2.0}},
                                                     ControlInput::none(), 50, 3);
    CHECK(rep.statistic == 0.0);
    CHECK(rep.pass);
}

TEST_CASE("flow property is bit-exact for a jump-diffusion model") {
    Dims dims;
    const CoefficientSet jl = make_coefficients(
        "jump-linear", {{"mu", -1.0}, {"sigma", 0.7}, {"gamma_z", 0.5}, {"f_scale", 1.0}}, dims);
    const NoiseSetup noise = setup(2.0, 1.5, 5);
    const std::vector<Vec> xs = {{-2.0}, {-1.0}, {0.0}, {1.0}, {2.0}};
    const RegularityReport rep = check_flow_property(jl, noise, 0.0, 0.5, 1.0, xs, ControlInput::none(), 1000, 4);
    CHECK(rep.statistic == 0.0);
    CHECK(rep.pass);
}

TEST_CASE("perturbed restarts are detected (negative control)") {
    Dims dims;
    const CoefficientSet ou = make_coefficients("ornstein-uhlenbeck", {}, dims);
    const NoiseSetup noise = setup(0.0, 1.0, 5);
    FlowCheckOptions opts;
    opts.restart_perturbation = 1e-6;
    const RegularityReport rep = check_flow_property(ou, noise, 0.0, 0.5, 1.0, {{1.0}}, ControlInput::none(), 20, 5, opts);
    CHECK(rep.statistic > 0.0);
    CHECK(!rep.pass);
}

TEST_CASE("reports are reproducible bit for bit") {
    Dims dims;
    const CoefficientSet ou = make_coefficients("ornstein-uhlenbeck", {}, dims);
    const NoiseSetup noise = setup(1.0, 1.0, 6);
    LipschitzMomentOptions opts;
    const RegularityReport a = estimate_lipschitz_moment(ou, noise, 0.0, {0.0}, {1.0}, 2.0,
                                                         ControlInput::none(), 200, 7, opts);
    const RegularityReport b = estimate_lipschitz_moment(ou, noise, 0.0, {0.0}, {1.0}, 2.0,
                                                         ControlInput::none(), 200, 7, opts);
    CHECK(a.statistic == b.statistic);
    opts.threads = 3;
    const RegularityReport c = estimate_lipschitz_moment(ou, noise, 0.0, {0.0}, {1.0}, 2.0,
                                                         ControlInput::none(), 200, 7, opts);
    CHECK(a.statistic == c.statistic);
}

TEST_CASE("lipschitz moment ratio is exactly one for constant coefficients") {
    const CoefficientSet constant = make_coefficients("affine", {{"c", 1.0}, {"sigma", 0.3}}, Dims{});
    const NoiseSetup noise = setup(0.0, 1.0, 5);
    const RegularityReport rep = estimate_lipschitz_moment(constant, noise, 0.0, {0.0}, {1.5}, 2.0,
                                                           ControlInput::none(), 100, 8);
    for (const auto& [key, value] : rep.details)
        if (key.rfind("ratio_", 0) == 0) CHECK(value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.pass);
}

TEST_CASE("lipschitz moment ratio stays one for the linear model") {
    Dims dims;
    const CoefficientSet lin = make_coefficients("ornstein-uhlenbeck", {{"theta", 1.0}, {"sigma", 0.5}}, dims);
    const NoiseSetup noise = setup(0.0, 1.0, 6);
    const RegularityReport rep = estimate_lipschitz_moment(lin, noise, 0.0, {0.0}, {1.0}, 2.0,
                                                           ControlInput::none(), 100, 9);
    CHECK(rep.statistic == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.pass);
}

TEST_CASE("controlled bilinear drift obeys the Gronwall envelope") {
    Dims dims;
    dims.control = 1;
    const CoefficientSet bil = make_coefficients("bilinear-drift", {}, dims);
    ActionSet actions;
    actions.actions = {{1.0}};
    const SimpleControl full = SimpleControl::constant(0, 0);
    const NoiseSetup noise = setup(0.0, 1.0, 8);
    for (double p : {2.0, 4.0}) {
        const RegularityReport rep = estimate_lipschitz_moment(bil, noise, 0.0, {0.0}, {1.0}, p,
                                                               ControlInput::open_loop(actions, full), 50, 10);
        const double envelope = std::exp(p * noise.horizon);
        CHECK(rep.statistic <= envelope);
        CHECK(rep.statistic >= 0.9 * envelope);
        CHECK(rep.pass);
    }
}

TEST_CASE("lipschitz moment argument errors") {
    Dims dims;
    const CoefficientSet ou = make_coefficients("ornstein-uhlenbeck", {}, dims);
    const NoiseSetup noise = setup(0.0, 1.0, 4);
    CHECK_THROWS_AS(estimate_lipschitz_moment(ou, noise, 0.0, {0.0}, {1.0}, 1.5, ControlInput::none(), 10, 0),
                    argument_error);
    const CoefficientSet with_f = make_coefficients("jump-linear", {{"f_scale", 1.0}}, dims);
    CHECK_THROWS_AS(estimate_lipschitz_moment(with_f, noise, 0.0, {0.0}, {1.0}, 2.0, ControlInput::none(), 10, 0),
                    argument_error);
    LipschitzMomentOptions allow;
    allow.allow_large_jumps = true;
    CHECK_NOTHROW(estimate_lipschitz_moment(with_f, noise, 0.0, {0.0}, {1.0}, 2.0, ControlInput::none(), 10, 0, allow));
}

TEST_CASE("stochastic continuity is an indicator for pure drift") {
    const CoefficientSet drift = make_coefficients("affine", {{"c", 1.0}}, Dims{});
    const NoiseSetup noise = setup(0.0, 1e-4, 6);
    // sup |X^{r,x} - X^{s,x}| = |r - s| exactly: offsets above epsilon read 1.
    const RegularityReport rep = estimate_stochastic_continuity(drift, noise, 0.25, 1.0, 0.1,
                                                                {0.25, 0.125, 0.0625}, ControlInput::none(), 40, 11);
    for (const auto& [key, value] : rep.details) {
        if (key.find("offset_0.25") != std::string::npos) CHECK(value == 1.0);
        if (key.find("offset_0.125") != std::string::npos) CHECK(value == 1.0);
        if (key.find("offset_0.0625") != std::string::npos) CHECK(value == 0.0);
    }
    CHECK(rep.pass);
}

TEST_CASE("stochastic continuity vanishes for frozen dynamics") {
    const CoefficientSet zero = make_coefficients("affine", {}, Dims{});
    const NoiseSetup noise = setup(1.0, 1.0, 6);
    const RegularityReport rep = estimate_stochastic_continuity(zero, noise, 0.25, 1.0, 0.5,
                                                                {0.125, 0.0625}, ControlInput::none(), 40, 12);
    for (const auto& [key, value] : rep.details) {
        (void)key;
        CHECK(value == 0.0);
    }
    CHECK(rep.pass);
}

TEST_CASE("stochastic continuity matches the jump-gap law") {
    // Pure large-jump dynamics: a discrepancy appears iff a large jump lands
    // in the gap, so the estimate equals 1 - e^{-lambda * offset}.
    Dims dims;
    const CoefficientSet jl = make_coefficients("jump-linear", {{"f_scale", 1.0}}, dims);
    const NoiseSetup noise = setup(0.0, 1.0, 6);
    const double dt = noise.grid_step();
    const std::vector<double> offsets = {8 * dt, 4 * dt, 2 * dt};
    const std::int64_t n = 4000;
    const RegularityReport rep = estimate_stochastic_continuity(jl, noise, 0.25, 1.0, 0.5, offsets,
                                                                ControlInput::none(), n, 13);
    CHECK(rep.pass);
    for (double off : offsets) {
        const double oracle = 1.0 - std::exp(-off);
        for (const auto& [key, value] : rep.details) {
            if (key.find("offset_" + std::to_string(off)) != std::string::npos)
                CHECK(std::abs(value - oracle) <= 3.0 * binomial_stderr(oracle, n));
        }
    }
}

TEST_CASE("offsets below the grid are rejected") {
    const CoefficientSet zero = make_coefficients("affine", {}, Dims{});
    const NoiseSetup noise = setup(0.0, 1.0, 4);
    CHECK_THROWS_AS(estimate_stochastic_continuity(zero, noise, 0.25, 1.0, 0.5, {0.01}, ControlInput::none(), 5, 0),
                    argument_error);
}

TEST_CASE("cadlag exponent: drift-only slope is 2q") {
    const CoefficientSet drift = make_coefficients("affine", {{"c", 1.0}}, Dims{});
    const NoiseSetup noise = setup(0.0, 1e-4, 9);
    CadlagExponentOptions opts;
    opts.rho_min_factor = 2.0;
    const RegularityReport rep = estimate_cadlag_exponent(drift, noise, {{0.0}}, 1.0, 400, 3, 14, opts);
    double slope = 0.0;
    for (const auto& [key, value] : rep.details)
        if (key == "slope") slope = value;
    CHECK(slope == doctest::Approx(2.0).epsilon(0.15));
    CHECK(rep.pass);
}

TEST_CASE("cadlag exponent: frozen dynamics degenerate-pass") {
    const CoefficientSet zero = make_coefficients("affine", {}, Dims{});
    const NoiseSetup noise = setup(0.0, 1e-4, 9);
    CadlagExponentOptions opts;
    opts.rho_min_factor = 2.0;
    const RegularityReport rep = estimate_cadlag_exponent(zero, noise, {{1.0}}, 1.0, 100, 3, 15, opts);
    CHECK(rep.pass);
    bool degenerate = false;
    for (const auto& [key, value] : rep.details) degenerate |= key == "degenerate" && value == 1.0;
    CHECK(degenerate);
}

TEST_CASE("cadlag exponent: small-jump mean-reverting flow has slope above one") {
    Dims dims;
    const CoefficientSet sj = make_coefficients("jump-linear", {{"mu", -1.0}, {"gamma_z", 1.0}}, dims);
    const NoiseSetup noise = setup(2.0, 1e-4, 9);
    CadlagExponentOptions opts;
    opts.rho_min_factor = 2.0;
    const RegularityReport rep = estimate_cadlag_exponent(sj, noise, {{-1.0}, {0.0}, {1.0}}, 1.0, 400, 30, 16, opts);
    CHECK(rep.pass);  // slope - 2 stderr > 1
}

TEST_CASE("flow property holds exactly across randomized catalog models") {
    // hand-rolled generator: random catalog entry, parameters, intensities,
    // grid level and restart triple; the statistic must be exactly zero.
    CounterRng gen(12345, 0, StreamTag::general);
    for (int trial = 0; trial < 12; ++trial) {
        const int level = 4 + static_cast<int>(gen.uniform() * 3.0);  // 4..6
        const NoiseSetup noise = setup(2.0 * gen.uniform(), 0.5 + 2.0 * gen.uniform(), level);
        const int pick = static_cast<int>(gen.uniform() * 4.0);
        CoefficientSet coeffs;
        switch (pick) {
            case 0:
                coeffs = make_coefficients(
                    "affine", {{"a_scale", -gen.uniform()}, {"c", gen.uniform()}, {"sigma", gen.uniform()}}, Dims{});
                break;
            case 1:
                coeffs = make_coefficients(
                    "ornstein-uhlenbeck", {{"theta", 0.5 + gen.uniform()}, {"sigma", gen.uniform()}}, Dims{});
                break;
            case 2:
                coeffs = make_coefficients("geometric-like",
                                           {{"mu", 0.2 * gen.uniform()}, {"sigma_rel", 0.3 * gen.uniform()},
                                            {"box_lo", -8.0}, {"box_hi", 8.0}},
                                           Dims{});
                break;
            default:
                coeffs = make_coefficients("jump-linear",
                                           {{"mu", -gen.uniform()}, {"sigma", gen.uniform()},
                                            {"gamma_x", 0.3 * gen.uniform()}, {"gamma_z", gen.uniform()},
                                            {"f_scale", gen.uniform() < 0.5 ? 0.0 : 1.0}},
                                           Dims{});
                break;
        }
        const int cells = 1 << level;
        const int iu = 1 + static_cast<int>(gen.uniform() * (cells - 2));
        const int it = iu + 1 + static_cast<int>(gen.uniform() * (cells - iu - 1));
        const RegularityReport rep =
            check_flow_property(coeffs, noise, 0.0, static_cast<double>(iu) / cells,
                                static_cast<double>(it) / cells, {{-1.0}, {0.5}}, ControlInput::none(), 25,
                                9000 + trial);
        CHECK(rep.statistic == 0.0);
    }
}

TEST_CASE("cadlag exponent preconditions") {
    const CoefficientSet zero = make_coefficients("affine", {}, Dims{});
    const NoiseSetup coarse = setup(0.0, 1.0, 6);
    CHECK_THROWS_AS(estimate_cadlag_exponent(zero, coarse, {{0.0}}, 1.0, 10, 2, 0), argument_error);  // < 2 decades
    const NoiseSetup fine = setup(0.0, 1.0, 9);
    CHECK_THROWS_AS(estimate_cadlag_exponent(zero, fine, {{0.0}}, 0.4, 10, 2, 0), argument_error);  // q too small
}
