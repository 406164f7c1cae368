#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <jumpflow/costs.hpp>
#include <jumpflow/regularity.hpp>
#include <jumpflow/value.hpp>

#include <cmath>

using namespace jumpflow;

namespace {

NoiseSetup setup2(double lambda0, double lambda1, int level) {
    NoiseSetup n;
    n.measure.mark_dim = 2;
    n.measure.small_intensity = lambda0;
    n.measure.large_intensity = lambda1;
    n.measure.small_mark_dist = make_mark_distribution("uniform_ball", {{"radius", 1.0}}, 2);
    n.measure.large_mark_dist = make_mark_distribution("uniform_shell", {{"inner", 1.0}, {"outer", 2.0}}, 2);
    n.horizon = 1.0;
    n.level = level;
    n.brownian_dim = 2;
    return n;
}

}  // namespace

TEST_CASE("planar jump-sum oracle is bit-exact per component") {
    Dims dims;
    dims.state = 2;
    dims.brownian = 2;
    dims.mark = 2;
    const CoefficientSet jl = make_coefficients("jump-linear", {{"f_scale", 1.0}}, dims);
    const NoiseSetup noise = setup2(0.0, 2.0, 4);
    for (int p = 0; p < 500; ++p) {
        const LevyNoiseScenario sc = noise.scenario(61, p);
        const CadlagPath path = integrate(jl, 0.0, {0.5, -0.25}, ControlInput::none(), sc);
        double o0 = 0.5, o1 = -0.25;
        for (const JumpEvent& e : sc.jumps)
            if (e.region == JumpRegion::large) {
                o0 += e.mark[0];
                o1 += e.mark[1];
            }
        CHECK(path.end_value()[0] == o0);
        CHECK(path.end_value()[1] == o1);
    }
}

TEST_CASE("planar mean reversion matches the componentwise closed form") {
    Dims dims;
    dims.state = 2;
    dims.brownian = 2;
    dims.mark = 2;
    const CoefficientSet ou = make_coefficients("ornstein-uhlenbeck", {{"theta", 1.0}, {"sigma", 0.5}}, dims);
    const NoiseSetup noise = setup2(0.0, 1e-4, 7);
    const Vec x0{2.0, -1.0};
    MeanVar m0, m1;
    const int n = 4000;
    for (int p = 0; p < n; ++p) {
        const LevyNoiseScenario sc = noise.scenario(62, p);
        const CadlagPath path = integrate(ou, 0.0, x0, ControlInput::none(), sc);
        m0.add(path.end_value()[0]);
        m1.add(path.end_value()[1]);
    }
    const double dt = noise.grid_step();
    CHECK(std::abs(m0.mean() - x0[0] * std::exp(-1.0)) <= 3.0 * m0.stderr_mean() + 5.0 * dt);
    CHECK(std::abs(m1.mean() - x0[1] * std::exp(-1.0)) <= 3.0 * m1.stderr_mean() + 5.0 * dt);
}

TEST_CASE("planar flow property is exact with jumps and diffusion") {
    Dims dims;
    dims.state = 2;
    dims.brownian = 2;
    dims.mark = 2;
    const CoefficientSet jl = make_coefficients(
        "jump-linear", {{"mu", -0.5}, {"sigma", 0.6}, {"gamma_x", 0.2}, {"gamma_z", 0.4}, {"f_scale", 1.0}}, dims);
    const NoiseSetup noise = setup2(2.0, 1.5, 5);
    const RegularityReport rep = check_flow_property(jl, noise, 0.0, 0.5, 1.0,
                                                     {{1.0, 1.0}, {-1.0, 0.5}, {0.0, 0.0}},
                                                     ControlInput::none(), 300, 63);
    CHECK(rep.statistic == 0.0);
    CHECK(rep.pass);
}

TEST_CASE("2d state grid reproduces bilinear functions exactly") {
    const StateGrid grid({-1.0, 0.0}, {1.0, 2.0}, {5, 9});
    std::vector<double> values(grid.point_count());
    Vec pt(2);
    auto f = [](double x, double y) { return 2.0 + 3.0 * x - 0.5 * y + 0.25 * x * y; };
    for (std::int64_t j = 0; j < grid.point_count(); ++j) {
        grid.point(j, pt.data());
        values[j] = f(pt[0], pt[1]);
    }
    CounterRng rng(64, 0, StreamTag::general);
    for (int i = 0; i < 200; ++i) {
        const double x = -1.0 + 2.0 * rng.uniform();
        const double y = 2.0 * rng.uniform();
        const Vec q{x, y};
        CHECK(grid.interpolate(values.data(), q.data()) == doctest::Approx(f(x, y)).epsilon(1e-12));
    }
    // clamped queries count and evaluate at the nearest face
    std::uint64_t clamps = 0;
    const Vec outside{5.0, -3.0};
    CHECK(grid.interpolate(values.data(), outside.data(), &clamps) == doctest::Approx(f(1.0, 0.0)).epsilon(1e-12));
    CHECK(clamps == 2);
}

TEST_CASE("nearest grid point resolves ties to the lower index") {
    const StateGrid grid({0.0}, {1.0}, {3});  // points 0, 0.5, 1
    CHECK(grid.nearest_index(Vec{0.25}.data()) == 0);  // exactly between 0 and 0.5
    CHECK(grid.nearest_index(Vec{0.26}.data()) == 1);
    CHECK(grid.nearest_index(Vec{0.75}.data()) == 1);  // tie again
    CHECK(grid.nearest_index(Vec{2.0}.data()) == 2);   // clamped
}

TEST_CASE("planar controlled drift solves to the separable closed form") {
    Dims dims;
    dims.state = 2;
    dims.brownian = 2;
    dims.mark = 2;
    dims.control = 2;
    const CoefficientSet cd = make_coefficients("controlled-drift", {}, dims);
    const NoiseSetup noise = setup2(0.0, 1e-4, 5);
    ActionSet actions;
    actions.actions = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
    CostSet cs;
    cs.running = make_running_cost("zero", {}, 2, 2);
    cs.terminal = make_terminal_cost("linear", {{"w", 1.0}}, 2);
    SolveOptions opts;
    opts.inner_scenarios = 4;
    opts.seed = 65;
    const ValueGrid vg = solve_value(cd, noise, cs, actions, StateGrid({-2.0, -2.0}, {3.0, 3.0}, {26, 26}), 2, opts);
    // v(s, x) = x0 + x1 + 2 (T - s) away from the top faces
    for (double s : {0.0, 0.25, 0.5})
        for (double x : {-1.0, 0.0, 0.5}) {
            const Vec q{x, x};
            CHECK(vg.value_at(s, q.data()) == doctest::Approx(2.0 * x + 2.0 * (1.0 - s)).epsilon(1e-9));
        }
    const EnumerationResult res = enumerate_value(cd, noise, 0.5, {0.0, 0.0}, cs, actions, 1, 20, 66);
    CHECK(res.best.estimate == doctest::Approx(1.0).epsilon(1e-12));  // both components pushed
}

TEST_CASE("feedback policies steer the integrator") {
    Dims dims;
    dims.control = 1;
    const CoefficientSet cd = make_coefficients("controlled-drift", {}, dims);
    NoiseSetup noise;
    noise.measure.mark_dim = 1;
    noise.measure.small_intensity = 0.0;
    noise.measure.large_intensity = 1e-4;
    noise.measure.small_mark_dist = make_mark_distribution("uniform_ball", {}, 1);
    noise.measure.large_mark_dist = make_mark_distribution("uniform_shell", {}, 1);
    noise.horizon = 1.0;
    noise.level = 5;
    noise.brownian_dim = 1;
    ActionSet actions;
    actions.actions = {{0.0}, {1.0}};
    CostSet cs;
    cs.running = make_running_cost("zero", {}, 1, 1);
    cs.terminal = make_terminal_cost("linear", {}, 1);
    SolveOptions opts;
    opts.inner_scenarios = 4;
    opts.seed = 67;
    const ValueGrid vg = solve_value(cd, noise, cs, actions, StateGrid({-2.0}, {3.0}, {51}), 3, opts);
    const FeedbackPolicy greedy = vg.greedy_policy();
    const LevyNoiseScenario sc = noise.scenario(68, 0);
    const CadlagPath path = integrate(cd, 0.0, {0.0}, ControlInput::policy(actions, greedy), sc);
    // the greedy policy pushes everywhere in the interior: X_T = x + T
    CHECK(path.end_value()[0] == doctest::Approx(1.0).epsilon(1e-9));
    for (int i = 0; i < path.node_count(); ++i)
        CHECK(path.action(i)[0] == 1.0);
}
