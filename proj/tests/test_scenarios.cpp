#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "csflock/diagnostics.hpp"
#include "csflock/dynamics.hpp"
#include "csflock/scenarios.hpp"

using namespace csf;

TEST_CASE("ha_closed_form") {
    SUBCASE("critical regime reference value") {
        HaScenario scn{1.0, 1.0, 1.0};
        CHECK(ha_closed_form(scn, 4.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
    SUBCASE("initial condition in every regime") {
        for (double lambda : {0.5, 1.0, 2.0}) {
            HaScenario scn{lambda, 1.0, 0.9};
            CHECK(ha_closed_form(scn, 0.0) == doctest::Approx(0.9).epsilon(1e-12));
        }
    }
    SUBCASE("weak communication settles at the balance speed") {
        HaScenario scn{0.5, 1.0, 0.9};
        CHECK(ha_closed_form(scn, 60.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    }
    SUBCASE("strong communication decays at rate lambda - sigma") {
        HaScenario scn{2.0, 1.0, 0.9};
        std::vector<std::pair<double, double>> series;
        for (int k = 0; k <= 200; ++k) {
            double t = 5.0 + 0.05 * k;
            series.emplace_back(t, ha_closed_form(scn, t));
        }
        RateFit fit = fit_rate(series, 5.0, 15.0);
        CHECK(std::abs(fit.rate - (-1.0)) <= 0.02);
    }
    SUBCASE("negative time rejected") {
        HaScenario scn{1.0, 1.0, 0.9};
        CHECK_THROWS_AS(ha_closed_form(scn, -1e-9), std::invalid_argument);
    }
    SUBCASE("invalid scenarios rejected") {
        CHECK_THROWS_AS(ha_closed_form({0.0, 1.0, 0.9}, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(ha_closed_form({1.0, 1.0, 0.0}, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(ha_closed_form({1.0, 1.0, 1.1}, 1.0), std::invalid_argument);
    }
}

TEST_CASE("ha_flock_config reproduces the scalar equation") {
    HaScenario scn{2.0, 1.0, 1.0};
    auto [state, params] = ha_flock_config(scn);
    Derivative d = rhs_full(state, params);
    CHECK(d.dv[0] == doctest::Approx(-2.0).epsilon(1e-14));  // v = 1: force term vanishes

    SUBCASE("simulation tracks the closed form") {
        HaScenario weak{0.5, 1.0, 0.9};
        auto [s0, p0] = ha_flock_config(weak);
        IntegratorSpec spec;
        spec.dt = 1e-4;
        spec.t_final = 5.0;
        spec.record_every = 200;
        ProbeSelection probes;
        probes.diagnostics = false;
        Trajectory traj = integrate(s0, p0, spec, probes);
        for (const auto& pt : traj.points) {
            double oracle = ha_closed_form(weak, pt.t);
            CHECK(std::abs(pt.state.v[0] - oracle) / oracle <= 1e-6);
        }
        // antisymmetry is exact
        for (const auto& pt : traj.points) CHECK(pt.state.v[0] == -pt.state.v[1]);
    }
}

TEST_CASE("critical-regime agents spread like sqrt(t)") {
    HaScenario scn{1.0, 1.0, 0.9};
    auto [state, params] = ha_flock_config(scn);
    IntegratorSpec spec;
    spec.dt = 1e-2;
    spec.t_final = 1e4;
    spec.record_every = 100;
    ProbeSelection probes;
    probes.diagnostics = false;
    Trajectory traj = integrate(state, params, spec, probes);

    // log-log slope of x_1(t) over t in [1e2, 1e4]
    std::vector<std::pair<double, double>> loglog;
    for (const auto& pt : traj.points)
        if (pt.t >= 100.0) loglog.emplace_back(std::log(pt.t), pt.state.x[0]);
    RateFit fit = fit_rate(loglog, std::log(100.0), std::log(1e4));
    CHECK(fit.rate >= 0.45);
    CHECK(fit.rate <= 0.55);
}

TEST_CASE("fat_tail_config preconditions") {
    SUBCASE("valid specification accepted") {
        FatTailSpec fs{1.5, 0.01, 9.0, 0.9, 0.09};
        auto [state, params] = fat_tail_config(fs);
        CHECK(state.count() == 2);
        CHECK(state.v[0] == 0.9);
        CHECK(state.v[2] == -0.9);
        CHECK(params.kernel.type == Kernel::Type::truncated_exact_power);
    }
    SUBCASE("beta must exceed one") {
        CHECK_THROWS_WITH_AS(static_cast<void>(fat_tail_config({1.0, 0.01, 9.0, 0.9, 0.09})),
                             doctest::Contains("beta > 1"), std::invalid_argument);
    }
    SUBCASE("the lower velocity barrier is enforced") {
        // 1/((beta-1) sqrt(x1)) = 2 at x1 = 1, which exceeds v1 = 0.9
        CHECK_THROWS_WITH_AS(static_cast<void>(fat_tail_config({1.5, 0.01, 1.0, 0.9, 0.09})),
                             doctest::Contains("x1_0^{1-beta}/(beta-1)"), std::invalid_argument);
    }
    SUBCASE("agents must start in the power-law regime") {
        CHECK_THROWS_WITH_AS(static_cast<void>(fat_tail_config({1.5, 5.0, 9.0, 0.9, 0.09})),
                             doctest::Contains("x1_0 > 2 r0"), std::invalid_argument);
    }
    SUBCASE("speed below one") {
        CHECK_THROWS_WITH_AS(static_cast<void>(fat_tail_config({1.5, 0.01, 9.0, 0.9, 0.7})),
                             doctest::Contains("|v'(0)| < 1"), std::invalid_argument);
    }
}

TEST_CASE("fat_lyapunov") {
    Kernel k = Kernel::truncated_exact_power(1.5, 0.01);
    FlockState s;
    s.n = 2;
    s.x = {1.0, 0.0, -1.0, 0.0};
    s.v = {0.9, 0.1, -0.9, 0.1};
    s.theta = {1.0, 1.0};
    s.m = {0.5, 0.5};
    CHECK(fat_lyapunov(s, k) == doctest::Approx(0.9 - 2.0).epsilon(1e-14));

    FlockState inside = s;
    inside.x[0] = 0.005;
    inside.x[2] = -0.005;
    CHECK_THROWS_AS(fat_lyapunov(inside, k), std::domain_error);

    CHECK_THROWS_AS(fat_lyapunov(s, Kernel::uniform(1.0)), std::invalid_argument);
}

TEST_CASE("fat-tail run keeps the misalignment witness") {
    FatTailSpec fs{1.5, 0.01, 9.0, 0.9, 0.09};
    auto [state, params] = fat_tail_config(fs);
    IntegratorSpec spec;
    spec.dt = 1e-3;
    spec.t_final = 20.0;
    spec.record_every = 10;
    ProbeSelection probes;
    probes.diagnostics = false;
    Trajectory traj = integrate(state, params, spec, probes);

    const double L0 = fat_lyapunov(state, params.kernel);
    CHECK(L0 > 0.0);  // positive witness: v1 can never align to zero
    double prev_x1 = -1e300;
    for (const auto& pt : traj.points) {
        double L = fat_lyapunov(pt.state, params.kernel);
        CHECK(pt.state.v[0] >= L - 1e-12);   // x^{1-beta}/(1-beta) < 0
        CHECK(L >= L0 - 1e-9);               // the witness never degrades
        CHECK(pt.state.x[0] > prev_x1);
        prev_x1 = pt.state.x[0];
    }
    // speeds stay below one by the maximum principle
    for (const auto& pt : traj.points) CHECK(pt.state.speed(0) < 1.0);
}

TEST_CASE("random_sectorial") {
    SUBCASE("deterministic in the seed") {
        FlockState a = random_sectorial(123, 6, 3, 0.3);
        FlockState b = random_sectorial(123, 6, 3, 0.3);
        CHECK(a.x == b.x);
        CHECK(a.v == b.v);
        CHECK(a.theta == b.theta);
        CHECK(a.m == b.m);
        FlockState c = random_sectorial(124, 6, 3, 0.3);
        CHECK(a.v != c.v);
    }
    SUBCASE("margin holds across many seeds") {
        for (std::uint64_t seed = 0; seed < 1000; ++seed) {
            FlockState s = random_sectorial(seed, 5, 3, 0.37);
            CHECK(sector_margin(s) >= 0.37);
        }
    }
    SUBCASE("masses normalize and knobs bound the draws") {
        SectorialKnobs knobs;
        knobs.theta_min = 0.5;
        knobs.theta_max = 0.75;
        knobs.speed_min = 1.0;
        knobs.speed_max = 1.5;
        FlockState s = random_sectorial(9, 8, 3, 0.2, knobs);
        CHECK(s.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
        for (double th : s.theta) {
            CHECK(th >= 0.5);
            CHECK(th <= 0.75);
        }
        for (int i = 0; i < 8; ++i) {
            CHECK(s.speed(i) >= 1.0 - 1e-12);
            CHECK(s.speed(i) <= 1.5 + 1e-12);
        }
    }
    SUBCASE("one-dimensional states point forward") {
        FlockState s = random_sectorial(77, 4, 1, 0.5);
        for (int i = 0; i < 4; ++i) CHECK(s.v[i] > 0.0);
    }
    SUBCASE("epsilon must sit inside the unit interval") {
        CHECK_THROWS_AS(random_sectorial(1, 4, 3, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(random_sectorial(1, 4, 3, 1.0), std::invalid_argument);
    }
}
