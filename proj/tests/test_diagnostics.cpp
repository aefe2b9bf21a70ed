#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "csflock/diagnostics.hpp"
#include "csflock/dynamics.hpp"
#include "csflock/rng.hpp"
#include "csflock/scenarios.hpp"

using namespace csf;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

FlockState state2d(std::vector<double> v) {
    FlockState s;
    s.n = 2;
    const int N = static_cast<int>(v.size() / 2);
    s.v = std::move(v);
    s.x.assign(2 * N, 0.0);
    for (int i = 0; i < N; ++i) s.x[2 * i] = i;
    s.theta.assign(N, 1.0);
    s.m.assign(N, 1.0 / N);
    return s;
}

}  // namespace

TEST_CASE("frame on identical agents") {
    FlockState s = state2d({0.4, 0.3, 0.4, 0.3, 0.4, 0.3});
    s.x.assign(s.x.size(), 0.0);
    DiagnosticsFrame f = frame(s);
    CHECK(f.A == 0.0);
    CHECK(f.B == 0.0);
    CHECK(f.D == 0.0);
    CHECK(f.R == doctest::Approx(1.0));
    CHECK(f.gamma == 0.0);
    CHECK(f.gamma2d == doctest::Approx(0.0));
    CHECK(f.angles_defined);
}

TEST_CASE("frame on orthogonal unit velocities") {
    DiagnosticsFrame f = frame(state2d({1.0, 0.0, 0.0, 1.0}));
    CHECK(f.gamma == doctest::Approx(kPi / 2).epsilon(1e-14));
    CHECK(f.A == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("frame on collinear velocities") {
    DiagnosticsFrame f = frame(state2d({0.0, 2.0, 0.0, 1.0}));
    CHECK(f.R == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(f.gamma <= 1e-15);
}

TEST_CASE("zero-speed agent flags the angle fields") {
    DiagnosticsFrame f = frame(state2d({0.0, 0.0, 0.0, 1.0}));
    CHECK_FALSE(f.angles_defined);
    CHECK(std::isnan(f.gamma));
    CHECK(std::isnan(f.R));
    CHECK(std::isnan(f.margin));
    CHECK(f.A == doctest::Approx(1.0));
}

TEST_CASE("project_plane") {
    SUBCASE("coordinate projection") {
        double v[3] = {3.0, 4.0, 5.0};
        double u[2] = {1.0, 0.0};
        auto pr = project_plane({v, 3}, {u, 2});
        CHECK(pr[0] == 3.0);
        CHECK(pr[1] == 5.0);
    }
    SUBCASE("axis-parallel vectors project to the axis") {
        double v[3] = {0.0, 0.0, 2.5};
        double u[2] = {0.6, 0.8};
        auto pr = project_plane({v, 3}, {u, 2});
        CHECK(pr[0] == 0.0);
        CHECK(pr[1] == 2.5);
    }
    SUBCASE("in-plane vector keeps its length") {
        const double s2 = 1.0 / std::sqrt(2.0);
        double v[3] = {1.0, 1.0, 0.0};
        double u[2] = {s2, s2};
        auto pr = project_plane({v, 3}, {u, 2});
        CHECK(pr[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
        CHECK(pr[1] == 0.0);
    }
    SUBCASE("non-unit u rejected") {
        double v[3] = {1.0, 1.0, 0.0};
        double u[2] = {1.0, 0.5};
        CHECK_THROWS_AS(project_plane({v, 3}, {u, 2}), std::invalid_argument);
    }
}

TEST_CASE("gamma2d equals gamma in the plane") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
        FlockState s = random_sectorial(seed, 5, 2, 0.15);
        DiagnosticsFrame f = frame(s);
        CHECK(f.gamma2d == f.gamma);
    }
}

TEST_CASE("gamma2d dominates gamma on sectorial states") {
    for (int n : {3, 4}) {
        for (std::uint64_t seed = 10; seed < 40; ++seed) {
            FlockState s = random_sectorial(seed, 6, n, 0.2);
            DiagnosticsFrame f = frame(s);
            CHECK(f.gamma <= f.gamma2d + 1e-12);
        }
    }
}

TEST_CASE("gamma2d vanishes for equal velocities") {
    FlockState s = random_sectorial(5, 4, 3, 0.3);
    for (int i = 1; i < 4; ++i)
        for (int k = 0; k < 3; ++k) s.v[i * 3 + k] = s.v[k];
    auto g = gamma2d(s, 64);
    CHECK(g.value == doctest::Approx(0.0));
    CHECK(g.skipped == 0);
}

TEST_CASE("gamma2d counts skipped zero-length projections") {
    // velocities in the e_1 e_2 plane have v^n = 0, so the plane through e_2
    // projects agent 1 to the origin
    FlockState s;
    s.n = 3;
    s.x = {0, 0, 0, 1, 0, 0};
    s.v = {1, 0, 0, 0, 1, 0};
    s.theta = {1.0, 1.0};
    s.m = {0.5, 0.5};
    auto g = gamma2d(s, 8);
    CHECK(g.skipped > 0);
    CHECK(g.value >= 0.0);
}

#ifdef _OPENMP
TEST_CASE("gamma2d parallel path matches the serial one bitwise") {
    FlockState s = random_sectorial(12, 24, 4, 0.15);
    CHECK(gamma2d_serial(s, 256).value == gamma2d(s, 256).value);
}
#endif

TEST_CASE("narrow sector cone bounds the pairwise angle") {
    const double eps = 0.95;
    const double cap = std::acos(2.0 * eps * eps - 1.0);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        FlockState s = random_sectorial(seed, 6, 3, eps);
        DiagnosticsFrame f = frame(s, {.with_gamma2d = false});
        CHECK(f.gamma <= cap + 1e-12);
    }
}

TEST_CASE("angle_between agrees with the arccos formula and stays stable") {
    Rng rng(9);
    for (int rep = 0; rep < 200; ++rep) {
        double a[3], b[3];
        for (double& x : a) x = rng.normal();
        for (double& x : b) x = rng.normal();
        double na = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
        double nb = std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
        double c = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]) / (na * nb);
        double ref = std::acos(std::clamp(c, -1.0, 1.0));
        CHECK(angle_between({a, 3}, {b, 3}) == doctest::Approx(ref).epsilon(1e-10));
    }
    // nearly parallel vectors keep relative accuracy
    double a[2] = {1.0, 0.0};
    double b[2] = {std::cos(1e-8), std::sin(1e-8)};
    CHECK(angle_between({a, 2}, {b, 2}) == doctest::Approx(1e-8).epsilon(1e-6));
}

TEST_CASE("one_minus_cos keeps relative accuracy for tiny angles") {
    for (double g : {1e-3, 1e-6, 1e-9}) {
        CHECK(one_minus_cos(g) == doctest::Approx(g * g / 2).epsilon(1e-5));
    }
    CHECK(one_minus_cos(kPi) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("fit_rate on an exact exponential") {
    std::vector<std::pair<double, double>> series;
    for (int k = 0; k < 100; ++k) {
        double t = 0.05 * k;
        series.emplace_back(t, 5.0 * std::exp(-2.0 * t));
    }
    RateFit fit = fit_rate(series, 0.0, 5.0);
    CHECK(fit.rate == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(fit.intercept == doctest::Approx(std::log(5.0)).epsilon(1e-9));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fit_rate on a constant series") {
    std::vector<std::pair<double, double>> series;
    for (int k = 0; k < 20; ++k) series.emplace_back(0.1 * k, 3.0);
    RateFit fit = fit_rate(series, 0.0, 2.0);
    CHECK(fit.rate == doctest::Approx(0.0));
    CHECK(fit.r_squared == 1.0);
}

TEST_CASE("fit_rate rejects thin windows and nonpositive values") {
    std::vector<std::pair<double, double>> series;
    for (int k = 0; k < 5; ++k) series.emplace_back(k, 1.0);
    CHECK_THROWS_AS(fit_rate(series, 0.0, 10.0), std::invalid_argument);

    std::vector<std::pair<double, double>> bad;
    for (int k = 0; k < 20; ++k) bad.emplace_back(k, k < 10 ? 1.0 : -1.0);
    CHECK_THROWS_AS(fit_rate(bad, 0.0, 20.0), std::invalid_argument);
}

TEST_CASE("fitted A-rate under strong absolute communication") {
    // uniform kernel with M phi* - sigma theta_bar = 0.5 and the theta spread
    // decaying faster; the A tail then follows the 0.5 envelope
    FlockState s = random_sectorial(63, 4, 3, 0.15, {.theta_min = 0.85, .theta_max = 1.15});
    const double phi_star = 5.0;
    SystemParams p;
    p.kernel = Kernel::uniform(phi_star);
    p.kappa = 0.1;
    p.p = 2.0;
    p.sigma = (phi_star * s.total_mass() - 0.5) / s.theta_bar();

    IntegratorSpec spec;
    spec.dt = 1e-3;
    spec.t_final = 30.0;
    spec.record_every = 10;
    ProbeSelection probes;
    probes.gamma2d = false;
    Trajectory traj = integrate(s, p, spec, probes);

    RateFit fit = fit_rate(series(traj, Field::A), 15.0, 30.0);
    CHECK(fit.rate <= -0.5 * (1.0 - 0.05));
    CHECK(fit.r_squared >= 0.99);

    // A decays framewise under these hypotheses
    for (std::size_t k = 0; k + 1 < traj.points.size(); ++k)
        CHECK(traj.points[k + 1].diag.A <= traj.points[k].diag.A * (1.0 + 1e-6));
}

TEST_CASE("projected angle contraction outruns the kernel-floor bound") {
    // conservative decay constant assembled from the initial data
    FlockState s = random_sectorial(71, 6, 3, 0.3);
    SystemParams p;
    p.kernel = Kernel::smooth_power(1.0, 1.0);
    p.kappa = 0.2;
    p.sigma = 0.5;
    p.p = 2.0;

    IntegratorSpec spec;
    spec.dt = 1e-3;
    spec.t_final = 30.0;
    spec.record_every = 10;
    Trajectory traj = integrate(s, p, spec);

    double supD = 0.0;
    for (const auto& pt : traj.points) supD = std::max(supD, pt.diag.D);

    const DiagnosticsFrame f0 = traj.points.front().diag;
    double smin = std::numeric_limits<double>::infinity(), smax = 0.0;
    for (int i = 0; i < s.count(); ++i) {
        smin = std::min(smin, s.speed(i));
        smax = std::max(smax, s.speed(i));
    }
    double theta_minus = *std::min_element(s.theta.begin(), s.theta.end());
    double c_speed = std::min(smin, f0.margin * std::sqrt(theta_minus)) /
                     std::max(smax, std::sqrt(1.2));
    double c_angle = 1.0 + std::cos(std::min(f0.gamma2d, kPi * 0.999));
    double rate_floor = c_speed * c_angle * s.total_mass() * p.kernel(supD);

    auto omc = series(traj, Field::one_minus_cos_gamma2d);
    double t2 = 0.0;
    for (const auto& [t, v] : omc)
        if (v >= 1e-20) t2 = t;
    RateFit fit = fit_rate(omc, 1.0, t2);
    CHECK(fit.rate <= -rate_floor * (1.0 - 0.1));
}
