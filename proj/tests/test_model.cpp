#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "csflock/model.hpp"
#include "csflock/rng.hpp"

using namespace csf;

namespace {

FlockState two_agents(double v1x, double v1y, double v2x, double v2y) {
    FlockState s;
    s.n = 2;
    s.x = {0.0, 0.0, 1.0, 0.0};
    s.v = {v1x, v1y, v2x, v2y};
    s.theta = {1.0, 1.0};
    s.m = {0.5, 0.5};
    return s;
}

}  // namespace

TEST_CASE("kernel_eval matches the variant definitions") {
    CHECK(kernel_eval(Kernel::smooth_power(2.0, 1.0), 0.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(kernel_eval(Kernel::smooth_power(1.0, 2.0), 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(kernel_eval(Kernel::uniform(1.0), 7.3) == 1.0);

    Kernel trunc = Kernel::truncated_exact_power(1.5, 0.1);
    CHECK(trunc(0.05) == doctest::Approx(std::pow(0.1, -1.5)));
    CHECK(trunc(2.0) == doctest::Approx(std::pow(2.0, -1.5)));

    CHECK_THROWS_AS(kernel_eval(Kernel::uniform(1.0), -0.1), std::invalid_argument);
}

TEST_CASE("kernel construction validates parameters") {
    CHECK_THROWS_AS(Kernel::uniform(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(Kernel::smooth_power(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Kernel::smooth_power(1.0, -0.5), std::invalid_argument);
    CHECK_THROWS_AS(Kernel::truncated_exact_power(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Kernel::truncated_exact_power(1.5, 0.0), std::invalid_argument);
}

TEST_CASE("kernels are nonnegative and nonincreasing on a grid") {
    const Kernel kernels[] = {Kernel::uniform(0.7), Kernel::smooth_power(2.0, 1.3),
                              Kernel::smooth_power(1.0, 0.0),
                              Kernel::truncated_exact_power(2.0, 0.3)};
    for (const Kernel& k : kernels) {
        double prev = k(0.0);
        CHECK(prev >= 0.0);
        for (int i = 1; i <= 200; ++i) {
            double r = 0.05 * i;
            double cur = k(r);
            CHECK(cur >= 0.0);
            CHECK(cur <= prev + 1e-15);
            prev = cur;
        }
    }
}

TEST_CASE("smooth power kernel satisfies the exact tail identity") {
    // phi(r) (1+r^2)^{beta/2} == lambda for every r
    for (double beta : {0.3, 1.0, 2.5}) {
        Kernel k = Kernel::smooth_power(1.7, beta);
        for (int i = 0; i <= 100; ++i) {
            double r = 0.2 * i;
            double lhs = k(r) * std::pow(1.0 + r * r, 0.5 * beta);
            CHECK(lhs == doctest::Approx(1.7).epsilon(1e-13));
        }
    }
    CHECK(Kernel::smooth_power(1.0, 1.0).fat_tail());
    CHECK(Kernel::smooth_power(1.0, 0.5).fat_tail());
    CHECK_FALSE(Kernel::smooth_power(1.0, 1.5).fat_tail());
    CHECK(Kernel::uniform(1.0).fat_tail());
}

TEST_CASE("sector margin") {
    const double s2 = 1.0 / std::sqrt(2.0);
    CHECK(sector_margin(two_agents(0.0, 1.0, s2, s2)) == doctest::Approx(s2).epsilon(1e-14));

    FlockState aligned = two_agents(0.0, 1.0, 0.0, 1.0);
    CHECK(sector_margin(aligned) == doctest::Approx(1.0).epsilon(1e-14));

    CHECK(sector_margin(two_agents(1.0, 0.0, 0.0, 1.0)) == doctest::Approx(0.0));

    FlockState rest = two_agents(0.0, 0.0, 0.0, 1.0);
    CHECK_THROWS_AS(sector_margin(rest), std::domain_error);
}

TEST_CASE("sector margin is invariant under rotations fixing e_n") {
    Rng rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 3, N = 4;
        FlockState s;
        s.n = n;
        s.x.assign(N * n, 0.0);
        s.v.resize(N * n);
        s.theta.assign(N, 1.0);
        s.m.assign(N, 0.25);
        for (auto& vi : s.v) vi = rng.normal();
        bool zero = false;
        for (int i = 0; i < N; ++i) zero = zero || s.speed(i) == 0.0;
        if (zero) continue;

        // rotation in the (e_1, e_2) plane
        double a = rng.uniform(0.0, 6.28);
        FlockState r = s;
        for (int i = 0; i < N; ++i) {
            double vx = s.v[i * n], vy = s.v[i * n + 1];
            r.v[i * n] = std::cos(a) * vx - std::sin(a) * vy;
            r.v[i * n + 1] = std::sin(a) * vx + std::cos(a) * vy;
        }
        CHECK(sector_margin(r) == doctest::Approx(sector_margin(s)).epsilon(1e-12));
    }
}

TEST_CASE("validate reports the first violation with the agent index") {
    FlockState s;
    s.n = 2;
    s.x = {0, 0, 1, 0, 0, 1};
    s.v = {1, 0, 0, 1, 1, 1};
    s.theta = {1.0, 2.0, 3.0};
    s.m = {1.0, 1.0, 1.0};
    SystemParams p;

    CHECK(validate(s, p).ok);

    FlockState bad_theta = s;
    bad_theta.theta[1] = 0.0;
    auto rep = validate(bad_theta, p);
    CHECK_FALSE(rep.ok);
    CHECK(rep.agent == 1);

    FlockState bad_mass = s;
    bad_mass.m[0] = -1.0;
    rep = validate(bad_mass, p);
    CHECK_FALSE(rep.ok);
    CHECK(rep.agent == 0);

    FlockState bad_vel = s;
    bad_vel.v[2] = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(validate(bad_vel, p).ok);

    SystemParams bad_params = p;
    bad_params.sigma = 0.0;
    CHECK_FALSE(validate(s, bad_params).ok);
}

TEST_CASE("derived mass and theta totals") {
    FlockState s;
    s.n = 1;
    s.x = {0, 0, 0};
    s.v = {1, 1, 1};
    s.theta = {1.0, 2.0, 4.0};
    s.m = {0.5, 0.25, 0.25};
    CHECK(s.total_mass() == doctest::Approx(1.0));
    CHECK(s.theta_bar() == doctest::Approx(0.5 + 0.5 + 1.0));
}
