#include "csflock/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "csflock/dynamics.hpp"
#include "csflock/linalg.hpp"
#include "csflock/nash.hpp"
#include "csflock/potential.hpp"
#include "csflock/rng.hpp"
#include "csflock/run.hpp"
#include "csflock/scenarios.hpp"

namespace csf::verify {

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string fmt(double v) { return format_sig(v); }

// ---------------------------------------------------------------------------
// shared random builders

FlockState random_free_state(std::uint64_t seed, int N, int n, double theta_lo, double theta_hi,
                             double speed_lo, double speed_hi, double pos_spread) {
    Rng rng(seed);
    FlockState s;
    s.n = n;
    s.x.resize(static_cast<std::size_t>(N) * n);
    s.v.resize(static_cast<std::size_t>(N) * n);
    s.theta.resize(N);
    s.m.resize(N);
    for (int i = 0; i < N; ++i) s.theta[i] = rng.uniform(theta_lo, theta_hi);
    double msum = 0.0;
    for (int i = 0; i < N; ++i) {
        s.m[i] = rng.uniform(0.5, 1.5);
        msum += s.m[i];
    }
    for (int i = 0; i < N; ++i) s.m[i] /= msum;
    for (int i = 0; i < N; ++i)
        for (int k = 0; k < n; ++k)
            s.x[static_cast<std::size_t>(i) * n + k] = rng.uniform(-pos_spread, pos_spread);
    for (int i = 0; i < N; ++i) {
        double speed = rng.uniform(speed_lo, speed_hi);
        double q2 = 0.0;
        std::vector<double> q(n);
        do {
            q2 = 0.0;
            for (int k = 0; k < n; ++k) {
                q[k] = rng.normal();
                q2 += q[k] * q[k];
            }
        } while (q2 < 1e-12);
        double inv = speed / std::sqrt(q2);
        for (int k = 0; k < n; ++k) s.v[static_cast<std::size_t>(i) * n + k] = q[k] * inv;
    }
    return s;
}

nash::OpinionGame random_game(std::uint64_t seed, int N) {
    Rng rng(seed);
    nash::OpinionGame g;
    g.theta.resize(N);
    g.m.resize(N);
    for (int i = 0; i < N; ++i) g.theta[i] = rng.uniform(0.5, 3.0);
    for (int i = 0; i < N; ++i) g.m[i] = rng.uniform(0.2, 1.2);
    g.sigma = rng.uniform(0.2, 3.0);
    const double ps[4] = {1.0, 2.0, 3.0, 1.5};
    g.p = ps[seed % 4];
    return g;
}

// ---------------------------------------------------------------------------
// cached pieces shared between criteria (3 and 5 feed 7)

struct AngleSample {
    double gamma;
    double gamma2d;
};

struct SectorialFlockingData {
    bool ran = false;
    CheckResult result;
    std::vector<AngleSample> angles;
};

struct SectorialPrinciplesData {
    bool ran = false;
    CheckResult result;
    std::vector<AngleSample> angles;
};

SectorialFlockingData& c3_data() {
    static SectorialFlockingData d;
    return d;
}

SectorialPrinciplesData& c5_data() {
    static SectorialPrinciplesData d;
    return d;
}

// ---------------------------------------------------------------------------
// 1. Ha oracle

CheckResult crit_ha_oracle() {
    CheckResult res{"ha-oracle", true, ""};
    auto t0 = clock_type::now();
    std::ostringstream detail;
    const double lambdas[3] = {0.5, 1.0, 2.0};
    for (double lambda : lambdas) {
        HaScenario scn;
        scn.lambda = lambda;
        scn.sigma = 1.0;
        scn.v0 = 0.9;
        auto [state, params] = ha_flock_config(scn);
        IntegratorSpec spec;
        spec.dt = 1e-4;
        spec.t_final = 5.0;
        spec.record_every = 100;
        ProbeSelection probes;
        probes.diagnostics = false;
        Trajectory traj = integrate(state, params, spec, probes);
        double worst = 0.0;
        for (const auto& pt : traj.points) {
            double oracle = ha_closed_form(scn, pt.t);
            worst = std::max(worst, std::abs(pt.state.v[0] - oracle) / oracle);
        }
        detail << "lambda=" << lambda << " max rel err " << fmt(worst) << "; ";
        if (worst > 1e-6) res.pass = false;
    }
    double elapsed = seconds_since(t0);
    detail << "runtime " << fmt(elapsed) << " s";
    if (elapsed >= 5.0) res.pass = false;
    res.detail = detail.str();
    return res;
}

// ---------------------------------------------------------------------------
// 2. Absolute communication decay (uniform kernel, M phi* - sigma theta_bar = 0.5)

CheckResult crit_absolute_decay() {
    CheckResult res{"absolute-decay", true, ""};
    FlockState state = random_free_state(42, 6, 3, 0.8, 1.2, 0.6, 1.4, 1.0);
    const double phi_star = 5.0;
    const double theta_bar = state.theta_bar();  // M = 1
    SystemParams params;
    params.kernel = Kernel::uniform(phi_star);
    params.kappa = 0.1;
    params.p = 2.0;
    params.sigma = (phi_star * state.total_mass() - 0.5) / theta_bar;

    IntegratorSpec spec;
    spec.dt = 1e-3;
    spec.t_final = 40.0;
    spec.record_every = 10;
    ProbeSelection probes;
    probes.gamma2d = false;
    Trajectory traj = integrate(state, params, spec, probes);

    RateFit fit = fit_rate(series(traj, Field::A), 20.0, 40.0);
    std::ostringstream detail;
    detail << "A rate " << fmt(fit.rate) << " (r2 " << fmt(fit.r_squared) << ")";
    if (!(fit.rate <= -0.45 && fit.r_squared >= 0.99)) res.pass = false;

    const double target = std::pow(theta_bar, 1.0 / params.p);
    double worst = 0.0;
    const FlockState& fin = traj.points.back().state;
    for (int i = 0; i < fin.count(); ++i)
        worst = std::max(worst, std::abs(fin.speed(i) - target));
    detail << "; final speed error " << fmt(worst);
    if (worst > 1e-4) res.pass = false;
    res.detail = detail.str();
    return res;
}

// ---------------------------------------------------------------------------
// 3. Sectorial flocking at desk scale

void run_sectorial_flocking() {
    SectorialFlockingData& d = c3_data();
    if (d.ran) return;
    d.ran = true;
    CheckResult res{"sectorial-flocking", true, ""};
    auto t0 = clock_type::now();

    FlockState state = random_sectorial(7, 8, 3, 0.2);
    SystemParams params;
    params.kernel = Kernel::smooth_power(1.0, 1.0);
    params.kappa = 0.2;
    params.sigma = 0.5;
    params.p = 2.0;

    IntegratorSpec spec;
    spec.dt = 1e-3;
    spec.t_final = 100.0;
    spec.record_every = 10;
    Trajectory traj = integrate(state, params, spec);

    for (const auto& pt : traj.points)
        if (pt.diag.angles_defined) d.angles.push_back({pt.diag.gamma, pt.diag.gamma2d});

    std::ostringstream detail;

    // (a) exponential decay of A, B on the second half; the projected angle is
    // fitted where it is both settled (gamma2d <= 0.1) and above rounding
    // noise (1 - cos >= 1e-20)
    RateFit fa = fit_rate(series(traj, Field::A), 50.0, 100.0);
    RateFit fb = fit_rate(series(traj, Field::B), 50.0, 100.0);
    auto omc = series(traj, Field::one_minus_cos_gamma2d);
    double t1 = traj.points.front().t, t2 = t1;
    bool t1_set = false;
    for (const auto& pt : traj.points) {
        if (!t1_set && pt.diag.angles_defined && pt.diag.gamma2d <= 0.1) {
            t1 = pt.t;
            t1_set = true;
        }
        if (pt.diag.angles_defined && one_minus_cos(pt.diag.gamma2d) >= 1e-20) t2 = pt.t;
    }
    RateFit fg = fit_rate(omc, t1, t2);
    detail << "rates A " << fmt(fa.rate) << " (r2 " << fmt(fa.r_squared) << "), B "
           << fmt(fb.rate) << " (r2 " << fmt(fb.r_squared) << "), 1-cos(g2d) " << fmt(fg.rate)
           << " (r2 " << fmt(fg.r_squared) << " on [" << fmt(t1) << "," << fmt(t2) << "])";
    if (!(fa.rate < 0.0 && fa.r_squared >= 0.98)) res.pass = false;
    if (!(fb.rate < 0.0 && fb.r_squared >= 0.98)) res.pass = false;
    if (!(fg.rate < 0.0 && fg.r_squared >= 0.98)) res.pass = false;

    // (b) flock diameter saturates
    double supD = 0.0, supD_first = 0.0;
    for (const auto& pt : traj.points) {
        supD = std::max(supD, pt.diag.D);
        if (pt.t <= 0.5 * spec.t_final) supD_first = std::max(supD_first, pt.diag.D);
    }
    detail << "; sup D " << fmt(supD) << " vs first half " << fmt(supD_first);
    if (!(supD <= 1.05 * supD_first)) res.pass = false;

    // (c) common limit velocity with |v_bar| near theta_bar^{1/p}
    const FlockState& fin = traj.points.back().state;
    double A_final = traj.points.back().diag.A;
    std::vector<double> vbar(fin.n, 0.0);
    double M = fin.total_mass();
    for (int i = 0; i < fin.count(); ++i)
        for (int k = 0; k < fin.n; ++k) vbar[k] += fin.m[i] * fin.vel(i)[k] / M;
    double vbar_norm = norm(vbar);
    double target = std::pow(state.theta_bar() / state.total_mass(), 1.0 / params.p);
    detail << "; final A " << fmt(A_final) << ", ||v_bar|-target| "
           << fmt(std::abs(vbar_norm - target));
    if (!(A_final <= 1e-3)) res.pass = false;
    if (!(std::abs(vbar_norm - target) <= 1e-3)) res.pass = false;

    double elapsed = seconds_since(t0);
    detail << "; runtime " << fmt(elapsed) << " s";
    if (elapsed >= 30.0) res.pass = false;
    res.detail = detail.str();
    d.result = res;
}

// ---------------------------------------------------------------------------
// 4. Sharpness of the fat-tail condition (Example with beta = 1.5)

CheckResult crit_fat_tail() {
    CheckResult res{"fat-tail-sharpness", true, ""};
    FatTailSpec fs;
    fs.beta = 1.5;
    fs.r0 = 0.01;
    fs.x1_0 = 9.0;
    fs.v1_0 = 0.9;
    fs.v2_0 = 0.09;
    auto [state, params] = fat_tail_config(fs);

    IntegratorSpec spec;
    spec.dt = 1e-3;
    spec.t_final = 100.0;
    spec.record_every = 1;  // the Lyapunov check is per step
    ProbeSelection probes;
    probes.diagnostics = false;
    Trajectory traj = integrate(state, params, spec, probes);

    const double floor = fs.v1_0 + std::pow(fs.x1_0, 1.0 - fs.beta) / (1.0 - fs.beta) - 1e-6;
    bool v1_ok = true, L_ok = true, x1_ok = true;
    double prev_L = -std::numeric_limits<double>::infinity();
    double prev_x1 = -std::numeric_limits<double>::infinity();
    double max_uptick = 0.0;
    bool first = true;
    for (const auto& pt : traj.points) {
        double v1 = pt.state.v[0];
        double x1 = pt.state.x[0];
        if (v1 < floor) v1_ok = false;
        double L = fat_lyapunov(pt.state, params.kernel);
        if (!first) {
            max_uptick = std::max(max_uptick, L - prev_L);
            if (L > prev_L + 1e-8) L_ok = false;
            if (x1 <= prev_x1) x1_ok = false;
        }
        prev_L = L;
        prev_x1 = x1;
        first = false;
    }
    std::ostringstream detail;
    detail << "v1 floor " << (v1_ok ? "held" : "violated") << "; L max per-step increase "
           << fmt(max_uptick) << (L_ok ? " (nonincreasing)" : " (increases)") << "; x1 "
           << (x1_ok ? "strictly increasing" : "not increasing");
    res.pass = v1_ok && L_ok && x1_ok;
    res.detail = detail.str();
    return res;
}

// ---------------------------------------------------------------------------
// 5. Sectorial maximum/minimum principles over 200 random configurations

void run_sectorial_principles() {
    SectorialPrinciplesData& d = c5_data();
    if (d.ran) return;
    d.ran = true;
    CheckResult res{"sectorial-principles", true, ""};

    const int runs = 200;
    std::vector<int> failed(runs, 0);
    std::vector<std::vector<AngleSample>> angles(runs);

#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < runs; ++k) {
        const int N = 3 + (k % 6);
        const int n = 2 + (k % 3);
        const double eps = 0.1 + 0.4 * ((k * 37) % 101) / 101.0;
        FlockState state = random_sectorial(1000 + k, N, n, eps);
        SystemParams params;
        params.kappa = (k % 2) ? 0.1 : 0.0;
        params.sigma = 0.5 + 0.5 * (k % 3);
        params.p = (k % 2) ? 2.0 : 1.0;
        switch (k % 3) {
            case 0: params.kernel = Kernel::uniform(1.0); break;
            case 1: params.kernel = Kernel::smooth_power(1.0, 1.0); break;
            default: params.kernel = Kernel::smooth_power(1.5, 0.5); break;
        }

        IntegratorSpec spec;
        spec.dt = 1e-3;
        spec.t_final = 10.0;
        spec.record_every = 20;
        Trajectory traj = integrate(state, params, spec);

        const double eps0 = sector_margin(state);
        double theta_minus = *std::min_element(state.theta.begin(), state.theta.end());
        double vn_min0 = std::numeric_limits<double>::infinity();
        for (int i = 0; i < N; ++i)
            vn_min0 = std::min(vn_min0, state.v[static_cast<std::size_t>(i) * n + n - 1]);
        const double c0 =
            (1.0 - 1e-9) * std::min(vn_min0, eps0 * std::pow(theta_minus, 1.0 / params.p));

        for (const auto& pt : traj.points) {
            for (int i = 0; i < N; ++i) {
                double vn = pt.state.v[static_cast<std::size_t>(i) * n + n - 1];
                if (vn < 0.0 || pt.state.speed(i) < c0) failed[k] = 1;
            }
            if (pt.diag.angles_defined) angles[k].push_back({pt.diag.gamma, pt.diag.gamma2d});
        }
    }

    int bad = 0;
    for (int k = 0; k < runs; ++k) {
        bad += failed[k];
        d.angles.insert(d.angles.end(), angles[k].begin(), angles[k].end());
    }
    res.pass = bad == 0;
    res.detail = std::to_string(runs - bad) + "/" + std::to_string(runs) +
                 " runs kept the sector and the speed floor";
    d.result = res;
}

// ---------------------------------------------------------------------------
// 6. Conservation and symmetry

FlockState mirror_state(const FlockState& s, int k) {
    FlockState out = s;
    for (int i = 0; i < s.count(); ++i) {
        out.x[static_cast<std::size_t>(i) * s.n + k] = -s.x[static_cast<std::size_t>(i) * s.n + k];
        out.v[static_cast<std::size_t>(i) * s.n + k] = -s.v[static_cast<std::size_t>(i) * s.n + k];
    }
    return out;
}

std::vector<std::vector<double>> random_orthogonal(int n, Rng& rng) {
    // Gram-Schmidt on a pinned Gaussian matrix
    std::vector<std::vector<double>> u(n, std::vector<double>(n));
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) u[r][c] = rng.normal();
        for (int q = 0; q < r; ++q) {
            double proj = 0.0;
            for (int c = 0; c < n; ++c) proj += u[r][c] * u[q][c];
            for (int c = 0; c < n; ++c) u[r][c] -= proj * u[q][c];
        }
        double nr = 0.0;
        for (int c = 0; c < n; ++c) nr += u[r][c] * u[r][c];
        nr = std::sqrt(nr);
        for (int c = 0; c < n; ++c) u[r][c] /= nr;
    }
    return u;
}

FlockState rotate_state(const FlockState& s, const std::vector<std::vector<double>>& U) {
    FlockState out = s;
    for (int i = 0; i < s.count(); ++i) {
        for (int r = 0; r < s.n; ++r) {
            double ax = 0.0, av = 0.0;
            for (int c = 0; c < s.n; ++c) {
                ax += U[r][c] * s.x[static_cast<std::size_t>(i) * s.n + c];
                av += U[r][c] * s.v[static_cast<std::size_t>(i) * s.n + c];
            }
            out.x[static_cast<std::size_t>(i) * s.n + r] = ax;
            out.v[static_cast<std::size_t>(i) * s.n + r] = av;
        }
    }
    return out;
}

CheckResult crit_conservation_symmetry() {
    CheckResult res{"conservation-symmetry", true, ""};
    FlockState state = random_sectorial(11, 5, 3, 0.3);
    SystemParams params;
    params.kernel = Kernel::smooth_power(1.0, 1.0);
    params.kappa = 0.1;
    params.sigma = 1.0;
    params.p = 2.0;
    IntegratorSpec spec;
    spec.dt = 1e-3;
    spec.t_final = 5.0;
    spec.record_every = 10;
    ProbeSelection probes;
    probes.diagnostics = false;

    Trajectory base = integrate(state, params, spec, probes);

    double drift = 0.0;
    const double tb0 = state.theta_bar();
    for (const auto& pt : base.points)
        drift = std::max(drift, std::abs(pt.state.theta_bar() - tb0) / std::abs(tb0));

    double mirror_err = 0.0;
    for (int k = 0; k < state.n; ++k) {
        Trajectory flipped = integrate(mirror_state(state, k), params, spec, probes);
        for (std::size_t q = 0; q < base.points.size(); ++q) {
            FlockState ref = mirror_state(base.points[q].state, k);
            const FlockState& got = flipped.points[q].state;
            for (std::size_t w = 0; w < ref.x.size(); ++w) {
                mirror_err = std::max(mirror_err, std::abs(ref.x[w] - got.x[w]));
                mirror_err = std::max(mirror_err, std::abs(ref.v[w] - got.v[w]));
            }
        }
    }

    Rng rng(99);
    auto U = random_orthogonal(state.n, rng);
    Trajectory rotated = integrate(rotate_state(state, U), params, spec, probes);
    double rot_err = 0.0, scale = 1.0;
    for (std::size_t q = 0; q < base.points.size(); ++q) {
        FlockState ref = rotate_state(base.points[q].state, U);
        const FlockState& got = rotated.points[q].state;
        for (std::size_t w = 0; w < ref.x.size(); ++w) {
            rot_err = std::max(rot_err, std::abs(ref.x[w] - got.x[w]));
            rot_err = std::max(rot_err, std::abs(ref.v[w] - got.v[w]));
            scale = std::max({scale, std::abs(ref.x[w]), std::abs(ref.v[w])});
        }
    }
    rot_err /= scale;

    std::ostringstream detail;
    detail << "theta_bar drift " << fmt(drift) << ", mirror err " << fmt(mirror_err)
           << ", rotation err " << fmt(rot_err);
    res.pass = drift <= 1e-10 && mirror_err <= 1e-10 && rot_err <= 1e-10;
    res.detail = detail.str();
    return res;
}

// ---------------------------------------------------------------------------
// 7. Grassmannian inequality on the frames of criteria 3 and 5

CheckResult crit_grassmannian() {
    run_sectorial_flocking();
    run_sectorial_principles();
    CheckResult res{"grassmannian", true, ""};
    double worst = -std::numeric_limits<double>::infinity();
    std::size_t count = 0;
    for (const auto* set : {&c3_data().angles, &c5_data().angles}) {
        for (const auto& a : *set) {
            worst = std::max(worst, a.gamma - a.gamma2d);
            ++count;
        }
    }
    res.pass = count > 0 && worst <= 1e-9;
    res.detail = "max(gamma - gamma2d) = " + fmt(worst) + " over " + std::to_string(count) +
                 " frames";
    return res;
}

// ---------------------------------------------------------------------------
// 8. Nash solver exactness and certificates

CheckResult crit_nash_solver() {
    CheckResult res{"nash-solver", true, ""};
    std::ostringstream detail;

    // golden-ratio instance: theta = (1,3), m = (1,1), sigma = 1, p = 1
    {
        nash::OpinionGame g;
        g.theta = {1.0, 3.0};
        g.m = {1.0, 1.0};
        g.sigma = 1.0;
        g.p = 1.0;
        nash::Equilibrium eq = nash::solve(g);
        const double phi1 = (1.0 + std::sqrt(5.0)) / 2.0;
        const double phi2 = (3.0 + std::sqrt(5.0)) / 2.0;
        double err = std::max(std::abs(eq.y[0] - phi1), std::abs(eq.y[1] - phi2));
        detail << "golden err " << fmt(err);
        if (err > 1e-10) res.pass = false;
    }

    // consensus instance
    {
        nash::OpinionGame g;
        g.theta = {2.0, 2.0, 2.0};
        g.m = {1.0, 0.5, 0.25};
        g.sigma = 1.0;
        g.p = 1.0;
        nash::Equilibrium eq = nash::solve(g);
        double err = 0.0;
        for (double yi : eq.y) err = std::max(err, std::abs(yi - 2.0));
        detail << "; consensus err " << fmt(err);
        if (err > 1e-14) res.pass = false;
    }

    // multistart agreement and certificates on 20 random games
    int agree_failures = 0, cert_failures = 0;
    for (int k = 0; k < 20; ++k) {
        nash::OpinionGame g = random_game(500 + k, 2 + (k % 7));
        auto ms = nash::multistart(g, 100, 900 + k);
        if (ms.agree != ms.total || ms.max_spread > 1e-8) ++agree_failures;

        const nash::Equilibrium& eq = ms.eq;
        bool certs = eq.converged && eq.jacobian_det > 0.0 && eq.minors_positive &&
                     eq.sum_m_over_d < 1.0;
        for (double di : eq.d) certs = certs && di > 0.0;
        double lhs = 0.0, rhs = 0.0;
        for (int i = 0; i < g.count(); ++i) {
            lhs += g.m[i] * eq.y[i] * g.theta[i];
            rhs += g.m[i] * std::pow(eq.y[i], g.p + 1.0);
        }
        if (std::abs(lhs - rhs) > 1e-10 * std::abs(lhs)) certs = false;
        if (!certs) ++cert_failures;
    }
    detail << "; multistart failures " << agree_failures << "/20, certificate failures "
           << cert_failures << "/20";
    if (agree_failures || cert_failures) res.pass = false;
    res.detail = detail.str();
    return res;
}

// ---------------------------------------------------------------------------
// 9. Opinion dynamics converge to the equilibrium

CheckResult crit_opinion_dynamics() {
    CheckResult res{"opinion-dynamics", true, ""};
    Rng seeder(23);
    nash::OpinionGame g;
    g.theta.resize(5);
    g.m.resize(5);
    for (int i = 0; i < 5; ++i) g.theta[i] = seeder.uniform(0.6, 1.6);
    for (int i = 0; i < 5; ++i) g.m[i] = seeder.uniform(0.5, 1.5);
    g.sigma = 1.0;
    g.p = 2.0;
    nash::Equilibrium eq = nash::solve(g);

    const int runs = 50;
    int converged = 0, matched = 0, monotone = 0;
    double worst_dist = 0.0;

#pragma omp parallel for schedule(dynamic) reduction(+ : converged, matched, monotone) \
    reduction(max : worst_dist)
    for (int k = 0; k < runs; ++k) {
        Rng rng(3000 + k);
        std::vector<double> y0(5);
        for (int i = 0; i < 5; ++i) y0[i] = rng.uniform(0.3, 2.2);
        auto traj = gradflow::gradient_flow(gradflow::rescale(y0, g), g, 5e-3, 2000.0, 1e-10, 10);
        if (traj.converged) ++converged;
        auto rep = gradflow::descent_monitor(traj, g);
        if (rep.monotone) ++monotone;
        std::vector<double> yT = gradflow::unscale(rep.endpoint, g);
        double dist = 0.0;
        for (int i = 0; i < 5; ++i) dist = std::max(dist, std::abs(yT[i] - eq.y[i]));
        worst_dist = std::max(worst_dist, dist);
        if (dist <= 1e-6) ++matched;
    }
    res.pass = converged == runs && matched == runs && monotone == runs;
    res.detail = "converged " + std::to_string(converged) + "/50, endpoint matches " +
                 std::to_string(matched) + "/50 (worst " + fmt(worst_dist) + "), Phi monotone " +
                 std::to_string(monotone) + "/50";
    return res;
}

// ---------------------------------------------------------------------------
// 10. Sigma asymptotics

CheckResult crit_sigma_asymptotics() {
    CheckResult res{"sigma-asymptotics", true, ""};
    nash::OpinionGame g;
    g.theta = {0.5, 1.0, 1.5, 2.5};
    g.m = {0.25, 0.25, 0.25, 0.25};
    g.sigma = 1.0;
    g.p = 2.0;
    auto rows = nash::asymptotic_sweep(g, {1e-3, 1e-1, 10.0, 1e3});
    double conv_hi = rows[3].dist_conviction, conv_mid = rows[2].dist_conviction;
    double cons_lo = rows[0].dist_consensus, cons_mid = rows[1].dist_consensus;
    res.pass = conv_hi < 0.1 * conv_mid && cons_lo < 0.1 * cons_mid;
    res.detail = "dist-to-conviction " + fmt(conv_hi) + " @1e3 vs " + fmt(conv_mid) +
                 " @10; dist-to-consensus " + fmt(cons_lo) + " @1e-3 vs " + fmt(cons_mid) +
                 " @1e-1";
    return res;
}

// ---------------------------------------------------------------------------
// 11. Jacobian and gradient cross-checks

CheckResult crit_jacobian_crosschecks() {
    CheckResult res{"jacobian-crosschecks", true, ""};
    double worst_det = 0.0, worst_grad = 0.0;
    for (int k = 0; k < 100; ++k) {
        nash::OpinionGame g = random_game(7000 + k, 2 + (k % 7));
        Rng rng(7100 + k);
        const int N = g.count();
        std::vector<double> y(N);
        for (int i = 0; i < N; ++i) y[i] = rng.uniform(0.5, 2.0);

        double closed = nash::jacobian_det(y, g);
        double dense = linalg::lu_determinant(nash::jacobian(y, g), N);
        worst_det = std::max(worst_det, std::abs(closed - dense) / std::abs(dense));

        std::vector<double> z(N);
        for (int i = 0; i < N; ++i) z[i] = rng.uniform(0.3, 2.0);
        std::vector<double> grad = gradflow::gradient(z, g);
        for (int i = 0; i < N; ++i) {
            double h = 6.0555e-6 * (1.0 + std::abs(z[i]));
            std::vector<double> zp = z, zm = z;
            zp[i] += h;
            zm[i] -= h;
            double fd = (gradflow::potential(zp, g) - gradflow::potential(zm, g)) / (2.0 * h);
            worst_grad = std::max(worst_grad,
                                  std::abs(grad[i] - fd) / (1.0 + std::abs(grad[i])));
        }
    }
    res.pass = worst_det <= 1e-10 && worst_grad <= 1e-6;
    res.detail = "max det rel err " + fmt(worst_det) + ", max gradient rel err " +
                 fmt(worst_grad);
    return res;
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {
        "ha-oracle",          "absolute-decay",       "sectorial-flocking",
        "fat-tail-sharpness", "sectorial-principles", "conservation-symmetry",
        "grassmannian",       "nash-solver",          "opinion-dynamics",
        "sigma-asymptotics",  "jacobian-crosschecks"};
    return names;
}

CheckResult run_suite(const std::string& name) {
    if (name == "ha-oracle") return crit_ha_oracle();
    if (name == "absolute-decay") return crit_absolute_decay();
    if (name == "sectorial-flocking") {
        run_sectorial_flocking();
        return c3_data().result;
    }
    if (name == "fat-tail-sharpness") return crit_fat_tail();
    if (name == "sectorial-principles") {
        run_sectorial_principles();
        return c5_data().result;
    }
    if (name == "conservation-symmetry") return crit_conservation_symmetry();
    if (name == "grassmannian") return crit_grassmannian();
    if (name == "nash-solver") return crit_nash_solver();
    if (name == "opinion-dynamics") return crit_opinion_dynamics();
    if (name == "sigma-asymptotics") return crit_sigma_asymptotics();
    if (name == "jacobian-crosschecks") return crit_jacobian_crosschecks();
    throw std::invalid_argument("unknown verification suite: " + name);
}

std::vector<CheckResult> run_all() {
    std::vector<CheckResult> out;
    for (const auto& name : suite_names()) out.push_back(run_suite(name));
    return out;
}

}  // namespace csf::verify
