#include "csflock/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "csflock/nash.hpp"
#include "csflock/potential.hpp"
#include "csflock/scenarios.hpp"

namespace csf {

namespace fs = std::filesystem;

std::string format_sig(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

fs::path resolve_output_dir(const std::string& dir) {
    fs::path p(dir);
    if (p.is_relative()) {
        if (const char* root = std::getenv("CSFLOCK_OUTPUT_ROOT")) p = fs::path(root) / p;
    }
    fs::create_directories(p);
    return p;
}

namespace {

using Report = std::vector<std::pair<std::string, std::string>>;

void put(Report& rep, const std::string& key, const std::string& value) {
    rep.emplace_back(key, value);
}
void put(Report& rep, const std::string& key, double value) {
    rep.emplace_back(key, format_sig(value));
}
void put(Report& rep, const std::string& key, bool value) {
    rep.emplace_back(key, value ? "true" : "false");
}

void write_report(const fs::path& path, const Report& rep) {
    std::ofstream out(path, std::ios::binary);
    for (const auto& [k, v] : rep) out << k << " = " << v << "\n";
}

void write_series(const fs::path& path, const Trajectory& traj) {
    std::ofstream out(path, std::ios::binary);
    out << "t,A,B,D,R,gamma,gamma2d,margin\n";
    for (const auto& pt : traj.points) {
        out << format_sig(pt.t) << ',' << format_sig(pt.diag.A) << ',' << format_sig(pt.diag.B)
            << ',' << format_sig(pt.diag.D) << ',' << format_sig(pt.diag.R) << ','
            << format_sig(pt.diag.gamma) << ',' << format_sig(pt.diag.gamma2d) << ','
            << format_sig(pt.diag.margin) << '\n';
    }
}

struct InvariantOutcome {
    bool pass = true;
    std::string detail;
};

InvariantOutcome check_theta_bar(const Trajectory& traj) {
    const double tb0 = traj.points.front().state.theta_bar();
    double drift = 0.0;
    for (const auto& pt : traj.points)
        drift = std::max(drift, std::abs(pt.state.theta_bar() - tb0) / std::abs(tb0));
    return {drift <= 1e-10, "max relative drift " + format_sig(drift)};
}

InvariantOutcome check_sector(const Trajectory& traj, const SystemParams& params) {
    const FlockState& s0 = traj.points.front().state;
    double eps0;
    try {
        eps0 = sector_margin(s0);
    } catch (const std::domain_error&) {
        return {false, "initial margin undefined (zero-speed agent)"};
    }
    if (!(eps0 > 0.0)) return {false, "initial state is not sectorial"};
    double theta_minus = *std::min_element(s0.theta.begin(), s0.theta.end());
    double vn_min0 = s0.v[s0.n - 1];
    for (int i = 0; i < s0.count(); ++i)
        vn_min0 = std::min(vn_min0, s0.v[static_cast<std::size_t>(i) * s0.n + s0.n - 1]);
    // logistic floor from the sectorial minimum principle, with a hair of
    // slack for the discretization
    const double c0 =
        (1.0 - 1e-9) * std::min(vn_min0, eps0 * std::pow(theta_minus, 1.0 / params.p));
    for (const auto& pt : traj.points) {
        const FlockState& s = pt.state;
        for (int i = 0; i < s.count(); ++i) {
            double vn = s.v[static_cast<std::size_t>(i) * s.n + s.n - 1];
            if (vn < 0.0)
                return {false, "agent " + std::to_string(i) + " left the sector at t = " +
                                   format_sig(pt.t)};
            if (s.speed(i) < c0)
                return {false, "agent " + std::to_string(i) + " dipped below c0 = " +
                                   format_sig(c0) + " at t = " + format_sig(pt.t)};
        }
    }
    return {true, "c0 = " + format_sig(c0)};
}

InvariantOutcome check_velocity_bound(const Trajectory& traj, const SystemParams& params) {
    const FlockState& s0 = traj.points.front().state;
    double v0p = 0.0;
    for (int i = 0; i < s0.count(); ++i) v0p = std::max(v0p, pow_p(s0.speed(i), params.p));
    double theta_plus = *std::max_element(s0.theta.begin(), s0.theta.end());
    const double bound = std::max(v0p, theta_plus) + 1e-9;
    for (const auto& pt : traj.points)
        for (int i = 0; i < pt.state.count(); ++i)
            if (pow_p(pt.state.speed(i), params.p) > bound)
                return {false, "speed bound exceeded at t = " + format_sig(pt.t)};
    return {true, "bound " + format_sig(bound)};
}

InvariantOutcome check_grassmannian(const Trajectory& traj, const ProbeSelection& probes) {
    if (!probes.gamma2d) return {false, "gamma2d probe disabled in this run"};
    for (const auto& pt : traj.points) {
        if (!pt.diag.angles_defined) continue;
        if (pt.diag.gamma > pt.diag.gamma2d + 1e-9)
            return {false, "gamma > gamma2d + 1e-9 at t = " + format_sig(pt.t)};
    }
    return {true, ""};
}

InvariantOutcome check_monotone_A(const Trajectory& traj) {
    for (std::size_t k = 0; k + 1 < traj.points.size(); ++k)
        if (traj.points[k + 1].diag.A > traj.points[k].diag.A * (1.0 + 1e-6))
            return {false, "A increased at t = " + format_sig(traj.points[k + 1].t)};
    return {true, ""};
}

InvariantOutcome check_misalignment(const Trajectory& traj, const SystemParams& params) {
    if (params.kernel.type != Kernel::Type::truncated_exact_power)
        return {false, "misalignment check needs the fat-tail scenario"};
    const FlockState& s0 = traj.points.front().state;
    double L0;
    try {
        L0 = fat_lyapunov(s0, params.kernel);
    } catch (const std::exception& e) {
        return {false, e.what()};
    }
    double prev_x1 = -std::numeric_limits<double>::infinity();
    for (const auto& pt : traj.points) {
        double v1 = pt.state.v[0];
        double x1 = pt.state.x[0];
        if (v1 < L0 - 1e-6 || v1 <= 0.0)
            return {false, "v1 dropped to " + format_sig(v1) + " at t = " + format_sig(pt.t)};
        if (x1 <= prev_x1)
            return {false, "x1 stopped increasing at t = " + format_sig(pt.t)};
        prev_x1 = x1;
    }
    return {true, "v1 floor " + format_sig(L0)};
}

}  // namespace

RunResult run(const RunConfig& cfg) {
    RunResult res;
    fs::path outdir = resolve_output_dir(cfg.output_dir);
    res.series_path = outdir / "series.csv";
    res.report_path = outdir / "report.txt";

    auto [state, params] = materialize(cfg);

    Report rep;
    put(rep, "scenario", cfg.scenario);
    put(rep, "N", static_cast<double>(state.count()));
    put(rep, "n", static_cast<double>(state.n));
    put(rep, "dt", cfg.integrator.dt);
    put(rep, "t_final", cfg.integrator.t_final);

    try {
        res.trajectory = integrate(state, params, cfg.integrator, cfg.probes);
    } catch (const IntegrationError& e) {
        put(rep, "integration_failed", true);
        put(rep, "error", std::string(e.what()));
        put(rep, "overall", std::string("fail"));
        write_report(res.report_path, rep);
        res.report = rep;
        res.exit_code = 2;
        return res;
    }
    const Trajectory& traj = res.trajectory;
    write_series(res.series_path, traj);

    put(rep, "frames", static_cast<double>(traj.points.size()));
    put(rep, "blew_up", traj.blew_up);
    put(rep, "stop_time", traj.stop_time);
    put(rep, "theta_bar", traj.points.front().state.theta_bar());

    const auto& last = traj.points.back();
    put(rep, "final_A", last.diag.A);
    put(rep, "final_B", last.diag.B);
    put(rep, "final_D", last.diag.D);
    put(rep, "final_margin", last.diag.margin);

    double supD = 0.0, supD_first = 0.0;
    for (const auto& pt : traj.points) {
        supD = std::max(supD, pt.diag.D);
        if (pt.t <= 0.5 * traj.stop_time) supD_first = std::max(supD_first, pt.diag.D);
    }
    put(rep, "sup_D", supD);
    put(rep, "flock_diameter_bounded", supD <= 1.05 * supD_first);

    // empirical gamma / gamma2d ratio; the reverse-bound constant is reported,
    // never asserted
    double ratio_min = std::numeric_limits<double>::infinity();
    for (const auto& pt : traj.points)
        if (pt.diag.angles_defined && pt.diag.gamma2d > 1e-12)
            ratio_min = std::min(ratio_min, pt.diag.gamma / pt.diag.gamma2d);
    if (std::isfinite(ratio_min)) put(rep, "gamma_ratio_min", ratio_min);

    for (const std::string& name : cfg.rate_fit.series) {
        Field f = name == "A" ? Field::A
                  : name == "B" ? Field::B
                                : Field::one_minus_cos_gamma2d;
        try {
            RateFit fit = fit_rate(series(traj, f), cfg.rate_fit.t1, cfg.rate_fit.t2);
            put(rep, "rate." + name, fit.rate);
            put(rep, "r2." + name, fit.r_squared);
        } catch (const std::invalid_argument& e) {
            put(rep, "rate." + name, std::string("undefined (") + e.what() + ")");
        }
    }

    bool all_pass = true;
    for (const std::string& name : cfg.invariants) {
        InvariantOutcome out;
        if (name == "theta-bar")
            out = check_theta_bar(traj);
        else if (name == "sector")
            out = check_sector(traj, params);
        else if (name == "velocity-bound")
            out = check_velocity_bound(traj, params);
        else if (name == "grassmannian")
            out = check_grassmannian(traj, cfg.probes);
        else if (name == "monotone-A")
            out = check_monotone_A(traj);
        else if (name == "misalignment")
            out = check_misalignment(traj, params);
        else
            out = {false, "unknown invariant"};
        if (name == "misalignment") put(rep, "misaligned", out.pass);
        put(rep, "invariant." + name,
            std::string(out.pass ? "pass" : "fail") +
                (out.detail.empty() ? "" : " (" + out.detail + ")"));
        all_pass = all_pass && out.pass;
    }
    if (traj.blew_up) all_pass = false;
    put(rep, "overall", std::string(all_pass ? "pass" : "fail"));

    write_report(res.report_path, rep);
    res.report = rep;
    res.exit_code = all_pass ? 0 : 1;
    return res;
}

int run_nash(const GameConfig& cfg) {
    fs::path outdir = resolve_output_dir(cfg.output_dir);
    Report rep;
    const nash::OpinionGame& game = cfg.game;
    put(rep, "N", static_cast<double>(game.count()));
    put(rep, "sigma", game.sigma);
    put(rep, "p", game.p);

    bool ok = true;
    nash::Equilibrium eq;
    try {
        eq = nash::solve(game);
    } catch (const nash::SolveFailure& e) {
        ok = false;
        eq = e.best;
        put(rep, "solver_failed", true);
        put(rep, "error", std::string(e.what()));
    }
    for (int i = 0; i < game.count(); ++i) put(rep, "y_star." + std::to_string(i), eq.y[i]);
    put(rep, "residual_norm", eq.residual_norm);
    put(rep, "converged", eq.converged);
    put(rep, "iterations", static_cast<double>(eq.iterations));
    put(rep, "y_bar", eq.y_bar);
    put(rep, "jacobian_det", eq.jacobian_det);
    for (std::size_t k = 0; k < eq.minors.size(); ++k)
        put(rep, "minor." + std::to_string(k + 1), eq.minors[k]);
    put(rep, "minors_positive", eq.minors_positive);
    put(rep, "sum_m_over_d", eq.sum_m_over_d);
    put(rep, "shift_index", static_cast<double>(eq.shift_index));

    bool consensus = game.theta_max() - game.theta_min() <= 1e-12 * game.theta_max();
    put(rep, "unique_trivial", consensus);

    if (ok) {
        ok = ok && eq.converged && eq.jacobian_det > 0.0 && eq.minors_positive;

        if (cfg.multistart_seeds > 0) {
            auto ms = nash::multistart(game, cfg.multistart_seeds, cfg.multistart_rng_seed);
            put(rep, "multistart_total", static_cast<double>(ms.total));
            put(rep, "multistart_agree", static_cast<double>(ms.agree));
            put(rep, "multistart_max_spread", ms.max_spread);
            ok = ok && ms.agree == ms.total;
        }

        auto nv = nash::verify_nash(eq, game, cfg.verify_grid);
        put(rep, "nash_verified", nv.verified);
        for (const auto& d : nv.violations)
            put(rep, "deviation.agent" + std::to_string(d.agent),
                "r = " + format_sig(d.r_best) + ", gain = " + format_sig(d.gain));
        ok = ok && nv.verified;

        auto sg = nash::sorted(game);
        nash::Equilibrium eq_sorted = nash::solve(sg.game);
        auto sr = nash::structure_report(eq_sorted, sg.game);
        put(rep, "structure_ok", sr.ok);
        for (const auto& v : sr.violations) put(rep, "structure_violation", v);
        ok = ok && sr.ok;
    }

    if (cfg.descent.given && ok) {
        std::vector<double> y0 = cfg.descent.y0;
        if (y0.empty()) {
            y0.resize(game.count());
            for (int i = 0; i < game.count(); ++i)
                y0[i] = std::pow(game.theta[i], 1.0 / game.p);
        }
        auto traj = gradflow::gradient_flow(gradflow::rescale(y0, game), game, cfg.descent.dt,
                                            cfg.descent.t_max, 1e-10, cfg.descent.record_every);
        auto mon = gradflow::descent_monitor(traj, game);
        std::ofstream out(outdir / "descent.csv", std::ios::binary);
        out << "t,phi\n";
        for (std::size_t k = 0; k < traj.points.size(); ++k)
            out << format_sig(traj.points[k].t) << ',' << format_sig(mon.phi[k]) << '\n';
        put(rep, "descent_converged", traj.converged);
        put(rep, "descent_monotone", mon.monotone);
        put(rep, "descent_arc_length", mon.arc_length);
        std::vector<double> yT = gradflow::unscale(mon.endpoint, game);
        double dist = 0.0;
        for (int i = 0; i < game.count(); ++i)
            dist = std::max(dist, std::abs(yT[i] - eq.y[i]));
        put(rep, "descent_endpoint_dist", dist);
        ok = ok && traj.converged && mon.monotone;
    }

    if (!cfg.sweep_sigmas.empty()) {
        auto rows = nash::asymptotic_sweep(game, cfg.sweep_sigmas);
        std::ofstream out(outdir / "nash_sweep.csv", std::ios::binary);
        out << "sigma,dist_conviction,dist_consensus\n";
        for (const auto& r : rows)
            out << format_sig(r.sigma) << ',' << format_sig(r.dist_conviction) << ','
                << format_sig(r.dist_consensus) << '\n';
        // distances should shrink toward the matching limit across decades
        bool conv_mono = true, cons_mono = true;
        for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
            if (rows[k + 1].sigma > rows[k].sigma &&
                rows[k + 1].dist_conviction > rows[k].dist_conviction + 1e-12)
                conv_mono = false;
            if (rows[k + 1].sigma > rows[k].sigma &&
                rows[k + 1].dist_consensus < rows[k].dist_consensus - 1e-12)
                cons_mono = false;
        }
        put(rep, "sweep_conviction_monotone", conv_mono);
        put(rep, "sweep_consensus_monotone", cons_mono);
    }

    put(rep, "overall", std::string(ok ? "pass" : "fail"));
    write_report(outdir / "nash_report.txt", rep);
    return ok ? 0 : 1;
}

int run_sweep(const SweepConfig& cfg) {
    fs::path outdir = resolve_output_dir(cfg.output_dir);
    const int count = static_cast<int>(cfg.values.size());
    std::vector<RunResult> results(count);
    std::vector<std::string> errors(count);

#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < count; ++k) {
        try {
            std::string text =
                substitute_parameter(cfg.base_json, cfg.parameter, cfg.values[k]);
            RunConfig rc = parse_config(text);
            std::string leaf = cfg.parameter + "=" + format_sig(cfg.values[k]);
            std::replace(leaf.begin(), leaf.end(), '.', '_');
            rc.output_dir = (outdir / leaf).string();
            results[k] = run(rc);
        } catch (const std::exception& e) {
            errors[k] = e.what();
            results[k].exit_code = 2;
        }
    }

    std::ofstream out(outdir / "sweep.csv", std::ios::binary);
    out << "value,status,final_A,final_B,final_D\n";
    int exit_code = 0;
    for (int k = 0; k < count; ++k) {
        const auto& r = results[k];
        double fa = std::numeric_limits<double>::quiet_NaN(), fb = fa, fd = fa;
        if (!r.trajectory.points.empty()) {
            fa = r.trajectory.points.back().diag.A;
            fb = r.trajectory.points.back().diag.B;
            fd = r.trajectory.points.back().diag.D;
        }
        out << format_sig(cfg.values[k]) << ',' << r.exit_code << ',' << format_sig(fa) << ','
            << format_sig(fb) << ',' << format_sig(fd) << '\n';
        exit_code = std::max(exit_code, r.exit_code);
    }
    return exit_code;
}

}  // namespace csf
