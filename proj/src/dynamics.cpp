#include "csflock/dynamics.hpp"

#include <atomic>
#include <cmath>
#include <limits>

namespace csf {

namespace {

// One agent's row of the pairwise sums plus the self-propulsion term.
// Shared by the serial and parallel drivers so both produce identical bits.
inline bool rhs_row(const FlockState& s, const SystemParams& p, int i, Derivative& out) {
    const int N = s.count();
    const int n = s.n;
    const double* xi = s.x.data() + static_cast<std::size_t>(i) * n;
    const double* vi = s.v.data() + static_cast<std::size_t>(i) * n;
    double* dvi = out.dv.data() + static_cast<std::size_t>(i) * n;
    double* dxi = out.dx.data() + static_cast<std::size_t>(i) * n;

    for (int k = 0; k < n; ++k) {
        dxi[k] = vi[k];
        dvi[k] = 0.0;
    }
    double dth = 0.0;
    for (int j = 0; j < N; ++j) {
        if (j == i) continue;
        const double* xj = s.x.data() + static_cast<std::size_t>(j) * n;
        const double* vj = s.v.data() + static_cast<std::size_t>(j) * n;
        double r2 = 0.0;
        for (int k = 0; k < n; ++k) {
            double d = xi[k] - xj[k];
            r2 += d * d;
        }
        double w = s.m[j] * p.kernel(std::sqrt(r2));
        for (int k = 0; k < n; ++k) dvi[k] += w * (vj[k] - vi[k]);
        dth += w * (s.theta[j] - s.theta[i]);
    }
    out.dtheta[i] = p.kappa * dth;

    double sp2 = 0.0;
    for (int k = 0; k < n; ++k) sp2 += vi[k] * vi[k];
    double speed = std::sqrt(sp2);
    double coef = p.sigma * (s.theta[i] - pow_p(speed, p.p));
    bool ok = true;
    for (int k = 0; k < n; ++k) {
        dvi[k] += coef * vi[k];
        ok = ok && std::isfinite(dvi[k]);
    }
    return ok && std::isfinite(out.dtheta[i]);
}

}  // namespace

void rhs_full_serial(const FlockState& s, const SystemParams& p, Derivative& out) {
    const int N = s.count();
    out.resize(N, s.n);
    for (int i = 0; i < N; ++i)
        if (!rhs_row(s, p, i, out))
            throw IntegrationError("rhs_full: non-finite derivative at agent " + std::to_string(i),
                                   std::numeric_limits<double>::quiet_NaN());
}

void rhs_full_parallel(const FlockState& s, const SystemParams& p, Derivative& out) {
    const int N = s.count();
    out.resize(N, s.n);
    std::atomic<int> bad{-1};
#pragma omp parallel for schedule(static)
    for (int i = 0; i < N; ++i) {
        if (!rhs_row(s, p, i, out)) {
            int expected = -1;
            bad.compare_exchange_strong(expected, i);
        }
    }
    if (bad.load() >= 0)
        throw IntegrationError("rhs_full: non-finite derivative at agent " +
                                   std::to_string(bad.load()),
                               std::numeric_limits<double>::quiet_NaN());
}

Derivative rhs_full(const FlockState& s, const SystemParams& p) {
    Derivative d;
#ifdef _OPENMP
    if (s.count() >= 64) {
        rhs_full_parallel(s, p, d);
        return d;
    }
#endif
    rhs_full_serial(s, p, d);
    return d;
}

std::vector<double> rhs_opinion(const std::vector<double>& y, const nash::OpinionGame& game) {
    if (y.size() != game.theta.size())
        throw std::invalid_argument("rhs_opinion: y has wrong size");
    for (double yi : y)
        if (!(yi > 0.0)) throw std::invalid_argument("rhs_opinion: y must be positive");
    const int N = game.count();
    const double M = game.total_mass();
    double sy = 0.0;
    for (int k = 0; k < N; ++k) sy += game.m[k] * y[k];
    std::vector<double> dy(N);
    for (int i = 0; i < N; ++i)
        dy[i] = (sy - M * y[i]) + game.sigma * (game.theta[i] - pow_p(y[i], game.p)) * y[i];
    return dy;
}

Derivative rhs_velocity_only(const FlockState& s, const SystemParams& p) {
    if (p.kernel.type != Kernel::Type::uniform)
        throw std::invalid_argument("rhs_velocity_only: requires a uniform kernel");
    if (p.kappa != 0.0) throw std::invalid_argument("rhs_velocity_only: requires kappa == 0");
    const int N = s.count();
    const int n = s.n;
    const double lam = p.kernel.level;
    Derivative out;
    out.resize(N, n);

    double M = 0.0;
    std::vector<double> sv(n, 0.0);
    for (int j = 0; j < N; ++j) {
        M += s.m[j];
        for (int k = 0; k < n; ++k) sv[k] += s.m[j] * s.v[static_cast<std::size_t>(j) * n + k];
    }
    for (int i = 0; i < N; ++i) {
        const double* vi = s.v.data() + static_cast<std::size_t>(i) * n;
        double speed = s.speed(i);
        double coef = p.sigma * (s.theta[i] - pow_p(speed, p.p));
        for (int k = 0; k < n; ++k) {
            out.dx[static_cast<std::size_t>(i) * n + k] = vi[k];
            out.dv[static_cast<std::size_t>(i) * n + k] =
                lam * (sv[k] - M * vi[k]) + coef * vi[k];
        }
    }
    return out;
}

double speed_bound(const FlockState& s, const SystemParams& p) {
    double vmax = 0.0, tmax = 0.0;
    for (int i = 0; i < s.count(); ++i) {
        vmax = std::max(vmax, s.speed(i));
        tmax = std::max(tmax, s.theta[i]);
    }
    return std::max(vmax, std::pow(tmax, 1.0 / p.p));
}

namespace {

void axpy_state(FlockState& out, const FlockState& base, const Derivative& k, double h) {
    const std::size_t nn = base.x.size();
    for (std::size_t q = 0; q < nn; ++q) {
        out.x[q] = base.x[q] + h * k.dx[q];
        out.v[q] = base.v[q] + h * k.dv[q];
    }
    for (std::size_t q = 0; q < base.theta.size(); ++q)
        out.theta[q] = base.theta[q] + h * k.dtheta[q];
}

void rhs_dispatch(const FlockState& s, const SystemParams& p, Derivative& out) {
#ifdef _OPENMP
    if (s.count() >= 64) {
        rhs_full_parallel(s, p, out);
        return;
    }
#endif
    rhs_full_serial(s, p, out);
}

}  // namespace

Trajectory integrate(const FlockState& s0, const SystemParams& p, const IntegratorSpec& spec,
                     const ProbeSelection& probes) {
    if (!(spec.dt > 0.0)) throw std::invalid_argument("integrate: dt must be > 0");
    if (!(spec.t_final >= spec.dt))
        throw std::invalid_argument("integrate: t_final must be >= dt");
    if (spec.record_every < 1)
        throw std::invalid_argument("integrate: record_every must be >= 1");
    if (auto rep = validate(s0, p); !rep.ok)
        throw std::invalid_argument("integrate: invalid input: " + rep.message);

    const long long steps = std::llround(spec.t_final / spec.dt);
    const double bound = 10.0 * speed_bound(s0, p);
    const int N = s0.count();
    const int n = s0.n;

    FrameOptions fopts;
    fopts.with_gamma2d = probes.gamma2d;
    fopts.gamma2d_grid = probes.gamma2d_grid;

    Trajectory traj;
    traj.points.reserve(static_cast<std::size_t>(steps / spec.record_every) + 2);
    auto record = [&](double t, const FlockState& s) {
        TrajectoryPoint pt;
        pt.t = t;
        pt.state = s;
        if (probes.diagnostics) pt.diag = frame(s, fopts);
        traj.points.push_back(std::move(pt));
    };

    FlockState cur = s0;
    FlockState tmp = s0;
    Derivative k1, k2, k3, k4;
    k1.resize(N, n);
    k2.resize(N, n);
    k3.resize(N, n);
    k4.resize(N, n);

    record(0.0, cur);
    const double dt = spec.dt;
    for (long long s = 1; s <= steps; ++s) {
        try {
            rhs_dispatch(cur, p, k1);
            axpy_state(tmp, cur, k1, 0.5 * dt);
            rhs_dispatch(tmp, p, k2);
            axpy_state(tmp, cur, k2, 0.5 * dt);
            rhs_dispatch(tmp, p, k3);
            axpy_state(tmp, cur, k3, dt);
            rhs_dispatch(tmp, p, k4);
        } catch (const IntegrationError& e) {
            const double t_fail = static_cast<double>(s) * dt;
            throw IntegrationError(std::string(e.what()) + " (step reaching t = " +
                                       std::to_string(t_fail) + ")",
                                   t_fail);
        }

        const double w = dt / 6.0;
        for (std::size_t q = 0; q < cur.x.size(); ++q) {
            cur.x[q] += w * (k1.dx[q] + 2.0 * (k2.dx[q] + k3.dx[q]) + k4.dx[q]);
            cur.v[q] += w * (k1.dv[q] + 2.0 * (k2.dv[q] + k3.dv[q]) + k4.dv[q]);
        }
        for (int i = 0; i < N; ++i)
            cur.theta[i] += w * (k1.dtheta[i] + 2.0 * (k2.dtheta[i] + k3.dtheta[i]) + k4.dtheta[i]);

        const double t = static_cast<double>(s) * dt;
        traj.stop_time = t;

        for (std::size_t q = 0; q < cur.x.size(); ++q)
            if (!std::isfinite(cur.x[q]) || !std::isfinite(cur.v[q]))
                throw IntegrationError("integrate: non-finite state at t = " + std::to_string(t),
                                       t);
        for (int i = 0; i < N; ++i)
            if (!std::isfinite(cur.theta[i]))
                throw IntegrationError("integrate: non-finite theta at t = " + std::to_string(t),
                                       t);

        bool exceeded = false;
        for (int i = 0; i < N && !exceeded; ++i) exceeded = cur.speed(i) > bound;
        if (exceeded) {
            traj.blew_up = true;
            record(t, cur);
            break;
        }
        if (s % spec.record_every == 0 || s == steps) record(t, cur);
    }
    return traj;
}

std::vector<std::pair<double, double>> series(const Trajectory& traj, Field f) {
    std::vector<std::pair<double, double>> out;
    out.reserve(traj.points.size());
    for (const auto& pt : traj.points) {
        double v = 0.0;
        switch (f) {
            case Field::A: v = pt.diag.A; break;
            case Field::B: v = pt.diag.B; break;
            case Field::D: v = pt.diag.D; break;
            case Field::R: v = pt.diag.R; break;
            case Field::gamma: v = pt.diag.gamma; break;
            case Field::gamma2d: v = pt.diag.gamma2d; break;
            case Field::margin: v = pt.diag.margin; break;
            case Field::one_minus_cos_gamma2d: v = one_minus_cos(pt.diag.gamma2d); break;
            case Field::max_speed: {
                double m = 0.0;
                for (int i = 0; i < pt.state.count(); ++i) m = std::max(m, pt.state.speed(i));
                v = m;
                break;
            }
            case Field::min_speed: {
                double m = std::numeric_limits<double>::infinity();
                for (int i = 0; i < pt.state.count(); ++i) m = std::min(m, pt.state.speed(i));
                v = m;
                break;
            }
        }
        out.emplace_back(pt.t, v);
    }
    return out;
}

}  // namespace csf
