#include "csflock/potential.hpp"

#include <cmath>
#include <stdexcept>

#include "csflock/model.hpp"

namespace csf::gradflow {

namespace {

void check_positive(const std::vector<double>& z, const nash::OpinionGame& g, const char* who) {
    if (z.size() != g.theta.size())
        throw std::invalid_argument(std::string(who) + ": z has wrong size");
    for (double zi : z)
        if (!(zi > 0.0)) throw std::invalid_argument(std::string(who) + ": z must be positive");
}

double norm2(const std::vector<double>& a) {
    double s = 0.0;
    for (double x : a) s += x * x;
    return std::sqrt(s);
}

}  // namespace

std::vector<double> rescale(const std::vector<double>& y, const nash::OpinionGame& g) {
    check_positive(y, g, "rescale");
    std::vector<double> z(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) z[i] = std::sqrt(g.m[i]) * y[i];
    return z;
}

std::vector<double> unscale(const std::vector<double>& z, const nash::OpinionGame& g) {
    check_positive(z, g, "unscale");
    std::vector<double> y(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) y[i] = z[i] / std::sqrt(g.m[i]);
    return y;
}

double potential(const std::vector<double>& z, const nash::OpinionGame& g) {
    check_positive(z, g, "potential");
    const int N = g.count();
    const double M = g.total_mass();
    double s1 = 0.0;
    for (int j = 0; j < N; ++j) s1 += std::sqrt(g.m[j]) * z[j];
    double quad = 0.0, prop = 0.0;
    for (int j = 0; j < N; ++j) {
        quad += (g.sigma * g.theta[j] - M) * z[j] * z[j];
        prop += std::pow(z[j], g.p + 2.0) / std::pow(g.m[j], 0.5 * g.p);
    }
    return -0.5 * s1 * s1 - 0.5 * quad + g.sigma / (g.p + 2.0) * prop;
}

std::vector<double> gradient(const std::vector<double>& z, const nash::OpinionGame& g) {
    check_positive(z, g, "gradient");
    const int N = g.count();
    const double M = g.total_mass();
    double s1 = 0.0;
    for (int j = 0; j < N; ++j) s1 += std::sqrt(g.m[j]) * z[j];
    std::vector<double> grad(N);
    for (int i = 0; i < N; ++i) {
        double mi_p = std::pow(g.m[i], 0.5 * g.p);
        grad[i] = -std::sqrt(g.m[i]) * s1 - (g.sigma * g.theta[i] - M) * z[i] +
                  g.sigma * std::pow(z[i], g.p + 1.0) / mi_p;
    }
    return grad;
}

ZTrajectory gradient_flow(const std::vector<double>& z0, const nash::OpinionGame& g, double dt,
                          double t_max, double grad_tol, int record_every) {
    check_positive(z0, g, "gradient_flow");
    if (!(dt > 0.0) || !(t_max >= dt))
        throw std::invalid_argument("gradient_flow: need dt > 0 and t_max >= dt");
    if (record_every < 1) throw std::invalid_argument("gradient_flow: record_every must be >= 1");

    const int N = g.count();
    const long long steps = std::llround(t_max / dt);
    ZTrajectory traj;
    std::vector<double> z = z0;
    traj.points.push_back({0.0, z});

    std::vector<double> k1, k2, k3, k4, tmp(N);
    auto f = [&](const std::vector<double>& w) {
        std::vector<double> gr = gradient(w, g);
        for (double& x : gr) x = -x;
        return gr;
    };

    for (long long s = 1; s <= steps; ++s) {
        k1 = f(z);
        for (int i = 0; i < N; ++i) tmp[i] = z[i] + 0.5 * dt * k1[i];
        k2 = f(tmp);
        for (int i = 0; i < N; ++i) tmp[i] = z[i] + 0.5 * dt * k2[i];
        k3 = f(tmp);
        for (int i = 0; i < N; ++i) tmp[i] = z[i] + dt * k3[i];
        k4 = f(tmp);
        for (int i = 0; i < N; ++i)
            z[i] += dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);

        const double t = static_cast<double>(s) * dt;
        for (double zi : z)
            if (!std::isfinite(zi))
                throw std::runtime_error("gradient_flow: non-finite state at t = " +
                                         std::to_string(t));

        double gn = norm2(gradient(z, g));
        traj.final_grad_norm = gn;
        if (gn < grad_tol) {
            traj.points.push_back({t, z});
            traj.converged = true;
            return traj;
        }
        if (s % record_every == 0 || s == steps) traj.points.push_back({t, z});
    }
    return traj;
}

DescentReport descent_monitor(const ZTrajectory& traj, const nash::OpinionGame& g) {
    DescentReport rep;
    if (traj.points.empty()) return rep;
    rep.phi.reserve(traj.points.size());
    for (const auto& pt : traj.points) rep.phi.push_back(potential(pt.z, g));
    for (std::size_t k = 0; k + 1 < traj.points.size(); ++k) {
        const auto& a = traj.points[k].z;
        const auto& b = traj.points[k + 1].z;
        double step = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) step += (b[i] - a[i]) * (b[i] - a[i]);
        rep.arc_length += std::sqrt(step);
        double uptick = rep.phi[k + 1] - rep.phi[k];
        rep.max_uptick = std::max(rep.max_uptick, uptick);
        if (uptick > 1e-9) rep.monotone = false;
    }
    rep.endpoint = traj.points.back().z;
    return rep;
}

}  // namespace csf::gradflow
