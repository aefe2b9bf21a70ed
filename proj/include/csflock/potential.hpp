#pragma once

#include <vector>

#include "csflock/nash.hpp"

namespace csf::gradflow {

/// Rescaling z_i = sqrt(m_i) y_i that turns the opinion system into
/// dz/dt = -grad Phi(z) (plus any external perturbation).
std::vector<double> rescale(const std::vector<double>& y, const nash::OpinionGame& g);
std::vector<double> unscale(const std::vector<double>& z, const nash::OpinionGame& g);

/// Phi(z) = -1/2 (sum_j sqrt(m_j) z_j)^2 - 1/2 sum_j (sigma theta_j - M) z_j^2
///          + sigma/(p+2) sum_j z_j^{p+2} / m_j^{p/2}
double potential(const std::vector<double>& z, const nash::OpinionGame& g);

/// Analytic gradient; satisfies grad(z) = -(rescaled rhs_opinion) exactly.
std::vector<double> gradient(const std::vector<double>& z, const nash::OpinionGame& g);

struct ZPoint {
    double t = 0.0;
    std::vector<double> z;
};

struct ZTrajectory {
    std::vector<ZPoint> points;
    bool converged = false;      // ||grad Phi||_2 fell below the tolerance
    double final_grad_norm = 0.0;
};

/// Fixed-step RK4 on dz/dt = -grad Phi(z), stopping once ||grad Phi||_2 drops
/// below grad_tol or t reaches t_max.
ZTrajectory gradient_flow(const std::vector<double>& z0, const nash::OpinionGame& g, double dt,
                          double t_max, double grad_tol, int record_every = 1);

struct DescentReport {
    std::vector<double> phi;    // Phi at each recorded point
    double arc_length = 0.0;    // sum of ||z_{k+1} - z_k||_2
    bool monotone = true;       // Phi nonincreasing within 1e-9 per step
    double max_uptick = 0.0;    // largest observed Phi increase between frames
    std::vector<double> endpoint;
};

/// Convergence monitor for a rescaled trajectory; the trajectory may come from
/// gradient_flow or from speeds measured along a full-system run.
DescentReport descent_monitor(const ZTrajectory& traj, const nash::OpinionGame& g);

}  // namespace csf::gradflow
