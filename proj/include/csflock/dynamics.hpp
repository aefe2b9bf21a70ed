#pragma once

#include <stdexcept>
#include <vector>

#include "csflock/diagnostics.hpp"
#include "csflock/model.hpp"
#include "csflock/nash.hpp"

namespace csf {

/// Time derivative of a FlockState. The theta components conserve the
/// weighted sum: sum_i m_i dtheta_i = 0 up to rounding.
struct Derivative {
    std::vector<double> dx;
    std::vector<double> dv;
    std::vector<double> dtheta;

    void resize(int N, int n) {
        dx.assign(static_cast<std::size_t>(N) * n, 0.0);
        dv.assign(static_cast<std::size_t>(N) * n, 0.0);
        dtheta.assign(N, 0.0);
    }
};

/// Classical 4-stage Runge-Kutta with a fixed step; fixed stepping keeps
/// rate fits and symmetry checks bit-reproducible.
struct IntegratorSpec {
    double dt = 1e-3;
    double t_final = 1.0;
    int record_every = 10;
};

struct ProbeSelection {
    bool diagnostics = true;
    bool gamma2d = true;
    int gamma2d_grid = 0;  // 0: dimension default
};

struct TrajectoryPoint {
    double t = 0.0;
    FlockState state;
    DiagnosticsFrame diag;
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    bool blew_up = false;    // some |v_i| crossed 10x the a-priori speed bound
    double stop_time = 0.0;  // time of the last computed step
};

struct IntegrationError : std::runtime_error {
    IntegrationError(const std::string& what, double when)
        : std::runtime_error(what), t(when) {}
    double t;
};

/// Right-hand side of the full system:
///   dx_i = v_i
///   dv_i = sum_j m_j phi(|x_i-x_j|)(v_j - v_i) + sigma (theta_i - |v_i|^p) v_i
///   dth_i = kappa sum_j m_j phi(|x_i-x_j|)(theta_j - theta_i)
/// The parallel version splits agents across threads and is bit-identical to
/// the serial reference.
void rhs_full_serial(const FlockState& s, const SystemParams& p, Derivative& out);
void rhs_full_parallel(const FlockState& s, const SystemParams& p, Derivative& out);
Derivative rhs_full(const FlockState& s, const SystemParams& p);

/// dy_i = sum_k m_k (y_k - y_i) + sigma (theta_i - y_i^p) y_i, y > 0.
std::vector<double> rhs_opinion(const std::vector<double>& y, const nash::OpinionGame& game);

/// Position-free velocity dynamics; requires a uniform kernel and kappa == 0.
Derivative rhs_velocity_only(const FlockState& s, const SystemParams& p);

/// A-priori speed bound max(max_i |v_i|, theta_+^{1/p}) from the logistic
/// inequality on |v_+|^p.
double speed_bound(const FlockState& s, const SystemParams& p);

/// Fixed-step RK4 trajectory. Frames are recorded at t = 0, every
/// record_every-th step, and at the final step. Integration stops early with
/// blew_up set when any speed exceeds 10x the a-priori bound, and throws
/// IntegrationError on NaN/Inf.
Trajectory integrate(const FlockState& s0, const SystemParams& p, const IntegratorSpec& spec,
                     const ProbeSelection& probes = {});

enum class Field { A, B, D, R, gamma, gamma2d, margin, one_minus_cos_gamma2d, max_speed, min_speed };

std::vector<std::pair<double, double>> series(const Trajectory& traj, Field f);

}  // namespace csf
