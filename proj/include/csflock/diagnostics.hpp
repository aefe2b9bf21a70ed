#pragma once

#include <array>
#include <utility>
#include <vector>

#include "csflock/model.hpp"

namespace csf {

/// One time slice of the monitored quantities.
///
///   A       max_{i,j} |v_i - v_j|
///   B       max_{i,j} |theta_i - theta_j|
///   D       diam{x_i}
///   R       max_{i',i''} |v_{i''}|^2 / |v_{i'}|^2   (>= 1 when defined)
///   gamma   max pairwise velocity angle
///   gamma2d max projected pairwise angle over 2D planes containing e_n
///   margin  sector margin min_i v_i^n / |v_i|
///
/// R, gamma, gamma2d and margin need every speed to be positive; when some
/// agent is at rest they are NaN and angles_defined is false.
struct DiagnosticsFrame {
    double A = 0.0;
    double B = 0.0;
    double D = 0.0;
    double R = 1.0;
    double gamma = 0.0;
    double gamma2d = 0.0;
    double margin = 0.0;
    bool angles_defined = true;
    int gamma2d_skipped = 0;
};

struct FrameOptions {
    bool with_gamma2d = true;
    int gamma2d_grid = 0;  // 0: 64 directions for n == 3, 256 for n >= 4
};

DiagnosticsFrame frame(const FlockState& s, const FrameOptions& opts = {});

/// Angle between two vectors in [0, pi], well conditioned near 0 and pi.
double angle_between(std::span<const double> a, std::span<const double> b);

/// 1 - cos(angle) evaluated as 2 sin^2(angle/2); keeps full relative accuracy
/// for the decay fits when the angle is tiny.
double one_minus_cos(double angle);

/// Projection of v onto the plane spanned by (u, e_n), in that orthonormal
/// frame: returns (v' . u, v^n) where v' is the first n-1 coordinates.
/// u must be a unit vector in R^{n-1} (tolerance 1e-12).
std::array<double, 2> project_plane(std::span<const double> v, std::span<const double> u);

struct Gamma2dResult {
    double value = 0.0;
    int skipped = 0;  // (plane, pair) candidates dropped for zero-length projections
};

/// Lower-bound search for the Grassmannian-reduced angle
///   gamma2d = max over planes containing e_n of the projected pairwise angle.
/// Candidates: the per-pair planes spanned by e_n and the leading n-1
/// coordinates of v_i - v_j (both raw and unit-vector differences; the latter
/// family realizes gamma2d >= gamma), plus a quasi-uniform grid of grid_size
/// directions on the unit sphere of R^{n-1}.
Gamma2dResult gamma2d_serial(const FlockState& s, int grid_size);
Gamma2dResult gamma2d(const FlockState& s, int grid_size);

int default_gamma2d_grid(int n);

/// Log-linear least squares fit over a time window.
struct RateFit {
    double rate = 0.0;       // slope of log(value) vs t
    double intercept = 0.0;  // log(value) at t = 0
    double r_squared = 1.0;
    double t1 = 0.0;
    double t2 = 0.0;
    int samples = 0;
};

/// Fits value ~ exp(intercept + rate * t) on samples with t in [t1, t2].
/// Requires at least 10 samples in the window, all with positive values.
RateFit fit_rate(const std::vector<std::pair<double, double>>& series, double t1, double t2);

}  // namespace csf
