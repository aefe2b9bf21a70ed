#include "csflock/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "csflock/rng.hpp"

namespace csf {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        double d = a[k] - b[k];
        s += d * d;
    }
    return std::sqrt(s);
}

double angle2d(double ax, double ay, double bx, double by) {
    double na = std::hypot(ax, ay), nb = std::hypot(bx, by);
    ax /= na;
    ay /= na;
    bx /= nb;
    by /= nb;
    double d = std::hypot(ax - bx, ay - by);
    double s = std::hypot(ax + bx, ay + by);
    return 2.0 * std::atan2(d, s);
}

}  // namespace

double angle_between(std::span<const double> a, std::span<const double> b) {
    // 2 atan2(|a/|a| - b/|b||, |a/|a| + b/|b||); equals arccos of the clamped
    // normalized dot product but stays accurate for near-parallel vectors.
    double na = norm(a), nb = norm(b);
    double d = 0.0, s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        double ua = a[k] / na, ub = b[k] / nb;
        double dm = ua - ub, sp = ua + ub;
        d += dm * dm;
        s += sp * sp;
    }
    return 2.0 * std::atan2(std::sqrt(d), std::sqrt(s));
}

double one_minus_cos(double angle) {
    double h = std::sin(0.5 * angle);
    return 2.0 * h * h;
}

std::array<double, 2> project_plane(std::span<const double> v, std::span<const double> u) {
    const std::size_t d = u.size();
    if (v.size() != d + 1) throw std::invalid_argument("project_plane: u must live in R^{n-1}");
    double nu = norm(u);
    if (std::abs(nu - 1.0) > 1e-12)
        throw std::invalid_argument("project_plane: u must be a unit vector");
    double t = 0.0;
    for (std::size_t k = 0; k < d; ++k) t += v[k] * u[k];
    return {t, v[d]};
}

int default_gamma2d_grid(int n) {
    if (n <= 3) return 64;
    return 256;
}

namespace {

// Quasi-uniform directions on the unit sphere of R^d. Antipodal directions
// define the same plane, so half coverage is enough.
std::vector<std::vector<double>> plane_grid(int d, int grid_size) {
    std::vector<std::vector<double>> dirs;
    if (d == 1) {
        dirs.push_back({1.0});
        return dirs;
    }
    if (d == 2) {
        dirs.reserve(grid_size);
        for (int k = 0; k < grid_size; ++k) {
            double a = kPi * k / grid_size;
            dirs.push_back({std::cos(a), std::sin(a)});
        }
        return dirs;
    }
    if (d == 3) {
        // golden-angle spiral on the upper hemisphere
        const double ga = kPi * (3.0 - std::sqrt(5.0));
        dirs.reserve(grid_size);
        for (int k = 0; k < grid_size; ++k) {
            double z = (k + 0.5) / grid_size;
            double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            double a = ga * k;
            dirs.push_back({r * std::cos(a), r * std::sin(a), z});
        }
        return dirs;
    }
    // d >= 4: pinned pseudorandom directions
    Rng rng(0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(d));
    dirs.reserve(grid_size);
    for (int k = 0; k < grid_size; ++k) {
        std::vector<double> u(d);
        double s2 = 0.0;
        do {
            s2 = 0.0;
            for (int j = 0; j < d; ++j) {
                u[j] = rng.normal();
                s2 += u[j] * u[j];
            }
        } while (s2 < 1e-12);
        double inv = 1.0 / std::sqrt(s2);
        for (int j = 0; j < d; ++j) u[j] *= inv;
        dirs.push_back(u);
    }
    return dirs;
}

// Candidate planes from velocity differences. For the maximizing pair, the
// plane through e_n and the unit-vector difference realizes a projected angle
// at least as large as the full angle, which makes the search a certified
// lower bound with gamma2d >= gamma.
void pair_planes(const FlockState& s, std::vector<std::vector<double>>& dirs) {
    const int N = s.count();
    const int d = s.n - 1;
    std::vector<double> w(d);
    for (int i = 0; i < N; ++i) {
        for (int j = i + 1; j < N; ++j) {
            auto vi = s.vel(i), vj = s.vel(j);
            // raw difference
            double s2 = 0.0;
            for (int k = 0; k < d; ++k) {
                w[k] = vi[k] - vj[k];
                s2 += w[k] * w[k];
            }
            if (s2 > 1e-28) {
                double inv = 1.0 / std::sqrt(s2);
                std::vector<double> u(d);
                for (int k = 0; k < d; ++k) u[k] = w[k] * inv;
                dirs.push_back(std::move(u));
            }
            // unit-vector difference
            double ni = norm(vi), nj = norm(vj);
            s2 = 0.0;
            for (int k = 0; k < d; ++k) {
                w[k] = vi[k] / ni - vj[k] / nj;
                s2 += w[k] * w[k];
            }
            if (s2 > 1e-28) {
                double inv = 1.0 / std::sqrt(s2);
                std::vector<double> u(d);
                for (int k = 0; k < d; ++k) u[k] = w[k] * inv;
                dirs.push_back(std::move(u));
            }
        }
    }
}

// Largest projected pairwise angle in the plane (u, e_n); zero-length
// projections are skipped and counted.
void scan_plane(const FlockState& s, const std::vector<double>& u, double& best, int& skipped) {
    const int N = s.count();
    const int d = s.n - 1;
    // projected coordinates (v' . u, v^n) per agent
    std::vector<std::array<double, 2>> proj(N);
    std::vector<bool> ok(N);
    for (int i = 0; i < N; ++i) {
        auto vi = s.vel(i);
        double t = 0.0;
        for (int k = 0; k < d; ++k) t += vi[k] * u[k];
        proj[i] = {t, vi[d]};
        double len = std::hypot(t, vi[d]);
        ok[i] = len > 1e-15 * (1.0 + norm(vi));
    }
    for (int i = 0; i < N; ++i) {
        for (int j = i + 1; j < N; ++j) {
            if (!ok[i] || !ok[j]) {
                ++skipped;
                continue;
            }
            double a = angle2d(proj[i][0], proj[i][1], proj[j][0], proj[j][1]);
            best = std::max(best, a);
        }
    }
}

Gamma2dResult gamma2d_impl(const FlockState& s, int grid_size, bool parallel) {
    if (s.n < 2) throw std::invalid_argument("gamma2d: needs dimension n >= 2");
    if (grid_size <= 0) grid_size = default_gamma2d_grid(s.n);

    std::vector<std::vector<double>> dirs = plane_grid(s.n - 1, grid_size);
    pair_planes(s, dirs);

    double best = 0.0;
    int skipped = 0;
    const int P = static_cast<int>(dirs.size());
    if (parallel) {
#pragma omp parallel for schedule(static) reduction(max : best) reduction(+ : skipped)
        for (int q = 0; q < P; ++q) scan_plane(s, dirs[q], best, skipped);
    } else {
        for (int q = 0; q < P; ++q) scan_plane(s, dirs[q], best, skipped);
    }
    return {best, skipped};
}

}  // namespace

Gamma2dResult gamma2d_serial(const FlockState& s, int grid_size) {
    return gamma2d_impl(s, grid_size, false);
}

Gamma2dResult gamma2d(const FlockState& s, int grid_size) {
#ifdef _OPENMP
    return gamma2d_impl(s, grid_size, s.count() * s.count() * std::max(grid_size, 16) > 4096);
#else
    return gamma2d_impl(s, grid_size, false);
#endif
}

DiagnosticsFrame frame(const FlockState& s, const FrameOptions& opts) {
    DiagnosticsFrame f;
    const int N = s.count();
    const double nan = std::numeric_limits<double>::quiet_NaN();

    for (int i = 0; i < N; ++i) {
        for (int j = i + 1; j < N; ++j) {
            f.A = std::max(f.A, dist(s.vel(i), s.vel(j)));
            f.D = std::max(f.D, dist(s.pos(i), s.pos(j)));
            f.B = std::max(f.B, std::abs(s.theta[i] - s.theta[j]));
        }
    }

    double smin = std::numeric_limits<double>::infinity(), smax = 0.0;
    for (int i = 0; i < N; ++i) {
        double sp = s.speed(i);
        smin = std::min(smin, sp);
        smax = std::max(smax, sp);
    }
    if (smin == 0.0) {
        f.angles_defined = false;
        f.R = f.gamma = f.gamma2d = f.margin = nan;
        return f;
    }

    f.R = (smax / smin) * (smax / smin);
    f.margin = sector_margin(s);
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) f.gamma = std::max(f.gamma, angle_between(s.vel(i), s.vel(j)));

    if (opts.with_gamma2d && s.n >= 2) {
        auto g = gamma2d(s, opts.gamma2d_grid);
        f.gamma2d = g.value;
        f.gamma2d_skipped = g.skipped;
    } else if (opts.with_gamma2d) {
        f.gamma2d = f.gamma;  // n == 1: no transverse directions
    } else {
        f.gamma2d = nan;
    }
    return f;
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& series, double t1, double t2) {
    RateFit fit;
    fit.t1 = t1;
    fit.t2 = t2;
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    int n = 0;
    for (const auto& [t, v] : series) {
        if (t < t1 || t > t2) continue;
        if (!(v > 0.0))
            throw std::invalid_argument("fit_rate: nonpositive value at t = " + std::to_string(t));
        double y = std::log(v);
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
        ++n;
    }
    if (n < 10)
        throw std::invalid_argument("fit_rate: need at least 10 samples in window, got " +
                                    std::to_string(n));
    fit.samples = n;
    double det = n * stt - st * st;
    if (det <= 0.0) throw std::invalid_argument("fit_rate: degenerate time values in window");
    fit.rate = (n * sty - st * sy) / det;
    fit.intercept = (sy - fit.rate * st) / n;

    double ss_res = 0.0, ss_tot = 0.0;
    double ybar = sy / n;
    for (const auto& [t, v] : series) {
        if (t < t1 || t > t2) continue;
        double y = std::log(v);
        double e = y - (fit.intercept + fit.rate * t);
        ss_res += e * e;
        ss_tot += (y - ybar) * (y - ybar);
    }
    fit.r_squared = ss_tot <= 1e-30 ? 1.0 : std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
    return fit;
}

}  // namespace csf
