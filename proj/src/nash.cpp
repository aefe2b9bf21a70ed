#include "csflock/nash.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "csflock/linalg.hpp"
#include "csflock/model.hpp"
#include "csflock/rng.hpp"

namespace csf::nash {

double OpinionGame::total_mass() const {
    return std::accumulate(m.begin(), m.end(), 0.0);
}

double OpinionGame::theta_min() const { return *std::min_element(theta.begin(), theta.end()); }
double OpinionGame::theta_max() const { return *std::max_element(theta.begin(), theta.end()); }

double OpinionGame::theta_mean() const {
    double tb = 0.0;
    for (int i = 0; i < count(); ++i) tb += m[i] * theta[i];
    return tb / total_mass();
}

void OpinionGame::check() const {
    if (theta.empty()) throw std::invalid_argument("OpinionGame: empty theta");
    if (m.size() != theta.size()) throw std::invalid_argument("OpinionGame: theta/m size mismatch");
    for (double t : theta)
        if (!(t > 0.0)) throw std::invalid_argument("OpinionGame: theta must be > 0");
    for (double w : m)
        if (!(w > 0.0)) throw std::invalid_argument("OpinionGame: masses must be > 0");
    if (!(sigma > 0.0)) throw std::invalid_argument("OpinionGame: sigma must be > 0");
    if (!(p > 0.0)) throw std::invalid_argument("OpinionGame: p must be > 0");
}

SortedGame sorted(const OpinionGame& g) {
    SortedGame out;
    const int N = g.count();
    out.perm.resize(N);
    std::iota(out.perm.begin(), out.perm.end(), 0);
    std::stable_sort(out.perm.begin(), out.perm.end(),
                     [&](int a, int b) { return g.theta[a] < g.theta[b]; });
    out.game.sigma = g.sigma;
    out.game.p = g.p;
    out.game.theta.resize(N);
    out.game.m.resize(N);
    for (int k = 0; k < N; ++k) {
        out.game.theta[k] = g.theta[out.perm[k]];
        out.game.m[k] = g.m[out.perm[k]];
    }
    return out;
}

namespace {

void check_positive(const std::vector<double>& y, const OpinionGame& g, const char* who) {
    if (y.size() != g.theta.size())
        throw std::invalid_argument(std::string(who) + ": y has wrong size");
    for (double yi : y)
        if (!(yi > 0.0)) throw std::invalid_argument(std::string(who) + ": y must be positive");
}

double inf_norm(const std::vector<double>& a) {
    double s = 0.0;
    for (double x : a) s = std::max(s, std::abs(x));
    return s;
}

}  // namespace

std::vector<double> residual(const std::vector<double>& y, const OpinionGame& g) {
    check_positive(y, g, "residual");
    const int N = g.count();
    const double M = g.total_mass();
    double sy = 0.0;
    for (int k = 0; k < N; ++k) sy += g.m[k] * y[k];
    std::vector<double> f(N);
    for (int i = 0; i < N; ++i)
        f[i] = M * y[i] - sy - g.sigma * (g.theta[i] - pow_p(y[i], g.p)) * y[i];
    return f;
}

std::vector<double> d_values(const std::vector<double>& y, const OpinionGame& g) {
    const int N = g.count();
    const double M = g.total_mass();
    std::vector<double> d(N);
    for (int i = 0; i < N; ++i)
        d[i] = M + g.sigma * (g.p + 1.0) * pow_p(y[i], g.p) - g.sigma * g.theta[i];
    return d;
}

std::vector<double> jacobian(const std::vector<double>& y, const OpinionGame& g) {
    check_positive(y, g, "jacobian");
    const int N = g.count();
    std::vector<double> d = d_values(y, g);
    std::vector<double> J(static_cast<std::size_t>(N) * N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) J[static_cast<std::size_t>(i) * N + j] = (i == j ? d[i] : 0.0) - g.m[j];
    return J;
}

double jacobian_det(const std::vector<double>& y, const OpinionGame& g, bool* used_fallback) {
    check_positive(y, g, "jacobian_det");
    const int N = g.count();
    std::vector<double> d = d_values(y, g);
    double scale = g.total_mass() + g.sigma * (g.p + 1.0) * pow_p(inf_norm(y), g.p) +
                   g.sigma * g.theta_max();
    for (int i = 0; i < N; ++i) {
        if (std::abs(d[i]) < 1e-14 * scale) {
            if (used_fallback) *used_fallback = true;
            return linalg::lu_determinant(jacobian(y, g), N);
        }
    }
    if (used_fallback) *used_fallback = false;
    double prod = 1.0, sum = 0.0;
    for (int i = 0; i < N; ++i) {
        prod *= d[i];
        sum += g.m[i] / d[i];
    }
    return prod * (1.0 - sum);
}

namespace {

// J = diag(d) - ones * m^T, solved via the rank-one update formula.
// Falls back to dense LU near a singular diagonal or denominator.
bool newton_direction(const std::vector<double>& d, const OpinionGame& g,
                      const std::vector<double>& f, std::vector<double>& step) {
    const int N = g.count();
    double scale = 0.0;
    for (double di : d) scale = std::max(scale, std::abs(di));
    bool ok = scale > 0.0;
    double denom = 1.0;
    if (ok) {
        double sum = 0.0;
        for (int i = 0; i < N; ++i) {
            if (std::abs(d[i]) < 1e-13 * scale) {
                ok = false;
                break;
            }
            sum += g.m[i] / d[i];
        }
        denom = 1.0 - sum;
        if (std::abs(denom) < 1e-13) ok = false;
    }
    step.assign(N, 0.0);
    if (ok) {
        double mdr = 0.0;
        for (int i = 0; i < N; ++i) mdr += g.m[i] * (-f[i]) / d[i];
        double alpha = mdr / denom;
        for (int i = 0; i < N; ++i) step[i] = (-f[i] + alpha) / d[i];
        return true;
    }
    // dense fallback
    std::vector<double> J(static_cast<std::size_t>(N) * N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) J[static_cast<std::size_t>(i) * N + j] = (i == j ? d[i] : 0.0) - g.m[j];
    std::vector<double> rhs(N);
    for (int i = 0; i < N; ++i) rhs[i] = -f[i];
    if (!linalg::lu_solve(std::move(J), N, rhs)) return false;
    step = std::move(rhs);
    return true;
}

// Potential of the rescaled gradient flow expressed in y-coordinates:
// Phi = -1/2 (sum m_j y_j)^2 - 1/2 sum (sigma theta_j - M) m_j y_j^2
//       + sigma/(p+2) sum m_j y_j^{p+2}.
// Strictly decreasing along dy/dt = -F, with the equilibrium as the unique
// positive critical point; used as the line-search merit when a raw Newton
// step finds no residual decrease.
double merit(const std::vector<double>& y, const OpinionGame& g) {
    const int N = g.count();
    const double M = g.total_mass();
    double s1 = 0.0, quad = 0.0, prop = 0.0;
    for (int j = 0; j < N; ++j) {
        s1 += g.m[j] * y[j];
        quad += (g.sigma * g.theta[j] - M) * g.m[j] * y[j] * y[j];
        prop += g.m[j] * std::pow(y[j], g.p + 2.0);
    }
    return -0.5 * s1 * s1 - 0.5 * quad + g.sigma / (g.p + 2.0) * prop;
}

Equilibrium make_equilibrium(const std::vector<double>& y, const OpinionGame& g, int iters,
                             bool converged) {
    Equilibrium eq;
    eq.y = y;
    eq.iterations = iters;
    eq.converged = converged;
    eq.residual_norm = inf_norm(residual(y, g));
    const int N = g.count();
    const double M = g.total_mass();
    double sy = 0.0;
    for (int i = 0; i < N; ++i) sy += g.m[i] * y[i];
    eq.y_bar = sy / M;
    eq.d = d_values(y, g);
    eq.sum_m_over_d = 0.0;
    for (int i = 0; i < N; ++i) eq.sum_m_over_d += g.m[i] / eq.d[i];
    eq.minors.resize(N);
    double prod = 1.0, sum = 0.0;
    for (int k = 0; k < N; ++k) {
        prod *= eq.d[k];
        sum += g.m[k] / eq.d[k];
        eq.minors[k] = prod * (1.0 - sum);
    }
    eq.jacobian_det = eq.minors[N - 1];
    eq.minors_positive = std::all_of(eq.minors.begin(), eq.minors.end(),
                                     [](double v) { return v > 0.0; });
    eq.shift_index = 0;
    for (int i = 0; i < N; ++i)
        if (y[i] <= eq.y_bar * (1.0 + 1e-12)) ++eq.shift_index;
    return eq;
}

}  // namespace

Equilibrium solve(const OpinionGame& g, const std::vector<double>* seed) {
    g.check();
    const int N = g.count();
    const double invp = 1.0 / g.p;
    const double lo = std::pow(g.theta_min(), invp) * (1.0 - 1e-6);
    const double hi = std::pow(g.theta_max(), invp) * (1.0 + 1e-6);

    std::vector<double> y(N);
    if (seed) {
        check_positive(*seed, g, "solve");
        y = *seed;
    } else {
        for (int i = 0; i < N; ++i) y[i] = std::pow(g.theta[i], invp);
    }

    auto in_box = [&](const std::vector<double>& w) {
        return std::all_of(w.begin(), w.end(), [&](double wi) { return wi >= lo && wi <= hi; });
    };
    auto stop_tol = [&](const std::vector<double>& w) {
        return 1e-12 * (1.0 + g.sigma * g.theta_max() * inf_norm(w));
    };

    std::vector<double> f = residual(y, g);
    double fn = inf_norm(f);
    std::vector<double> best_y = y;
    double best_fn = fn;

    std::vector<double> step, cand, fc;
    for (int it = 0; it < 200; ++it) {
        if (fn <= stop_tol(y)) return make_equilibrium(y, g, it, true);

        std::vector<double> d = d_values(y, g);
        if (!newton_direction(d, g, f, step))
            throw SolveFailure("solve: singular Jacobian", make_equilibrium(best_y, g, it, false));

        double alpha = 1.0;
        cand.resize(N);
        bool accepted = false;
        for (int h = 0; h <= 40; ++h) {
            for (int i = 0; i < N; ++i) cand[i] = y[i] + alpha * step[i];
            if (in_box(cand)) {
                fc = residual(cand, g);
                double fcn = inf_norm(fc);
                if (fcn < fn) {
                    y = cand;
                    f = fc;
                    fn = fcn;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            // far from the solution the Jacobian can be indefinite and the
            // Newton direction useless; fall back to a damped step of the
            // flow dy/dt = -F, which descends the potential and keeps the
            // box forward-invariant
            double L = g.total_mass();
            for (int i = 0; i < N; ++i) L = std::max(L, std::abs(d[i]));
            double h = 1.0 / L;
            const double phi0 = merit(y, g);
            for (int halvings = 0; halvings <= 60; ++halvings) {
                for (int i = 0; i < N; ++i) cand[i] = y[i] - h * f[i];
                if (in_box(cand) && merit(cand, g) < phi0) {
                    y = cand;
                    f = residual(y, g);
                    fn = inf_norm(f);
                    accepted = true;
                    break;
                }
                h *= 0.5;
            }
        }
        if (!accepted) break;  // stagnant at the rounding floor
        if (fn < best_fn) {
            best_fn = fn;
            best_y = y;
        }
    }
    if (fn <= stop_tol(y)) return make_equilibrium(y, g, 200, true);
    throw SolveFailure("solve: no convergence after 200 iterations",
                       make_equilibrium(best_y, g, 200, false));
}

double payoff(const std::vector<double>& y, const OpinionGame& g, int i) {
    check_positive(y, g, "payoff");
    const double M = g.total_mass();
    double ybar = 0.0;
    for (int k = 0; k < g.count(); ++k) ybar += g.m[k] * y[k];
    ybar /= M;
    double yi = y[i];
    return g.sigma * (0.5 * g.theta[i] * yi * yi - std::pow(yi, g.p + 2.0) / (g.p + 2.0)) -
           0.5 * M * (ybar - yi) * (ybar - yi);
}

double payoff_curvature(const std::vector<double>& y, const OpinionGame& g, int i) {
    check_positive(y, g, "payoff_curvature");
    return g.sigma * (g.theta[i] - (g.p + 1.0) * pow_p(y[i], g.p)) - g.total_mass();
}

namespace {

// Deviation payoff of agent i playing r while the mean opinion stays put.
double deviation_payoff(double r, double theta_i, double ybar, double sigma, double p, double M) {
    return sigma * (0.5 * theta_i * r * r - std::pow(r, p + 2.0) / (p + 2.0)) -
           0.5 * M * (ybar - r) * (ybar - r);
}

}  // namespace

NashReport verify_nash_point(const std::vector<double>& y, const OpinionGame& g, int grid) {
    check_positive(y, g, "verify_nash");
    if (grid < 2) throw std::invalid_argument("verify_nash: grid must be >= 2");
    const int N = g.count();
    const double M = g.total_mass();
    const double invp = 1.0 / g.p;
    const double tlo = g.theta_min(), thi = g.theta_max();
    double ybar = 0.0;
    for (int k = 0; k < N; ++k) ybar += g.m[k] * y[k];
    ybar /= M;

    NashReport rep;
    rep.grid = grid;
    for (int i = 0; i < N; ++i) {
        const double base = deviation_payoff(y[i], g.theta[i], ybar, g.sigma, g.p, M);
        double best_val = base, best_r = y[i];
        for (int j = 0; j <= grid; ++j) {
            double rp = tlo + (thi - tlo) * j / grid;
            double r = std::pow(rp, invp);
            double val = deviation_payoff(r, g.theta[i], ybar, g.sigma, g.p, M);
            if (val > best_val) {
                best_val = val;
                best_r = r;
            }
        }
        double cell = (std::pow(thi, invp) - std::pow(tlo, invp)) / grid;
        double tol = 1e-12 * (1.0 + std::abs(base));
        if (best_val > base + tol && std::abs(best_r - y[i]) > cell) {
            rep.verified = false;
            rep.violations.push_back({i, best_r, best_val - base});
        }
    }
    return rep;
}

NashReport verify_nash(const Equilibrium& eq, const OpinionGame& g, int grid) {
    return verify_nash_point(eq.y, g, grid);
}

StructureReport structure_report(const Equilibrium& eq, const OpinionGame& g) {
    if (!std::is_sorted(g.theta.begin(), g.theta.end()))
        throw std::invalid_argument("structure_report: theta must be sorted ascending");
    const int N = g.count();
    const double M = g.total_mass();
    const double tol = 1e-10;
    StructureReport rep;
    rep.y_bar = eq.y_bar;
    rep.shift_index = eq.shift_index;
    auto violate = [&](std::string msg) {
        rep.ok = false;
        rep.violations.push_back(std::move(msg));
    };

    const auto& y = eq.y;
    for (int i = 0; i + 1 < N; ++i)
        if (y[i] > y[i + 1] + tol)
            violate("monotonicity fails between agents " + std::to_string(i) + " and " +
                    std::to_string(i + 1));

    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) {
            bool th_eq = std::abs(g.theta[i] - g.theta[j]) <= tol;
            bool y_eq = std::abs(y[i] - y[j]) <= tol;
            if (th_eq != y_eq)
                violate("equality dichotomy fails for agents " + std::to_string(i) + "," +
                        std::to_string(j));
        }

    double m_tail = 0.0;
    for (int i = 0; i < N; ++i) m_tail += g.m[i];
    // m_tail runs over m_{>=i} as i advances
    for (int i = 0; i < N; ++i) {
        double lower = g.theta[i] + (m_tail - M) / g.sigma;
        if (pow_p(y[i], g.p) < lower - tol)
            violate("lower bound fails at agent " + std::to_string(i));
        m_tail -= g.m[i];
    }

    for (int i = 0; i < N; ++i) {
        double yp = pow_p(y[i], g.p);
        if (yp < g.theta_min() - tol || yp > g.theta_max() + tol)
            violate("min-max bound fails at agent " + std::to_string(i));
    }

    const int i0 = eq.shift_index;
    if (i0 > 0 && y[i0 - 1] > eq.y_bar * (1.0 + 1e-12))
        violate("shift index: y_{i0} exceeds the average");
    if (i0 < N && y[i0] < eq.y_bar * (1.0 - 1e-12))
        violate("shift index: y_{i0+1} is below the average");
    for (int i = 0; i < N; ++i) {
        double yp = pow_p(y[i], g.p);
        if (i < i0 && yp < g.theta[i] - tol)
            violate("right-shift fails at agent " + std::to_string(i));
        if (i >= i0 && yp > g.theta[i] + tol)
            violate("left-shift fails at agent " + std::to_string(i));
    }
    return rep;
}

std::vector<SweepRow> asymptotic_sweep(const OpinionGame& g, const std::vector<double>& sigmas) {
    for (double s : sigmas)
        if (!(s > 0.0)) throw std::invalid_argument("asymptotic_sweep: sigmas must be > 0");
    const int N = g.count();
    const double invp = 1.0 / g.p;
    const double consensus = std::pow(g.theta_mean(), invp);
    std::vector<SweepRow> rows;
    rows.reserve(sigmas.size());
    for (double s : sigmas) {
        OpinionGame gs = g;
        gs.sigma = s;
        Equilibrium eq = solve(gs);
        SweepRow row;
        row.sigma = s;
        for (int i = 0; i < N; ++i) {
            row.dist_conviction =
                std::max(row.dist_conviction, std::abs(eq.y[i] - std::pow(g.theta[i], invp)));
            row.dist_consensus = std::max(row.dist_consensus, std::abs(eq.y[i] - consensus));
        }
        rows.push_back(row);
    }
    return rows;
}

MultistartResult multistart(const OpinionGame& g, int seeds, std::uint64_t rng_seed) {
    MultistartResult res;
    res.eq = solve(g);
    res.total = seeds;
    const int N = g.count();
    const double invp = 1.0 / g.p;
    const double lo = std::pow(g.theta_min(), invp);
    const double hi = std::pow(g.theta_max(), invp);

    int agree = 0;
    double spread = 0.0;
#pragma omp parallel for schedule(dynamic) reduction(+ : agree) reduction(max : spread)
    for (int k = 0; k < seeds; ++k) {
        Rng rng(rng_seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(k + 1));
        std::vector<double> y0(N);
        for (int i = 0; i < N; ++i) y0[i] = rng.uniform(lo, hi);
        double dist = std::numeric_limits<double>::infinity();
        try {
            Equilibrium eq = solve(g, &y0);
            dist = 0.0;
            for (int i = 0; i < N; ++i) dist = std::max(dist, std::abs(eq.y[i] - res.eq.y[i]));
        } catch (const SolveFailure&) {
        }
        if (dist <= 1e-8) ++agree;
        spread = std::max(spread, dist);
    }
    res.agree = agree;
    res.max_spread = spread;
    return res;
}

}  // namespace csf::nash
