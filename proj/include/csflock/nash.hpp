#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace csf::nash {

/// The N-player opinion game: convictions theta, masses m, friction strength
/// sigma and exponent p. theta need not be sorted; structure_report requires
/// ascending order and sorted() produces a sorted copy with its permutation.
struct OpinionGame {
    std::vector<double> theta;
    std::vector<double> m;
    double sigma = 1.0;
    double p = 1.0;

    int count() const { return static_cast<int>(theta.size()); }
    double total_mass() const;
    double theta_min() const;
    double theta_max() const;
    double theta_mean() const;  // mass-weighted, sum m_i theta_i / M

    void check() const;  // throws std::invalid_argument on a bad field
};

struct SortedGame {
    OpinionGame game;
    std::vector<int> perm;  // sorted index k came from original index perm[k]
};
SortedGame sorted(const OpinionGame& g);

/// Solved equilibrium with its certificates.
struct Equilibrium {
    std::vector<double> y;
    double residual_norm = 0.0;
    double y_bar = 0.0;            // (1/M) sum m_i y_i
    std::vector<double> d;         // d_i = M + sigma (p+1) y_i^p - sigma theta_i
    double sum_m_over_d = 0.0;
    double jacobian_det = 0.0;     // closed form at y
    std::vector<double> minors;    // leading principal minors, minors[k] is order k+1
    bool minors_positive = false;
    int shift_index = 0;           // i0: number of agents with y_i <= y_bar
    int iterations = 0;
    bool converged = false;
};

/// F(y)_i = M y_i - sum_k m_k y_k - sigma (theta_i - y_i^p) y_i.
/// Zeros of F are the Nash equilibria; F = -rhs_opinion.
std::vector<double> residual(const std::vector<double>& y, const OpinionGame& g);

std::vector<double> d_values(const std::vector<double>& y, const OpinionGame& g);

/// D_y F = diag{d_i} - ones * m^T, row-major N x N.
std::vector<double> jacobian(const std::vector<double>& y, const OpinionGame& g);

/// det D_y F = prod d_i * (1 - sum m_k / d_k). Falls back to the dense LU
/// determinant when some d_i vanishes; *used_fallback reports which route ran.
double jacobian_det(const std::vector<double>& y, const OpinionGame& g,
                    bool* used_fallback = nullptr);

struct SolveFailure : std::runtime_error {
    SolveFailure(const std::string& what, Equilibrium best_iterate)
        : std::runtime_error(what), best(std::move(best_iterate)) {}
    Equilibrium best;
};

/// Damped Newton on the residual with the closed-form Jacobian.
/// Seed defaults to y_i = theta_i^{1/p}; steps are halved (at most 40 times)
/// whenever the iterate would leave the a-priori box
/// [min theta^{1/p} (1-1e-6), max theta^{1/p} (1+1e-6)]^N or the residual
/// fails to decrease. Throws SolveFailure after 200 iterations.
Equilibrium solve(const OpinionGame& g, const std::vector<double>* seed = nullptr);

/// p_i(y) = sigma (theta_i y_i^2 / 2 - y_i^{p+2}/(p+2)) - (M/2)(ybar - y_i)^2.
double payoff(const std::vector<double>& y, const OpinionGame& g, int i);

/// Second derivative of the unilateral-deviation map r -> p_i(..., r, ...)
/// with the mean opinion held fixed; equals -d_i(r).
double payoff_curvature(const std::vector<double>& y, const OpinionGame& g, int i);

struct Deviation {
    int agent = -1;
    double r_best = 0.0;
    double gain = 0.0;
};

struct NashReport {
    bool verified = true;
    int grid = 0;
    std::vector<Deviation> violations;
};

/// Scans each agent's deviation payoff over a grid of r with r^p spanning
/// [min theta, max theta] (mean opinion held fixed) and confirms the maximum
/// sits at y_i within one grid cell.
NashReport verify_nash_point(const std::vector<double>& y, const OpinionGame& g, int grid);
NashReport verify_nash(const Equilibrium& eq, const OpinionGame& g, int grid);

struct StructureReport {
    bool ok = true;
    std::vector<std::string> violations;
    int shift_index = 0;
    double y_bar = 0.0;
};

/// Monotonicity, the equality dichotomy theta_i = theta_j <=> y_i = y_j
/// (tolerance 1e-10), the lower bound y_i^p >= theta_i + (m_{>=i} - M)/sigma,
/// and the shift pattern around the index i0. Requires theta sorted ascending.
StructureReport structure_report(const Equilibrium& eq, const OpinionGame& g);

struct SweepRow {
    double sigma = 0.0;
    double dist_conviction = 0.0;  // ||y*(sigma) - theta^{1/p}||_inf
    double dist_consensus = 0.0;   // ||y*(sigma) - theta_mean^{1/p} * ones||_inf
};

/// Solves the game across the given sigmas (other fields fixed).
std::vector<SweepRow> asymptotic_sweep(const OpinionGame& g, const std::vector<double>& sigmas);

struct MultistartResult {
    Equilibrium eq;          // from the default seed
    int total = 0;
    int agree = 0;           // seeds whose solution lands within 1e-8 of eq.y
    double max_spread = 0.0; // largest inf-distance over seeds
};

/// Solves from `seeds` random starting points drawn uniformly from the
/// a-priori box; numerical uniqueness evidence for the equilibrium.
MultistartResult multistart(const OpinionGame& g, int seeds, std::uint64_t rng_seed);

}  // namespace csf::nash
