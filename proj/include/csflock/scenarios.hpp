#pragma once

#include <cstdint>
#include <utility>

#include "csflock/model.hpp"

namespace csf {

/// Two mirrored agents on the line with global communication: v = v_1 = -v_2
/// obeys dv/dt = -lambda v + sigma v (1 - v^2), solvable in closed form.
struct HaScenario {
    double lambda = 1.0;
    double sigma = 1.0;
    double v0 = 0.9;  // in (0, 1]; 1 sits on the maximum-principle boundary

    enum class Regime { weak, critical, strong };  // lambda vs sigma
    Regime regime() const {
        if (lambda < sigma) return Regime::weak;
        if (lambda > sigma) return Regime::strong;
        return Regime::critical;
    }
    void check() const;
};

/// Exact v(t) in the matching regime, with c0 fixed by v(0) = v0.
double ha_closed_form(const HaScenario& scn, double t);

/// N = 2, n = 1, m = (1/2, 1/2), uniform kernel at level lambda, theta = (1,1),
/// p = 2, kappa = 0, antisymmetric data reproducing the scalar equation.
std::pair<FlockState, SystemParams> ha_flock_config(const HaScenario& scn);

/// Mirrored pair with an exact power-law kernel; beta > 1 breaks the fat-tail
/// condition and produces permanent misalignment.
struct FatTailSpec {
    double beta = 1.5;
    double r0 = 0.01;
    double x1_0 = 9.0;
    double v1_0 = 0.9;
    double v2_0 = 0.09;
};

/// N = 2, n = 2, v' = (v1, v2), v'' = (-v1, v2), x' = (x1, 0), x'' = (-x1, 0),
/// theta = (1,1), m = (1/2, 1/2), p = 2, kappa = 0, sigma = 1.
/// Preconditions (each rejected by name):
///   x1_0 > 2 r0,   1 > v1_0 > x1_0^{1-beta}/(beta-1),   |v'(0)| < 1,  beta > 1.
std::pair<FlockState, SystemParams> fat_tail_config(const FatTailSpec& spec);

/// L = v_1 + x_1^{1-beta}/(1-beta); requires the power-law regime x_1 > r0.
double fat_lyapunov(const FlockState& s, const Kernel& kernel);

struct SectorialKnobs {
    double theta_min = 0.9;
    double theta_max = 1.1;
    double speed_min = 0.8;
    double speed_max = 1.2;
    double pos_spread = 0.5;   // positions uniform in [-spread, spread]^n
    bool equal_masses = false; // otherwise random, always normalized to M = 1
};

/// Deterministic pseudorandom state with sector_margin >= epsilon; the same
/// seed always produces the same state.
FlockState random_sectorial(std::uint64_t seed, int N, int n, double epsilon,
                            const SectorialKnobs& knobs = {});

}  // namespace csf
