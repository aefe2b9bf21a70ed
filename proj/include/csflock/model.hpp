#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace csf {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// |w|^p with the common exponents short-circuited so serial and parallel
// kernels evaluate the same expression.
inline double pow_p(double s, double p) {
    if (p == 2.0) return s * s;
    if (p == 1.0) return s;
    return std::pow(s, p);
}

/// Radial nonincreasing communication weight phi(r).
///
/// Variants:
///   uniform                phi(r) = level                       (level >= 0)
///   smooth_power           phi(r) = lambda / (1 + r^2)^(beta/2) (lambda > 0, beta >= 0)
///   truncated_exact_power  phi(r) = r^-beta for r > r0,
///                          phi(r) = r0^-beta for r <= r0        (beta > 0, r0 > 0)
struct Kernel {
    enum class Type { uniform, smooth_power, truncated_exact_power };

    Type type = Type::uniform;
    double level = 1.0;   // uniform plateau
    double lambda = 1.0;  // smooth_power amplitude
    double beta = 0.0;    // power-law exponent
    double r0 = 0.0;      // truncation radius

    static Kernel uniform(double level);
    static Kernel smooth_power(double lambda, double beta);
    static Kernel truncated_exact_power(double beta, double r0);

    double operator()(double r) const {
        switch (type) {
            case Type::uniform:
                return level;
            case Type::smooth_power:
                return beta == 0.0 ? lambda : lambda / std::pow(1.0 + r * r, 0.5 * beta);
            case Type::truncated_exact_power:
                return r > r0 ? std::pow(r, -beta) : std::pow(r0, -beta);
        }
        return 0.0;
    }

    // inf_{r >= 0} phi(r); positive only for absolute communication
    double inf_value() const {
        switch (type) {
            case Type::uniform:
                return level;
            case Type::smooth_power:
                return beta == 0.0 ? lambda : 0.0;
            case Type::truncated_exact_power:
                return 0.0;
        }
        return 0.0;
    }

    // phi(r) >= lambda/(1+r^2)^(beta/2) with beta <= 1
    bool fat_tail() const {
        switch (type) {
            case Type::uniform:
                return level > 0.0;
            case Type::smooth_power:
                return beta <= 1.0;
            case Type::truncated_exact_power:
                return false;
        }
        return false;
    }
};

double kernel_eval(const Kernel& k, double r);

/// N agents in R^n. Positions and velocities are row-major N*n.
/// Plain value type; immutable-by-convention after construction, so states can
/// be shared across threads freely.
struct FlockState {
    int n = 0;
    std::vector<double> x;
    std::vector<double> v;
    std::vector<double> theta;
    std::vector<double> m;

    int count() const { return static_cast<int>(theta.size()); }

    std::span<const double> pos(int i) const {
        return {x.data() + static_cast<std::size_t>(i) * n, static_cast<std::size_t>(n)};
    }
    std::span<const double> vel(int i) const {
        return {v.data() + static_cast<std::size_t>(i) * n, static_cast<std::size_t>(n)};
    }
    std::span<double> pos(int i) {
        return {x.data() + static_cast<std::size_t>(i) * n, static_cast<std::size_t>(n)};
    }
    std::span<double> vel(int i) {
        return {v.data() + static_cast<std::size_t>(i) * n, static_cast<std::size_t>(n)};
    }

    double speed(int i) const { return norm(vel(i)); }

    // recomputed on demand rather than cached, so they can never go stale
    double total_mass() const;
    double theta_bar() const;  // sum_i m_i theta_i, conserved by the dynamics
};

struct SystemParams {
    double sigma = 1.0;  // self-propulsion strength, > 0
    double kappa = 0.0;  // parameter coupling rate, >= 0
    double p = 2.0;      // friction exponent, > 0
    Kernel kernel;
};

/// min_i v_i^n / |v_i|. The state is sectorial iff the result is >= eps > 0.
/// Throws std::domain_error if some agent has zero speed.
double sector_margin(const FlockState& s);

struct ValidationReport {
    bool ok = true;
    int agent = -1;  // offending agent, -1 when not agent-specific
    std::string message;
};

/// Checks every type invariant; reports the first violation found.
ValidationReport validate(const FlockState& s, const SystemParams& p);

}  // namespace csf
