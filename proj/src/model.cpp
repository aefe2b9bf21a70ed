#include "csflock/model.hpp"

#include <cmath>
#include <stdexcept>

namespace csf {

Kernel Kernel::uniform(double level) {
    if (!(level >= 0.0)) throw std::invalid_argument("Kernel::uniform: level must be >= 0");
    Kernel k;
    k.type = Type::uniform;
    k.level = level;
    return k;
}

Kernel Kernel::smooth_power(double lambda, double beta) {
    if (!(lambda > 0.0)) throw std::invalid_argument("Kernel::smooth_power: lambda must be > 0");
    if (!(beta >= 0.0)) throw std::invalid_argument("Kernel::smooth_power: beta must be >= 0");
    Kernel k;
    k.type = Type::smooth_power;
    k.lambda = lambda;
    k.beta = beta;
    return k;
}

Kernel Kernel::truncated_exact_power(double beta, double r0) {
    if (!(beta > 0.0)) throw std::invalid_argument("Kernel::truncated_exact_power: beta must be > 0");
    if (!(r0 > 0.0)) throw std::invalid_argument("Kernel::truncated_exact_power: r0 must be > 0");
    Kernel k;
    k.type = Type::truncated_exact_power;
    k.beta = beta;
    k.r0 = r0;
    return k;
}

double kernel_eval(const Kernel& k, double r) {
    if (!(r >= 0.0)) throw std::invalid_argument("kernel_eval: radius must be >= 0");
    return k(r);
}

double FlockState::total_mass() const {
    double M = 0.0;
    for (double mi : m) M += mi;
    return M;
}

double FlockState::theta_bar() const {
    double tb = 0.0;
    for (int i = 0; i < count(); ++i) tb += m[i] * theta[i];
    return tb;
}

double sector_margin(const FlockState& s) {
    const int N = s.count();
    double margin = 1.0;
    for (int i = 0; i < N; ++i) {
        double speed = s.speed(i);
        if (speed == 0.0)
            throw std::domain_error("sector_margin: agent " + std::to_string(i) +
                                    " has zero velocity, margin undefined");
        margin = std::min(margin, s.v[static_cast<std::size_t>(i) * s.n + s.n - 1] / speed);
    }
    return margin;
}

namespace {

ValidationReport fail(int agent, std::string msg) {
    ValidationReport r;
    r.ok = false;
    r.agent = agent;
    r.message = std::move(msg);
    return r;
}

bool all_finite(const std::vector<double>& a) {
    for (double x : a)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

ValidationReport validate(const FlockState& s, const SystemParams& p) {
    if (s.n < 1) return fail(-1, "dimension n must be >= 1");
    const int N = s.count();
    if (N < 1) return fail(-1, "state must contain at least one agent");
    const std::size_t nn = static_cast<std::size_t>(N) * s.n;
    if (s.x.size() != nn) return fail(-1, "positions have wrong size");
    if (s.v.size() != nn) return fail(-1, "velocities have wrong size");
    if (s.m.size() != static_cast<std::size_t>(N)) return fail(-1, "masses have wrong size");

    for (int i = 0; i < N; ++i) {
        if (!(s.theta[i] > 0.0))
            return fail(i, "theta must be > 0 (agent " + std::to_string(i) + ")");
        if (!(s.m[i] > 0.0)) return fail(i, "mass must be > 0 (agent " + std::to_string(i) + ")");
        for (int k = 0; k < s.n; ++k) {
            if (!std::isfinite(s.pos(i)[k]))
                return fail(i, "non-finite position (agent " + std::to_string(i) + ")");
            if (!std::isfinite(s.vel(i)[k]))
                return fail(i, "non-finite velocity (agent " + std::to_string(i) + ")");
        }
    }
    if (!all_finite(s.theta)) return fail(-1, "non-finite theta");

    if (!(p.sigma > 0.0)) return fail(-1, "params: sigma must be > 0");
    if (!(p.kappa >= 0.0)) return fail(-1, "params: kappa must be >= 0");
    if (!(p.p > 0.0)) return fail(-1, "params: p must be > 0");
    switch (p.kernel.type) {
        case Kernel::Type::uniform:
            if (!(p.kernel.level >= 0.0)) return fail(-1, "params: kernel level must be >= 0");
            break;
        case Kernel::Type::smooth_power:
            if (!(p.kernel.lambda > 0.0)) return fail(-1, "params: kernel lambda must be > 0");
            if (!(p.kernel.beta >= 0.0)) return fail(-1, "params: kernel beta must be >= 0");
            break;
        case Kernel::Type::truncated_exact_power:
            if (!(p.kernel.beta > 0.0)) return fail(-1, "params: kernel beta must be > 0");
            if (!(p.kernel.r0 > 0.0)) return fail(-1, "params: kernel r0 must be > 0");
            break;
    }
    return {};
}

}  // namespace csf
