#include "csflock/scenarios.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "csflock/rng.hpp"

namespace csf {

void HaScenario::check() const {
    if (!(lambda > 0.0)) throw std::invalid_argument("HaScenario: lambda must be > 0");
    if (!(sigma > 0.0)) throw std::invalid_argument("HaScenario: sigma must be > 0");
    if (!(v0 > 0.0 && v0 <= 1.0)) throw std::invalid_argument("HaScenario: v0 must lie in (0, 1]");
}

double ha_closed_form(const HaScenario& scn, double t) {
    scn.check();
    if (!(t >= 0.0)) throw std::invalid_argument("ha_closed_form: t must be >= 0");
    const double l = scn.lambda, s = scn.sigma, v0 = scn.v0;
    switch (scn.regime()) {
        case HaScenario::Regime::weak: {
            // v = sqrt(1 - l/s) / sqrt(1 + c0^2 e^{-2t(s-l)})
            double a = 1.0 - l / s;
            double c0sq = a / (v0 * v0) - 1.0;  // may be negative when v0^2 > a
            return std::sqrt(a) / std::sqrt(1.0 + c0sq * std::exp(-2.0 * t * (s - l)));
        }
        case HaScenario::Regime::critical:
            return v0 / std::sqrt(2.0 * s * t * v0 * v0 + 1.0);
        case HaScenario::Regime::strong: {
            // v = c0 e^{(s-l)t} sqrt(l/s - 1) / sqrt(1 - c0^2 e^{2t(s-l)})
            double b = l / s - 1.0;
            double c0sq = v0 * v0 / (b + v0 * v0);
            double e = std::exp((s - l) * t);
            return std::sqrt(c0sq) * e * std::sqrt(b) / std::sqrt(1.0 - c0sq * e * e);
        }
    }
    return 0.0;
}

std::pair<FlockState, SystemParams> ha_flock_config(const HaScenario& scn) {
    scn.check();
    FlockState s;
    s.n = 1;
    s.x = {0.0, 0.0};
    s.v = {scn.v0, -scn.v0};
    s.theta = {1.0, 1.0};
    s.m = {0.5, 0.5};
    SystemParams p;
    p.sigma = scn.sigma;
    p.kappa = 0.0;
    p.p = 2.0;
    p.kernel = Kernel::uniform(scn.lambda);
    return {std::move(s), p};
}

std::pair<FlockState, SystemParams> fat_tail_config(const FatTailSpec& spec) {
    if (!(spec.beta > 1.0))
        throw std::invalid_argument("fat_tail_config: requires beta > 1");
    if (!(spec.r0 > 0.0)) throw std::invalid_argument("fat_tail_config: requires r0 > 0");
    if (!(spec.x1_0 > 2.0 * spec.r0))
        throw std::invalid_argument("fat_tail_config: requires x1_0 > 2 r0");
    double lower = std::pow(spec.x1_0, 1.0 - spec.beta) / (spec.beta - 1.0);
    if (!(spec.v1_0 < 1.0 && spec.v1_0 > lower))
        throw std::invalid_argument(
            "fat_tail_config: requires 1 > v1_0 > x1_0^{1-beta}/(beta-1) = " +
            std::to_string(lower));
    if (!(std::hypot(spec.v1_0, spec.v2_0) < 1.0))
        throw std::invalid_argument("fat_tail_config: requires |v'(0)| < 1");

    FlockState s;
    s.n = 2;
    s.x = {spec.x1_0, 0.0, -spec.x1_0, 0.0};
    s.v = {spec.v1_0, spec.v2_0, -spec.v1_0, spec.v2_0};
    s.theta = {1.0, 1.0};
    s.m = {0.5, 0.5};
    SystemParams p;
    p.sigma = 1.0;
    p.kappa = 0.0;
    p.p = 2.0;
    p.kernel = Kernel::truncated_exact_power(spec.beta, spec.r0);
    return {std::move(s), p};
}

double fat_lyapunov(const FlockState& s, const Kernel& kernel) {
    if (kernel.type != Kernel::Type::truncated_exact_power)
        throw std::invalid_argument("fat_lyapunov: needs the exact power-law kernel");
    if (s.n != 2 || s.count() != 2)
        throw std::invalid_argument("fat_lyapunov: needs the two-agent mirrored configuration");
    const double x1 = s.x[0];
    const double v1 = s.v[0];
    if (!(x1 > kernel.r0))
        throw std::domain_error("fat_lyapunov: x1 <= r0, kernel regime change");
    return v1 + std::pow(x1, 1.0 - kernel.beta) / (1.0 - kernel.beta);
}

FlockState random_sectorial(std::uint64_t seed, int N, int n, double epsilon,
                            const SectorialKnobs& knobs) {
    if (N < 1) throw std::invalid_argument("random_sectorial: N must be >= 1");
    if (n < 1) throw std::invalid_argument("random_sectorial: n must be >= 1");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("random_sectorial: epsilon must lie in (0, 1)");

    Rng rng(seed);
    FlockState s;
    s.n = n;
    s.x.resize(static_cast<std::size_t>(N) * n);
    s.v.resize(static_cast<std::size_t>(N) * n);
    s.theta.resize(N);
    s.m.resize(N);

    for (int i = 0; i < N; ++i) s.theta[i] = rng.uniform(knobs.theta_min, knobs.theta_max);

    double msum = 0.0;
    for (int i = 0; i < N; ++i) {
        s.m[i] = knobs.equal_masses ? 1.0 : rng.uniform(0.5, 1.5);
        msum += s.m[i];
    }
    for (int i = 0; i < N; ++i) s.m[i] /= msum;

    for (int i = 0; i < N; ++i)
        for (int k = 0; k < n; ++k)
            s.x[static_cast<std::size_t>(i) * n + k] =
                rng.uniform(-knobs.pos_spread, knobs.pos_spread);

    for (int i = 0; i < N; ++i) {
        double speed = rng.uniform(knobs.speed_min, knobs.speed_max);
        // cosine of the polar angle from e_n, kept strictly above epsilon so
        // the margin survives rounding
        double c = epsilon + (1.0 - epsilon) * std::max(rng.uniform(), 1e-9);
        if (n == 1) {
            s.v[i] = speed;
            continue;
        }
        double r = std::sqrt(std::max(0.0, 1.0 - c * c));
        // direction in the transverse subspace
        double q2 = 0.0;
        std::vector<double> q(n - 1);
        do {
            q2 = 0.0;
            for (int k = 0; k < n - 1; ++k) {
                q[k] = rng.normal();
                q2 += q[k] * q[k];
            }
        } while (q2 < 1e-12);
        double inv = 1.0 / std::sqrt(q2);
        for (int k = 0; k < n - 1; ++k)
            s.v[static_cast<std::size_t>(i) * n + k] = speed * r * q[k] * inv;
        s.v[static_cast<std::size_t>(i) * n + n - 1] = speed * c;
    }
    return s;
}

}  // namespace csf
