// Timing comparison of the serial reference kernels against the OpenMP
// versions: pairwise right-hand side evaluation and the gamma2d plane search.
//
//   ./bench/bench_kernels [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "csflock/diagnostics.hpp"
#include "csflock/dynamics.hpp"
#include "csflock/scenarios.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using clock_type = std::chrono::steady_clock;

template <class F>
double time_ms(int repeats, F&& body) {
    auto t0 = clock_type::now();
    for (int r = 0; r < repeats; ++r) body();
    auto t1 = clock_type::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / repeats;
}

}  // namespace

int main(int argc, char** argv) {
    const int repeats = argc > 1 ? std::atoi(argv[1]) : 20;

#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("openmp: disabled\n");
#endif

    csf::SystemParams params;
    params.kernel = csf::Kernel::smooth_power(1.0, 1.0);
    params.kappa = 0.1;
    params.sigma = 0.5;
    params.p = 2.0;

    std::printf("\nrhs_full (pairwise sums), %d repeats\n", repeats);
    std::printf("%8s %14s %14s %9s %9s\n", "N", "serial [ms]", "parallel [ms]", "speedup",
                "match");
    for (int N : {64, 256, 1024, 2048}) {
        csf::FlockState s = csf::random_sectorial(17, N, 3, 0.2);
        csf::Derivative ds, dp;
        double t_ser = time_ms(repeats, [&] { csf::rhs_full_serial(s, params, ds); });
        double t_par = time_ms(repeats, [&] { csf::rhs_full_parallel(s, params, dp); });
        bool match = ds.dv == dp.dv && ds.dtheta == dp.dtheta;
        std::printf("%8d %14.3f %14.3f %8.2fx %9s\n", N, t_ser, t_par, t_ser / t_par,
                    match ? "bitwise" : "DIFFER");
    }

    std::printf("\ngamma2d plane search (grid 256), %d repeats\n", repeats);
    std::printf("%8s %14s %14s %9s %9s\n", "N", "serial [ms]", "parallel [ms]", "speedup",
                "match");
    for (int N : {16, 32, 64, 128}) {
        csf::FlockState s = csf::random_sectorial(29, N, 4, 0.2);
        double vs = 0.0, vp = 0.0;
        double t_ser = time_ms(repeats, [&] { vs = csf::gamma2d_serial(s, 256).value; });
        double t_par = time_ms(repeats, [&] { vp = csf::gamma2d(s, 256).value; });
        std::printf("%8d %14.3f %14.3f %8.2fx %9s\n", N, t_ser, t_par, t_ser / t_par,
                    vs == vp ? "bitwise" : "DIFFER");
    }
    return 0;
}
