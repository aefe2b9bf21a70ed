#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "csflock/config.hpp"
#include "csflock/run.hpp"

using namespace csf;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string report_value(const RunResult& res, const std::string& key) {
    for (const auto& [k, v] : res.report)
        if (k == key) return v;
    return "";
}

fs::path fresh_dir(const std::string& leaf) {
    fs::path p = fs::temp_directory_path() / "csflock_tests" / leaf;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("parse_config fills defaults for a minimal ha run") {
    RunConfig cfg = parse_config(R"({
        "scenario": {"name": "ha", "lambda": 2.0},
        "integrator": {"t_final": 1.0}
    })");
    CHECK(cfg.scenario == "ha");
    CHECK(cfg.ha.lambda == 2.0);
    CHECK(cfg.ha.sigma == 1.0);
    CHECK(cfg.ha.v0 == 0.9);
    CHECK(cfg.integrator.dt == 1e-3);
    CHECK(cfg.integrator.record_every == 10);
    CHECK(cfg.params.kernel.type == Kernel::Type::uniform);
    CHECK(cfg.params.kernel.level == 2.0);
    CHECK(cfg.params.p == 2.0);
    CHECK_FALSE(cfg.invariants.empty());
    CHECK(cfg.rate_fit.t1 == doctest::Approx(0.5));
}

TEST_CASE("parse_config errors carry the offending path") {
    SUBCASE("missing sigma") {
        try {
            parse_config(R"({
                "scenario": {"name": "random-sectorial", "epsilon": 0.2},
                "params": {"kernel": {"type": "uniform", "level": 1.0}},
                "integrator": {"t_final": 1.0}
            })");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.path == "params.sigma");
        }
    }
    SUBCASE("negative dt") {
        try {
            parse_config(R"({
                "scenario": {"name": "ha", "lambda": 1.0},
                "integrator": {"dt": -0.001, "t_final": 1.0}
            })");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.path == "integrator.dt");
        }
    }
    SUBCASE("unknown key with location") {
        try {
            parse_config(R"({
                "scenario": {"name": "ha", "lambda": 1.0, "lamda": 2.0},
                "integrator": {"t_final": 1.0}
            })");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.path == "scenario.lamda");
        }
    }
    SUBCASE("unknown invariant") {
        CHECK_THROWS_AS(parse_config(R"({
            "scenario": {"name": "ha", "lambda": 1.0},
            "integrator": {"t_final": 1.0},
            "invariants": ["no-such-check"]
        })"),
                        ConfigError);
    }
    SUBCASE("explicit state size mismatch") {
        try {
            parse_config(R"({
                "scenario": {"name": "explicit", "state":
                    {"n": 2, "x": [0,0], "v": [1,0,0,1], "theta": [1,1], "m": [1,1]}},
                "params": {"sigma": 1.0, "kernel": {"type": "uniform", "level": 1.0}},
                "integrator": {"t_final": 1.0}
            })");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.path == "scenario.state.x");
        }
    }
}

TEST_CASE("run writes the series and a report with the fitted rate") {
    fs::path dir = fresh_dir("ha_lambda2");
    RunConfig cfg = parse_config(R"({
        "scenario": {"name": "ha", "lambda": 2.0},
        "integrator": {"dt": 0.001, "t_final": 5.0, "record_every": 10},
        "rate_fit": {"t1": 2.5, "t2": 5.0, "series": ["A"]},
        "output": {"dir": ")" + dir.string() + R"("}
    })");
    RunResult res = run(cfg);
    CHECK(res.exit_code == 0);
    CHECK(fs::exists(res.series_path));
    CHECK(fs::exists(res.report_path));

    // strong communication: A = 2 v(t) decays at sigma - lambda = -1
    double rate = std::strtod(report_value(res, "rate.A").c_str(), nullptr);
    CHECK(std::abs(rate - (-1.0)) <= 0.05);
    CHECK(report_value(res, "invariant.theta-bar").substr(0, 4) == "pass");
    CHECK(report_value(res, "overall") == "pass");

    SUBCASE("series round-trips at the emitted precision") {
        std::istringstream in(slurp(res.series_path));
        std::string line;
        std::getline(in, line);
        CHECK(line == "t,A,B,D,R,gamma,gamma2d,margin");
        int rows = 0;
        while (std::getline(in, line)) {
            std::istringstream row(line);
            std::string tok;
            while (std::getline(row, tok, ',')) {
                double v = std::strtod(tok.c_str(), nullptr);
                CHECK(format_sig(v) == tok);
            }
            ++rows;
        }
        CHECK(rows == static_cast<int>(res.trajectory.points.size()));
    }
}

TEST_CASE("identical configs give byte-identical outputs") {
    fs::path d1 = fresh_dir("det_a");
    fs::path d2 = fresh_dir("det_b");
    auto cfg_for = [](const fs::path& d) {
        return parse_config(R"({
            "scenario": {"name": "random-sectorial", "seed": 5, "N": 5, "n": 3, "epsilon": 0.25},
            "params": {"sigma": 0.5, "kappa": 0.2, "p": 2.0,
                       "kernel": {"type": "smooth-power", "lambda": 1.0, "beta": 1.0}},
            "integrator": {"dt": 0.001, "t_final": 2.0, "record_every": 20},
            "output": {"dir": ")" + d.string() + R"("}
        })");
    };
    RunResult r1 = run(cfg_for(d1));
    RunResult r2 = run(cfg_for(d2));
    CHECK(r1.exit_code == r2.exit_code);
    CHECK(slurp(r1.series_path) == slurp(r2.series_path));
    CHECK(slurp(r1.report_path) == slurp(r2.report_path));
}

TEST_CASE("fat-tail run reports misalignment") {
    fs::path dir = fresh_dir("fat");
    RunConfig cfg = parse_config(R"({
        "scenario": {"name": "fat-tail", "beta": 1.5, "r0": 0.01,
                     "x1_0": 9.0, "v1_0": 0.9, "v2_0": 0.09},
        "integrator": {"dt": 0.001, "t_final": 20.0, "record_every": 10},
        "output": {"dir": ")" + dir.string() + R"("}
    })");
    RunResult res = run(cfg);
    CHECK(res.exit_code == 0);
    CHECK(report_value(res, "misaligned") == "true");
}

TEST_CASE("sectorial run reports a bounded flock diameter") {
    fs::path dir = fresh_dir("sectorial");
    RunConfig cfg = parse_config(R"({
        "scenario": {"name": "random-sectorial", "seed": 3, "N": 6, "n": 3, "epsilon": 0.3},
        "params": {"sigma": 0.5, "kappa": 0.2, "p": 2.0,
                   "kernel": {"type": "smooth-power", "lambda": 1.0, "beta": 1.0}},
        "integrator": {"dt": 0.001, "t_final": 30.0, "record_every": 20},
        "output": {"dir": ")" + dir.string() + R"("}
    })");
    RunResult res = run(cfg);
    CHECK(res.exit_code == 0);
    CHECK(report_value(res, "flock_diameter_bounded") == "true");
    CHECK(report_value(res, "invariant.sector").substr(0, 4) == "pass");
    CHECK(report_value(res, "invariant.grassmannian").substr(0, 4) == "pass");

    // the reverse angle bound is monitored as a ratio, never asserted
    double ratio = std::strtod(report_value(res, "gamma_ratio_min").c_str(), nullptr);
    CHECK(ratio > 0.0);
    CHECK(ratio <= 1.0 + 1e-9);
}

TEST_CASE("nash command writes the equilibrium report") {
    fs::path dir = fresh_dir("nash_golden");
    GameConfig cfg = parse_game_config(R"({
        "game": {"theta": [1.0, 3.0], "m": [1.0, 1.0], "sigma": 1.0, "p": 1.0},
        "multistart": {"seeds": 25, "rng_seed": 7},
        "verify_grid": 4000,
        "sweep_sigmas": [0.001, 0.1, 10.0, 1000.0],
        "output": {"dir": ")" + dir.string() + R"("}
    })");
    CHECK(run_nash(cfg) == 0);

    std::string rep = slurp(dir / "nash_report.txt");
    const double g1 = (1.0 + std::sqrt(5.0)) / 2.0;
    CHECK(rep.find("y_star.0 = " + format_sig(g1)) != std::string::npos);
    CHECK(rep.find("nash_verified = true") != std::string::npos);
    CHECK(rep.find("multistart_agree = 25") != std::string::npos);
    CHECK(rep.find("unique_trivial = false") != std::string::npos);
    CHECK(rep.find("structure_ok = true") != std::string::npos);
    CHECK(rep.find("sweep_conviction_monotone = true") != std::string::npos);
    CHECK(fs::exists(dir / "nash_sweep.csv"));
}

TEST_CASE("nash descent block writes the potential trace") {
    fs::path dir = fresh_dir("nash_descent");
    GameConfig cfg = parse_game_config(R"({
        "game": {"theta": [0.8, 1.2, 1.6], "m": [0.4, 0.3, 0.3], "sigma": 1.0, "p": 2.0},
        "multistart": {"seeds": 0},
        "descent": {"y0": [0.5, 1.8, 0.7], "dt": 0.005, "t_max": 500.0},
        "output": {"dir": ")" + dir.string() + R"("}
    })");
    CHECK(run_nash(cfg) == 0);
    std::string rep = slurp(dir / "nash_report.txt");
    CHECK(rep.find("descent_converged = true") != std::string::npos);
    CHECK(rep.find("descent_monotone = true") != std::string::npos);

    std::istringstream in(slurp(dir / "descent.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,phi");
    double prev = std::numeric_limits<double>::infinity();
    int rows = 0;
    while (std::getline(in, line)) {
        double phi = std::strtod(line.c_str() + line.find(',') + 1, nullptr);
        CHECK(phi <= prev + 1e-9);
        prev = phi;
        ++rows;
    }
    CHECK(rows >= 10);
}

TEST_CASE("consensus game is flagged trivially unique") {
    fs::path dir = fresh_dir("nash_consensus");
    GameConfig cfg = parse_game_config(R"({
        "game": {"theta": [2.0, 2.0, 2.0], "m": [1.0, 1.0, 1.0], "sigma": 1.0, "p": 1.0},
        "multistart": {"seeds": 10},
        "output": {"dir": ")" + dir.string() + R"("}
    })");
    CHECK(run_nash(cfg) == 0);
    CHECK(slurp(dir / "nash_report.txt").find("unique_trivial = true") != std::string::npos);
}

TEST_CASE("game config errors carry paths") {
    try {
        parse_game_config(R"({"game": {"m": [1.0], "sigma": 1.0}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.path == "game.theta");
    }
}

TEST_CASE("sweep runs each value into its own directory") {
    fs::path dir = fresh_dir("sweep");
    SweepConfig cfg = parse_sweep_config(R"({
        "scenario": {"name": "ha", "lambda": 1.0},
        "integrator": {"dt": 0.001, "t_final": 2.0, "record_every": 20},
        "sweep": {"parameter": "scenario.lambda", "values": [0.5, 2.0]},
        "output": {"dir": ")" + dir.string() + R"("}
    })");
    CHECK(run_sweep(cfg) == 0);
    CHECK(fs::exists(dir / "sweep.csv"));
    int subdirs = 0;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory()) ++subdirs;
    CHECK(subdirs == 2);

    std::istringstream in(slurp(dir / "sweep.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "value,status,final_A,final_B,final_D");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 2);
}

TEST_CASE("output root environment variable prefixes relative paths") {
    fs::path root = fresh_dir("rootenv");
    setenv("CSFLOCK_OUTPUT_ROOT", root.string().c_str(), 1);
    fs::path resolved = resolve_output_dir("sub/run1");
    unsetenv("CSFLOCK_OUTPUT_ROOT");
    CHECK(resolved == root / "sub/run1");
    CHECK(fs::exists(resolved));
}
