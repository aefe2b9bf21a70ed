#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "csflock/dynamics.hpp"
#include "csflock/model.hpp"
#include "csflock/nash.hpp"
#include "csflock/scenarios.hpp"

namespace csf {

/// Raised on any schema violation; path points at the offending key.
struct ConfigError : std::runtime_error {
    ConfigError(const std::string& path_, const std::string& what_)
        : std::runtime_error(path_ + ": " + what_), path(path_) {}
    std::string path;
};

struct RateFitSpec {
    bool given = false;
    double t1 = 0.0;
    double t2 = 0.0;
    std::vector<std::string> series;  // subset of {A, B, one_minus_cos_gamma2d}
};

/// A fully validated simulation run: scenario, system parameters, integrator,
/// probes, rate-fit windows, invariant selection and output location.
struct RunConfig {
    std::string scenario;  // ha | fat-tail | random-sectorial | explicit

    HaScenario ha;
    FatTailSpec fat;
    struct RandomSectorialSpec {
        std::uint64_t seed = 1;
        int N = 8;
        int n = 3;
        double epsilon = 0.2;
        SectorialKnobs knobs;
    } rs;
    FlockState state;  // scenario == explicit

    SystemParams params;  // parsed, or derived for ha / fat-tail
    IntegratorSpec integrator;
    ProbeSelection probes;
    RateFitSpec rate_fit;
    std::vector<std::string> invariants;
    std::string output_dir = ".";
};

RunConfig parse_config(const std::string& text);

/// Builds the initial condition and parameters the config describes.
std::pair<FlockState, SystemParams> materialize(const RunConfig& cfg);

struct DescentSpec {
    bool given = false;
    std::vector<double> y0;  // starting opinions; defaults to the conviction seed
    double dt = 5e-3;
    double t_max = 500.0;
    int record_every = 10;
};

struct GameConfig {
    nash::OpinionGame game;
    int multistart_seeds = 100;
    std::uint64_t multistart_rng_seed = 1;
    int verify_grid = 10000;
    std::vector<double> sweep_sigmas;
    DescentSpec descent;
    std::string output_dir = ".";
};

GameConfig parse_game_config(const std::string& text);

struct SweepConfig {
    std::string parameter;       // dotted path into the base config
    std::vector<double> values;
    std::string base_json;       // the config without the sweep block
    std::string output_dir = ".";
};

SweepConfig parse_sweep_config(const std::string& text);

/// Replaces the value at a dotted path in a JSON document; used by sweeps.
std::string substitute_parameter(const std::string& base_json, const std::string& dotted_path,
                                 double value);

const std::vector<std::string>& known_invariants();

}  // namespace csf
