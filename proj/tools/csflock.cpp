// Command-line front end: simulate | nash | verify | sweep.
//
// Output files land in the directory named by the config (or --output-root /
// CSFLOCK_OUTPUT_ROOT for relative paths). Exit status is 0 only when every
// selected invariant or verification suite passes.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "csflock/config.hpp"
#include "csflock/run.hpp"
#include "csflock/verify.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cucker-Smale flocking with self-propulsion, sectorial diagnostics and "
                 "opinion-game equilibria"};
    app.require_subcommand(1);

    std::string output_root;
    app.add_option("--output-root", output_root,
                   "Root for relative output directories (overrides CSFLOCK_OUTPUT_ROOT)");

    std::string sim_config;
    CLI::App* sim = app.add_subcommand("simulate", "Integrate a configured scenario and write "
                                                   "series.csv + report.txt");
    sim->add_option("config", sim_config, "JSON run configuration")->required();

    std::string nash_config;
    CLI::App* nash_cmd = app.add_subcommand("nash", "Solve an opinion game and write the "
                                                    "equilibrium report");
    nash_cmd->add_option("config", nash_config, "JSON game configuration")->required();

    std::string suite = "all";
    bool list_suites = false;
    CLI::App* verify_cmd =
        app.add_subcommand("verify", "Run a named verification suite (theorem checks)");
    verify_cmd->add_option("suite", suite, "Suite name, or 'all'");
    verify_cmd->add_flag("--list", list_suites, "List available suites");

    std::string sweep_config;
    CLI::App* sweep = app.add_subcommand("sweep", "Run the base config once per parameter value");
    sweep->add_option("config", sweep_config, "JSON run configuration with a sweep block")
        ->required();

    CLI11_PARSE(app, argc, argv);

    if (!output_root.empty()) setenv("CSFLOCK_OUTPUT_ROOT", output_root.c_str(), 1);

    try {
        if (sim->parsed()) {
            csf::RunConfig cfg = csf::parse_config(slurp(sim_config));
            csf::RunResult res = csf::run(cfg);
            for (const auto& [k, v] : res.report) std::cout << k << " = " << v << "\n";
            return res.exit_code;
        }
        if (nash_cmd->parsed()) {
            csf::GameConfig cfg = csf::parse_game_config(slurp(nash_config));
            return csf::run_nash(cfg);
        }
        if (verify_cmd->parsed()) {
            if (list_suites) {
                for (const auto& name : csf::verify::suite_names()) std::cout << name << "\n";
                return 0;
            }
            std::vector<csf::verify::CheckResult> results;
            if (suite == "all")
                results = csf::verify::run_all();
            else
                results.push_back(csf::verify::run_suite(suite));
            bool all_pass = true;
            for (const auto& r : results) {
                std::cout << r.name << ": " << (r.pass ? "PASS" : "FAIL") << " - " << r.detail
                          << "\n";
                all_pass = all_pass && r.pass;
            }
            return all_pass ? 0 : 1;
        }
        if (sweep->parsed()) {
            csf::SweepConfig cfg = csf::parse_sweep_config(slurp(sweep_config));
            return csf::run_sweep(cfg);
        }
    } catch (const csf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
