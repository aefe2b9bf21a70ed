#pragma once

#include <string>
#include <vector>

namespace csf::verify {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Criterion suites, in report order:
///   ha-oracle, absolute-decay, sectorial-flocking, fat-tail-sharpness,
///   sectorial-principles, conservation-symmetry, grassmannian, nash-solver,
///   opinion-dynamics, sigma-asymptotics, jacobian-crosschecks
const std::vector<std::string>& suite_names();

/// Runs one named suite; throws std::invalid_argument for unknown names.
CheckResult run_suite(const std::string& name);

/// Runs every suite in order.
std::vector<CheckResult> run_all();

}  // namespace csf::verify
