#pragma once

#include <string>
#include <vector>

#include "sdelay/simulator.hpp"

namespace sdelay::invariants {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Cheap structural checks on a resolved configuration: generator,
/// transition matrices, kernel identities that hold exactly, transform
/// roundtrip and the stepping contracts. Used by the `validate` subcommand.
std::vector<CheckResult> run_suite(const sim::SimConfig& cfg);

}  // namespace sdelay::invariants
