#pragma once

#include <string>
#include <vector>

namespace hcral {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Runs the full acceptance suite in order. Every check computes its
/// expectation from scratch at run time: central finite differences,
/// independently coded re-implementations, closed forms, or an end-to-end
/// training run. Criterion 8 is comparative reporting; it passes once both
/// runs complete and its numbers land in the detail string.
std::vector<CriterionResult> run_acceptance();

}  // namespace hcral
