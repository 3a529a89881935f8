#pragma once

#include <string>
#include <vector>

namespace gldeg {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;  // measured values and the pinned tolerance
};

// Runs the full acceptance battery (12 criteria). Each criterion is
// self-contained, catches its own failures, and reports one line.
std::vector<CriterionResult> run_acceptance();

std::string acceptance_to_text(const std::vector<CriterionResult>& results);

} // namespace gldeg
