#pragma once

// The acceptance criteria, runnable from the library, the CLI and ctest.

#include <iosfwd>
#include <string>
#include <vector>

namespace smlab {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Runs criteria 1 to 10 in order. When `log` is given, prints one PASS/FAIL line per criterion as it finishes.
std::vector<CriterionResult> run_acceptance(std::ostream* log = nullptr);
inline std::vector<CriterionResult> run_acceptance(std::ostream& log) { return run_acceptance(&log); }

std::string format_line(const CriterionResult& r);
std::string acceptance_json(const std::vector<CriterionResult>& results);

}  // namespace smlab
