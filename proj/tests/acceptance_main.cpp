// One line per acceptance criterion; exit status 0 only when all pass.

#include <algorithm>
#include <iostream>

#include "smlab/acceptance.hpp"

int main() {
    const auto results = smlab::run_acceptance(std::cout);
    const bool ok = std::all_of(results.begin(), results.end(), [](const smlab::CriterionResult& r) { return r.pass; });
    std::cout << (ok ? "ALL PASS" : "FAILURES") << '\n';
    return ok ? 0 : 1;
}
