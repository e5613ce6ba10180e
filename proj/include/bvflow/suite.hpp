#pragma once

#include <functional>
#include <string>
#include <vector>

namespace bvflow {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double seconds = 0.0;
    std::string detail;  // worst observed error / key numbers
};

// Full acceptance battery. threads = 0 picks the hardware concurrency for the
// Monte Carlo criteria; everything else is deterministic and single-threaded.
// on_result fires as each criterion finishes (progress reporting).
std::vector<CriterionResult> run_acceptance_suite(
    int threads = 0, const std::function<void(const CriterionResult&)>& on_result = {});

}  // namespace bvflow
