#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace uavshare::acceptance {

struct CriterionResult {
    std::string id;  // "1".."11", or "total"
    std::string title;
    bool pass = false;
    std::string detail;
    double seconds = 0;
};

// Runs every criterion, printing one line per criterion as it completes and a
// final line for the whole-suite time limit.
std::vector<CriterionResult> run_all(std::ostream& out);

bool all_pass(const std::vector<CriterionResult>& results);

}  // namespace uavshare::acceptance
