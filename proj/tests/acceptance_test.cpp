// Acceptance suite: one line per criterion; exit status 0 only if all pass.
#include <iostream>

#include "uavshare/acceptance.hpp"

int main() {
    auto results = uavshare::acceptance::run_all(std::cout);
    return uavshare::acceptance::all_pass(results) ? 0 : 1;
}
