// Acceptance gate: every numbered criterion prints one pass/fail line and the
// process exits nonzero when any of them fails. Run through ctest or directly.
#include <cstdio>
#include <iostream>

#include "kslab/acceptance.hpp"

int main() {
    const auto results = kslab::run_acceptance(12345, &std::cout);
    int failed = 0;
    for (const auto& r : results)
        if (!r.pass) ++failed;
    std::printf("acceptance: %zu/%zu criteria passed\n", results.size() - failed,
                results.size());
    return failed == 0 ? 0 : 1;
}
