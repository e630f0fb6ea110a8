#include <cstdio>

#include "property_checks.hpp"

// Standalone runner for the structural invariants: one [PASS]/[FAIL] line
// per property, exit status = number of failures.
int main() {
    const auto results = molfield::props::run_property_suite();
    int failures = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        if (r.pass) {
            std::printf("[PASS] %2zu %s\n", i + 1, r.name.c_str());
        } else {
            ++failures;
            std::printf("[FAIL] %2zu %s - %s\n", i + 1, r.name.c_str(), r.detail.c_str());
        }
    }
    std::printf("%zu properties, %d failed\n", results.size(), failures);
    return failures;
}
