// Acceptance run: one PASS/FAIL line per criterion, followed by its individual checks.
#include <cstdio>

#include "verify.hpp"

int main() {
    using spiralflow::CriterionResult;
    int failed = 0;
    spiralflow::verify_all(0, [&](const CriterionResult& c, double seconds) {
        std::printf("%s criterion %d: %s (%.2f s)\n", c.pass() ? "PASS" : "FAIL", c.id, c.title.c_str(), seconds);
        for (const auto& k : c.checks)
            std::printf("    %s %s [%s] value=%.6g %s\n", k.pass ? "ok  " : "FAIL", k.name.c_str(), k.where.c_str(),
                        k.value, k.bound.c_str());
        std::fflush(stdout);
        failed += c.pass() ? 0 : 1;
    });
    std::printf("%d of 7 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
