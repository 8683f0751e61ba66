// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on failure.
// Usage: acceptance [--jobs N] [--only NAME]

#include "qtraj/acceptance.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

int main(int argc, char** argv) {
    qtraj::VerifyOptions opt;
    std::string only;
    for (int i = 1; i + 1 < argc; i += 2) {
        if (std::strcmp(argv[i], "--jobs") == 0) opt.jobs = std::atoi(argv[i + 1]);
        else if (std::strcmp(argv[i], "--only") == 0) only = argv[i + 1];
    }
    int failed = 0;
    for (const auto& check : qtraj::acceptance_checks()) {
        if (!only.empty() && check.name != only) continue;
        const qtraj::CheckResult r = check.run(opt);
        if (!r.passed) ++failed;
        std::printf("[%s] %s: %s (%.1fs)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                    r.detail.c_str(), r.seconds);
        std::fflush(stdout);
    }
    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
