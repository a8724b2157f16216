// One line per acceptance check; nonzero exit if any fails.
#include <cstdlib>
#include <iostream>
#include <string>

#include "criteria.hpp"

int main(int argc, char** argv) {
    std::string suite = argc > 1 ? argv[1] : "all";
    dcurve::verify::CriteriaOptions opts;
    if (const char* s = std::getenv("DCURVE_SEED")) opts.seed = std::strtoull(s, nullptr, 10);
    auto results = dcurve::verify::run_suite(suite, opts);
    int failed = 0;
    for (const auto& r : results) {
        std::cout << dcurve::verify::format_result(r) << std::endl;
        failed += r.passed ? 0 : 1;
    }
    std::cout << results.size() - failed << "/" << results.size() << " checks passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
