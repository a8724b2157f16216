#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace dcurve::verify {

struct CriterionResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct CriteriaOptions {
    std::uint64_t seed = 1;
    std::ostream* log = nullptr;  // progress lines
};

// Names of the acceptance checks in run order.
const std::vector<std::string>& criterion_names();

// Run one check by name; throws std::invalid_argument for unknown names.
CriterionResult run_criterion(const std::string& name, const CriteriaOptions& opts = {});

// Named groups of checks: fmm, kernels, solver, adaptive, render.
const std::vector<std::pair<std::string, std::vector<std::string>>>& suite_groups();

// "all", a group, a single name, or a comma separated list of those.
std::vector<CriterionResult> run_suite(const std::string& suite, const CriteriaOptions& opts = {});

// FMM truncation error against direct summation for a range of expansion orders.
struct TruncationRow {
    int order = 0;
    double max_error_g = 0.0;
    double max_error_f = 0.0;
};
std::vector<TruncationRow> truncation_table(std::uint64_t seed, const std::vector<int>& orders);

// "PASS name  detail  (1.2 s)"
std::string format_result(const CriterionResult& r);

}  // namespace dcurve::verify
