#pragma once

#include <string>
#include <vector>

namespace brw {

struct CheckResult {
    std::string name;
    std::string oracle;
    std::string tolerance;
    bool pass = false;
    std::string detail;
};

// Suites: expander, spectra, min-entry, degree, binomial, parity, all.
std::vector<CheckResult> verify_suite(const std::string& suite);

}  // namespace brw
