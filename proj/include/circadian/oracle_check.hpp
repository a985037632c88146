#pragma once

#include "circadian/config.hpp"

#include <string>
#include <vector>

namespace circadian {

struct OracleCheckLine {
    std::string name;
    double value = 0.0;
    std::string bound;  ///< human-readable acceptance band
    bool pass = false;
    bool informational = false;  ///< printed as "info", never fails the report
};

struct OracleCheckReport {
    std::vector<OracleCheckLine> lines;
    bool all_pass() const;
    std::string render() const;
};

/// Solver against the closed-form K = 0 solution (at n and n/2), the F = 0
/// uniform solution, and the first-order expansion in K. Uses the configured
/// method, scheme, σ and F; ω₀ is set to ω_S.
OracleCheckReport oracle_check(const RunConfig& cfg);

}  // namespace circadian
