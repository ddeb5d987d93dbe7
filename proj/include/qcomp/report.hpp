#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace qcomp {

/// Grid location of the worst violation found by a check.
struct CheckLocation {
    std::size_t index = 0;  ///< node index within the slice (or pair index)
    double s = 0.0;         ///< spatial coordinate (or separation)
    double t = 0.0;         ///< time of the slice
};

/// Outcome of a single verification check. The invariant
/// passed == (worst_violation <= tolerance_used) holds by construction:
/// every check finishes through finalize().
struct CheckReport {
    std::string name;
    bool passed = false;
    double worst_violation = 0.0;
    CheckLocation worst_location;
    double tolerance_used = 0.0;
    std::map<std::string, double> metadata;

    void finalize() { passed = worst_violation <= tolerance_used; }
};

/// Bundle of per-hypothesis reports for a structural audit (profile
/// admissibility); passed is the conjunction.
struct HypothesisReport {
    std::string name;
    std::vector<CheckReport> hypotheses;
    bool passed = true;

    void add(CheckReport r) {
        passed = passed && r.passed;
        hypotheses.push_back(std::move(r));
    }
};

} // namespace qcomp
