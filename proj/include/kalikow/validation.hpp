#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "kalikow/models.hpp"

namespace kalikow::validation {

struct SuiteOptions {
    std::uint64_t seed = 20240917;
    /// Multiplies every run count (1 = the documented acceptance sizes).
    double scale = 1.0;
};

struct Measurement {
    std::string label;
    double observed = 0.0;
    std::string threshold;
    bool passed = false;
};

struct SuiteReport {
    int criterion = 0;
    std::string name;
    std::string title;
    bool passed = false;
    double seconds = 0.0;
    std::vector<Measurement> measurements;

    std::string summary_line() const;
};

class UnknownSuite : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Suite names in criterion order.
std::vector<std::string> suite_names();

SuiteReport run_suite(const std::string& name, const SuiteOptions& options = {});

// Models used by the suites, also reachable as CLI presets.

/// Two nodes, Gamma = 1, mean offspring matrix [[0.2, 0.3], [0.1, 0.4]].
TableModel clan_test_model();
/// One node, lambda(empty) = 1/2 plus 32 disjoint pieces of length 1/2 and
/// weight 1/64 each: gamma = Gamma / 4.
TableModel gate_model(double bound);
/// One node, psi(u) = 2 + u, h = 0.5 e^{-5t}, delta = 0.1, exact bounds.
AgeHawkesModel thinning_test_model();
/// Lattice preset with decay = exponent = 4 and delta giving mean offspring 1/2.
AgeHawkesModel stationarity_test_model();
double stationarity_test_delta();

}  // namespace kalikow::validation
