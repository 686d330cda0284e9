#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace timdnn {

struct ValidateOptions {
  long cases = 1000;
  std::uint64_t seed = 1;
  // Test hook: corrupts one ADC code in one case per suite.
  bool inject_fault = false;
};

struct SuiteResult {
  std::string name;
  bool pass = true;
  long cases = 0;
  long failing_case = -1;  // replay with stream (seed, failing_case)
  std::string detail;
};

/// Tile-level equivalence against plain-loop oracles: unweighted, weighted
/// two-step, bit-serial and clipping suites.
std::vector<SuiteResult> run_validation(const ValidateOptions& options);

}  // namespace timdnn
