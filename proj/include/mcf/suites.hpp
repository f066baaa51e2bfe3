#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mcf/verify.hpp"

namespace mcf {

/// One row of a verification table: `value` must be <= or >= `threshold`.
struct SuiteCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool upper = true;  // true: value <= threshold
  bool pass = false;
  std::string note;
};

struct SuiteResult {
  std::string suite;
  std::vector<SuiteCheck> checks;
  bool all_pass() const;
};

const std::vector<std::string>& suite_names();

/// Runs a named suite: oracles, residuals, invariants or convergence.
/// Throws InputError for an unknown name.
SuiteResult run_suite(const std::string& name, Exec exec = Exec::parallel);

void print_suite(std::ostream& out, const SuiteResult& result);

}  // namespace mcf
