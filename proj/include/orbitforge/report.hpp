#pragma once

#include <string>
#include <vector>

/// Structured pass/fail reporting for design verification.
namespace orbitforge {

/// One named check. `heuristic` marks checks that rest on sampling or
/// simulation rather than algebra (they can miss counterexamples).
struct CheckResult {
  std::string name;
  bool pass = false;
  bool heuristic = false;
  std::string summary;
  std::vector<std::string> violations;
};

/// A bundle of checks for one design.
struct Report {
  std::string subject;
  std::vector<CheckResult> checks;

  void add(CheckResult r) { checks.push_back(std::move(r)); }

  /// True when every check passed.
  bool pass() const;

  /// Total violations across all checks.
  std::size_t violation_count() const;

  /// Human-readable rendering: one line per check plus indented violations.
  std::string to_text() const;
};

}  // namespace orbitforge
