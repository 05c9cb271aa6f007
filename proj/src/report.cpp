#include "orbitforge/report.hpp"

#include <sstream>

namespace orbitforge {

bool Report::pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

std::size_t Report::violation_count() const {
  std::size_t n = 0;
  for (const auto& c : checks) n += c.violations.size();
  return n;
}

std::string Report::to_text() const {
  std::ostringstream os;
  os << "design: " << subject << "\n";
  for (const auto& c : checks) {
    os << "  [" << (c.pass ? "PASS" : "FAIL") << "] " << c.name;
    if (c.heuristic) os << " (heuristic)";
    if (!c.summary.empty()) os << " - " << c.summary;
    os << "\n";
    // Cap the echoed violations; the count is always accurate.
    const std::size_t show = c.violations.size() < 5 ? c.violations.size() : 5;
    for (std::size_t i = 0; i < show; ++i) {
      os << "      " << c.violations[i] << "\n";
    }
    if (c.violations.size() > show) {
      os << "      ... and " << (c.violations.size() - show) << " more\n";
    }
  }
  os << "overall: " << (pass() ? "PASS" : "FAIL") << "\n";
  return os.str();
}

}  // namespace orbitforge
