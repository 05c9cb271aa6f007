#pragma once

#include "orbitforge/plants.hpp"
#include "orbitforge/report.hpp"

#include <cstdint>
#include <string>
#include <vector>

/// Design audits: algebraic structure (skew interconnection, symmetric
/// damping), feedback achievability (matching residual), the design-family
/// structural checks, orbit optimality, and a simulation-based convergence
/// falsifier. Bundled per built-in design behind a name registry for the CLI.
namespace orbitforge {

/// Audits a shaped-energy design attached to a packaged system.
Report audit_shaped_design(const PackagedSystem& sys, const MseaDesign& design,
                           const CheckGrid& grid);

/// Audits a pumping-and-damping design attached to a packaged system.
Report audit_pumping_design(const PackagedSystem& sys, const EpdDesign& design,
                            const CheckGrid& grid);

/// Names accepted by verify_design. Includes a deliberately broken
/// "im_msea_perturbed" design that must fail its audit (negative control).
std::vector<std::string> builtin_design_names();

/// Builds the named built-in design and runs its audit with the system's
/// check box, `count` sampled states, and the given seed. Throws ConfigError
/// for unknown names.
Report verify_design(const std::string& name, int count = 1000,
                     std::uint64_t seed = kDefaultSeed);

}  // namespace orbitforge
