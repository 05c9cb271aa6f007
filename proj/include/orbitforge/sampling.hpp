#pragma once

#include "orbitforge/numerics.hpp"

#include <cstdint>
#include <vector>

/// Deterministic state sampling for verification grids. All draws use a
/// seeded 64-bit Mersenne Twister so every check is reproducible.
namespace orbitforge {

/// Default seed for verification sampling (overridable per grid or via the
/// ORBITFORGE_SEED environment variable in the CLI layer).
inline constexpr std::uint64_t kDefaultSeed = 0x5EED;

/// Axis-aligned sampling box.
struct SampleBox {
  Vector lo;
  Vector hi;

  /// Throws DimensionError / ConfigError on mismatched sizes or lo > hi.
  void validate() const;
};

/// A reproducible batch of check states: uniform draws in `box`, rejecting
/// states for which `exclude` returns true.
struct CheckGrid {
  SampleBox box;
  int count = 1000;
  std::uint64_t seed = kDefaultSeed;
  StateTest exclude;
};

/// `count` uniform draws in the box (no exclusion).
std::vector<Vector> draw_in_box(const SampleBox& box, int count,
                                std::uint64_t seed);

/// Draws grid.count states honoring grid.exclude. Throws Error when the
/// rejection loop exceeds 1000x the requested count.
std::vector<Vector> sample_states(const CheckGrid& grid);

/// Like sample_states but additionally requires lo <= dist(x) <= hi for the
/// supplied distance function (used for shell sampling around an orbit).
std::vector<Vector> sample_states_in_shell(
    const CheckGrid& grid, const std::function<double(const Vector&)>& dist,
    double lo, double hi);

}  // namespace orbitforge
