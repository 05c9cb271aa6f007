#pragma once

#include "orbitforge/numerics.hpp"

#include <vector>

/// Trajectory post-processing: exponential decay-rate fits, period
/// estimation, and turning-point extraction.
namespace orbitforge {

/// Result of a least-squares exponential fit |v(t)| ~ exp(-rate * t).
struct RateFit {
  double rate = 0.0;
  double r_squared = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  int n_samples = 0;
};

/// Fits log|v| against t over the window from the first sample with
/// |v| <= |v(0)| / 2 (skipping the initial transient) until |v| drops below
/// 1e-10 (where rounding dominates). Throws WindowTooShort when fewer than
/// 20 samples land in the window.
RateFit fit_exponential_rate(const std::vector<double>& t,
                             const std::vector<double>& v);

/// Period of the planar rotation from the unwrapped phase atan2(x_iy, x_ix)
/// over the second half of the trajectory: full-turn crossing times are
/// interpolated and averaged. Throws InsufficientCycles below 3 revolutions.
double estimate_period_phase(const std::vector<double>& t,
                             const std::vector<Vector>& state, int ix, int iy);

/// A local extremum of a sampled scalar signal.
struct TurningPoint {
  double t = 0.0;
  double value = 0.0;
};

/// Locates extrema of `position` where `velocity` changes sign, refining each
/// with the vertex of the parabola through the three nearest samples.
std::vector<TurningPoint> turning_points(const std::vector<double>& t,
                                         const std::vector<double>& position,
                                         const std::vector<double>& velocity);

/// The turning points in the last quarter of the time span (the settled part).
std::vector<TurningPoint> steady_turning_points(
    const std::vector<double>& t, const std::vector<double>& position,
    const std::vector<double>& velocity);

/// Period from turning-point spacing (twice the mean interval) over the
/// second half of the trajectory. Throws InsufficientCycles with fewer than
/// 3 turning points there.
double estimate_period_turning(const std::vector<double>& t,
                               const std::vector<double>& position,
                               const std::vector<double>& velocity);

}  // namespace orbitforge
