#pragma once

#include "orbitforge/ph_core.hpp"

#include <vector>

/// Target orbits: the zero level curve of a planar function Phi together with
/// a setpoint for the non-planar coordinates, plus a tracer that turns an
/// implicit curve into an arclength-uniform polyline for distance queries.
namespace orbitforge {

/// The attractor A = {x : Phi(x_p) = 0, x_l = x_l_star}. `phi` and `grad_phi`
/// act on the planar block only. `curve_samples` holds points of the traced
/// level curve; `analytic_dist`, when set, gives the exact distance from a
/// full state to A and takes precedence over the sampled fallback.
struct OrbitTarget {
  Partition part;
  ScalarField phi;
  VectorFn grad_phi;
  Vector x_l_star;
  std::vector<Vector> curve_samples;
  std::function<double(const Vector&)> analytic_dist;

  double phi_of_state(const Vector& x) const { return phi(part.xp(x)); }
};

/// Traces the closed curve {Phi = 0} through `seed` (which must satisfy
/// Phi(seed) ~ 0) by marching the rotated gradient at unit speed with periodic
/// Newton re-projection onto the level set, then resamples the polyline to
/// `n_samples` arclength-uniform points. Throws Error if the curve fails to
/// close within `max_steps` or the seed cannot be projected onto the curve.
std::vector<Vector> trace_level_curve(const ScalarField& phi,
                                      const VectorFn& grad_phi,
                                      const Vector& seed, int n_samples = 2048,
                                      double step = 1e-3,
                                      long max_steps = 200000);

/// n_samples points on the circle |x_p| = radius (arclength uniform).
std::vector<Vector> circle_samples(double radius, int n_samples = 2048);

/// Euclidean distance from a full state to the attractor: the orbit's
/// analytic_dist when available, otherwise
/// sqrt(min_k |x_p - curve_k|^2 + |x_l - x_l_star|^2).
double dist_to_orbit(const OrbitTarget& orbit, const Vector& x);

/// Transverse coordinates [Phi(x_p); x_l - x_l_star].
Vector transverse_coords(const OrbitTarget& orbit, const Vector& x);

}  // namespace orbitforge
