#include "orbitforge/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace orbitforge {

namespace {

/// One Newton step toward {phi = 0} along the gradient direction.
Vector project_to_curve(const ScalarField& phi, const VectorFn& grad_phi,
                        Vector x) {
  for (int it = 0; it < 5; ++it) {
    const double v = phi(x);
    if (std::abs(v) < 1e-14) break;
    const Vector g = grad_phi(x);
    const double gg = g.squaredNorm();
    if (gg < 1e-24) throw Error("level-curve projection hit a critical point");
    x -= (v / gg) * g;
  }
  return x;
}

/// Unit-speed tangent field of the level curve (rotated gradient).
Vector tangent(const VectorFn& grad_phi, const Vector& x) {
  const Vector g = grad_phi(x);
  const double norm = g.norm();
  if (norm < 1e-12) throw Error("level-curve tangent undefined (zero gradient)");
  Vector t(2);
  t << -g(1) / norm, g(0) / norm;
  return t;
}

}  // namespace

std::vector<Vector> trace_level_curve(const ScalarField& phi,
                                      const VectorFn& grad_phi,
                                      const Vector& seed, int n_samples,
                                      double step, long max_steps) {
  if (seed.size() != 2) throw DimensionError("curve tracer expects a planar seed");
  Vector x = project_to_curve(phi, grad_phi, seed);
  if (std::abs(phi(x)) > 1e-10) {
    throw Error("curve tracer seed does not project onto the level set");
  }

  std::vector<Vector> poly;
  poly.push_back(x);
  const Vector start = x;
  for (long i = 0; i < max_steps; ++i) {
    // RK4 step on the unit-speed tangent field.
    const Vector k1 = tangent(grad_phi, x);
    const Vector k2 = tangent(grad_phi, x + 0.5 * step * k1);
    const Vector k3 = tangent(grad_phi, x + 0.5 * step * k2);
    const Vector k4 = tangent(grad_phi, x + step * k3);
    x += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    x = project_to_curve(phi, grad_phi, x);
    if (i > 10 && (x - start).norm() < 0.75 * step) break;
    poly.push_back(x);
    if (i + 1 == max_steps) {
      throw Error("level curve did not close within the step budget");
    }
  }

  // Arclength-uniform resampling of the closed polyline.
  const std::size_t k = poly.size();
  std::vector<double> s(k + 1, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const Vector& a = poly[i];
    const Vector& b = poly[(i + 1) % k];
    s[i + 1] = s[i] + (b - a).norm();
  }
  const double total = s[k];
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(n_samples));
  std::size_t seg = 0;
  for (int j = 0; j < n_samples; ++j) {
    const double target = total * static_cast<double>(j) / n_samples;
    while (seg + 1 < k && s[seg + 1] < target) ++seg;
    const double span = s[seg + 1] - s[seg];
    const double w = span > 0.0 ? (target - s[seg]) / span : 0.0;
    // Chord interpolation drifts off the level set by O(step^2); push each
    // sample back so downstream consumers can rely on |phi| at roundoff.
    out.push_back(project_to_curve(
        phi, grad_phi, (1.0 - w) * poly[seg] + w * poly[(seg + 1) % k]));
  }
  return out;
}

std::vector<Vector> circle_samples(double radius, int n_samples) {
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(n_samples));
  for (int j = 0; j < n_samples; ++j) {
    const double a = 2.0 * kPi * static_cast<double>(j) / n_samples;
    Vector p(2);
    p << radius * std::cos(a), radius * std::sin(a);
    out.push_back(p);
  }
  return out;
}

double dist_to_orbit(const OrbitTarget& orbit, const Vector& x) {
  if (orbit.analytic_dist) return orbit.analytic_dist(x);
  if (orbit.curve_samples.empty()) {
    throw Error("orbit has neither analytic distance nor curve samples");
  }
  const Vector xp = orbit.part.xp(x);
  double best = std::numeric_limits<double>::infinity();
  for (const Vector& q : orbit.curve_samples) {
    best = std::min(best, (xp - q).squaredNorm());
  }
  const Vector xl = orbit.part.xl(x);
  const double dl2 =
      xl.size() > 0 ? (xl - orbit.x_l_star).squaredNorm() : 0.0;
  return std::sqrt(best + dl2);
}

Vector transverse_coords(const OrbitTarget& orbit, const Vector& x) {
  const Vector xl = orbit.part.xl(x);
  Vector z(1 + xl.size());
  z(0) = orbit.phi(orbit.part.xp(x));
  for (Eigen::Index i = 0; i < xl.size(); ++i) {
    z(1 + i) = xl(i) - orbit.x_l_star(i);
  }
  return z;
}

}  // namespace orbitforge
