#include "orbitforge/ph_core.hpp"

#include <algorithm>
#include <string>

namespace orbitforge {

void Partition::validate(int n) const {
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  auto mark = [&](int idx) {
    if (idx < 0 || idx >= n) {
      throw DimensionError("partition index " + std::to_string(idx) +
                           " out of range for dimension " + std::to_string(n));
    }
    if (seen[static_cast<std::size_t>(idx)]) {
      throw DimensionError("partition index " + std::to_string(idx) +
                           " repeated");
    }
    seen[static_cast<std::size_t>(idx)] = true;
  };
  mark(p[0]);
  mark(p[1]);
  for (int idx : l) mark(idx);
  if (2 + static_cast<int>(l.size()) != n) {
    throw DimensionError("partition covers " +
                         std::to_string(2 + l.size()) + " of " +
                         std::to_string(n) + " coordinates");
  }
}

Vector Partition::xp(const Vector& x) const {
  Vector out(2);
  out << x(p[0]), x(p[1]);
  return out;
}

Vector Partition::xl(const Vector& x) const {
  Vector out(static_cast<Eigen::Index>(l.size()));
  for (std::size_t i = 0; i < l.size(); ++i) out(static_cast<Eigen::Index>(i)) = x(l[i]);
  return out;
}

Matrix Partition::pp(const Matrix& a) const {
  Matrix out(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out(i, j) = a(p[i], p[j]);
  return out;
}

Matrix Partition::pl(const Matrix& a) const {
  Matrix out(2, static_cast<Eigen::Index>(l.size()));
  for (int i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < l.size(); ++j)
      out(i, static_cast<Eigen::Index>(j)) = a(p[i], l[j]);
  return out;
}

Matrix Partition::lp(const Matrix& a) const {
  Matrix out(static_cast<Eigen::Index>(l.size()), 2);
  for (std::size_t i = 0; i < l.size(); ++i)
    for (int j = 0; j < 2; ++j)
      out(static_cast<Eigen::Index>(i), j) = a(l[i], p[j]);
  return out;
}

Matrix Partition::ll(const Matrix& a) const {
  const auto k = static_cast<Eigen::Index>(l.size());
  Matrix out(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      out(i, j) = a(l[static_cast<std::size_t>(i)], l[static_cast<std::size_t>(j)]);
  return out;
}

Vector Partition::assemble(const Vector& xp, const Vector& xl) const {
  Vector x(2 + static_cast<Eigen::Index>(l.size()));
  x(p[0]) = xp(0);
  x(p[1]) = xp(1);
  for (std::size_t i = 0; i < l.size(); ++i) x(l[i]) = xl(static_cast<Eigen::Index>(i));
  return x;
}

Vector closed_loop_field(const PhDesign& design, const Vector& x) {
  if (design.is_singular_at(x)) {
    throw SingularEvaluation("closed-loop field evaluated on the singular set");
  }
  return (design.J(x) - design.R(x)) * design.gradient(x);
}

Vector matching_residual(const ControlAffinePlant& plant, const PhDesign& design,
                         const Vector& x) {
  if (plant.n == plant.m) return Vector(0);
  const Matrix g_perp = left_annihilator(plant.g(x));
  return g_perp * (plant.f(x) - closed_loop_field(design, x));
}

Vector ida_control(const ControlAffinePlant& plant, const PhDesign& design,
                   const Vector& x) {
  if (design.is_singular_at(x)) {
    if (design.control_override) return design.control_override(x);
    throw SingularEvaluation(
        "control evaluated on the singular set and no override is defined");
  }
  const Vector target = closed_loop_field(design, x);
  return pseudo_inverse(plant.g(x)) * (target - plant.f(x));
}

double hamiltonian_rate(const PhDesign& design, const Vector& x) {
  const Vector grad = design.gradient(x);
  return -grad.dot(design.R(x) * grad);
}

}  // namespace orbitforge
