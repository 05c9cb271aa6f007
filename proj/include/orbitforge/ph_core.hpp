#pragma once

#include "orbitforge/numerics.hpp"

#include <array>
#include <vector>

/// Control-affine plants, closed-loop port-Hamiltonian designs, and the
/// matching machinery connecting them: closed-loop field evaluation, matching
/// residual, the interconnection-and-damping control law, and energy rates.
namespace orbitforge {

/// Splits the state into a planar pair x_p (two coordinates that carry the
/// target level curve) and the remaining coordinates x_l.
struct Partition {
  std::array<int, 2> p{0, 1};
  std::vector<int> l;

  /// Throws DimensionError unless p and l tile 0..n-1 without repeats.
  void validate(int n) const;

  Vector xp(const Vector& x) const;
  Vector xl(const Vector& x) const;

  /// Block extraction from a full n x n matrix.
  Matrix pp(const Matrix& a) const;
  Matrix pl(const Matrix& a) const;
  Matrix lp(const Matrix& a) const;
  Matrix ll(const Matrix& a) const;

  /// Rebuilds a full state from its two blocks.
  Vector assemble(const Vector& xp, const Vector& xl) const;
};

/// Input-affine plant xdot = f(x) + g(x) u with g(x) of full column rank
/// wherever the library evaluates it.
struct ControlAffinePlant {
  int n = 0;  ///< state dimension
  int m = 0;  ///< input dimension
  VectorFn f;
  MatrixFn g;
  /// Indices of angle coordinates (wrapped to (-pi, pi] when integrating).
  std::vector<int> angle_coords;
};

/// Target closed loop xdot = (J(x) - R(x)) grad H(x) with J skew-symmetric
/// and R symmetric positive semidefinite. `singular_set` marks states where
/// J or R entries are undefined (evaluating there throws SingularEvaluation);
/// `control_override` supplies the control limit on that set when one exists.
struct PhDesign {
  int n = 0;
  MatrixFn J;
  MatrixFn R;
  ScalarField H;
  VectorFn grad_H;  ///< optional; finite differences are used when empty
  StateTest singular_set;
  VectorFn control_override;

  bool is_singular_at(const Vector& x) const {
    return singular_set && singular_set(x);
  }

  /// Analytic gradient when provided, central differences otherwise.
  Vector gradient(const Vector& x) const {
    return grad_H ? grad_H(x) : grad_fd(H, x);
  }
};

/// (J(x) - R(x)) grad H(x). Throws SingularEvaluation on the singular set.
Vector closed_loop_field(const PhDesign& design, const Vector& x);

/// Matching residual g_perp(x) (f(x) - (J - R) grad H). Zero (up to numerics)
/// exactly where the design is achievable by feedback. For square g (no
/// annihilator) the residual is the empty vector.
Vector matching_residual(const ControlAffinePlant& plant, const PhDesign& design,
                         const Vector& x);

/// The matching feedback u = g^+ ((J - R) grad H - f). On the singular set the
/// design's control_override is used when present; otherwise throws
/// SingularEvaluation.
Vector ida_control(const ControlAffinePlant& plant, const PhDesign& design,
                   const Vector& x);

/// dH/dt along the closed loop: -grad H^T R grad H (the J term cancels).
double hamiltonian_rate(const PhDesign& design, const Vector& x);

}  // namespace orbitforge
