#pragma once

#include "orbitforge/orbit.hpp"
#include "orbitforge/report.hpp"
#include "orbitforge/sampling.hpp"

/// Mechanism-shaping orbital designs: the closed-loop Hamiltonian is a
/// function H0 of the orbit deviation x0 = Phi(x_p) and the remaining
/// coordinates, and the planar interconnection entry is c(x) / dH0/dx0 —
/// singular on the orbit, where the product c stays finite. This module
/// carries the design data, its structural check, and the regularized
/// (singularity-free) forms of the field and control.
namespace orbitforge {

struct MseaDesign {
  PhDesign ph;      ///< assembled closed-loop design (J singular on the orbit)
  Partition part;
  OrbitTarget orbit;

  /// Shaped energy H(x) = H0(Phi(x_p), x_l) and its partials.
  std::function<double(double, const Vector&)> H0;
  std::function<double(double, const Vector&)> dH0_dx0;
  std::function<Vector(double, const Vector&)> dH0_dxl;

  /// The finite product c(x) = J_12(x) * dH0/dx0(x).
  ScalarField c;

  /// Bounded interconnection blocks (the pp block is the singular one and is
  /// reconstructed from c during regularized evaluation).
  MatrixFn J_pl;
  MatrixFn J_ll;

  /// Optional separable split H0(x0, x_l) = H1(x0) + Hl(x_l); required by
  /// the pumping-and-damping decomposition.
  std::function<double(double)> H1;
  std::function<double(double)> dH1;
  ScalarField Hl;      ///< on the x_l block
  VectorFn grad_Hl;    ///< on the x_l block

  bool separable() const { return H1 && dH1 && Hl && grad_Hl; }
};

/// Fills design.ph.H and design.ph.grad_H from H0 and the orbit data
/// (chain rule through x0 = Phi(x_p)).
void compose_hamiltonian(MseaDesign& design);

/// Structural check on the interconnection: off the orbit (shell
/// 0.05 <= dist <= 0.5) the product J_12 * dH0/dx0 reproduces c to 1e-9;
/// on the orbit c itself is finite and bounded away from zero.
CheckResult check_interconnection(const MseaDesign& design,
                                  const CheckGrid& grid);

/// The planar residual motion on the orbit and its 1-norm |c| * |grad Phi|_1.
struct OnOrbitField {
  Vector field_p;
  double one_norm;
};

/// Evaluates the on-orbit planar field (c * dPhi/dx2, -c * dPhi/dx1) at x.
/// Throws OffOrbit when dist(x, A) > tol.
OnOrbitField on_orbit_residual_field(const MseaDesign& design, const Vector& x,
                                     double tol = 1e-6);

/// Closed-loop field evaluated through the finite product c instead of the
/// singular J_12 entry; well defined on and off the orbit and equal to
/// closed_loop_field wherever the latter exists.
Vector regularized_field(const MseaDesign& design, const Vector& x);

/// Matching control computed from the regularized field.
Vector regularized_control(const ControlAffinePlant& plant,
                           const MseaDesign& design, const Vector& x);

}  // namespace orbitforge
