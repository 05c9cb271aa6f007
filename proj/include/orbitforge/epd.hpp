#pragma once

#include "orbitforge/msea.hpp"

/// Pumping-and-damping orbital designs: the closed-loop energy splits as
/// H(x) = H_p(x_p) + H_l(x_l), the orbit is the level set H_p = H_p_star at
/// the target x_l, and the planar damping block changes sign with the energy
/// error Phi = H_p - H_p_star (pumping below the target level, dissipating
/// above it). This module carries the design data, its structural checks,
/// energy rates, and the conversion from a mechanism-shaping design.
namespace orbitforge {

struct EpdDesign {
  PhDesign ph;  ///< assembled closed-loop design (smooth; no orbit singularity)
  Partition part;
  OrbitTarget orbit;

  ScalarField Hp;    ///< planar energy, on the x_p block
  VectorFn grad_Hp;  ///< on the x_p block
  ScalarField Hl;    ///< on the x_l block (ignored when x_l is empty)
  VectorFn grad_Hl;  ///< on the x_l block
  double Hp_star = 0.0;
  Vector x_p_star;   ///< planar critical point of Hp (center of the orbit)

  MatrixFn Rpp;  ///< planar damping block, full-state input (sign-indefinite)
  MatrixFn Rll;  ///< residual damping block, full-state input (PSD)

  /// Ball radius cap used by the energy-well check.
  double well_radius_cap = 1.0;

  double phi(const Vector& x) const {
    return Hp(part.xp(x)) - Hp_star;
  }
};

/// Sampled check that the planar damping is a diagonal pumping/damping block
/// aligned with the energy error: R_pp,ii * Phi >= 0, R_pp vanishes exactly
/// where Phi does, and the off-diagonal entries are zero.
CheckResult check_pumping_alignment(const EpdDesign& design,
                                    const std::vector<Vector>& states);

/// Sampled check of the planar/residual coupling: the planar interconnection
/// entry J_12 is bounded away from zero, and the coupling block J_pl does no
/// work on the planar energy (grad Hp^T J_pl = 0).
CheckResult check_planar_coupling(const EpdDesign& design,
                                  const std::vector<Vector>& states);

/// Energy-well geometry around x_p_star.
struct EnergyWellResult {
  double grad_norm = 0.0;          ///< |grad Hp(x_p_star)|
  bool hessian_pd = false;         ///< PD at x_p_star and on a small ring
  double lift_radius = 0.0;        ///< smallest r with max_{B_r} Hp > Hp_star
  double hessian_pd_radius = 0.0;  ///< largest ring radius with PD Hessian
  double eps_star = 0.0;           ///< largest admissible ball radius (the cap)
  bool pass = false;
};

/// Checks that x_p_star is a strict local minimum of Hp (vanishing gradient,
/// positive-definite finite-difference Hessian at the center and on a radius
/// 1e-2 ring) and that some ball of radius <= well_radius_cap lifts the
/// maximum of Hp above Hp_star. Throws NoValidRadius when even the cap ball
/// stays below Hp_star. The lift threshold and the largest
/// Hessian-positive-definite ring radius are reported as diagnostics.
EnergyWellResult check_energy_well(const EpdDesign& design);

/// Wraps check_energy_well as a CheckResult (capturing NoValidRadius).
CheckResult check_energy_well_result(const EpdDesign& design);

/// Instantaneous energy rates along the closed loop.
struct EnergyRates {
  double dHp = 0.0;  ///< planar energy rate
  double dHl = 0.0;  ///< residual energy rate
  double dV = 0.0;   ///< rate of V = Phi^2 / 2, i.e. Phi * dHp
};

/// Evaluates the damping quadratic forms directly:
///   dHp = -grad_Hp^T Rpp grad_Hp,  dHl = -grad_Hl^T Rll grad_Hl,
///   dV  = Phi * dHp.
/// With an aligned design (Rpp,ii * Phi >= 0, Rll PSD) this gives dHl <= 0
/// and dV <= 0 by construction; dHp alone changes sign opposite to Phi.
EnergyRates energy_rates(const EpdDesign& design, const Vector& x);

/// Kernel-exclusion monitor over a sampled trajectory: a sample is flagged
/// when the damping annihilates the planar gradient away from the orbit
/// (|Rpp grad_Hp| < 1e-9 while |grad_Hp| > 1e-6 and |Phi| > 1e-6). Isolated
/// flags are harmless grazes of ker(Rpp); a long consecutive run means the
/// trajectory is stuck where the energy error cannot decay, which indicates
/// a broken damping design.
struct KernelMonitor {
  int flagged = 0;              ///< number of flagged samples
  double longest_span = 0.0;    ///< longest consecutive flagged time span
  std::vector<double> flag_times;  ///< times of flagged samples
};

KernelMonitor kernel_monitor(const EpdDesign& design,
                             const std::vector<double>& t,
                             const std::vector<Vector>& states);

/// Converts a separable mechanism-shaping design into the equivalent
/// pumping-and-damping form: H_p becomes the orbit deviation Phi itself
/// (H_p_star = 0), the singular planar interconnection entry collapses to the
/// finite product c(x), and the planar damping is rescaled by dH1 so the
/// closed-loop field is unchanged. Throws DecompositionUnavailable when the
/// source design lacks the separable split.
EpdDesign msea_to_epd(const MseaDesign& m, const Vector& x_p_star,
                      const StateTest& singular_set = {});

}  // namespace orbitforge
