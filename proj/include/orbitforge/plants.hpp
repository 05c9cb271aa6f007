#pragma once

#include "orbitforge/epd.hpp"
#include "orbitforge/integrate.hpp"

#include <optional>
#include <string>

/// Built-in plants and their packaged orbital controllers: a two-phase
/// induction motor (fixed and rotating frame) driven to a flux circle at a
/// target speed, and a pendulum driven to an energy level set around the
/// upright position (a local and an almost-global variant).
namespace orbitforge {

/// Induction-motor parameters: winding resistance, target flux radius,
/// target rotor speed, and speed-loop gain.
struct ImParams {
  double R = 1.0;
  double beta_star = 1.0;
  double omega_star = 5.0;
  double k = 1.0;

  /// Throws ConfigError on non-positive R, beta_star, k or zero omega_star.
  void validate() const;
};

/// Pendulum parameters. The local variant damps with a single gain; the
/// almost-global variant blends a strong inner gain with a gentle outer
/// pumping law switched at |theta| = pi/3.
struct PendulumParams {
  enum class Variant { Local, AlmostGlobal };
  Variant variant = Variant::Local;
  double gamma = 5.0;    ///< local damping gain
  double gamma1 = 20.0;  ///< almost-global inner gain
  double gamma2 = 2.0;   ///< almost-global outer gain
  double theta_star = kPi / 4;  ///< oscillation amplitude target

  /// Target energy level -(cos(theta_star) - 1/2)^2.
  double h_p_star() const;

  /// Throws ConfigError unless gains are positive and 0 < |theta_star| < pi/3.
  void validate() const;
};

/// A plant bundled with its orbit target, closed-form control law, attached
/// designs, and the metadata the verification and scenario layers need.
struct PackagedSystem {
  std::string name;
  ControlAffinePlant plant;
  Partition part;
  OrbitTarget orbit;

  /// Closed-form feedback u(x) (what `simulate` applies to the plant).
  VectorFn control;

  /// Time-dependent feedback u(t, x); when set it takes precedence over
  /// `control` (used by user-supplied expression controllers).
  std::function<Vector(double, const Vector&)> control_t;

  /// Gain-branch indicator for piecewise controllers (empty otherwise).
  std::function<int(const Vector&)> branch;

  std::optional<MseaDesign> msea;
  std::optional<EpdDesign> epd;

  /// Energy value recorded in the trajectory's H column.
  ScalarField H_channel;

  /// Sampling region and exclusions for verification grids.
  SampleBox check_box;
  StateTest check_exclude;

  /// Post-step state normalization (angle wrapping); may be empty.
  StateProjection project;

  /// Rejects initial states the controller cannot start from; may be empty.
  std::function<void(const Vector&)> validate_initial;
};

/// Fixed-frame induction motor with the orbit-shaping controller. State
/// (psi_1, psi_2, omega); attractor |psi| = beta_star, omega = omega_star.
/// Carries both attached designs: the shaped-energy form (singular on the
/// orbit) and the equivalent smooth pumping-and-damping form.
PackagedSystem im_fixed_frame(const ImParams& p);

/// Rotating-frame induction motor under field-oriented control. Same
/// attractor geometry; trajectories settle at a single point of the circle.
PackagedSystem im_rotating_frame(const ImParams& p);

/// Pendulum with the locally valid oscillation controller (valid for
/// |theta| < pi/3).
PackagedSystem pendulum_local(const PendulumParams& p);

/// Pendulum with the almost-globally convergent switched controller.
PackagedSystem pendulum_almost_global(const PendulumParams& p);

/// Field-oriented control in the rotating frame: direct-axis current pins the
/// flux radius, quadrature-axis current drives the speed error.
Vector foc_control(const ImParams& p, const Vector& lambda, double omega);

/// Max-norm difference between the fixed-frame orbital control at x and the
/// rotating-frame field-oriented control evaluated in a frame rotated by
/// theta and mapped back. Zero (to rounding) for every theta.
double foc_equivalence_residual(const ImParams& p, const Vector& x,
                                double theta);

/// Closed-loop rotating-frame dynamics in polar flux coordinates
/// (beta, rho, omega) under field-oriented control.
Vector im_polar_field(const ImParams& p, const Vector& s);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// Runs the packaged closed loop from x0 and annotates the recorded samples
/// with input, energy, orbit deviation, distance, and gain branch.
Trajectory simulate(const PackagedSystem& sys, const Vector& x0,
                    const IntegratorSettings& settings);

}  // namespace orbitforge
