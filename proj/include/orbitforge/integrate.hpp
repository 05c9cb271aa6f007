#pragma once

#include "orbitforge/numerics.hpp"

#include <cstdint>
#include <functional>
#include <vector>

/// Fixed-step RK4 and adaptive Dormand–Prince 5(4) integration with
/// stride-based trajectory recording.
namespace orbitforge {

/// Time-dependent vector field xdot = field(t, x).
using VectorField = std::function<Vector(double, const Vector&)>;

/// Optional post-step state normalization (e.g. wrapping angle coordinates).
using StateProjection = std::function<Vector(const Vector&)>;

enum class IntegrationMethod {
  Rk4,   ///< classic fixed-step fourth-order Runge–Kutta
  Rk45,  ///< adaptive Dormand–Prince 5(4) embedded pair
};

struct IntegratorSettings {
  IntegrationMethod method = IntegrationMethod::Rk4;
  double step = 1e-3;      ///< fixed step (Rk4) or initial step (Rk45)
  double rel_tol = 1e-8;   ///< Rk45 relative error tolerance
  double abs_tol = 1e-10;  ///< Rk45 absolute error tolerance
  double max_step = 0.1;   ///< Rk45 step-size ceiling
  double t_end = 1.0;      ///< final time (integration starts at t = 0)
  int stride = 1;          ///< record every stride-th accepted step

  /// Throws ConfigError on non-positive step, tolerances, horizon, or stride.
  void validate() const;
};

/// Recorded trajectory. `t` and `state` are always filled; the annotation
/// channels (`input`, `hamiltonian`, `phi`, `dist`, `branch`) are filled by
/// callers that know the controller and target, and stay empty otherwise.
struct Trajectory {
  std::vector<double> t;
  std::vector<Vector> state;
  std::vector<Vector> input;
  std::vector<double> hamiltonian;
  std::vector<double> phi;
  std::vector<double> dist;
  std::vector<int> branch;

  std::size_t size() const { return t.size(); }
  const Vector& back_state() const { return state.back(); }
};

/// Integrates `field` from x0 over [0, settings.t_end] and records every
/// settings.stride-th step (plus the initial and final states). If `project`
/// is set it is applied to the state after every accepted step.
///
/// Throws NonFiniteState when the state leaves the finite range (the exception
/// carries the time of the offending step) and StepUnderflow when the adaptive
/// controller would need a step below 1e-14.
Trajectory integrate(const VectorField& field, const Vector& x0,
                     const IntegratorSettings& settings,
                     const StateProjection& project = {});

}  // namespace orbitforge
