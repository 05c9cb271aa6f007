#include "orbitforge/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace orbitforge {

namespace {

constexpr double kMinStep = 1e-14;

bool finite(const Vector& x) { return x.allFinite(); }

Vector rk4_step(const VectorField& f, double t, const Vector& x, double h) {
  const Vector k1 = f(t, x);
  const Vector k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
  const Vector k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
  const Vector k4 = f(t + h, x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Dormand–Prince coefficients (5th-order solution with embedded 4th-order
// error estimate; first-same-as-last form).
struct Dp45Result {
  Vector y5;      // fifth-order solution
  double err;     // scaled error norm
  Vector k_last;  // stage 7 derivative, reusable as the next step's k1
};

Dp45Result dp45_step(const VectorField& f, double t, const Vector& x, double h,
                     const Vector& k1, double rel_tol, double abs_tol) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  const Vector k2 = f(t + h * a21, x + h * (a21 * k1));
  const Vector k3 = f(t + h * 0.3, x + h * (a31 * k1 + a32 * k2));
  const Vector k4 = f(t + h * 0.8, x + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const Vector k5 =
      f(t + h * (8.0 / 9), x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const Vector k6 =
      f(t + h, x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  Vector y5 = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  const Vector k7 = f(t + h, y5);
  const Vector e =
      h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double sc =
        abs_tol + rel_tol * std::max(std::abs(x(i)), std::abs(y5(i)));
    const double r = e(i) / sc;
    sum += r * r;
  }
  const double err = std::sqrt(sum / static_cast<double>(x.size()));
  return {std::move(y5), err, k7};
}

}  // namespace

void IntegratorSettings::validate() const {
  if (!(step > 0.0)) throw ConfigError("integrator.step must be positive");
  if (!(rel_tol > 0.0)) throw ConfigError("integrator.rel_tol must be positive");
  if (!(abs_tol > 0.0)) throw ConfigError("integrator.abs_tol must be positive");
  if (!(max_step > 0.0)) throw ConfigError("integrator.max_step must be positive");
  if (!(t_end > 0.0)) throw ConfigError("integrator.t_end must be positive");
  if (stride < 1) throw ConfigError("integrator.stride must be at least 1");
}

Trajectory integrate(const VectorField& field, const Vector& x0,
                     const IntegratorSettings& settings,
                     const StateProjection& project) {
  settings.validate();
  if (!finite(x0)) throw NonFiniteState("initial state is not finite", 0.0);

  Trajectory traj;
  auto record = [&](double t, const Vector& x) {
    traj.t.push_back(t);
    traj.state.push_back(x);
  };

  Vector x = project ? project(x0) : x0;
  double t = 0.0;
  record(t, x);

  if (settings.method == IntegrationMethod::Rk4) {
    const double h = settings.step;
    // Integer step count; a shorter tail step covers any remainder.
    const auto n_full =
        static_cast<long long>(std::floor(settings.t_end / h + 1e-9));
    long long step_index = 0;
    for (long long i = 0; i < n_full; ++i) {
      x = rk4_step(field, t, x, h);
      if (project) x = project(x);
      t = static_cast<double>(i + 1) * h;
      if (!finite(x)) throw NonFiniteState("state became non-finite", t);
      ++step_index;
      if (step_index % settings.stride == 0 && t < settings.t_end) record(t, x);
    }
    const double tail = settings.t_end - t;
    if (tail > 1e-12) {
      x = rk4_step(field, t, x, tail);
      if (project) x = project(x);
      if (!finite(x)) {
        throw NonFiniteState("state became non-finite", settings.t_end);
      }
    }
    record(settings.t_end, x);
    return traj;
  }

  // Adaptive Dormand–Prince 5(4).
  double h = std::min(settings.step, settings.max_step);
  Vector k1 = field(t, x);
  long long accepted = 0;
  while (t < settings.t_end) {
    h = std::min(h, settings.t_end - t);
    if (h < kMinStep) {
      throw StepUnderflow("adaptive step fell below 1e-14 at t = " +
                          std::to_string(t));
    }
    const Dp45Result r =
        dp45_step(field, t, x, h, k1, settings.rel_tol, settings.abs_tol);
    if (!std::isfinite(r.err)) {
      // A non-finite stage poisons the error estimate; shrink hard and retry.
      h *= 0.1;
      continue;
    }
    if (r.err <= 1.0) {
      t += h;
      x = r.y5;
      k1 = r.k_last;
      if (project) {
        x = project(x);
        k1 = field(t, x);
      }
      if (!finite(x)) throw NonFiniteState("state became non-finite", t);
      ++accepted;
      const bool at_end = t >= settings.t_end - 1e-15;
      if (accepted % settings.stride == 0 && !at_end) record(t, x);
      const double grow =
          r.err > 0.0 ? 0.9 * std::pow(r.err, -0.2) : 5.0;
      h = std::min(settings.max_step, h * std::clamp(grow, 0.2, 5.0));
    } else {
      const double shrink = 0.9 * std::pow(r.err, -0.2);
      h *= std::clamp(shrink, 0.1, 0.9);
    }
  }
  record(t, x);
  return traj;
}

}  // namespace orbitforge
