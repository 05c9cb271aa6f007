#include <doctest.h>

#include "orbitforge/integrate.hpp"

#include <cmath>

using namespace orbitforge;

namespace {

Vector vec1(double a) {
  Vector v(1);
  v << a;
  return v;
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

const VectorField kDecay = [](double, const Vector& x) -> Vector {
  return -x;
};

const VectorField kRotation = [](double, const Vector& x) -> Vector {
  Vector f(2);
  f << -x(1), x(0);
  return f;
};

double endpoint_error(double step) {
  IntegratorSettings s;
  s.method = IntegrationMethod::Rk4;
  s.step = step;
  s.t_end = 1.0;
  const Trajectory traj = integrate(kDecay, vec1(1.0), s);
  return std::abs(traj.back_state()(0) - std::exp(-1.0));
}

}  // namespace

TEST_CASE("RK4 reproduces exponential decay to 1e-9") {
  CHECK(endpoint_error(1e-3) < 1e-9);
}

TEST_CASE("RK4 endpoint error scales as the fourth power of the step") {
  const double coarse = endpoint_error(2e-2);
  const double fine = endpoint_error(1e-2);
  REQUIRE(fine > 0.0);
  const double factor = coarse / fine;
  CHECK(factor > 8.0);
  CHECK(factor < 32.0);
}

TEST_CASE("RK4 is bit-reproducible") {
  IntegratorSettings s;
  s.step = 1e-3;
  s.t_end = 2.0;
  const Trajectory a = integrate(kRotation, vec2(1.0, 0.0), s);
  const Trajectory b = integrate(kRotation, vec2(1.0, 0.0), s);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.t[i] == b.t[i]);
    CHECK(a.state[i] == b.state[i]);
  }
}

TEST_CASE("rotation returns to its start after one full turn") {
  IntegratorSettings s;
  s.step = 1e-3;
  s.t_end = 2.0 * kPi;
  const Trajectory traj = integrate(kRotation, vec2(1.0, 0.0), s);
  CHECK((traj.back_state() - vec2(1.0, 0.0)).norm() < 1e-6);
}

TEST_CASE("adaptive pair meets its error tolerance on the rotation") {
  IntegratorSettings s;
  s.method = IntegrationMethod::Rk45;
  s.rel_tol = 1e-10;
  s.abs_tol = 1e-12;
  s.t_end = 2.0 * kPi;
  const Trajectory traj = integrate(kRotation, vec2(1.0, 0.0), s);
  CHECK((traj.back_state() - vec2(1.0, 0.0)).norm() < 1e-6);
}

TEST_CASE("adaptive pair takes far fewer steps on a slow segment") {
  IntegratorSettings fixed;
  fixed.step = 1e-3;
  fixed.t_end = 5.0;
  IntegratorSettings adaptive = fixed;
  adaptive.method = IntegrationMethod::Rk45;
  adaptive.rel_tol = 1e-8;
  adaptive.abs_tol = 1e-10;
  adaptive.max_step = 1.0;
  const Trajectory a = integrate(kDecay, vec1(1.0), adaptive);
  const Trajectory f = integrate(kDecay, vec1(1.0), fixed);
  CHECK(a.size() * 10 < f.size());
  CHECK(std::abs(a.back_state()(0) - std::exp(-5.0)) < 1e-7);
}

TEST_CASE("non-finite states abort with the offending time") {
  // Finite-time blow-up: xdot = x^2 from 1 diverges at t = 1.
  const VectorField blowup = [](double, const Vector& x) -> Vector {
    return x.array().square();
  };
  IntegratorSettings s;
  s.step = 1e-3;
  s.t_end = 2.0;
  bool thrown = false;
  try {
    integrate(blowup, vec1(1.0), s);
  } catch (const NonFiniteState& e) {
    thrown = true;
    CHECK(e.time >= 0.9);
    CHECK(e.time <= 1.1);
  }
  CHECK(thrown);
}

TEST_CASE("adaptive step underflow is reported") {
  // A field whose magnitude explodes near t = 0.5 forces the controller to
  // shrink the step below its floor.
  const VectorField stiff = [](double t, const Vector&) -> Vector {
    return vec1(1.0 / std::pow(std::abs(0.5 - t) + 1e-300, 3.0));
  };
  IntegratorSettings s;
  s.method = IntegrationMethod::Rk45;
  s.t_end = 1.0;
  CHECK_THROWS_AS(integrate(stiff, vec1(0.0), s), StepUnderflow);
}

TEST_CASE("stride thins the recording but keeps the endpoints") {
  IntegratorSettings dense;
  dense.step = 1e-3;
  dense.t_end = 1.0;
  IntegratorSettings thin = dense;
  thin.stride = 10;
  const Trajectory a = integrate(kDecay, vec1(1.0), dense);
  const Trajectory b = integrate(kDecay, vec1(1.0), thin);
  CHECK(a.size() == 1001);
  CHECK(b.size() == 101);
  CHECK(b.t.front() == 0.0);
  CHECK(b.t.back() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b.back_state()(0) == a.back_state()(0));
}

TEST_CASE("projection is applied after every step") {
  // Project onto the unit circle; the recorded states must all have unit norm
  // even though the raw field spirals outward.
  const VectorField spiral = [](double, const Vector& x) -> Vector {
    Vector f(2);
    f << -x(1) + x(0), x(0) + x(1);
    return f;
  };
  const StateProjection normalize = [](const Vector& x) -> Vector {
    return x / x.norm();
  };
  IntegratorSettings s;
  s.step = 1e-3;
  s.t_end = 1.0;
  const Trajectory traj = integrate(spiral, vec2(1.0, 0.0), s, normalize);
  for (const Vector& x : traj.state) {
    CHECK(x.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("integrator settings are validated") {
  IntegratorSettings s;
  s.step = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = IntegratorSettings{};
  s.t_end = -1.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = IntegratorSettings{};
  s.stride = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = IntegratorSettings{};
  s.rel_tol = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}
