#include <doctest.h>

#include "orbitforge/metrics.hpp"

#include <cmath>
#include <random>

using namespace orbitforge;

namespace {

struct Sampled {
  std::vector<double> t;
  std::vector<double> v;
};

Sampled sample(double dt, double t_end, const std::function<double(double)>& f) {
  Sampled s;
  for (double u = 0.0; u <= t_end + 0.5 * dt; u += dt) {
    s.t.push_back(u);
    s.v.push_back(f(u));
  }
  return s;
}

}  // namespace

TEST_CASE("exponential fit recovers a clean decay rate") {
  const auto s =
      sample(1e-2, 10.0, [](double u) { return 2.0 * std::exp(-3.0 * u); });
  const RateFit fit = fit_exponential_rate(s.t, s.v);
  CHECK(fit.rate == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(fit.r_squared > 0.999999);
  CHECK(fit.n_samples >= 20);
  // The window skips the transient (starts once |v| halves) and stops before
  // the rounding floor.
  CHECK(fit.t_start >= std::log(2.0) / 3.0 - 1e-2);
  CHECK(std::abs(s.v[0]) * std::exp(-3.0 * fit.t_end) > 0.5e-10);
}

TEST_CASE("exponential fit tolerates sign flips and small noise") {
  std::mt19937_64 rng(0x5EED);
  std::uniform_real_distribution<double> jitter(-1e-6, 1e-6);
  const auto s = sample(1e-2, 8.0, [&](double u) {
    return std::cos(5.0 * u) * std::exp(-2.5 * u) * (1.0 + jitter(rng));
  });
  const RateFit fit = fit_exponential_rate(s.t, s.v);
  // Oscillation makes the pointwise log noisy; the slope still lands close.
  CHECK(fit.rate == doctest::Approx(2.5).epsilon(0.05));
}

TEST_CASE("exponential fit rejects windows with too few samples") {
  const auto s =
      sample(1e-2, 0.1, [](double u) { return std::exp(-3.0 * u); });
  CHECK_THROWS_AS(fit_exponential_rate(s.t, s.v), WindowTooShort);

  // A signal that never halves leaves the window empty as well.
  const auto flat = sample(1e-2, 10.0, [](double) { return 1.0; });
  CHECK_THROWS_AS(fit_exponential_rate(flat.t, flat.v), WindowTooShort);
}

TEST_CASE("phase period of a uniform rotation") {
  std::vector<double> t;
  std::vector<Vector> state;
  for (double u = 0.0; u <= 20.0; u += 1e-2) {
    Vector x(3);
    x << 0.7 * std::cos(3.0 * u), 0.7 * std::sin(3.0 * u), 5.0;
    t.push_back(u);
    state.push_back(x);
  }
  const double period = estimate_period_phase(t, state, 0, 1);
  // The phase is exactly linear, so crossing interpolation is near-exact.
  CHECK(period == doctest::Approx(2.0 * kPi / 3.0).epsilon(1e-9));
}

TEST_CASE("phase period requires at least three settled revolutions") {
  std::vector<double> t;
  std::vector<Vector> state;
  for (double u = 0.0; u <= 2.0; u += 1e-2) {  // one revolution at rate 3
    Vector x(2);
    x << std::cos(3.0 * u), std::sin(3.0 * u);
    t.push_back(u);
    state.push_back(x);
  }
  CHECK_THROWS_AS(estimate_period_phase(t, state, 0, 1), InsufficientCycles);
}

TEST_CASE("turning points of a sinusoid sit at the amplitude") {
  const auto pos =
      sample(1e-3, 12.0, [](double u) { return 0.8 * std::sin(2.0 * u); });
  const auto vel =
      sample(1e-3, 12.0, [](double u) { return 1.6 * std::cos(2.0 * u); });
  const auto turns = turning_points(pos.t, pos.v, vel.v);
  REQUIRE(turns.size() >= 7);
  for (std::size_t i = 0; i < turns.size(); ++i) {
    // Parabolic refinement recovers the true extremum well below the grid
    // resolution.
    CHECK(std::abs(turns[i].value) == doctest::Approx(0.8).epsilon(1e-8));
    if (i > 0) {
      CHECK(turns[i].value * turns[i - 1].value < 0.0);  // alternating
      CHECK(turns[i].t - turns[i - 1].t ==
            doctest::Approx(kPi / 2.0).epsilon(1e-6));
    }
  }

  const auto steady = steady_turning_points(pos.t, pos.v, vel.v);
  REQUIRE(!steady.empty());
  CHECK(steady.size() < turns.size());
  for (const TurningPoint& tp : steady) {
    CHECK(tp.t >= 0.75 * pos.t.back());
  }
}

TEST_CASE("a motionless signal has no turning points") {
  const auto pos = sample(1e-2, 5.0, [](double) { return 0.4; });
  const auto vel = sample(1e-2, 5.0, [](double) { return 0.0; });
  CHECK(turning_points(pos.t, pos.v, vel.v).empty());
}

TEST_CASE("turning-point period of a sinusoid") {
  const auto pos =
      sample(1e-3, 12.0, [](double u) { return 0.8 * std::sin(2.0 * u); });
  const auto vel =
      sample(1e-3, 12.0, [](double u) { return 1.6 * std::cos(2.0 * u); });
  const double period = estimate_period_turning(pos.t, pos.v, vel.v);
  CHECK(period == doctest::Approx(kPi).epsilon(1e-6));
}

TEST_CASE("turning-point period needs three settled extrema") {
  const auto pos =
      sample(1e-3, 2.0, [](double u) { return std::sin(2.0 * u); });
  const auto vel =
      sample(1e-3, 2.0, [](double u) { return 2.0 * std::cos(2.0 * u); });
  // Two seconds holds barely one full cycle; the second half has at most two
  // turning points.
  CHECK_THROWS_AS(estimate_period_turning(pos.t, pos.v, vel.v),
                  InsufficientCycles);
}
