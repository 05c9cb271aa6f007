#include "orbitforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace orbitforge {

RateFit fit_exponential_rate(const std::vector<double>& t,
                             const std::vector<double>& v) {
  if (t.size() != v.size()) {
    throw DimensionError("rate fit: time and value series differ in length");
  }
  if (v.empty()) throw WindowTooShort("rate fit: empty series");

  const double start_level = 0.5 * std::abs(v.front());
  std::size_t first = 0;
  while (first < v.size() && std::abs(v[first]) > start_level) ++first;
  std::size_t last = first;
  while (last < v.size() && std::abs(v[last]) >= 1e-10) ++last;

  const std::size_t n = last - first;
  if (n < 20) {
    throw WindowTooShort("rate fit: only " + std::to_string(n) +
                         " samples between the half-decay point and the "
                         "rounding floor (need 20)");
  }

  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    const double y = std::log(std::abs(v[i]));
    st += t[i];
    sy += y;
    stt += t[i] * t[i];
    sty += t[i] * y;
  }
  const double nd = static_cast<double>(n);
  const double denom = nd * stt - st * st;
  const double slope = (nd * sty - st * sy) / denom;
  const double intercept = (sy - slope * st) / nd;

  double ss_res = 0.0, ss_tot = 0.0;
  const double mean_y = sy / nd;
  for (std::size_t i = first; i < last; ++i) {
    const double y = std::log(std::abs(v[i]));
    const double fit = intercept + slope * t[i];
    ss_res += (y - fit) * (y - fit);
    ss_tot += (y - mean_y) * (y - mean_y);
  }

  RateFit out;
  out.rate = -slope;
  out.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  out.t_start = t[first];
  out.t_end = t[last - 1];
  out.n_samples = static_cast<int>(n);
  return out;
}

double estimate_period_phase(const std::vector<double>& t,
                             const std::vector<Vector>& state, int ix, int iy) {
  if (t.size() != state.size() || t.size() < 4) {
    throw DimensionError("period estimate: malformed trajectory");
  }
  const std::size_t begin = t.size() / 2;

  // Unwrapped planar phase over the second half.
  std::vector<double> phase;
  phase.reserve(t.size() - begin);
  double offset = 0.0, prev = 0.0;
  for (std::size_t i = begin; i < t.size(); ++i) {
    const double raw = std::atan2(state[i](iy), state[i](ix));
    if (!phase.empty()) {
      double d = raw - prev;
      while (d > kPi) {
        offset -= 2.0 * kPi;
        d -= 2.0 * kPi;
      }
      while (d < -kPi) {
        offset += 2.0 * kPi;
        d += 2.0 * kPi;
      }
    }
    prev = raw;
    phase.push_back(raw + offset);
  }

  const double revs = std::abs(phase.back() - phase.front()) / (2.0 * kPi);
  if (revs < 3.0) {
    throw InsufficientCycles("period estimate: only " + std::to_string(revs) +
                             " revolutions in the second half (need 3)");
  }

  // Interpolated times of the full-turn levels 2 pi k.
  std::vector<double> crossings;
  for (std::size_t i = 0; i + 1 < phase.size(); ++i) {
    const double a = phase[i], b = phase[i + 1];
    const double lo = std::min(a, b), hi = std::max(a, b);
    for (long k = static_cast<long>(std::ceil(lo / (2.0 * kPi)));
         k * 2.0 * kPi <= hi; ++k) {
      const double level = 2.0 * kPi * static_cast<double>(k);
      if (b != a) {
        const double w = (level - a) / (b - a);
        if (w >= 0.0 && w < 1.0) {
          crossings.push_back(t[begin + i] +
                              w * (t[begin + i + 1] - t[begin + i]));
        }
      }
    }
  }
  if (crossings.size() < 2) {
    throw InsufficientCycles("period estimate: fewer than 2 full-turn crossings");
  }
  std::sort(crossings.begin(), crossings.end());
  return (crossings.back() - crossings.front()) /
         static_cast<double>(crossings.size() - 1);
}

namespace {

/// Vertex of the parabola through three samples (divided differences).
TurningPoint parabola_vertex(double t0, double p0, double t1, double p1,
                             double t2, double p2) {
  const double c1 = (p1 - p0) / (t1 - t0);
  const double c2 = ((p2 - p1) / (t2 - t1) - c1) / (t2 - t0);
  if (std::abs(c2) < 1e-300) return {t1, p1};
  const double ts = 0.5 * (t0 + t1) - c1 / (2.0 * c2);
  const double val = p0 + c1 * (ts - t0) + c2 * (ts - t0) * (ts - t1);
  return {ts, val};
}

}  // namespace

std::vector<TurningPoint> turning_points(const std::vector<double>& t,
                                         const std::vector<double>& position,
                                         const std::vector<double>& velocity) {
  if (t.size() != position.size() || t.size() != velocity.size()) {
    throw DimensionError("turning points: series differ in length");
  }
  std::vector<TurningPoint> out;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    if (velocity[i] == 0.0 && velocity[i + 1] == 0.0) continue;
    if (velocity[i] * velocity[i + 1] > 0.0) continue;
    if (velocity[i + 1] == 0.0 && i + 2 < t.size() &&
        velocity[i] * velocity[i + 2] > 0.0) {
      continue;  // grazing zero, not a sign change
    }
    const std::size_t a = i > 0 ? i - 1 : i;
    if (a + 2 >= t.size()) break;
    out.push_back(parabola_vertex(t[a], position[a], t[a + 1], position[a + 1],
                                  t[a + 2], position[a + 2]));
  }
  return out;
}

std::vector<TurningPoint> steady_turning_points(
    const std::vector<double>& t, const std::vector<double>& position,
    const std::vector<double>& velocity) {
  const std::vector<TurningPoint> all = turning_points(t, position, velocity);
  if (t.empty()) return {};
  const double cutoff = t.back() - 0.25 * (t.back() - t.front());
  std::vector<TurningPoint> out;
  for (const auto& tp : all) {
    if (tp.t >= cutoff) out.push_back(tp);
  }
  return out;
}

double estimate_period_turning(const std::vector<double>& t,
                               const std::vector<double>& position,
                               const std::vector<double>& velocity) {
  const std::vector<TurningPoint> all = turning_points(t, position, velocity);
  if (t.empty()) throw InsufficientCycles("period estimate: empty trajectory");
  const double mid = t.front() + 0.5 * (t.back() - t.front());
  std::vector<TurningPoint> late;
  for (const auto& tp : all) {
    if (tp.t >= mid) late.push_back(tp);
  }
  if (late.size() < 3) {
    throw InsufficientCycles("period estimate: only " +
                             std::to_string(late.size()) +
                             " turning points in the second half (need 3)");
  }
  const double span = late.back().t - late.front().t;
  return 2.0 * span / static_cast<double>(late.size() - 1);
}

}  // namespace orbitforge
