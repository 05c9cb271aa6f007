#include "orbitforge/sampling.hpp"

#include <random>
#include <string>

namespace orbitforge {

void SampleBox::validate() const {
  if (lo.size() != hi.size()) {
    throw DimensionError("sample box bounds have mismatched dimensions");
  }
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(lo(i) < hi(i))) {
      throw ConfigError("sample box is empty in coordinate " +
                        std::to_string(i));
    }
  }
}

std::vector<Vector> draw_in_box(const SampleBox& box, int count,
                                std::uint64_t seed) {
  box.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(count));
  const Eigen::Index n = box.lo.size();
  for (int k = 0; k < count; ++k) {
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i) = box.lo(i) + (box.hi(i) - box.lo(i)) * unit(rng);
    }
    out.push_back(std::move(x));
  }
  return out;
}

namespace {

std::vector<Vector> rejection_sample(const CheckGrid& grid,
                                     const StateTest& keep) {
  grid.box.validate();
  std::mt19937_64 rng(grid.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(grid.count));
  const Eigen::Index n = grid.box.lo.size();
  const long budget = 1000L * grid.count;
  long tries = 0;
  while (static_cast<int>(out.size()) < grid.count) {
    if (++tries > budget) {
      throw Error("state sampling rejected too many draws (" +
                  std::to_string(budget) + "); check box and exclusion");
    }
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i) = grid.box.lo(i) + (grid.box.hi(i) - grid.box.lo(i)) * unit(rng);
    }
    if (grid.exclude && grid.exclude(x)) continue;
    if (keep && !keep(x)) continue;
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace

std::vector<Vector> sample_states(const CheckGrid& grid) {
  return rejection_sample(grid, {});
}

std::vector<Vector> sample_states_in_shell(
    const CheckGrid& grid, const std::function<double(const Vector&)>& dist,
    double lo, double hi) {
  return rejection_sample(grid, [&](const Vector& x) {
    const double d = dist(x);
    return d >= lo && d <= hi;
  });
}

}  // namespace orbitforge
