#include "orbitforge/numerics.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace orbitforge {

namespace {

/// Rank of a matrix per the library-wide relative singular-value cutoff.
/// Also reports the singular values so callers can build error messages.
int svd_rank(const Matrix& a, Eigen::JacobiSVD<Matrix>& svd) {
  svd.compute(a, Eigen::ComputeFullU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double cutoff = kRankTolerance * sv(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  return rank;
}

}  // namespace

Matrix pseudo_inverse(const Matrix& g) {
  if (g.rows() < g.cols()) {
    throw DimensionError("pseudo_inverse: matrix has more columns than rows");
  }
  Eigen::JacobiSVD<Matrix> svd;
  const int rank = svd_rank(g, svd);
  if (rank < g.cols()) {
    throw RankDeficient("pseudo_inverse: input is column rank deficient (rank " +
                        std::to_string(rank) + " of " + std::to_string(g.cols()) + ")");
  }
  return (g.transpose() * g).ldlt().solve(g.transpose());
}

Matrix left_annihilator(const Matrix& g) {
  const Eigen::Index n = g.rows();
  const Eigen::Index m = g.cols();
  if (n <= m) {
    throw DimensionError("left_annihilator: need strictly more rows than columns");
  }
  Eigen::JacobiSVD<Matrix> svd;
  const int rank = svd_rank(g, svd);
  if (rank < m) {
    throw RankDeficient("left_annihilator: input is column rank deficient (rank " +
                        std::to_string(rank) + " of " + std::to_string(m) + ")");
  }
  // Columns of U beyond the column rank span the left null space.
  return svd.matrixU().rightCols(n - m).transpose();
}

Vector grad_fd(const ScalarField& f, const Vector& x, double scale) {
  const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  Vector grad(x.size());
  Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = base * std::max(std::abs(x(i)), scale);
    xp(i) = x(i) + h;
    const double fp = f(xp);
    xp(i) = x(i) - h;
    const double fm = f(xp);
    xp(i) = x(i);
    grad(i) = (fp - fm) / (2.0 * h);
  }
  return grad;
}

Matrix hessian_fd(const ScalarField& f, const Vector& x, double scale) {
  const double base = std::pow(std::numeric_limits<double>::epsilon(), 0.25);
  const Eigen::Index n = x.size();
  Vector h(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    h(i) = base * std::max(std::abs(x(i)), scale);
  }
  Matrix hess(n, n);
  Vector xs = x;
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < n; ++i) {
    // Diagonal: standard second central difference.
    xs(i) = x(i) + h(i);
    const double fp = f(xs);
    xs(i) = x(i) - h(i);
    const double fm = f(xs);
    xs(i) = x(i);
    hess(i, i) = (fp - 2.0 * f0 + fm) / (h(i) * h(i));
    // Off-diagonal: four-point cross difference.
    for (Eigen::Index j = i + 1; j < n; ++j) {
      xs(i) = x(i) + h(i);
      xs(j) = x(j) + h(j);
      const double fpp = f(xs);
      xs(j) = x(j) - h(j);
      const double fpm = f(xs);
      xs(i) = x(i) - h(i);
      const double fmm = f(xs);
      xs(j) = x(j) + h(j);
      const double fmp = f(xs);
      xs(i) = x(i);
      xs(j) = x(j);
      const double v = (fpp - fpm - fmp + fmm) / (4.0 * h(i) * h(j));
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }
  return hess;
}

}  // namespace orbitforge
