#include <doctest.h>

#include "orbitforge/numerics.hpp"
#include "orbitforge/plants.hpp"

#include <cmath>
#include <random>

using namespace orbitforge;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index c = static_cast<Eigen::Index>(rows.begin()->size());
  Matrix m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("pseudo-inverse of an orthonormal column is its transpose") {
  const Matrix gi = pseudo_inverse(mat({{1.0}, {0.0}}));
  REQUIRE(gi.rows() == 1);
  REQUIRE(gi.cols() == 2);
  CHECK(gi(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gi(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("pseudo-inverse of the identity is the identity") {
  const Matrix gi = pseudo_inverse(Matrix::Identity(2, 2));
  CHECK((gi - Matrix::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("pseudo-inverse of a scaled column divides by the squared norm") {
  // (g^T g)^{-1} g^T with g = (2, 0)^T is (1/4) * (2, 0) = (0.5, 0).
  const Matrix gi = pseudo_inverse(mat({{2.0}, {0.0}}));
  CHECK(gi(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(gi(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("pseudo-inverse rejects rank-deficient input") {
  CHECK_THROWS_AS(pseudo_inverse(mat({{1.0, 1.0}, {2.0, 2.0}})), RankDeficient);
  CHECK_THROWS_AS(pseudo_inverse(Matrix::Zero(3, 1)), RankDeficient);
}

TEST_CASE("left annihilator of e1 is e2 up to sign") {
  const Matrix a = left_annihilator(mat({{1.0}, {0.0}}));
  REQUIRE(a.rows() == 1);
  REQUIRE(a.cols() == 2);
  CHECK(std::abs(a(0, 1)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(a(0, 0)) < 1e-12);
}

TEST_CASE("left annihilator of e3 spans the e1/e2 plane") {
  const Matrix g = mat({{0.0}, {0.0}, {1.0}});
  const Matrix a = left_annihilator(g);
  REQUIRE(a.rows() == 2);
  REQUIRE(a.cols() == 3);
  CHECK((a * g).norm() < 1e-12);
  // Rows orthonormal and orthogonal to e3: last column must vanish.
  CHECK((a * a.transpose() - Matrix::Identity(2, 2)).norm() < 1e-12);
  CHECK(a.col(2).norm() < 1e-12);
}

TEST_CASE("left annihilator rejects wide or singular input") {
  CHECK_THROWS_AS(left_annihilator(Matrix::Identity(2, 2)), DimensionError);
  CHECK_THROWS_AS(left_annihilator(mat({{1.0, 2.0}})), DimensionError);
  CHECK_THROWS_AS(left_annihilator(Matrix::Zero(3, 1)), RankDeficient);
}

TEST_CASE("pseudo-inverse and annihilator properties on random matrices") {
  std::mt19937_64 rng(0x5EED);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);  // 2..5
    const int m = 1 + static_cast<int>(rng() % static_cast<unsigned>(n - 1));
    Matrix g(n, m);
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = gauss(rng);
    // Gaussian matrices are almost surely full rank; skip the rare near-singular
    // draw so the property under test is the contract, not the rank gate.
    Eigen::JacobiSVD<Matrix> svd(g);
    if (svd.singularValues()(m - 1) < 1e-6 * svd.singularValues()(0)) continue;

    const Matrix gi = pseudo_inverse(g);
    CHECK((gi * g - Matrix::Identity(m, m)).norm() < 1e-10);

    const Matrix a = left_annihilator(g);
    REQUIRE(a.rows() == n - m);
    CHECK((a * g).norm() < 1e-10);
    CHECK((a * a.transpose() - Matrix::Identity(n - m, n - m)).norm() < 1e-12);
  }
}

TEST_CASE("finite-difference gradient of a quadratic") {
  const ScalarField h = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  const Vector g = grad_fd(h, vec2(3.0, 4.0));
  CHECK(g(0) == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(g(1) == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("finite-difference gradient of a bilinear form") {
  const ScalarField h = [](const Vector& x) { return x(0) * x(1); };
  const Vector g = grad_fd(h, vec2(2.0, 5.0));
  CHECK(g(0) == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(g(1) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("finite-difference gradient matches the pendulum energy gradient") {
  const PackagedSystem sys = pendulum_local(PendulumParams{});
  const auto& design = *sys.epd;
  const Vector x = vec2(0.3, 0.4);
  const Vector numeric = grad_fd(design.Hp, x);
  const Vector analytic = design.grad_Hp(x);
  CHECK((numeric - analytic).norm() < 1e-6);
}

TEST_CASE("finite-difference gradient matches analytic gradients on a cloud") {
  // Every built-in design registers an analytic gradient; spot-check them
  // against central differences on a random cloud inside the check box.
  const std::vector<PackagedSystem> systems = {
      im_fixed_frame(ImParams{}), pendulum_local(PendulumParams{}),
      pendulum_almost_global(PendulumParams{})};
  std::mt19937_64 rng(0x5EED);
  for (const auto& sys : systems) {
    std::vector<const PhDesign*> designs;
    if (sys.msea) designs.push_back(&sys.msea->ph);
    if (sys.epd) designs.push_back(&sys.epd->ph);
    REQUIRE(!designs.empty());
    const auto states = draw_in_box(sys.check_box, 100, rng());
    for (const PhDesign* ph : designs) {
      int checked = 0;
      for (const Vector& x : states) {
        if (sys.check_exclude && sys.check_exclude(x)) continue;
        if (ph->is_singular_at(x)) continue;
        const Vector numeric = grad_fd(ph->H, x);
        const Vector analytic = ph->grad_H(x);
        CHECK((numeric - analytic).norm() < 1e-5);
        ++checked;
      }
      CHECK(checked > 50);
    }
  }
}

TEST_CASE("finite-difference Hessian of a quadratic form") {
  Matrix q(2, 2);
  q << 4.0, 1.0, 1.0, 3.0;
  const ScalarField h = [q](const Vector& x) {
    return 0.5 * x.dot(q * x);
  };
  const Matrix hess = hessian_fd(h, vec2(0.7, -0.2));
  CHECK((hess - q).norm() < 1e-5);
  CHECK((hess - hess.transpose()).norm() == 0.0);  // symmetrized by contract
}

TEST_CASE("finite-difference Hessian of the pendulum energy at the origin") {
  const PackagedSystem sys = pendulum_local(PendulumParams{});
  const Matrix hess = hessian_fd(sys.epd->Hp, vec2(0.0, 0.0));
  // d2/dtheta2 of -(cos t - 1/2)^2 at 0 is 1; the omega direction is quadratic.
  CHECK(hess(0, 0) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(hess(1, 1) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(std::abs(hess(0, 1)) < 1e-5);
}
