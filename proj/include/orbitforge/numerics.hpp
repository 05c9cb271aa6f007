#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>

/// Dense linear-algebra aliases, the shared error hierarchy, and small
/// numerical helpers (pseudo-inverse, left annihilator, finite-difference
/// derivatives) used throughout the library.
namespace orbitforge {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Scalar function of the state, e.g. a Hamiltonian.
using ScalarField = std::function<double(const Vector&)>;
/// Vector-valued function of the state, e.g. a gradient or drift.
using VectorFn = std::function<Vector(const Vector&)>;
/// Matrix-valued function of the state, e.g. an interconnection matrix.
using MatrixFn = std::function<Matrix(const Vector&)>;
/// State predicate, e.g. a singular-set membership test.
using StateTest = std::function<bool(const Vector&)>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Relative singular-value cutoff used by every rank decision in the library.
inline constexpr double kRankTolerance = 1e-10;

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A matrix that must have full column rank does not.
struct RankDeficient : Error {
  using Error::Error;
};

/// Operand dimensions are inconsistent.
struct DimensionError : Error {
  using Error::Error;
};

/// A design matrix or control law was evaluated on its declared singular set.
struct SingularEvaluation : Error {
  using Error::Error;
};

/// An on-orbit quantity was requested at a state off the orbit.
struct OffOrbit : Error {
  using Error::Error;
};

/// The adaptive integrator drove the step size below its floor.
struct StepUnderflow : Error {
  using Error::Error;
};

/// Integration produced NaN or infinity; `time` is where it happened.
struct NonFiniteState : Error {
  double time;
  NonFiniteState(const std::string& what, double t) : Error(what), time(t) {}
};

/// A rate fit could not find enough samples in its decay window.
struct WindowTooShort : Error {
  using Error::Error;
};

/// A period estimate did not observe enough cycles.
struct InsufficientCycles : Error {
  using Error::Error;
};

/// No admissible radius exists for an energy-lift condition.
struct NoValidRadius : Error {
  using Error::Error;
};

/// A design lacks the structure required by a requested decomposition.
struct DecompositionUnavailable : Error {
  using Error::Error;
};

/// A configuration file is malformed or uses unknown/invalid fields.
struct ConfigError : Error {
  using Error::Error;
};

/// Moore–Penrose pseudo-inverse (g^T g)^{-1} g^T of a tall full-column-rank
/// matrix. Throws RankDeficient when the smallest singular value is below
/// kRankTolerance relative to the largest.
Matrix pseudo_inverse(const Matrix& g);

/// Orthonormal left annihilator of a tall full-column-rank matrix g
/// (n x m, n > m): returns the (n-m) x n matrix whose rows span the left null
/// space, with annihilator * g == 0 and orthonormal rows. Throws RankDeficient
/// on rank loss and DimensionError when n <= m.
Matrix left_annihilator(const Matrix& g);

/// Central-difference gradient of f at x. Step per coordinate is
/// cbrt(machine eps) * max(|x_i|, scale).
Vector grad_fd(const ScalarField& f, const Vector& x, double scale = 1.0);

/// Central-difference Hessian of f at x (symmetrized). Step per coordinate is
/// eps^{1/4} * max(|x_i|, scale).
Matrix hessian_fd(const ScalarField& f, const Vector& x, double scale = 1.0);

}  // namespace orbitforge
