#include "orbitforge/plants.hpp"

#include <cmath>
#include <stdexcept>

namespace orbitforge {

namespace {

/// Quarter-turn rotation (the planar symplectic form applied to v).
Vector quarter_turn(const Vector& v) {
  Vector o(2);
  o << -v(1), v(0);
  return o;
}

Vector rotate(double angle, const Vector& v) {
  const double c = std::cos(angle), s = std::sin(angle);
  Vector o(2);
  o << c * v(0) - s * v(1), s * v(0) + c * v(1);
  return o;
}

/// Pendulum planar energy -(cos(theta) - 1/2)^2 + omega^2 / 2 and gradient.
double pendulum_hp(const Vector& xp) {
  const double c = std::cos(xp(0)) - 0.5;
  return -c * c + 0.5 * xp(1) * xp(1);
}

Vector pendulum_grad_hp(const Vector& xp) {
  Vector g(2);
  g << 2.0 * std::sin(xp(0)) * (std::cos(xp(0)) - 0.5), xp(1);
  return g;
}

}  // namespace

void ImParams::validate() const {
  if (!(R > 0.0)) throw ConfigError("plant.R must be positive");
  if (!(beta_star > 0.0)) throw ConfigError("plant.beta_star must be positive");
  if (!(k > 0.0)) throw ConfigError("plant.k must be positive");
  if (!(omega_star != 0.0)) throw ConfigError("plant.omega_star must be nonzero");
}

double PendulumParams::h_p_star() const {
  const double c = std::cos(theta_star) - 0.5;
  return -c * c;
}

void PendulumParams::validate() const {
  if (!(gamma > 0.0)) throw ConfigError("plant.gamma must be positive");
  if (!(gamma1 > 0.0)) throw ConfigError("plant.gamma1 must be positive");
  if (!(gamma2 > 0.0)) throw ConfigError("plant.gamma2 must be positive");
  const double a = std::abs(theta_star);
  if (!(a > 0.0 && a < kPi / 3.0)) {
    throw ConfigError("plant.theta_star must satisfy 0 < |theta_star| < pi/3");
  }
}

Vector foc_control(const ImParams& p, const Vector& lambda, double omega) {
  const double rho = std::atan2(lambda(1), lambda(0));
  Vector idq(2);
  idq << p.beta_star, (p.k / p.beta_star) * (p.omega_star - omega);
  return rotate(rho, idq);
}

double wrap_angle(double a) {
  const double r = std::remainder(a, 2.0 * kPi);
  return r <= -kPi ? r + 2.0 * kPi : r;
}

namespace {

/// Shared induction-motor plant structure (fixed frame includes the omega
/// cross term in the drift; the rotating frame does not).
ControlAffinePlant im_plant(const ImParams& p, bool fixed_frame) {
  ControlAffinePlant plant;
  plant.n = 3;
  plant.m = 2;
  const double R = p.R;
  plant.f = [R, fixed_frame](const Vector& x) {
    Vector f(3);
    if (fixed_frame) {
      f << -R * x(0) - x(2) * x(1), -R * x(1) + x(2) * x(0), 0.0;
    } else {
      f << -R * x(0), -R * x(1), 0.0;
    }
    return f;
  };
  plant.g = [R](const Vector& x) {
    Matrix g(3, 2);
    g << R, 0.0, 0.0, R, -x(1), x(0);
    return g;
  };
  return plant;
}

OrbitTarget im_orbit(const ImParams& p) {
  OrbitTarget orbit;
  orbit.part.p = {0, 1};
  orbit.part.l = {2};
  const double beta = p.beta_star;
  orbit.phi = [beta](const Vector& xp) { return xp.norm() - beta; };
  orbit.grad_phi = [](const Vector& xp) -> Vector { return xp / xp.norm(); };
  orbit.x_l_star = Vector::Constant(1, p.omega_star);
  orbit.curve_samples = circle_samples(beta);
  const double omega_star = p.omega_star;
  orbit.analytic_dist = [beta, omega_star](const Vector& x) {
    const double dr = std::hypot(x(0), x(1)) - beta;
    const double dw = x(2) - omega_star;
    return std::hypot(dr, dw);
  };
  return orbit;
}

Vector im_orbit_control(const ImParams& p, const Vector& x) {
  const Vector xp = x.head(2);
  const double r = xp.norm();
  const Vector radial = xp / r;
  return p.beta_star * radial -
         (p.k / p.beta_star) * (x(2) - p.omega_star) * quarter_turn(radial);
}

}  // namespace

PackagedSystem im_fixed_frame(const ImParams& p) {
  p.validate();
  PackagedSystem sys;
  sys.name = "im_fixed_frame";
  sys.plant = im_plant(p, true);
  sys.part.p = {0, 1};
  sys.part.l = {2};
  sys.orbit = im_orbit(p);
  sys.control = [p](const Vector& x) { return im_orbit_control(p, x); };

  const double R = p.R, beta = p.beta_star, ws = p.omega_star, k = p.k;

  // Shaped-energy design: H = H0(Phi, omega) with the planar interconnection
  // entry singular on the flux circle.
  MseaDesign m;
  m.part = sys.part;
  m.orbit = sys.orbit;
  m.ph.n = 3;
  m.ph.J = [R, beta, k](const Vector& x) {
    const double r = std::hypot(x(0), x(1));
    const double j12 = -x(2) * r / (r - beta);
    const double j13 = (k * R / beta) * x(1) / r;
    const double j23 = -(k * R / beta) * x(0) / r;
    Matrix J(3, 3);
    J << 0.0, j12, j13, -j12, 0.0, j23, -j13, -j23, 0.0;
    return J;
  };
  m.ph.R = [R, beta, k](const Vector& x) {
    const double r = std::hypot(x(0), x(1));
    Matrix Rm = Matrix::Zero(3, 3);
    Rm(0, 0) = R;
    Rm(1, 1) = R;
    Rm(2, 2) = (k / beta) * r;
    return Rm;
  };
  m.ph.singular_set = [beta](const Vector& x) {
    const double r = std::hypot(x(0), x(1));
    return std::abs(r - beta) <= 1e-3 || r <= 1e-6;
  };
  m.ph.control_override = sys.control;
  m.H0 = [ws](double x0, const Vector& xl) {
    return 0.5 * x0 * x0 + 0.5 * (xl(0) - ws) * (xl(0) - ws);
  };
  m.dH0_dx0 = [](double x0, const Vector&) { return x0; };
  m.dH0_dxl = [ws](double, const Vector& xl) {
    return Vector::Constant(1, xl(0) - ws);
  };
  m.c = [beta](const Vector& x) {
    return -x(2) * std::hypot(x(0), x(1));
  };
  m.J_pl = [R, beta, k](const Vector& x) {
    const double r = std::hypot(x(0), x(1));
    Matrix pl(2, 1);
    pl << (k * R / beta) * x(1) / r, -(k * R / beta) * x(0) / r;
    return pl;
  };
  m.J_ll = [](const Vector&) { return Matrix::Zero(1, 1); };
  m.H1 = [](double x0) { return 0.5 * x0 * x0; };
  m.dH1 = [](double x0) { return x0; };
  m.Hl = [ws](const Vector& xl) { return 0.5 * (xl(0) - ws) * (xl(0) - ws); };
  m.grad_Hl = [ws](const Vector& xl) {
    return Vector::Constant(1, xl(0) - ws);
  };
  compose_hamiltonian(m);
  sys.msea = std::move(m);

  // Smooth pumping-and-damping design with the same closed-loop field:
  // quadratic planar energy, damping proportional to the radius error.
  EpdDesign e;
  e.part = sys.part;
  e.orbit = sys.orbit;
  e.ph.n = 3;
  e.ph.J = [R, beta, k](const Vector& x) {
    const double r = std::hypot(x(0), x(1));
    const double j13 = (k * R / beta) * x(1) / r;
    const double j23 = -(k * R / beta) * x(0) / r;
    Matrix J(3, 3);
    J << 0.0, -x(2), j13, x(2), 0.0, j23, -j13, -j23, 0.0;
    return J;
  };
  e.ph.R = [R, beta, k](const Vector& x) {
    const double r = std::hypot(x(0), x(1));
    Matrix Rm = Matrix::Zero(3, 3);
    Rm(0, 0) = R * (r - beta) / r;
    Rm(1, 1) = R * (r - beta) / r;
    Rm(2, 2) = (k / beta) * r;
    return Rm;
  };
  e.ph.H = [beta, ws](const Vector& x) {
    return 0.5 * (x(0) * x(0) + x(1) * x(1)) + 0.5 * (x(2) - ws) * (x(2) - ws);
  };
  e.ph.grad_H = [ws](const Vector& x) {
    Vector g(3);
    g << x(0), x(1), x(2) - ws;
    return g;
  };
  e.ph.singular_set = [](const Vector& x) {
    return std::hypot(x(0), x(1)) <= 1e-6;
  };
  e.ph.control_override = sys.control;
  e.Hp = [](const Vector& xp) { return 0.5 * xp.squaredNorm(); };
  e.grad_Hp = [](const Vector& xp) -> Vector { return xp; };
  e.Hl = [ws](const Vector& xl) { return 0.5 * (xl(0) - ws) * (xl(0) - ws); };
  e.grad_Hl = [ws](const Vector& xl) {
    return Vector::Constant(1, xl(0) - ws);
  };
  e.Hp_star = 0.5 * beta * beta;
  e.x_p_star = Vector::Zero(2);
  e.Rpp = [R, beta](const Vector& x) {
    const double r = std::hypot(x(0), x(1));
    Matrix Rpp = Matrix::Zero(2, 2);
    Rpp(0, 0) = R * (r - beta) / r;
    Rpp(1, 1) = R * (r - beta) / r;
    return Rpp;
  };
  e.Rll = [beta, k](const Vector& x) {
    return Matrix::Constant(1, 1, (k / beta) * std::hypot(x(0), x(1)));
  };
  e.well_radius_cap = 2.0 * beta;
  sys.epd = std::move(e);

  sys.H_channel = [beta, ws](const Vector& x) {
    const double phi = std::hypot(x(0), x(1)) - beta;
    return 0.5 * phi * phi + 0.5 * (x(2) - ws) * (x(2) - ws);
  };

  sys.check_box.lo = Vector(3);
  sys.check_box.hi = Vector(3);
  sys.check_box.lo << -2.5 * beta, -2.5 * beta, ws - 2.0;
  sys.check_box.hi << 2.5 * beta, 2.5 * beta, ws + 2.0;
  sys.check_exclude = [beta](const Vector& x) {
    const double r = std::hypot(x(0), x(1));
    return std::abs(r - beta) <= 1e-3 || r <= 0.05 * beta;
  };

  sys.validate_initial = [](const Vector& x) {
    if (x.size() != 3) {
      throw std::invalid_argument("induction motor state must have 3 entries");
    }
    if (std::hypot(x(0), x(1)) < 1e-6) {
      throw std::invalid_argument(
          "initial flux at unstable origin: the orbital controller is "
          "undefined at zero flux");
    }
  };
  return sys;
}

PackagedSystem im_rotating_frame(const ImParams& p) {
  p.validate();
  PackagedSystem sys;
  sys.name = "im_rotating_frame";
  sys.plant = im_plant(p, false);
  sys.part.p = {0, 1};
  sys.part.l = {2};
  sys.orbit = im_orbit(p);
  sys.control = [p](const Vector& x) {
    return foc_control(p, x.head(2), x(2));
  };

  const double beta = p.beta_star, ws = p.omega_star;
  sys.H_channel = [beta, ws](const Vector& x) {
    const double phi = std::hypot(x(0), x(1)) - beta;
    return 0.5 * phi * phi + 0.5 * (x(2) - ws) * (x(2) - ws);
  };
  sys.check_box.lo = Vector(3);
  sys.check_box.hi = Vector(3);
  sys.check_box.lo << -2.5 * beta, -2.5 * beta, ws - 2.0;
  sys.check_box.hi << 2.5 * beta, 2.5 * beta, ws + 2.0;
  sys.check_exclude = [beta](const Vector& x) {
    return std::hypot(x(0), x(1)) <= 0.05 * beta;
  };
  sys.validate_initial = [](const Vector& x) {
    if (x.size() != 3) {
      throw std::invalid_argument("induction motor state must have 3 entries");
    }
    if (std::hypot(x(0), x(1)) < 1e-6) {
      throw std::invalid_argument(
          "initial flux at polar singularity: field orientation is undefined "
          "at zero flux");
    }
  };
  return sys;
}

double foc_equivalence_residual(const ImParams& p, const Vector& x,
                                double theta) {
  const Vector lambda = rotate(-theta, x.head(2));
  const Vector v = foc_control(p, lambda, x(2));
  const Vector mapped = rotate(theta, v);
  const Vector direct = im_orbit_control(p, x);
  return (mapped - direct).cwiseAbs().maxCoeff();
}

Vector im_polar_field(const ImParams& p, const Vector& s) {
  const double beta = s(0), omega = s(2);
  const double id = p.beta_star;
  const double iq = (p.k / p.beta_star) * (p.omega_star - omega);
  Vector f(3);
  f << -p.R * beta + p.R * id, (p.R / beta) * iq, beta * iq;
  return f;
}

namespace {

PackagedSystem pendulum_base(const PendulumParams& p) {
  PackagedSystem sys;
  sys.plant.n = 2;
  sys.plant.m = 1;
  sys.plant.f = [](const Vector& x) {
    Vector f(2);
    f << x(1), std::sin(x(0));
    return f;
  };
  sys.plant.g = [](const Vector& x) {
    Matrix g(2, 1);
    g << 0.0, -std::cos(x(0));
    return g;
  };
  sys.plant.angle_coords = {0};
  sys.part.p = {0, 1};
  sys.part.l = {};

  const double hp_star = p.h_p_star();
  sys.orbit.part = sys.part;
  sys.orbit.phi = [hp_star](const Vector& xp) {
    return pendulum_hp(xp) - hp_star;
  };
  sys.orbit.grad_phi = pendulum_grad_hp;
  sys.orbit.x_l_star = Vector(0);
  Vector seed(2);
  seed << 0.0, std::sqrt(2.0 * (hp_star + 0.25));
  sys.orbit.curve_samples =
      trace_level_curve(sys.orbit.phi, sys.orbit.grad_phi, seed);

  sys.H_channel = [](const Vector& x) { return pendulum_hp(x); };
  sys.project = [](const Vector& x) {
    Vector y = x;
    y(0) = wrap_angle(y(0));
    return y;
  };
  return sys;
}

/// Packs the pendulum closed loop for a given damping profile P(x):
/// u = 2 sin(theta) + omega cos(theta) P(x), giving closed-loop damping
/// R_22 = cos(theta)^2 P(x).
void attach_pendulum_design(PackagedSystem& sys, const PendulumParams& p,
                            const ScalarField& profile) {
  sys.control = [profile](const Vector& x) {
    return Vector::Constant(
        1, 2.0 * std::sin(x(0)) + x(1) * std::cos(x(0)) * profile(x));
  };

  const double hp_star = p.h_p_star();
  EpdDesign e;
  e.part = sys.part;
  e.orbit = sys.orbit;
  e.ph.n = 2;
  e.ph.J = [](const Vector&) {
    Matrix J(2, 2);
    J << 0.0, 1.0, -1.0, 0.0;
    return J;
  };
  e.ph.R = [profile](const Vector& x) {
    const double c = std::cos(x(0));
    Matrix R = Matrix::Zero(2, 2);
    R(1, 1) = c * c * profile(x);
    return R;
  };
  e.ph.H = [](const Vector& x) { return pendulum_hp(x); };
  e.ph.grad_H = [](const Vector& x) -> Vector { return pendulum_grad_hp(x); };
  e.Hp = pendulum_hp;
  e.grad_Hp = pendulum_grad_hp;
  e.Hp_star = hp_star;
  e.x_p_star = Vector::Zero(2);
  e.Rpp = e.ph.R;
  e.Rll = [](const Vector&) { return Matrix(0, 0); };
  e.well_radius_cap = 1.0;
  sys.epd = std::move(e);
}

}  // namespace

PackagedSystem pendulum_local(const PendulumParams& p) {
  p.validate();
  PackagedSystem sys = pendulum_base(p);
  sys.name = "pendulum_local";

  const double gamma = p.gamma;
  const double hp_star = p.h_p_star();
  const ScalarField profile = [gamma, hp_star](const Vector& x) {
    return gamma * (pendulum_hp(x) - hp_star);
  };
  attach_pendulum_design(sys, p, profile);

  sys.check_box.lo = Vector(2);
  sys.check_box.hi = Vector(2);
  sys.check_box.lo << -(kPi / 3.0 - 0.01), -1.5;
  sys.check_box.hi << kPi / 3.0 - 0.01, 1.5;
  return sys;
}

PackagedSystem pendulum_almost_global(const PendulumParams& p) {
  p.validate();
  PackagedSystem sys = pendulum_base(p);
  sys.name = "pendulum_almost_global";

  const double g1 = p.gamma1, g2 = p.gamma2;
  const double hp_star = p.h_p_star();
  auto inner = [](const Vector& x) {
    return std::abs(wrap_angle(x(0))) < kPi / 3.0;
  };
  const ScalarField profile = [g1, g2, hp_star, inner](const Vector& x) {
    const double q =
        inner(x) ? g1 * (pendulum_hp(x) - hp_star) : g2;
    return (1.5 * std::cos(x(0)) + 0.5 * x(1) * x(1) - 0.75) * q;
  };
  attach_pendulum_design(sys, p, profile);
  sys.branch = [inner](const Vector& x) { return inner(x) ? 1 : 2; };

  // Structural checks sample the inner region, where the pumping/damping
  // alignment is exact; the outer law is covered by the convergence runs.
  sys.check_box.lo = Vector(2);
  sys.check_box.hi = Vector(2);
  sys.check_box.lo << -(kPi / 3.0 - 0.01), -1.5;
  sys.check_box.hi << kPi / 3.0 - 0.01, 1.5;
  return sys;
}

Trajectory simulate(const PackagedSystem& sys, const Vector& x0,
                    const IntegratorSettings& settings) {
  if (sys.validate_initial) sys.validate_initial(x0);
  const auto input_at = [&sys](double t, const Vector& x) -> Vector {
    return sys.control_t ? sys.control_t(t, x) : sys.control(x);
  };
  const VectorField field = [&sys, &input_at](double t,
                                              const Vector& x) -> Vector {
    return sys.plant.f(x) + sys.plant.g(x) * input_at(t, x);
  };
  Trajectory traj = integrate(field, x0, settings, sys.project);

  traj.input.reserve(traj.size());
  traj.hamiltonian.reserve(traj.size());
  traj.phi.reserve(traj.size());
  traj.dist.reserve(traj.size());
  if (sys.branch) traj.branch.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Vector& x = traj.state[i];
    traj.input.push_back(input_at(traj.t[i], x));
    traj.hamiltonian.push_back(sys.H_channel ? sys.H_channel(x) : 0.0);
    traj.phi.push_back(sys.orbit.phi_of_state(x));
    traj.dist.push_back(dist_to_orbit(sys.orbit, x));
    if (sys.branch) traj.branch.push_back(sys.branch(x));
  }
  return traj;
}

}  // namespace orbitforge
