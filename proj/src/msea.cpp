#include "orbitforge/msea.hpp"

#include <cmath>
#include <sstream>

namespace orbitforge {

namespace {

std::string state_string(const Vector& x) {
  std::ostringstream os;
  os << "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i) os << ", ";
    os << x(i);
  }
  os << ")";
  return os.str();
}

}  // namespace

void compose_hamiltonian(MseaDesign& design) {
  const auto part = design.part;
  const auto orbit_phi = design.orbit.phi;
  const auto orbit_grad = design.orbit.grad_phi;
  const auto H0 = design.H0;
  const auto dH0_dx0 = design.dH0_dx0;
  const auto dH0_dxl = design.dH0_dxl;

  design.ph.H = [=](const Vector& x) {
    return H0(orbit_phi(part.xp(x)), part.xl(x));
  };
  design.ph.grad_H = [=](const Vector& x) {
    const Vector xp = part.xp(x);
    const Vector xl = part.xl(x);
    const double x0 = orbit_phi(xp);
    const Vector gp = dH0_dx0(x0, xl) * orbit_grad(xp);
    const Vector gl = dH0_dxl(x0, xl);
    return part.assemble(gp, gl);
  };
}

CheckResult check_interconnection(const MseaDesign& design,
                                  const CheckGrid& grid) {
  CheckResult result;
  result.name = "interconnection_structure";
  result.pass = true;

  // Off-orbit: J_12 * dH0/dx0 must reproduce the declared finite product c.
  const auto dist = [&](const Vector& x) {
    return dist_to_orbit(design.orbit, x);
  };
  const auto states = sample_states_in_shell(grid, dist, 0.05, 0.5);
  int shell_checked = 0;
  for (const Vector& x : states) {
    if (design.ph.is_singular_at(x)) continue;
    const Matrix J = design.ph.J(x);
    const double j12 = J(design.part.p[0], design.part.p[1]);
    const Vector xp = design.part.xp(x);
    const Vector xl = design.part.xl(x);
    const double slope = design.dH0_dx0(design.orbit.phi(xp), xl);
    const double err = std::abs(j12 * slope - design.c(x));
    ++shell_checked;
    if (err > 1e-9) {
      result.pass = false;
      result.violations.push_back("J_12 * dH0/dx0 mismatch " +
                                  std::to_string(err) + " at " +
                                  state_string(x));
    }
  }

  // On-orbit: c itself must be finite and bounded away from zero.
  const std::size_t n_curve = design.orbit.curve_samples.size();
  const std::size_t step = n_curve > 64 ? n_curve / 64 : 1;
  int orbit_checked = 0;
  for (std::size_t i = 0; i < n_curve; i += step) {
    const Vector x = design.part.assemble(design.orbit.curve_samples[i],
                                          design.orbit.x_l_star);
    const double cval = design.c(x);
    ++orbit_checked;
    if (!std::isfinite(cval) || std::abs(cval) <= 1e-9) {
      result.pass = false;
      result.violations.push_back("c degenerate (" + std::to_string(cval) +
                                  ") at orbit point " + state_string(x));
    }
  }

  result.summary = std::to_string(shell_checked) + " shell states, " +
                   std::to_string(orbit_checked) + " orbit points";
  return result;
}

OnOrbitField on_orbit_residual_field(const MseaDesign& design, const Vector& x,
                                     double tol) {
  const double d = dist_to_orbit(design.orbit, x);
  if (d > tol) {
    throw OffOrbit("on-orbit field requested at dist " + std::to_string(d) +
                   " > " + std::to_string(tol));
  }
  const Vector gphi = design.orbit.grad_phi(design.part.xp(x));
  const double cval = design.c(x);
  Vector field(2);
  field << cval * gphi(1), -cval * gphi(0);
  return {field, std::abs(cval) * gphi.lpNorm<1>()};
}

Vector regularized_field(const MseaDesign& design, const Vector& x) {
  const Partition& part = design.part;
  const Vector xp = part.xp(x);
  const Vector xl = part.xl(x);
  const double x0 = design.orbit.phi(xp);
  const Vector gphi = design.orbit.grad_phi(xp);
  const double slope = design.dH0_dx0(x0, xl);
  const Vector gl = design.dH0_dxl(x0, xl);
  const Matrix R = design.ph.R(x);
  const Matrix Rpp = part.pp(R);
  const Matrix Rll = part.ll(R);
  const Matrix Jpl = design.J_pl(x);
  const Matrix Jll = design.J_ll(x);
  const double cval = design.c(x);

  // Planar block: the singular J_pp times grad_p H collapses to the finite
  // rotation by c of grad Phi.
  Vector fp(2);
  fp << cval * gphi(1), -cval * gphi(0);
  fp -= Rpp * (slope * gphi);
  Vector fl;
  if (xl.size() > 0) {
    fp += Jpl * gl;
    fl = -Jpl.transpose() * (slope * gphi) + (Jll - Rll) * gl;
  } else {
    fl = Vector(0);
  }
  return part.assemble(fp, fl);
}

Vector regularized_control(const ControlAffinePlant& plant,
                           const MseaDesign& design, const Vector& x) {
  const Vector target = regularized_field(design, x);
  return pseudo_inverse(plant.g(x)) * (target - plant.f(x));
}

}  // namespace orbitforge
