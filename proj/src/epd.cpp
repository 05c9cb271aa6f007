#include "orbitforge/epd.hpp"

#include <Eigen/Eigenvalues>

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

bool positive_definite(const Matrix& a, double tol = 1e-8) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()));
  return es.eigenvalues().minCoeff() > tol;
}

}  // namespace

CheckResult check_pumping_alignment(const EpdDesign& design,
                                    const std::vector<Vector>& states) {
  CheckResult result;
  result.name = "pumping_alignment";
  result.pass = true;
  for (const Vector& x : states) {
    const Matrix Rpp = design.Rpp(x);
    const double phi = design.phi(x);
    const double mag = Rpp.cwiseAbs().maxCoeff();
    if (std::abs(Rpp(0, 1)) > 1e-12 || std::abs(Rpp(1, 0)) > 1e-12) {
      result.pass = false;
      result.violations.push_back("planar damping not diagonal at " +
                                  state_string(x));
      continue;
    }
    for (int i = 0; i < 2; ++i) {
      if (Rpp(i, i) * phi < -1e-12) {
        result.pass = false;
        result.violations.push_back(
            "damping entry " + std::to_string(Rpp(i, i)) +
            " misaligned with Phi = " + std::to_string(phi) + " at " +
            state_string(x));
      }
    }
    // Vanishing must happen exactly on the orbit (within sampling tolerance).
    if (mag < 1e-9 && std::abs(phi) > 1e-6) {
      result.pass = false;
      result.violations.push_back("damping vanished off-orbit (Phi = " +
                                  std::to_string(phi) + ") at " +
                                  state_string(x));
    }
    if (std::abs(phi) < 1e-9 && mag > 1e-6) {
      result.pass = false;
      result.violations.push_back("damping nonzero on-orbit (" +
                                  std::to_string(mag) + ") at " +
                                  state_string(x));
    }
  }
  result.summary = std::to_string(states.size()) + " states";
  return result;
}

CheckResult check_planar_coupling(const EpdDesign& design,
                                  const std::vector<Vector>& states) {
  CheckResult result;
  result.name = "planar_coupling";
  result.pass = true;
  const bool has_l = !design.part.l.empty();
  for (const Vector& x : states) {
    const Matrix J = design.ph.J(x);
    const double j12 = J(design.part.p[0], design.part.p[1]);
    if (std::abs(j12) <= 1e-9) {
      result.pass = false;
      result.violations.push_back("planar interconnection vanished at " +
                                  state_string(x));
    }
    if (has_l) {
      const Matrix Jpl = design.part.pl(J);
      const Vector ghp = design.grad_Hp(design.part.xp(x));
      const double work = (ghp.transpose() * Jpl).cwiseAbs().maxCoeff();
      if (work > 1e-10) {
        result.pass = false;
        result.violations.push_back(
            "coupling does work on planar energy (" + std::to_string(work) +
            ") at " + state_string(x));
      }
    }
  }
  result.summary = std::to_string(states.size()) + " states";
  return result;
}

EnergyWellResult check_energy_well(const EpdDesign& design) {
  EnergyWellResult out;
  const Vector& c = design.x_p_star;
  if (c.size() != 2) throw DimensionError("x_p_star must be planar");

  out.grad_norm = design.grad_Hp(c).norm();

  auto ring_pd = [&](double r, int n_pts) {
    for (int k = 0; k < n_pts; ++k) {
      const double a = 2.0 * kPi * k / n_pts;
      Vector p(2);
      p << c(0) + r * std::cos(a), c(1) + r * std::sin(a);
      if (!positive_definite(hessian_fd(design.Hp, p))) return false;
    }
    return true;
  };
  out.hessian_pd = positive_definite(hessian_fd(design.Hp, c)) && ring_pd(1e-2, 64);

  // Largest ring radius (up to the cap) with a positive-definite Hessian.
  const double cap = design.well_radius_cap;
  if (ring_pd(cap, 64)) {
    out.hessian_pd_radius = cap;
  } else {
    double lo = 1e-2, hi = cap;
    for (int it = 0; it < 40 && hi - lo > 1e-4 * cap; ++it) {
      const double mid = 0.5 * (lo + hi);
      (ring_pd(mid, 64) ? lo : hi) = mid;
    }
    out.hessian_pd_radius = lo;
  }

  // Ball maximum of Hp, sampled on the boundary circle plus interior rings.
  auto ball_max = [&](double r) {
    double best = design.Hp(c);
    for (int ring = 1; ring <= 8; ++ring) {
      const double rr = r * ring / 8.0;
      const int n_pts = ring == 8 ? 256 : 64;
      for (int k = 0; k < n_pts; ++k) {
        const double a = 2.0 * kPi * k / n_pts;
        Vector p(2);
        p << c(0) + rr * std::cos(a), c(1) + rr * std::sin(a);
        best = std::max(best, design.Hp(p));
      }
    }
    return best;
  };

  // The target level must sit strictly inside the well: above the minimum
  // (otherwise the level set is empty and there is no orbit to stabilize)...
  if (!(design.Hp(c) < design.Hp_star)) {
    throw NoValidRadius("target level " + std::to_string(design.Hp_star) +
                        " does not exceed the planar energy minimum " +
                        std::to_string(design.Hp(c)));
  }
  // ... and below what the energy reaches within the radius cap.
  if (!(ball_max(cap) > design.Hp_star)) {
    throw NoValidRadius(
        "no ball of radius <= " + std::to_string(cap) +
        " lifts the planar energy above its target level " +
        std::to_string(design.Hp_star));
  }
  // Smallest lifting radius by bisection (ball max is monotone in r).
  double lo = 0.0, hi = cap;
  for (int it = 0; it < 40 && hi - lo > 1e-3 * cap; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ball_max(mid) > design.Hp_star ? hi : lo) = mid;
  }
  out.lift_radius = hi;
  out.eps_star = cap;
  out.pass = out.grad_norm < 1e-8 && out.hessian_pd;
  return out;
}

CheckResult check_energy_well_result(const EpdDesign& design) {
  CheckResult result;
  result.name = "energy_well";
  try {
    const EnergyWellResult r = check_energy_well(design);
    result.pass = r.pass;
    std::ostringstream os;
    os << "grad " << r.grad_norm << ", eps_star " << r.eps_star
       << ", lift radius " << r.lift_radius << ", Hessian-PD radius "
       << r.hessian_pd_radius;
    result.summary = os.str();
    if (!r.pass) {
      if (!(r.grad_norm < 1e-8)) {
        result.violations.push_back("gradient does not vanish at the center");
      }
      if (!r.hessian_pd) {
        result.violations.push_back("Hessian not positive definite near the center");
      }
    }
  } catch (const NoValidRadius& e) {
    result.pass = false;
    result.violations.push_back(e.what());
  }
  return result;
}

EnergyRates energy_rates(const EpdDesign& design, const Vector& x) {
  // Interconnection terms are workless (J_pp skew, grad_Hp^T J_pl = 0), so
  // only the damping quadratic forms survive; evaluating them directly keeps
  // the sign contract exact instead of leaving it to cancellation.
  const Vector ghp = design.grad_Hp(design.part.xp(x));
  EnergyRates rates;
  rates.dHp = -ghp.dot(design.Rpp(x) * ghp);
  if (!design.part.l.empty()) {
    const Vector ghl = design.grad_Hl(design.part.xl(x));
    rates.dHl = -ghl.dot(design.Rll(x) * ghl);
  }
  rates.dV = design.phi(x) * rates.dHp;
  return rates;
}

KernelMonitor kernel_monitor(const EpdDesign& design,
                             const std::vector<double>& t,
                             const std::vector<Vector>& states) {
  if (t.size() != states.size()) {
    throw DimensionError("kernel monitor needs matching time and state lists");
  }
  KernelMonitor mon;
  double span_start = 0.0;
  bool in_span = false;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Vector ghp = design.grad_Hp(design.part.xp(states[i]));
    const bool flag = (design.Rpp(states[i]) * ghp).norm() < 1e-9 &&
                      ghp.norm() > 1e-6 &&
                      std::abs(design.phi(states[i])) > 1e-6;
    if (flag) {
      ++mon.flagged;
      mon.flag_times.push_back(t[i]);
      if (!in_span) {
        in_span = true;
        span_start = t[i];
      }
      mon.longest_span = std::max(mon.longest_span, t[i] - span_start);
    } else {
      in_span = false;
    }
  }
  return mon;
}

EpdDesign msea_to_epd(const MseaDesign& m, const Vector& x_p_star,
                      const StateTest& singular_set) {
  if (!m.separable()) {
    throw DecompositionUnavailable(
        "source design has no separable energy split H1(x0) + Hl(x_l)");
  }
  EpdDesign d;
  d.part = m.part;
  d.orbit = m.orbit;
  d.Hp = m.orbit.phi;
  d.grad_Hp = m.orbit.grad_phi;
  d.Hl = m.Hl;
  d.grad_Hl = m.grad_Hl;
  d.Hp_star = 0.0;
  d.x_p_star = x_p_star;

  const Partition part = m.part;
  const auto phi = m.orbit.phi;
  const auto grad_phi = m.orbit.grad_phi;
  const auto c = m.c;
  const auto J_pl = m.J_pl;
  const auto J_ll = m.J_ll;
  const auto src_R = m.ph.R;
  const auto dH1 = m.dH1;
  const auto Hl = m.Hl;
  const auto grad_Hl = m.grad_Hl;
  const int n = m.ph.n;

  // The planar interconnection entry J_12 = c / dH1 times the gradient slope
  // dH1 collapses to c itself once H_p is the deviation Phi, so the converted
  // design is free of the orbit singularity. The coupling block J_pl is
  // workless on grad Phi and carries over unchanged; the planar damping picks
  // up the slope as a sign-changing (pumping) factor.
  d.ph.n = n;
  d.ph.J = [=](const Vector& x) {
    Matrix J = Matrix::Zero(n, n);
    const double cv = c(x);
    J(part.p[0], part.p[1]) = cv;
    J(part.p[1], part.p[0]) = -cv;
    if (!part.l.empty()) {
      const Matrix pl = J_pl(x);
      const Matrix ll = J_ll(x);
      for (int i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < part.l.size(); ++j) {
          J(part.p[i], part.l[j]) = pl(i, static_cast<Eigen::Index>(j));
          J(part.l[j], part.p[i]) = -pl(i, static_cast<Eigen::Index>(j));
        }
      }
      for (std::size_t i = 0; i < part.l.size(); ++i) {
        for (std::size_t j = 0; j < part.l.size(); ++j) {
          J(part.l[i], part.l[j]) =
              ll(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
      }
    }
    return J;
  };
  d.ph.R = [=](const Vector& x) {
    const Matrix src = src_R(x);
    const double slope = dH1(phi(part.xp(x)));
    Matrix R = Matrix::Zero(n, n);
    const Matrix rpp = slope * part.pp(src);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) R(part.p[i], part.p[j]) = rpp(i, j);
    }
    if (!part.l.empty()) {
      const Matrix rll = part.ll(src);
      for (std::size_t i = 0; i < part.l.size(); ++i) {
        for (std::size_t j = 0; j < part.l.size(); ++j) {
          R(part.l[i], part.l[j]) =
              rll(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
      }
    }
    return R;
  };
  d.ph.H = [=](const Vector& x) {
    double v = phi(part.xp(x));
    if (!part.l.empty()) v += Hl(part.xl(x));
    return v;
  };
  d.ph.grad_H = [=](const Vector& x) {
    const Vector gp = grad_phi(part.xp(x));
    const Vector gl =
        part.l.empty() ? Vector(0) : grad_Hl(part.xl(x));
    return part.assemble(gp, gl);
  };
  d.ph.singular_set = singular_set;
  d.ph.control_override = m.ph.control_override;

  d.Rpp = [=](const Vector& x) -> Matrix {
    return dH1(phi(part.xp(x))) * part.pp(src_R(x));
  };
  d.Rll = [=](const Vector& x) -> Matrix { return part.ll(src_R(x)); };
  return d;
}

}  // namespace orbitforge
