#include "orbitforge/verify.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
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

CheckResult check_skew(const PhDesign& ph, const std::vector<Vector>& states) {
  CheckResult r;
  r.name = "skew_interconnection";
  r.pass = true;
  for (const Vector& x : states) {
    const Matrix J = ph.J(x);
    const double defect = (J + J.transpose()).cwiseAbs().maxCoeff();
    if (defect > 1e-12) {
      r.pass = false;
      r.violations.push_back("skew defect " + std::to_string(defect) + " at " +
                             state_string(x));
    }
  }
  r.summary = std::to_string(states.size()) + " states";
  return r;
}

CheckResult check_symmetric(const MatrixFn& R, const std::string& name,
                            const std::vector<Vector>& states,
                            bool require_psd) {
  CheckResult r;
  r.name = name;
  r.pass = true;
  for (const Vector& x : states) {
    const Matrix Rm = R(x);
    if (Rm.rows() == 0) continue;
    const double asym = (Rm - Rm.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12) {
      r.pass = false;
      r.violations.push_back("asymmetry " + std::to_string(asym) + " at " +
                             state_string(x));
      continue;
    }
    if (require_psd) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(Rm);
      const double min_eig = es.eigenvalues().minCoeff();
      if (min_eig < -1e-12) {
        r.pass = false;
        r.violations.push_back("negative eigenvalue " +
                               std::to_string(min_eig) + " at " +
                               state_string(x));
      }
    }
  }
  r.summary = std::to_string(states.size()) + " states";
  return r;
}

CheckResult check_matching(const ControlAffinePlant& plant, const PhDesign& ph,
                           const std::vector<Vector>& states, double tol) {
  CheckResult r;
  r.name = "matching";
  r.pass = true;
  double worst = 0.0;
  for (const Vector& x : states) {
    const Vector res = matching_residual(plant, ph, x);
    const double mag = res.size() > 0 ? res.cwiseAbs().maxCoeff() : 0.0;
    worst = std::max(worst, mag);
    if (mag > tol) {
      r.pass = false;
      r.violations.push_back("residual " + std::to_string(mag) + " at " +
                             state_string(x));
    }
  }
  std::ostringstream os;
  os << states.size() << " states, worst residual " << worst;
  r.summary = os.str();
  return r;
}

/// The Hamiltonian must be stationary on the orbit and strictly larger in a
/// tube around it.
CheckResult check_orbit_minimum(const PhDesign& ph, const OrbitTarget& orbit,
                                const CheckGrid& grid) {
  CheckResult r;
  r.name = "orbit_minimum";
  r.pass = true;

  const std::size_t n_curve = orbit.curve_samples.size();
  const std::size_t step = n_curve > 20 ? n_curve / 20 : 1;
  double h_orbit = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n_curve; i += step) {
    const Vector x = orbit.part.assemble(orbit.curve_samples[i], orbit.x_l_star);
    h_orbit = std::max(h_orbit, ph.H(x));
    const double gnorm = ph.gradient(x).norm();
    if (gnorm > 1e-8) {
      r.pass = false;
      r.violations.push_back("gradient " + std::to_string(gnorm) +
                             " on the orbit at " + state_string(x));
    }
  }

  const auto dist = [&](const Vector& x) { return dist_to_orbit(orbit, x); };
  const auto tube = sample_states_in_shell(grid, dist, 1e-3, 0.5);
  for (const Vector& x : tube) {
    const double h = ph.H(x);
    if (!(h > h_orbit + 1e-12)) {
      r.pass = false;
      r.violations.push_back("H = " + std::to_string(h) +
                             " not above the orbit level at " + state_string(x));
    }
  }
  r.summary = "20 orbit points, " + std::to_string(tube.size()) + " tube states";
  return r;
}

/// Simulation falsifier: perturbed starts must all settle onto the orbit.
/// Heuristic by construction (a pass does not certify global convergence).
CheckResult check_convergence(const PackagedSystem& sys, const Vector& nominal,
                              double spread, double t_end, std::uint64_t seed) {
  CheckResult r;
  r.name = "convergence_falsifier";
  r.heuristic = true;
  r.pass = true;

  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ull);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  IntegratorSettings settings;
  settings.method = IntegrationMethod::Rk4;
  settings.step = 1e-3;
  settings.t_end = t_end;
  settings.stride = 1000;

  double worst = 0.0;
  for (int run = 0; run < 50; ++run) {
    Vector x0 = nominal;
    for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) += spread * unit(rng);
    try {
      const Trajectory traj = simulate(sys, x0, settings);
      const Vector z = transverse_coords(sys.orbit, traj.back_state());
      const double miss = z.cwiseAbs().maxCoeff();
      worst = std::max(worst, miss);
      if (miss > 1e-4) {
        r.pass = false;
        r.violations.push_back("start " + state_string(x0) +
                               " missed the orbit by " + std::to_string(miss));
      }
    } catch (const Error& e) {
      r.pass = false;
      r.violations.push_back("start " + state_string(x0) +
                             " failed to integrate: " + e.what());
    }
  }
  std::ostringstream os;
  os << "50 perturbed starts, worst transverse miss " << worst;
  r.summary = os.str();
  return r;
}

/// Falsifier anchor per system (nominal start, spread, horizon).
struct FalsifierPlan {
  Vector nominal;
  double spread;
  double t_end;
};

FalsifierPlan falsifier_plan(const PackagedSystem& sys) {
  FalsifierPlan plan;
  if (sys.plant.n == 3) {
    plan.nominal = Vector(3);
    plan.nominal << 0.3, 0.1, 0.0;
    plan.spread = 0.25;
    plan.t_end = 15.0;
  } else if (sys.name == "pendulum_almost_global") {
    plan.nominal = Vector(2);
    plan.nominal << 3.0, 0.0;
    plan.spread = 0.1;
    plan.t_end = 60.0;
  } else {
    plan.nominal = Vector(2);
    plan.nominal << 0.1 * kPi, 0.0;
    plan.spread = 0.1;
    plan.t_end = 40.0;
  }
  return plan;
}

}  // namespace

Report audit_shaped_design(const PackagedSystem& sys, const MseaDesign& design,
                           const CheckGrid& grid) {
  Report report;
  report.subject = sys.name + " (shaped energy)";
  const auto states = sample_states(grid);

  report.add(check_skew(design.ph, states));
  report.add(check_symmetric(design.ph.R, "damping_symmetric_psd", states, true));
  report.add(check_matching(sys.plant, design.ph, states, 1e-9));
  report.add(check_interconnection(design, grid));
  report.add(check_orbit_minimum(design.ph, design.orbit, grid));
  const FalsifierPlan plan = falsifier_plan(sys);
  report.add(
      check_convergence(sys, plan.nominal, plan.spread, plan.t_end, grid.seed));
  return report;
}

Report audit_pumping_design(const PackagedSystem& sys, const EpdDesign& design,
                            const CheckGrid& grid) {
  Report report;
  report.subject = sys.name + " (pumping and damping)";
  const auto states = sample_states(grid);

  report.add(check_skew(design.ph, states));
  // Only the residual damping block must be PSD; the planar block changes
  // sign by design and is covered by the alignment check.
  report.add(check_symmetric(design.Rll, "residual_damping_psd", states, true));
  report.add(check_matching(sys.plant, design.ph, states, 1e-9));
  report.add(check_pumping_alignment(design, states));
  report.add(check_planar_coupling(design, states));
  report.add(check_energy_well_result(design));
  const FalsifierPlan plan = falsifier_plan(sys);
  report.add(
      check_convergence(sys, plan.nominal, plan.spread, plan.t_end, grid.seed));
  return report;
}

std::vector<std::string> builtin_design_names() {
  return {"im_msea", "im_epd", "pendulum_local", "pendulum_global",
          "im_msea_perturbed"};
}

Report verify_design(const std::string& name, int count, std::uint64_t seed) {
  const auto grid_for = [&](const PackagedSystem& sys) {
    CheckGrid grid;
    grid.box = sys.check_box;
    grid.count = count;
    grid.seed = seed;
    grid.exclude = sys.check_exclude;
    return grid;
  };

  if (name == "im_msea") {
    const PackagedSystem sys = im_fixed_frame(ImParams{});
    return audit_shaped_design(sys, *sys.msea, grid_for(sys));
  }
  if (name == "im_epd") {
    const PackagedSystem sys = im_fixed_frame(ImParams{});
    return audit_pumping_design(sys, *sys.epd, grid_for(sys));
  }
  if (name == "pendulum_local") {
    PendulumParams p;
    p.variant = PendulumParams::Variant::Local;
    const PackagedSystem sys = pendulum_local(p);
    return audit_pumping_design(sys, *sys.epd, grid_for(sys));
  }
  if (name == "pendulum_global") {
    PendulumParams p;
    p.variant = PendulumParams::Variant::AlmostGlobal;
    const PackagedSystem sys = pendulum_almost_global(p);
    return audit_pumping_design(sys, *sys.epd, grid_for(sys));
  }
  if (name == "im_msea_perturbed") {
    // Negative control: a damping entry is corrupted, so the declared closed
    // loop no longer matches what the feedback achieves.
    PackagedSystem sys = im_fixed_frame(ImParams{});
    MseaDesign design = *sys.msea;
    const MatrixFn base = design.ph.R;
    design.ph.R = [base](const Vector& x) {
      Matrix R = base(x);
      R(0, 0) += 0.1;
      return R;
    };
    Report report = audit_shaped_design(sys, design, grid_for(sys));
    report.subject = "im_msea_perturbed (negative control)";
    return report;
  }
  throw ConfigError("unknown design '" + name + "'; available: im_msea, im_epd, "
                    "pendulum_local, pendulum_global, im_msea_perturbed");
}

}  // namespace orbitforge
