#include "orbitforge/scenario.hpp"

#include "orbitforge/expr.hpp"
#include "orbitforge/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <vector>

namespace orbitforge {

namespace {

// ---------------------------------------------------------------------------
// Config text parsing

struct RawEntry {
  std::string value;
  int line = 0;
};

const std::set<std::string>& known_sections() {
  static const std::set<std::string> s = {"plant", "controller", "initial",
                                          "integrator", "analyses", "output"};
  return s;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> s = {
      "plant.type", "plant.R", "plant.beta_star", "plant.omega_star",
      "plant.k", "plant.gamma", "plant.gamma1", "plant.gamma2",
      "plant.theta_star",
      "controller.variant", "controller.file",
      "initial.state",
      "integrator.method", "integrator.step", "integrator.t_end",
      "integrator.stride", "integrator.rel_tol", "integrator.abs_tol",
      "integrator.max_step",
      "analyses.final_dist_max", "analyses.h_monotone", "analyses.h_slack",
      "analyses.phi_final_max", "analyses.rates", "analyses.rate_z1_expect",
      "analyses.rate_z2_expect", "analyses.rate_rel_tol", "analyses.r2_min",
      "analyses.period", "analyses.period_expect", "analyses.period_rel_tol",
      "analyses.turning_points", "analyses.amplitude_expect",
      "analyses.amplitude_tol", "analyses.epd_identity",
      "analyses.identity_tol", "analyses.stationary",
      "analyses.final_speed_max", "analyses.branch_profile",
      "analyses.kernel_monitor", "analyses.kernel_span_max",
      "output.dir", "output.name",
  };
  return s;
}

const std::set<std::string>& flag_analyses() {
  static const std::set<std::string> s = {
      "h_monotone", "rates", "period", "turning_points",
      "epd_identity", "stationary", "branch_profile", "kernel_monitor"};
  return s;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

/// Cuts an inline comment: '#' or ';' at the start or after whitespace.
std::string strip_comment(const std::string& line) {
  for (std::size_t i = 0; i < line.size(); ++i) {
    if ((line[i] == '#' || line[i] == ';') &&
        (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
      return line.substr(0, i);
    }
  }
  return line;
}

double parse_double(const std::string& key, const RawEntry& e) {
  const std::string v = trim(e.value);
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) {
    throw ConfigError("line " + std::to_string(e.line) + ": " + key +
                      ": invalid number '" + e.value + "'");
  }
  return x;
}

int parse_int(const std::string& key, const RawEntry& e) {
  const double x = parse_double(key, e);
  const int i = static_cast<int>(std::llround(x));
  if (static_cast<double>(i) != x) {
    throw ConfigError("line " + std::to_string(e.line) + ": " + key +
                      ": expected an integer, got '" + e.value + "'");
  }
  return i;
}

bool parse_bool(const std::string& key, const RawEntry& e) {
  const std::string v = trim(e.value);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("line " + std::to_string(e.line) + ": " + key +
                    ": expected true/false, got '" + e.value + "'");
}

Vector parse_state(const std::string& key, const RawEntry& e) {
  std::istringstream in(e.value);
  std::vector<double> vals;
  std::string tok;
  while (in >> tok) {
    char* end = nullptr;
    const double x = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) {
      throw ConfigError("line " + std::to_string(e.line) + ": " + key +
                        ": invalid number '" + tok + "'");
    }
    vals.push_back(x);
  }
  if (vals.empty()) {
    throw ConfigError("line " + std::to_string(e.line) + ": " + key +
                      " is empty");
  }
  Vector out(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = vals[i];
  }
  return out;
}

}  // namespace

ScenarioConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  std::map<std::string, RawEntry> kv;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']' || body.size() < 3) {
        throw ConfigError("line " + std::to_string(line_no) +
                          ": malformed section header '" + body + "'");
      }
      section = trim(body.substr(1, body.size() - 2));
      if (!known_sections().count(section)) {
        throw ConfigError("line " + std::to_string(line_no) +
                          ": unknown section '[" + section + "]'");
      }
      continue;
    }
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'key = value', got '" + body + "'");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    }
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": setting '" +
                        key + "' appears outside any section");
    }
    const std::string full = section + "." + key;
    if (!known_keys().count(full)) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": unknown setting '" + full + "'");
    }
    if (kv.count(full)) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate setting '" +
                        full + "'");
    }
    kv[full] = {value, line_no};
  }

  ScenarioConfig cfg;

  // Plant type and parameters.
  const auto type_it = kv.find("plant.type");
  if (type_it == kv.end()) throw ConfigError("plant.type is required");
  const std::string type = trim(type_it->second.value);
  bool is_im = false;
  if (type == "im_fixed") {
    cfg.plant_type = PlantType::ImFixed;
    is_im = true;
  } else if (type == "im_rotating") {
    cfg.plant_type = PlantType::ImRotating;
    is_im = true;
  } else if (type == "pendulum_local") {
    cfg.plant_type = PlantType::PendulumLocal;
    cfg.pendulum.variant = PendulumParams::Variant::Local;
  } else if (type == "pendulum_global") {
    cfg.plant_type = PlantType::PendulumGlobal;
    cfg.pendulum.variant = PendulumParams::Variant::AlmostGlobal;
  } else {
    throw ConfigError("line " + std::to_string(type_it->second.line) +
                      ": plant.type: unknown plant '" + type + "'");
  }

  const auto take_double = [&](const std::string& key, double& dst) {
    const auto it = kv.find(key);
    if (it != kv.end()) dst = parse_double(key, it->second);
  };
  static const char* im_keys[] = {"plant.R", "plant.beta_star",
                                  "plant.omega_star", "plant.k"};
  static const char* pend_keys[] = {"plant.gamma", "plant.gamma1",
                                    "plant.gamma2", "plant.theta_star"};
  for (const char* key : (is_im ? pend_keys : im_keys)) {
    const auto it = kv.find(key);
    if (it != kv.end()) {
      throw ConfigError("line " + std::to_string(it->second.line) + ": " +
                        std::string(key) + " does not apply to plant type '" +
                        type + "'");
    }
  }
  if (is_im) {
    take_double("plant.R", cfg.im.R);
    take_double("plant.beta_star", cfg.im.beta_star);
    take_double("plant.omega_star", cfg.im.omega_star);
    take_double("plant.k", cfg.im.k);
  } else {
    take_double("plant.gamma", cfg.pendulum.gamma);
    take_double("plant.gamma1", cfg.pendulum.gamma1);
    take_double("plant.gamma2", cfg.pendulum.gamma2);
    take_double("plant.theta_star", cfg.pendulum.theta_star);
  }

  // Controller.
  if (const auto it = kv.find("controller.variant"); it != kv.end()) {
    const std::string v = trim(it->second.value);
    if (v == "default") {
      cfg.variant = ControllerVariant::Default;
    } else if (v == "msea") {
      cfg.variant = ControllerVariant::Msea;
    } else if (v == "epd") {
      cfg.variant = ControllerVariant::Epd;
    } else if (v == "custom") {
      cfg.variant = ControllerVariant::Custom;
    } else if (v == "foc") {
      if (cfg.plant_type != PlantType::ImRotating) {
        throw ConfigError("line " + std::to_string(it->second.line) +
                          ": controller.variant = foc requires plant.type = "
                          "im_rotating");
      }
      cfg.variant = ControllerVariant::Default;
    } else {
      throw ConfigError("line " + std::to_string(it->second.line) +
                        ": controller.variant: unknown variant '" + v + "'");
    }
  }
  if (const auto it = kv.find("controller.file"); it != kv.end()) {
    cfg.custom_controller_file = trim(it->second.value);
  }
  if (cfg.variant == ControllerVariant::Custom &&
      cfg.custom_controller_file.empty()) {
    throw ConfigError("controller.variant = custom requires controller.file");
  }

  // Initial state.
  if (const auto it = kv.find("initial.state"); it != kv.end()) {
    cfg.initial_state = parse_state("initial.state", it->second);
  }

  // Integrator.
  if (const auto it = kv.find("integrator.method"); it != kv.end()) {
    const std::string v = trim(it->second.value);
    if (v == "rk4") {
      cfg.integrator.method = IntegrationMethod::Rk4;
    } else if (v == "rk45") {
      cfg.integrator.method = IntegrationMethod::Rk45;
    } else {
      throw ConfigError("line " + std::to_string(it->second.line) +
                        ": integrator.method: unknown method '" + v + "'");
    }
  }
  take_double("integrator.step", cfg.integrator.step);
  take_double("integrator.t_end", cfg.integrator.t_end);
  take_double("integrator.rel_tol", cfg.integrator.rel_tol);
  take_double("integrator.abs_tol", cfg.integrator.abs_tol);
  take_double("integrator.max_step", cfg.integrator.max_step);
  if (const auto it = kv.find("integrator.stride"); it != kv.end()) {
    cfg.integrator.stride = parse_int("integrator.stride", it->second);
  }
  cfg.integrator.validate();

  // Analyses: validate value syntax now, store raw strings.
  for (const auto& [full, entry] : kv) {
    if (full.rfind("analyses.", 0) != 0) continue;
    const std::string key = full.substr(9);
    if (flag_analyses().count(key)) {
      parse_bool(full, entry);
    } else {
      parse_double(full, entry);
    }
    cfg.analyses[key] = trim(entry.value);
  }

  // Output.
  if (const auto it = kv.find("output.dir"); it != kv.end()) {
    cfg.out_dir = trim(it->second.value);
  }
  if (const auto it = kv.find("output.name"); it != kv.end()) {
    cfg.name = trim(it->second.value);
  }
  return cfg;
}

ScenarioConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

PackagedSystem build_system(const ScenarioConfig& cfg) {
  PackagedSystem sys;
  switch (cfg.plant_type) {
    case PlantType::ImFixed:
      sys = im_fixed_frame(cfg.im);
      break;
    case PlantType::ImRotating:
      sys = im_rotating_frame(cfg.im);
      break;
    case PlantType::PendulumLocal:
      sys = pendulum_local(cfg.pendulum);
      break;
    case PlantType::PendulumGlobal:
      sys = pendulum_almost_global(cfg.pendulum);
      break;
  }

  switch (cfg.variant) {
    case ControllerVariant::Default:
      break;
    case ControllerVariant::Msea: {
      if (!sys.msea) {
        throw ConfigError(
            "controller.variant = msea: this plant has no shaped-energy "
            "design attached");
      }
      const MseaDesign design = *sys.msea;
      const ControlAffinePlant plant = sys.plant;
      sys.control = [design, plant](const Vector& x) {
        return regularized_control(plant, design, x);
      };
      break;
    }
    case ControllerVariant::Epd: {
      if (!sys.epd) {
        throw ConfigError(
            "controller.variant = epd: this plant has no pumping-and-damping "
            "design attached");
      }
      const PhDesign design = sys.epd->ph;
      const ControlAffinePlant plant = sys.plant;
      sys.control = [design, plant](const Vector& x) {
        return ida_control(plant, design, x);
      };
      break;
    }
    case ControllerVariant::Custom: {
      std::ifstream in(cfg.custom_controller_file);
      if (!in) {
        throw ConfigError("cannot read controller file '" +
                          cfg.custom_controller_file + "'");
      }
      std::vector<Expr> exprs;
      std::string line;
      while (std::getline(in, line)) {
        const std::string body = trim(strip_comment(line));
        if (body.empty()) continue;
        exprs.push_back(Expr::parse(body, sys.plant.n));
      }
      if (static_cast<int>(exprs.size()) != sys.plant.m) {
        throw ConfigError("controller file '" + cfg.custom_controller_file +
                          "' defines " + std::to_string(exprs.size()) +
                          " expression(s); the plant has " +
                          std::to_string(sys.plant.m) + " input(s)");
      }
      const int m = sys.plant.m;
      sys.control_t = [exprs, m](double t, const Vector& x) {
        Vector u(m);
        for (int i = 0; i < m; ++i) u(i) = exprs[static_cast<std::size_t>(i)].eval(x, t);
        return u;
      };
      break;
    }
  }
  return sys;
}

void apply_override(ScenarioConfig& cfg, const std::string& key, double value)
{
  const auto set = [&](double& dst) { dst = value; };
  if (key == "plant.R") return set(cfg.im.R);
  if (key == "plant.beta_star") return set(cfg.im.beta_star);
  if (key == "plant.omega_star") return set(cfg.im.omega_star);
  if (key == "plant.k") return set(cfg.im.k);
  if (key == "plant.gamma") return set(cfg.pendulum.gamma);
  if (key == "plant.gamma1") return set(cfg.pendulum.gamma1);
  if (key == "plant.gamma2") return set(cfg.pendulum.gamma2);
  if (key == "plant.theta_star") return set(cfg.pendulum.theta_star);
  if (key == "integrator.step") return set(cfg.integrator.step);
  if (key == "integrator.t_end") return set(cfg.integrator.t_end);
  if (key == "integrator.rel_tol") return set(cfg.integrator.rel_tol);
  if (key == "integrator.abs_tol") return set(cfg.integrator.abs_tol);
  if (key == "integrator.max_step") return set(cfg.integrator.max_step);
  if (key == "integrator.stride") {
    cfg.integrator.stride = static_cast<int>(std::llround(value));
    return;
  }
  throw ConfigError("cannot override '" + key +
                    "'; expected a plant.* or integrator.* setting");
}

// ---------------------------------------------------------------------------
// Analyses

namespace {

struct AnalysisLog {
  std::ostringstream out;
  bool pass = true;

  void result(bool ok, const std::string& name, const std::string& detail) {
    out << (ok ? "[PASS] " : "[FAIL] ") << name << ": " << detail << "\n";
    pass = pass && ok;
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

bool is_pendulum(const ScenarioConfig& cfg) {
  return cfg.plant_type == PlantType::PendulumLocal ||
         cfg.plant_type == PlantType::PendulumGlobal;
}

class Analyses {
 public:
  Analyses(const ScenarioConfig& cfg, const PackagedSystem& sys,
           const Trajectory& traj, AnalysisLog& log)
      : cfg_(cfg), sys_(sys), traj_(traj), log_(log) {}

  void run() {
    if (has("final_dist_max")) final_dist();
    if (flag("h_monotone")) h_monotone();
    if (has("phi_final_max")) phi_final();
    if (flag("rates")) rates();
    if (flag("period")) period();
    if (flag("turning_points")) turning();
    if (flag("epd_identity")) epd_identity();
    if (flag("stationary")) stationary();
    if (flag("branch_profile")) branch_profile();
    if (flag("kernel_monitor")) kernel_check();
  }

 private:
  bool has(const std::string& key) const { return cfg_.analyses.count(key) > 0; }
  bool flag(const std::string& key) const {
    const auto it = cfg_.analyses.find(key);
    return it != cfg_.analyses.end() &&
           (it->second == "true" || it->second == "1");
  }
  double num(const std::string& key, double fallback) const {
    const auto it = cfg_.analyses.find(key);
    return it != cfg_.analyses.end() ? std::stod(it->second) : fallback;
  }

  void final_dist() {
    const double tol = num("final_dist_max", 0.0);
    const double d = traj_.dist.back();
    log_.result(d <= tol, "final_dist_max",
                fmt(d) + " <= " + fmt(tol) + " at t = " + fmt(traj_.t.back()));
  }

  void h_monotone() {
    const double slack = num("h_slack", 1e-9);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < traj_.hamiltonian.size(); ++i) {
      worst = std::max(worst, traj_.hamiltonian[i + 1] - traj_.hamiltonian[i]);
    }
    log_.result(worst <= slack, "h_monotone",
                "largest energy increase " + fmt(worst) + " <= " + fmt(slack));
  }

  void phi_final() {
    const double tol = num("phi_final_max", 0.0);
    const double p = std::abs(traj_.phi.back());
    log_.result(p <= tol, "phi_final_max", fmt(p) + " <= " + fmt(tol));
  }

  void check_rate(const char* label, const std::vector<double>& series,
                  double expect, bool has_expect) {
    const double rel_tol = num("rate_rel_tol", 0.1);
    const double r2_min = num("r2_min", 0.99);
    try {
      const RateFit fit = fit_exponential_rate(traj_.t, series);
      bool ok = fit.r_squared >= r2_min;
      std::string detail = std::string(label) + " rate " + fmt(fit.rate) +
                           " (R^2 " + fmt(fit.r_squared) + ", " +
                           std::to_string(fit.n_samples) + " samples)";
      if (has_expect) {
        const double rel = std::abs(fit.rate - expect) / std::abs(expect);
        ok = ok && rel <= rel_tol;
        detail += ", expected " + fmt(expect) + " rel err " + fmt(rel);
      }
      log_.result(ok, "rates", detail);
    } catch (const Error& e) {
      log_.result(false, "rates", std::string(label) + ": " + e.what());
    }
  }

  void rates() {
    // Transverse channel 1: the orbit deviation.
    double z1_expect = 0.0;
    bool has_z1 = has("rate_z1_expect");
    if (has_z1) {
      z1_expect = num("rate_z1_expect", 0.0);
    } else if (!is_pendulum(cfg_)) {
      z1_expect = cfg_.im.R;
      has_z1 = true;
    }
    check_rate("z1", traj_.phi, z1_expect, has_z1);

    // Transverse channel 2: the residual coordinates (when present).
    if (!sys_.part.l.empty()) {
      std::vector<double> z2(traj_.size());
      const int idx = sys_.part.l[0];
      for (std::size_t i = 0; i < traj_.size(); ++i) {
        z2[i] = traj_.state[i](idx) - sys_.orbit.x_l_star(0);
      }
      double z2_expect = 0.0;
      bool has_z2 = has("rate_z2_expect");
      if (has_z2) {
        z2_expect = num("rate_z2_expect", 0.0);
      } else if (!is_pendulum(cfg_)) {
        z2_expect = cfg_.im.k;
        has_z2 = true;
      }
      check_rate("z2", z2, z2_expect, has_z2);
    }
  }

  void period() {
    const double rel_tol = num("period_rel_tol", 0.005);
    double expect = 0.0;
    bool has_expect = has("period_expect");
    if (has_expect) {
      expect = num("period_expect", 0.0);
    } else if (!is_pendulum(cfg_)) {
      expect = 2.0 * kPi / std::abs(cfg_.im.omega_star);
      has_expect = true;
    }
    try {
      double measured = 0.0;
      if (is_pendulum(cfg_)) {
        std::vector<double> pos(traj_.size()), vel(traj_.size());
        for (std::size_t i = 0; i < traj_.size(); ++i) {
          pos[i] = traj_.state[i](0);
          vel[i] = traj_.state[i](1);
        }
        measured = estimate_period_turning(traj_.t, pos, vel);
      } else {
        measured = estimate_period_phase(traj_.t, traj_.state, 0, 1);
      }
      bool ok = true;
      std::string detail = "measured " + fmt(measured);
      if (has_expect) {
        const double rel = std::abs(measured - expect) / std::abs(expect);
        ok = rel <= rel_tol;
        detail += ", expected " + fmt(expect) + " rel err " + fmt(rel);
      }
      log_.result(ok, "period", detail);
    } catch (const Error& e) {
      log_.result(false, "period", e.what());
    }
  }

  void turning() {
    if (!is_pendulum(cfg_)) {
      throw ConfigError("analyses.turning_points applies to the pendulum only");
    }
    const double expect = num("amplitude_expect",
                              std::abs(cfg_.pendulum.theta_star));
    const double tol = num("amplitude_tol", 0.02);
    std::vector<double> pos(traj_.size()), vel(traj_.size());
    for (std::size_t i = 0; i < traj_.size(); ++i) {
      pos[i] = traj_.state[i](0);
      vel[i] = traj_.state[i](1);
    }
    const auto tps = steady_turning_points(traj_.t, pos, vel);
    if (tps.size() < 2) {
      log_.result(false, "turning_points",
                  "only " + std::to_string(tps.size()) +
                      " settled turning points");
      return;
    }
    bool ok = true;
    double worst = 0.0;
    bool has_pos = false, has_neg = false;
    for (const auto& tp : tps) {
      worst = std::max(worst, std::abs(std::abs(tp.value) - expect));
      if (tp.value > 0) has_pos = true;
      if (tp.value < 0) has_neg = true;
    }
    ok = worst <= tol && has_pos && has_neg;
    log_.result(ok, "turning_points",
                std::to_string(tps.size()) + " settled turning points, worst |" +
                    "amplitude - " + fmt(expect) + "| = " + fmt(worst) +
                    " <= " + fmt(tol) +
                    (has_pos && has_neg ? "" : ", one-sided"));
  }

  void epd_identity() {
    if (!is_pendulum(cfg_) || !sys_.epd) {
      throw ConfigError("analyses.epd_identity applies to the pendulum only");
    }
    const double tol = num("identity_tol", 1e-8);
    const EpdDesign& d = *sys_.epd;
    double worst_err = 0.0, worst_sign = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < traj_.size(); ++i) {
      const Vector& x = traj_.state[i];
      // Realized planar energy rate along the actual closed loop.
      const Vector f_cl = sys_.plant.f(x) + sys_.plant.g(x) * traj_.input[i];
      const Vector ghp = d.grad_Hp(x);
      const double dhp = ghp.dot(f_cl);
      // Predicted rate from the design's damping profile.
      const Matrix rpp = d.Rpp(x);
      const double predicted = -ghp.dot(rpp * ghp);
      worst_err = std::max(worst_err, std::abs(dhp - predicted));
      // Energy moves toward the target level wherever damping is active.
      const bool aligned_region = !sys_.branch || sys_.branch(x) == 1;
      if (aligned_region && std::abs(x(1) * std::cos(x(0))) > 1e-6) {
        worst_sign = std::max(worst_sign, dhp * d.phi(x));
      }
    }
    const bool ok = worst_err <= tol && worst_sign <= 1e-15;
    log_.result(ok, "epd_identity",
                "worst rate mismatch " + fmt(worst_err) + " <= " + fmt(tol) +
                    ", worst sign product " + fmt(worst_sign));
  }

  void stationary() {
    const double tol = num("final_speed_max", 1e-6);
    const Vector& x = traj_.back_state();
    const Vector f_cl = sys_.plant.f(x) + sys_.plant.g(x) * traj_.input.back();
    const double speed = f_cl.norm();
    log_.result(speed <= tol, "stationary",
                "final state speed " + fmt(speed) + " <= " + fmt(tol));
  }

  void kernel_check() {
    if (!sys_.epd) {
      throw ConfigError(
          "analyses.kernel_monitor requires a pumping-and-damping design");
    }
    const double span_max = num("kernel_span_max", 0.1);
    const KernelMonitor mon = kernel_monitor(*sys_.epd, traj_.t, traj_.state);
    log_.result(mon.longest_span <= span_max, "kernel_monitor",
                std::to_string(mon.flagged) + " flagged samples, longest span " +
                    fmt(mon.longest_span) + " <= " + fmt(span_max));
  }

  void branch_profile() {
    if (traj_.branch.empty()) {
      throw ConfigError(
          "analyses.branch_profile requires a switched controller");
    }
    const bool starts_outer = traj_.branch.front() == 2;
    const double cutoff = 0.75 * traj_.t.back();
    bool settled_inner = true;
    for (std::size_t i = 0; i < traj_.size(); ++i) {
      if (traj_.t[i] >= cutoff && traj_.branch[i] != 1) settled_inner = false;
    }
    log_.result(starts_outer && settled_inner, "branch_profile",
                std::string("starts on branch ") +
                    std::to_string(traj_.branch.front()) +
                    ", last quarter " + (settled_inner ? "all" : "not all") +
                    " on branch 1");
  }

  const ScenarioConfig& cfg_;
  const PackagedSystem& sys_;
  const Trajectory& traj_;
  AnalysisLog& log_;
};

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw Error("cannot open '" + path + "' for writing");
  const Eigen::Index n = traj.state.empty() ? 0 : traj.state.front().size();
  const Eigen::Index m = traj.input.empty() ? 0 : traj.input.front().size();

  std::fprintf(f, "t");
  for (Eigen::Index i = 0; i < n; ++i) std::fprintf(f, ",x_%ld", static_cast<long>(i + 1));
  for (Eigen::Index j = 0; j < m; ++j) std::fprintf(f, ",u_%ld", static_cast<long>(j + 1));
  std::fprintf(f, ",H,Phi,dist_A");
  if (!traj.branch.empty()) std::fprintf(f, ",branch");
  std::fprintf(f, "\n");

  for (std::size_t row = 0; row < traj.size(); ++row) {
    std::fprintf(f, "%.17g", traj.t[row]);
    for (Eigen::Index i = 0; i < n; ++i) {
      std::fprintf(f, ",%.17g", traj.state[row](i));
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      std::fprintf(f, ",%.17g", traj.input[row](j));
    }
    std::fprintf(f, ",%.17g,%.17g,%.17g", traj.hamiltonian[row], traj.phi[row],
                 traj.dist[row]);
    if (!traj.branch.empty()) std::fprintf(f, ",%d", traj.branch[row]);
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  const PackagedSystem sys = build_system(cfg);
  if (cfg.initial_state.size() == 0) {
    throw ConfigError("initial.state is required to run a scenario");
  }
  if (cfg.initial_state.size() != sys.plant.n) {
    throw ConfigError("initial.state has " +
                      std::to_string(cfg.initial_state.size()) +
                      " entries; the plant expects " +
                      std::to_string(sys.plant.n));
  }

  ScenarioResult result;
  AnalysisLog log;
  log.out << "scenario: " << cfg.name << "\n";

  const auto t0 = std::chrono::steady_clock::now();
  Trajectory traj;
  try {
    traj = simulate(sys, cfg.initial_state, cfg.integrator);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    log.result(true, "simulate",
               std::to_string(traj.size()) + " samples to t = " +
                   fmt(traj.t.back()) + " in " + fmt(wall) + " s");
  } catch (const NonFiniteState& e) {
    log.result(false, "simulate",
               std::string(e.what()) + " (t = " + fmt(e.time) + ")");
  } catch (const StepUnderflow& e) {
    log.result(false, "simulate", e.what());
  }

  if (log.pass) {
    std::filesystem::create_directories(cfg.out_dir);
    write_trajectory_csv(cfg.out_dir + "/trajectory.csv", traj);
    Analyses(cfg, sys, traj, log).run();
  }

  log.out << "result: " << (log.pass ? "PASS" : "FAIL") << "\n";
  result.pass = log.pass;
  result.summary = log.out.str();
  result.trajectory = std::move(traj);

  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream summary(cfg.out_dir + "/summary.txt");
  summary << result.summary;
  return result;
}

SweepSpec parse_sweep_spec(const std::string& text) {
  const std::size_t eq = text.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("sweep spec '" + text +
                      "' must look like section.key=lo:hi:steps");
  }
  SweepSpec spec;
  spec.key = trim(text.substr(0, eq));
  const std::string range = text.substr(eq + 1);
  const std::size_t c1 = range.find(':');
  const std::size_t c2 = c1 == std::string::npos ? std::string::npos
                                                 : range.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos) {
    throw ConfigError("sweep range '" + range + "' must look like lo:hi:steps");
  }
  const RawEntry lo{trim(range.substr(0, c1)), 0};
  const RawEntry hi{trim(range.substr(c1 + 1, c2 - c1 - 1)), 0};
  const RawEntry steps{trim(range.substr(c2 + 1)), 0};
  spec.lo = parse_double("sweep lo", lo);
  spec.hi = parse_double("sweep hi", hi);
  spec.steps = parse_int("sweep steps", steps);
  if (spec.steps < 1) throw ConfigError("sweep needs at least 1 step");
  return spec;
}

int run_sweep(const ScenarioConfig& base, const SweepSpec& spec,
              const std::string& out_root, std::string& log) {
  // Validate the key once up front so a typo is a config error, not a
  // per-run failure.
  {
    ScenarioConfig probe = base;
    apply_override(probe, spec.key, spec.lo);
  }
  const std::string leaf = spec.key.substr(spec.key.rfind('.') + 1);

  struct RunOutcome {
    bool pass;
    std::string line;
  };
  std::vector<std::future<RunOutcome>> futures;
  for (int i = 0; i < spec.steps; ++i) {
    const double v =
        spec.steps == 1
            ? spec.lo
            : spec.lo + (spec.hi - spec.lo) * i / (spec.steps - 1);
    ScenarioConfig cfg = base;
    apply_override(cfg, spec.key, v);
    char tag[64];
    std::snprintf(tag, sizeof(tag), "%s=%g", leaf.c_str(), v);
    cfg.out_dir = out_root + "/" + tag;
    cfg.name = base.name + " [" + tag + "]";
    futures.push_back(std::async(std::launch::async, [cfg, tag = std::string(tag)]() {
      try {
        const ScenarioResult r = run_scenario(cfg);
        return RunOutcome{r.pass, tag + ": " + (r.pass ? "PASS" : "FAIL")};
      } catch (const std::exception& e) {
        return RunOutcome{false, tag + ": ERROR " + e.what()};
      }
    }));
  }

  bool all_pass = true;
  std::ostringstream os;
  for (auto& fut : futures) {
    const RunOutcome outcome = fut.get();
    all_pass = all_pass && outcome.pass;
    os << outcome.line << "\n";
  }
  log = os.str();
  return all_pass ? kExitPass : kExitAnalysisFailure;
}

}  // namespace orbitforge
