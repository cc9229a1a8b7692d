#pragma once

// Run configuration, scenario catalogue, time loop, L2 errors, convergence
// rates and the CSV / metadata writers used by the command line tool.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "aedg/analytic.hpp"
#include "aedg/errors.hpp"
#include "aedg/fluxes.hpp"
#include "aedg/mesh.hpp"
#include "aedg/solver.hpp"
#include "aedg/timestep.hpp"

namespace aedg {

inline constexpr const char* kVersion = "aedg 0.1.0";

enum class InitialState { exact, random };
enum class BoundaryData { exact, homogeneous };

struct RunConfig {
  std::string scenario = "standing_wave";
  int q = 3;
  int N = 8;
  std::vector<int> ladder{4, 6, 8, 12, 16, 24, 32};
  std::optional<double> final_time;  // scenario default when empty
  std::optional<DtRule> dt_rule;     // scenario default when empty
  double dt = 0.0;                   // manual rule only
  double dt_shrink = 0.0;            // 0: 4 for q >= 5, else 1
  double cfl_guard = 2.5;            // max dt * spectral radius; <= 0 disables
  FluxParams flux = FluxParams::from_mode(FluxMode::upwind);
  double perturb = 0.0;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string output = "out";
  int fit_window = 0;  // 0: 10 for Cartesian scenarios, 5 for the annulus
  int energy_stride = 1;
  bool snapshot = true;
  InitialState initial = InitialState::exact;
  BoundaryData boundary = BoundaryData::exact;
  int annulus_theta_factor = 4;

  void validate() const {
    static const std::set<std::string> known{"standing_wave", "snell",  "snell_contrast",      "scholte",
                                             "annulus",       "custom", "inversion_interface", "inversion_material"};
    if (!known.count(scenario)) throw ConfigError("unknown scenario '" + scenario + "'");
    if (q < 1) throw ConfigError("q must be >= 1");
    if (N < 1) throw ConfigError("N must be >= 1");
    if (ladder.empty()) throw ConfigError("refinement ladder is empty");
    for (int n : ladder)
      if (n < 1) throw ConfigError("ladder entries must be >= 1");
    if (final_time && !(*final_time > 0)) throw ConfigError("final_time must be > 0");
    if (dt_shrink < 0) throw ConfigError("dt_shrink must be >= 0");
    if (!(perturb >= 0 && perturb < 0.5)) throw ConfigError("perturb must lie in [0, 0.5)");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (fit_window < 0 || fit_window == 1) throw ConfigError("fit_window must be 0 or >= 2");
    if (energy_stride < 1) throw ConfigError("energy_stride must be >= 1");
    if (annulus_theta_factor < 1) throw ConfigError("annulus_theta_factor must be >= 1");
    flux.validate();
  }

  double shrink() const { return dt_shrink > 0 ? dt_shrink : (q >= 5 ? 4.0 : 1.0); }
};

namespace detail {

inline std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("not an integer list: '" + s + "'");
    }
    if (used != item.size()) throw ConfigError("not an integer list: '" + s + "'");
    out.push_back(v);
  }
  return out;
}

inline bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("not a boolean: '" + s + "'");
}

template <class T>
T parse_number(const std::string& key, const std::string& s) {
  std::istringstream is(s);
  T v{};
  if (!(is >> v) || !(is >> std::ws).eof()) throw ConfigError("bad value for '" + key + "': '" + s + "'");
  return v;
}

}  // namespace detail

/// Applies one "section.key = value" setting to the configuration.
inline void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_number;
  if (key == "run.scenario") c.scenario = value;
  else if (key == "run.q") c.q = parse_number<int>(key, value);
  else if (key == "run.N") c.N = parse_number<int>(key, value);
  else if (key == "run.ladder") c.ladder = detail::parse_int_list(value);
  else if (key == "run.final_time") c.final_time = parse_number<double>(key, value);
  else if (key == "run.dt_rule") c.dt_rule = parse_dt_rule(value);
  else if (key == "run.dt") c.dt = parse_number<double>(key, value);
  else if (key == "run.dt_shrink") c.dt_shrink = parse_number<double>(key, value);
  else if (key == "run.cfl_guard") c.cfl_guard = parse_number<double>(key, value);
  else if (key == "run.perturb") c.perturb = parse_number<double>(key, value);
  else if (key == "run.seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "run.threads") c.threads = parse_number<int>(key, value);
  else if (key == "run.output") c.output = value;
  else if (key == "run.fit_window") c.fit_window = parse_number<int>(key, value);
  else if (key == "run.energy_stride") c.energy_stride = parse_number<int>(key, value);
  else if (key == "run.snapshot") c.snapshot = detail::parse_bool(value);
  else if (key == "run.initial") {
    if (value == "exact") c.initial = InitialState::exact;
    else if (value == "random") c.initial = InitialState::random;
    else throw ConfigError("initial must be exact or random");
  } else if (key == "run.boundary") {
    if (value == "exact") c.boundary = BoundaryData::exact;
    else if (value == "homogeneous") c.boundary = BoundaryData::homogeneous;
    else throw ConfigError("boundary must be exact or homogeneous");
  } else if (key == "run.annulus_theta_factor") c.annulus_theta_factor = parse_number<int>(key, value);
  else if (key == "flux.mode") c.flux = FluxParams::from_mode(parse_flux_mode(value));
  else if (key == "flux.tau") c.flux.tau = parse_number<double>(key, value);
  else if (key == "flux.alpha") c.flux.alpha = parse_number<double>(key, value);
  else if (key == "flux.beta") c.flux.beta = parse_number<double>(key, value);
  else if (key == "flux.gamma_fluid") c.flux.gamma_fluid = parse_number<double>(key, value);
  else if (key == "flux.gamma_solid") c.flux.gamma_solid = parse_number<double>(key, value);
  else throw ConfigError("unknown configuration key '" + key + "'");
}

/// Flat INI text: sections [run] and [flux]. flux.mode is applied before the
/// individual coefficients so that they act as overrides. Keys of other
/// sections are returned to the caller untouched.
inline RunConfig parse_config(std::istream& in, std::map<std::string, std::string>* extra = nullptr) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  RunConfig c;
  std::vector<std::pair<std::string, std::string>> settings;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside of a section");
    for (const auto& [key, val] : body) {
      const std::string full = section + "." + key;
      if (section == "run" || section == "flux") settings.emplace_back(full, val.data());
      else if (extra) (*extra)[full] = val.data();
      else throw ConfigError("unknown configuration key '" + full + "'");
    }
  }
  std::stable_partition(settings.begin(), settings.end(), [](const auto& kv) { return kv.first == "flux.mode"; });
  for (const auto& [k, v] : settings) apply_setting(c, k, v);
  c.validate();
  return c;
}

inline RunConfig load_config(const std::string& path, std::map<std::string, std::string>* extra = nullptr) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  return parse_config(in, extra);
}

/// Resolved configuration as INI text (echoed into every output directory).
inline std::string echo_config(const RunConfig& c) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "[run]\n";
  os << "scenario = " << c.scenario << "\n";
  os << "q = " << c.q << "\n";
  os << "N = " << c.N << "\n";
  os << "ladder = ";
  for (std::size_t i = 0; i < c.ladder.size(); ++i) os << (i ? "," : "") << c.ladder[i];
  os << "\n";
  if (c.final_time) os << "final_time = " << *c.final_time << "\n";
  if (c.dt_rule) os << "dt_rule = " << to_string(*c.dt_rule) << "\n";
  if (c.dt > 0) os << "dt = " << c.dt << "\n";
  os << "dt_shrink = " << c.shrink() << "\n";
  os << "cfl_guard = " << c.cfl_guard << "\n";
  os << "perturb = " << c.perturb << "\n";
  os << "seed = " << c.seed << "\n";
  os << "threads = " << c.threads << "\n";
  os << "output = " << c.output << "\n";
  os << "fit_window = " << c.fit_window << "\n";
  os << "energy_stride = " << c.energy_stride << "\n";
  os << "snapshot = " << (c.snapshot ? "true" : "false") << "\n";
  os << "initial = " << (c.initial == InitialState::exact ? "exact" : "random") << "\n";
  os << "boundary = " << (c.boundary == BoundaryData::exact ? "exact" : "homogeneous") << "\n";
  os << "annulus_theta_factor = " << c.annulus_theta_factor << "\n";
  os << "[flux]\n";
  os << "mode = " << to_string(c.flux.mode) << "\n";
  os << "tau = " << c.flux.tau << "\n";
  os << "alpha = " << c.flux.alpha << "\n";
  os << "beta = " << c.flux.beta << "\n";
  os << "gamma_fluid = " << c.flux.gamma_fluid << "\n";
  os << "gamma_solid = " << c.flux.gamma_solid << "\n";
  return os.str();
}

/// Geometry, exact solution and time parameters of one verification scenario.
struct Scenario {
  std::string name;
  std::shared_ptr<const ExactSolution> exact;
  std::function<CoupledMesh(int N)> build;
  double final_time = 1.0;
  DtRule dt_rule = DtRule::standing_wave;
  double c_max = 1.0, rho_scale = 1.0;
  int default_window = 10;
};

inline Scenario make_scenario(const RunConfig& cfg) {
  Scenario s;
  s.name = cfg.scenario;
  auto flat = [&cfg](std::shared_ptr<const ExactSolution> ex) {
    return [ex, perturb = cfg.perturb, seed = cfg.seed](int N) {
      CoupledMesh m = build_cartesian_coupled(N, flat_fluid_box(), flat_solid_box(), ex->fluid(), ex->solid());
      if (perturb > 0) m = perturb_interior_nodes(m, perturb, seed);
      m.set_conditions([](RegionKind, const std::string&) { return BoundaryCondition::dirichlet; });
      return m;
    };
  };
  if (cfg.scenario == "standing_wave") {
    s.exact = std::make_shared<StandingWave>();
    s.final_time = 2.0 * std::numbers::sqrt2;
  } else if (cfg.scenario == "snell") {
    s.exact = std::make_shared<SnellSolution>();
    s.final_time = 2.0;
  } else if (cfg.scenario == "snell_contrast") {
    const SnellSpec spec = snell_contrast_spec();
    s.exact = std::make_shared<SnellSolution>(spec);
    s.final_time = 2.0;
    s.dt_rule = DtRule::contrast;
    s.c_max = std::max(spec.c, spec.cp);
    s.rho_scale = spec.rho_s;
  } else if (cfg.scenario == "scholte") {
    s.exact = std::make_shared<ScholteWave>();
    s.final_time = 2.0;
  } else if (cfg.scenario == "annulus") {
    auto ex = std::make_shared<AnnulusMode>();
    s.exact = ex;
    s.final_time = 1.0;
    s.default_window = 5;
    s.build = [ex, f = cfg.annulus_theta_factor](int N) {
      const auto& a = ex->spec();
      CoupledMesh m = build_annulus_coupled({a.r0, a.r1, a.r2, N, N, f * N}, ex->fluid(), ex->solid());
      m.set_conditions([](RegionKind, const std::string&) { return BoundaryCondition::dirichlet; });
      return m;
    };
  } else {
    throw ConfigError("scenario '" + cfg.scenario + "' has no exact solution; use the invert command or the library API");
  }
  if (!s.build) s.build = flat(s.exact);
  return s;
}

struct RunResult {
  int N = 0;
  double h = 0;
  double dt = 0;
  int steps = 0;
  double dt_rule_value = 0;
  double spectral_radius = 0;
  bool guard_applied = false;
  FieldErrors errors;
  Energies initial_energy, final_energy;
  std::vector<std::array<double, 4>> energy_trace;  // t, E_a, E_e, E_total
};

struct StepPlan {
  double dt = 0;
  int steps = 0;
  double rule_dt = 0;
  double radius = 0;
  bool guarded = false;
};

/// dt from the scenario rule, shrink factor and the spectral-radius guard,
/// adjusted to land exactly on the final time.
inline StepPlan plan_steps(const CoupledSolver& solver, const RunConfig& cfg, const Scenario& sc, double T) {
  TimeStepRule r;
  r.rule = cfg.dt_rule.value_or(sc.dt_rule);
  r.h = solver.mesh().h;
  r.q = cfg.q;
  r.c_max = sc.c_max;
  r.rho_scale = sc.rho_scale;
  r.manual_dt = cfg.dt;
  StepPlan p;
  p.rule_dt = select_dt(r);
  double dt = p.rule_dt / cfg.shrink();
  if (cfg.cfl_guard > 0) {
    p.radius = solver.spectral_radius();
    if (dt * p.radius > cfg.cfl_guard) {
      dt = 0.9 * cfg.cfl_guard / p.radius;
      p.guarded = true;
    }
  }
  p.steps = step_count(T, dt);
  p.dt = T / p.steps;
  return p;
}

/// Integrates one mesh of the ladder and measures errors against the exact solution.
inline RunResult run_single(const RunConfig& cfg, const Scenario& sc, int N, Eigen::VectorXd* final_state = nullptr) {
  const double T = cfg.final_time.value_or(sc.final_time);
  CoupledSolver solver(sc.build(N), Degrees::from_q(cfg.q), cfg.flux, SolverOptions{cfg.threads});
  if (cfg.boundary == BoundaryData::exact) solver.set_boundary_data(sc.exact);
  Eigen::VectorXd y = cfg.initial == InitialState::exact ? solver.project(*sc.exact, 0.0) : solver.random_state(cfg.seed);
  const StepPlan plan = plan_steps(solver, cfg, sc, T);

  RunResult res;
  res.N = N;
  res.h = solver.mesh().h;
  res.dt = plan.dt;
  res.steps = plan.steps;
  res.dt_rule_value = plan.rule_dt;
  res.spectral_radius = plan.radius;
  res.guard_applied = plan.guarded;
  res.initial_energy = solver.energies(y);
  const double e0 = res.initial_energy.total();
  const bool dissipative = cfg.flux.mode != FluxMode::energy_conserving;
  auto record = [&](double t) {
    const Energies e = solver.energies(y);
    res.energy_trace.push_back({t, e.acoustic, e.elastic, e.total()});
    return e;
  };
  record(0.0);
  Rk4 rk([&solver](const Eigen::VectorXd& a, double t, Eigen::VectorXd& d) { solver.rhs(a, t, d); });
  for (int s = 0; s < plan.steps; ++s) {
    const double t = s * plan.dt;
    rk.step(y, t, plan.dt);
    const bool last = s + 1 == plan.steps;
    if (last || (s + 1) % cfg.energy_stride == 0) {
      const Energies e = record(last ? T : (s + 1) * plan.dt);
      if (dissipative && e0 > 0 && e.total() > 10.0 * e0)
        throw IntegrationError("energy grew beyond 10x its initial value under dissipative fluxes", t + plan.dt);
    }
  }
  res.final_energy = solver.energies(y);
  if (cfg.initial == InitialState::exact) res.errors = solver.l2_errors(y, *sc.exact, T);
  if (final_state) *final_state = y;
  return res;
}

struct RateFit {
  double rate = std::nan("");
  int used = 0;
  std::vector<std::string> warnings;
};

/// Least-squares slope of log(e) against log(h) over the `window` finest
/// entries; zero or non-finite errors are excluded with a warning.
inline RateFit fit_rate(const std::vector<double>& h, const std::vector<double>& e, int window) {
  if (h.size() != e.size()) throw ContractViolation("fit_rate: size mismatch");
  std::vector<std::size_t> order(h.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&h](std::size_t a, std::size_t b) { return h[a] < h[b]; });
  const std::size_t take = std::min<std::size_t>(order.size(), window > 0 ? window : order.size());
  RateFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t j = 0; j < take; ++j) {
    const std::size_t i = order[j];
    if (!(e[i] > 0) || !std::isfinite(e[i]) || !(h[i] > 0)) {
      std::ostringstream os;
      os << "excluded error " << e[i] << " at h = " << h[i];
      fit.warnings.push_back(os.str());
      continue;
    }
    const double x = std::log(h[i]), y = std::log(e[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    ++fit.used;
  }
  if (fit.used < 2) throw ConfigError("fit_rate needs at least two usable points");
  const double n = fit.used;
  fit.rate = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return fit;
}

struct ConvergenceReport {
  std::vector<RunResult> runs;
  std::array<double, 4> rates{};  // psi, p, u, v
  int window = 0;
  std::vector<std::string> warnings;
};

inline ConvergenceReport converge(const RunConfig& cfg, std::ostream* log = nullptr) {
  cfg.validate();
  const Scenario sc = make_scenario(cfg);
  ConvergenceReport rep;
  std::vector<int> ladder = cfg.ladder;
  std::sort(ladder.begin(), ladder.end());
  for (int N : ladder) {
    rep.runs.push_back(run_single(cfg, sc, N));
    if (log) {
      const auto& r = rep.runs.back();
      *log << sc.name << " q=" << cfg.q << " N=" << N << " h=" << r.h << " dt=" << r.dt << " steps=" << r.steps
           << (r.guard_applied ? " (dt guard)" : "") << " errors " << r.errors.psi << " " << r.errors.p << " "
           << r.errors.u << " " << r.errors.v << "\n";
    }
  }
  rep.window = cfg.fit_window > 0 ? cfg.fit_window : sc.default_window;
  std::vector<double> h;
  for (const auto& r : rep.runs) h.push_back(r.h);
  const std::array<double FieldErrors::*, 4> fields{&FieldErrors::psi, &FieldErrors::p, &FieldErrors::u,
                                                   &FieldErrors::v};
  for (int f = 0; f < 4; ++f) {
    std::vector<double> e;
    for (const auto& r : rep.runs) e.push_back(r.errors.*fields[f]);
    const RateFit fit = fit_rate(h, e, rep.window);
    rep.rates[f] = fit.rate;
    rep.warnings.insert(rep.warnings.end(), fit.warnings.begin(), fit.warnings.end());
  }
  return rep;
}

// ---- output writers ----

inline std::filesystem::path ensure_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  std::filesystem::create_directories(p);
  return p;
}

inline void write_errors_csv(const std::filesystem::path& file, const ConvergenceReport& rep) {
  std::ofstream os(file);
  os << std::setprecision(12) << "N,h,dt,steps,psi,p,u,v\n";
  for (const auto& r : rep.runs)
    os << r.N << ',' << r.h << ',' << r.dt << ',' << r.steps << ',' << r.errors.psi << ',' << r.errors.p << ','
       << r.errors.u << ',' << r.errors.v << '\n';
}

inline void write_rates_csv(const std::filesystem::path& file, const ConvergenceReport& rep) {
  std::ofstream os(file);
  os << std::setprecision(6) << std::fixed << "window,psi,p,u,v\n";
  os << rep.window << ',' << rep.rates[0] << ',' << rep.rates[1] << ',' << rep.rates[2] << ',' << rep.rates[3] << '\n';
}

inline void write_energy_csv(const std::filesystem::path& file, const std::vector<std::array<double, 4>>& trace) {
  std::ofstream os(file);
  os << std::setprecision(17) << "t,E_a,E_e,E_total\n";
  for (const auto& r : trace) os << r[0] << ',' << r[1] << ',' << r[2] << ',' << r[3] << '\n';
}

inline void write_metadata(const std::filesystem::path& file, const RunConfig& cfg, const std::string& command,
                           const std::vector<RunResult>& runs, const std::vector<std::string>& notes = {}) {
  std::ofstream os(file);
  os << std::setprecision(17);
  os << "version = " << kVersion << "\n";
  os << "command = " << command << "\n";
  const Degrees d = Degrees::from_q(cfg.q);
  os << "degrees = psi " << d.psi << ", p " << d.p << ", u " << d.u << ", v " << d.v << "\n";
  os << "integrator = rk4\n";
  for (const auto& r : runs)
    os << "run N=" << r.N << " h=" << r.h << " dt=" << r.dt << " steps=" << r.steps << " rule_dt=" << r.dt_rule_value
       << " spectral_radius=" << r.spectral_radius << " guard=" << (r.guard_applied ? "applied" : "no") << "\n";
  for (const auto& n : notes) os << "note = " << n << "\n";
  os << "\n# configuration\n" << echo_config(cfg);
}

}  // namespace aedg
