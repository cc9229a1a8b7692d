// Command line front end: run, converge, energy-audit, invert.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aedg.hpp"

namespace {

using namespace aedg;

struct Common {
  std::string config;
  std::optional<std::string> scenario, flux, out;
  std::optional<int> q, threads, N;
  std::optional<double> tau, alpha, beta;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> ladder;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "INI configuration file");
  app->add_option("--scenario", c.scenario, "scenario tag");
  app->add_option("--q", c.q, "polynomial degree");
  app->add_option("--N", c.N, "elements per direction for a single run");
  app->add_option("--ladder", c.ladder, "comma separated refinement ladder");
  app->add_option("--flux", c.flux, "interface flux")->check(CLI::IsMember({"conserving", "upwind", "alt0", "alt1"}));
  app->add_option("--tau", c.tau, "interface flux tau");
  app->add_option("--alpha", c.alpha, "interface flux alpha (<= 0)");
  app->add_option("--beta", c.beta, "interface flux beta (<= 0)");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--seed", c.seed, "random seed");
  app->add_option("--threads", c.threads, "worker threads");
}

// Configuration file first, then command line overrides through the same
// key parser so that validation is shared.
RunConfig resolve(const Common& c, std::map<std::string, std::string>* extra) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config, extra);
  auto set = [&cfg](const char* key, const auto& v) {
    if (!v) return;
    std::ostringstream os;
    os << std::setprecision(17) << *v;
    apply_setting(cfg, key, os.str());
  };
  set("run.scenario", c.scenario);
  set("run.q", c.q);
  set("run.N", c.N);
  set("run.ladder", c.ladder);
  // a new mode resets the coefficients; explicit --tau etc. still win
  set("flux.mode", c.flux);
  set("flux.tau", c.tau);
  set("flux.alpha", c.alpha);
  set("flux.beta", c.beta);
  set("run.output", c.out);
  set("run.seed", c.seed);
  set("run.threads", c.threads);
  cfg.validate();
  return cfg;
}

std::string command_line(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) s += (i ? " " : "") + std::string(argv[i]);
  return s;
}

void write_snapshot_files(const RunConfig& cfg, const Scenario& sc, int N, const Eigen::VectorXd& y,
                          const std::filesystem::path& dir) {
  const CoupledSolver solver(sc.build(N), Degrees::from_q(cfg.q), cfg.flux, SolverOptions{cfg.threads});
  std::ofstream f(dir / "snapshot_fluid.csv"), s(dir / "snapshot_solid.csv");
  solver.write_snapshot(y, f, s);
}

int cmd_run(const Common& c, const std::string& cmd) {
  const RunConfig cfg = resolve(c, nullptr);
  const Scenario sc = make_scenario(cfg);
  const auto dir = ensure_dir(cfg.output);
  Eigen::VectorXd y;
  const RunResult r = run_single(cfg, sc, cfg.N, &y);
  write_energy_csv(dir / "energy.csv", r.energy_trace);
  ConvergenceReport rep;
  rep.runs.push_back(r);
  write_errors_csv(dir / "errors.csv", rep);
  if (cfg.snapshot) write_snapshot_files(cfg, sc, cfg.N, y, dir);
  write_metadata(dir / "metadata.txt", cfg, cmd, rep.runs);
  std::cout << sc.name << " q=" << cfg.q << " N=" << cfg.N << " steps=" << r.steps << " dt=" << r.dt
            << " errors psi=" << r.errors.psi << " p=" << r.errors.p << " u=" << r.errors.u << " v=" << r.errors.v
            << "\n";
  return 0;
}

int cmd_converge(const Common& c, const std::string& cmd) {
  const RunConfig cfg = resolve(c, nullptr);
  const auto dir = ensure_dir(cfg.output);
  const ConvergenceReport rep = converge(cfg, &std::cout);
  write_errors_csv(dir / "errors.csv", rep);
  write_rates_csv(dir / "rates.csv", rep);
  write_metadata(dir / "metadata.txt", cfg, cmd, rep.runs, rep.warnings);
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << std::fixed << std::setprecision(2) << "rates (window " << rep.window << "): psi " << rep.rates[0]
            << "  p " << rep.rates[1] << "  u " << rep.rates[2] << "  v " << rep.rates[3] << "\n";
  return 0;
}

// Homogeneous boundary data; random initial data unless the config asks for
// the exact projection. Reports drift and step-to-step growth.
int cmd_energy_audit(const Common& c, const std::string& cmd, bool exact_initial) {
  RunConfig cfg = resolve(c, nullptr);
  cfg.boundary = BoundaryData::homogeneous;
  if (!exact_initial) cfg.initial = InitialState::random;
  cfg.energy_stride = 1;
  const Scenario sc = make_scenario(cfg);
  const auto dir = ensure_dir(cfg.output);
  const RunResult r = run_single(cfg, sc, cfg.N);
  write_energy_csv(dir / "energy.csv", r.energy_trace);
  const double e0 = r.energy_trace.front()[3];
  double drift = 0, growth = -1e300;
  for (std::size_t k = 0; k < r.energy_trace.size(); ++k) {
    drift = std::max(drift, std::abs(r.energy_trace[k][3] - e0) / e0);
    if (k) growth = std::max(growth, (r.energy_trace[k][3] - r.energy_trace[k - 1][3]) / e0);
  }
  std::ostringstream note;
  note << std::setprecision(6) << "max |E - E0|/E0 = " << drift << ", max step growth / E0 = " << growth;
  write_metadata(dir / "metadata.txt", cfg, cmd, {r}, {note.str()});
  std::cout << sc.name << " flux=" << to_string(cfg.flux.mode) << " steps=" << r.steps << " " << note.str() << "\n";
  return 0;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(detail::parse_number<double>("list", item));
  return out;
}

void write_traces(const std::filesystem::path& dir, const Traces& tr, double dt) {
  std::filesystem::create_directories(dir);
  for (std::size_t r = 0; r < tr.size(); ++r) {
    std::ostringstream name;
    name << "receiver_" << std::setw(2) << std::setfill('0') << r << ".csv";
    std::ofstream os(dir / name.str());
    os << std::setprecision(17) << "t,value\n";
    for (std::size_t k = 0; k < tr[r].size(); ++k) os << k * dt << ',' << tr[r][k] << '\n';
  }
}

int cmd_invert(const Common& c, const std::string& cmd) {
  std::map<std::string, std::string> extra;
  RunConfig cfg = resolve(c, &extra);
  auto take = [&extra](const std::string& key) -> std::optional<std::string> {
    const auto it = extra.find("inversion." + key);
    if (it == extra.end()) return std::nullopt;
    std::string v = it->second;
    extra.erase(it);
    return v;
  };
  MinimizeOptions mopt;
  FdOptions fd;
  if (auto v = take("max_iterations")) mopt.max_iterations = detail::parse_number<int>("max_iterations", *v);
  if (auto v = take("grad_tol")) mopt.grad_tol = detail::parse_number<double>("grad_tol", *v);
  if (auto v = take("cost_tol")) mopt.cost_tol = detail::parse_number<double>("cost_tol", *v);
  if (auto v = take("fd_step")) fd.rel_step = detail::parse_number<double>("fd_step", *v);

  InversionSetup setup;
  std::vector<std::string> notes;
  if (cfg.scenario == "inversion_interface") {
    InterfaceInversionConfig ic;
    ic.q = cfg.q;
    ic.threads = cfg.threads;
    ic.cfl_guard = cfg.cfl_guard;
    if (cfg.final_time) ic.final_time = *cfg.final_time;
    if (auto v = take("coefficients")) ic.coefficients = parse_doubles(*v);
    if (auto v = take("bound")) ic.bound = detail::parse_number<double>("bound", *v);
    if (auto v = take("r_inner")) ic.r_inner = detail::parse_number<double>("r_inner", *v);
    if (auto v = take("ntheta")) ic.ntheta = detail::parse_number<int>("ntheta", *v);
    if (auto v = take("nr_solid")) ic.nr_solid = detail::parse_number<int>("nr_solid", *v);
    if (auto v = take("nr_fluid")) ic.nr_fluid = detail::parse_number<int>("nr_fluid", *v);
    if (auto v = take("receivers")) ic.receivers = detail::parse_number<int>("receivers", *v);
    setup = make_interface_inversion(ic);
  } else if (cfg.scenario == "inversion_material") {
    MaterialInversionConfig mc;
    mc.q = cfg.q;
    mc.threads = cfg.threads;
    mc.seed = cfg.seed;
    mc.cfl_guard = cfg.cfl_guard;
    if (cfg.final_time) mc.final_time = *cfg.final_time;
    if (auto v = take("N")) mc.N = detail::parse_number<int>("N", *v);
    if (auto v = take("perturbations")) mc.perturbations = parse_doubles(*v);
    setup = make_material_inversion(mc);
    notes.push_back("point source at (0.1, 1.8) lies in the fluid and forces the pressure equation");
  } else {
    throw ConfigError("invert needs scenario inversion_interface or inversion_material");
  }
  if (!extra.empty()) throw ConfigError("unknown configuration key '" + extra.begin()->first + "'");

  const auto dir = ensure_dir(cfg.output);
  std::ofstream misfit(dir / "misfit.csv"), hist(dir / "theta_history.csv");
  misfit << std::setprecision(17) << "iteration,J,grad_inf,step\n";
  hist << std::setprecision(17) << "iteration";
  for (Eigen::Index i = 0; i < setup.theta0.size(); ++i) hist << ",theta_" << i;
  hist << '\n';
  const auto t0 = std::chrono::steady_clock::now();
  const InversionOutcome out = run_inversion(setup, mopt, fd, [&](const MisfitRecord& r) {
    misfit << r.iteration << ',' << r.cost << ',' << r.grad_inf << ',' << r.step << '\n';
    hist << r.iteration;
    for (Eigen::Index i = 0; i < r.theta.size(); ++i) hist << ',' << r.theta(i);
    hist << '\n';
    std::cout << "iter " << r.iteration << "  J " << r.cost << "  |pg| " << r.grad_inf << "  step " << r.step
              << std::endl;
  });
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  {
    std::ofstream os(dir / "recovered.csv");
    os << std::setprecision(17) << "index,true,recovered\n";
    for (Eigen::Index i = 0; i < setup.theta_true.size(); ++i)
      os << i << ',' << setup.theta_true(i) << ',' << out.result.theta(i) << '\n';
  }
  write_traces(dir / "traces", out.data, setup.forward.dt);
  std::ostringstream n1, n2;
  n1 << std::setprecision(6) << "dt = " << setup.forward.dt << ", steps = " << setup.forward.steps
     << ", receivers = " << setup.forward.receivers.size();
  n2 << std::setprecision(6) << "termination = " << out.result.reason << ", J0 = " << out.initial_cost
     << ", J = " << out.result.cost << ", forward solves = " << out.result.evaluations << ", seconds = " << secs;
  notes.push_back(n1.str());
  notes.push_back(n2.str());
  write_metadata(dir / "metadata.txt", cfg, cmd, {}, notes);
  std::cout << n2.str() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled acoustic-elastic discontinuous Galerkin solver"};
  app.set_version_flag("--version", std::string(aedg::kVersion));
  app.require_subcommand(1);
  Common run_o, conv_o, audit_o, inv_o;
  bool audit_exact = false;
  auto* run = app.add_subcommand("run", "single mesh run with errors, energy trace and snapshot");
  add_common(run, run_o);
  auto* conv = app.add_subcommand("converge", "refinement ladder and fitted convergence rates");
  add_common(conv, conv_o);
  auto* audit = app.add_subcommand("energy-audit", "energy trace with homogeneous boundary data");
  add_common(audit, audit_o);
  audit->add_flag("--exact-initial", audit_exact, "start from the projected exact solution instead of random data");
  auto* inv = app.add_subcommand("invert", "misfit minimization on synthetic receiver data");
  add_common(inv, inv_o);
  CLI11_PARSE(app, argc, argv);
  const std::string cmd = command_line(argc, argv);
  try {
    if (*run) return cmd_run(run_o, cmd);
    if (*conv) return cmd_converge(conv_o, cmd);
    if (*audit) return cmd_energy_audit(audit_o, cmd, audit_exact);
    if (*inv) return cmd_invert(inv_o, cmd);
  } catch (const aedg::IntegrationError& e) {
    std::cerr << "integration error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
