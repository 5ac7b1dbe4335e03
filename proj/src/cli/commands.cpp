#include "cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <thread>

#include "cli/report_json.hpp"
#include "orbitinv/helmholtz.hpp"
#include "orbitinv/invariants.hpp"
#include "orbitinv/number_format.hpp"

namespace orbitinv::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Context {
  RunConfig cfg;
  fs::path out;
};

Context make_context(const Options& opt, bool config_required = true) {
  Context ctx;
  if (opt.config_path) {
    ctx.cfg = load_config(*opt.config_path);
  } else if (config_required) {
    throw ConfigError("--config is required for this command");
  }
  if (opt.state) ctx.cfg.initial_state = parse_state(*opt.state);
  if (opt.t_end) ctx.cfg.t_end = *opt.t_end;
  if (opt.seed_period) ctx.cfg.seed_period = *opt.seed_period;
  if (opt.resolution) ctx.cfg.resolution = *opt.resolution;
  if (opt.out_dir) ctx.cfg.output_dir = *opt.out_dir;
  ctx.cfg.validate();
  ctx.out = ctx.cfg.output_dir;
  std::error_code ec;
  fs::create_directories(ctx.out, ec);
  if (ec) throw ConfigError("cannot create output directory '" + ctx.out.string() + "': " + ec.message());
  return ctx;
}

PhaseState initial_state(const RunConfig& cfg) {
  if (!cfg.initial_state) throw ConfigError("no initial state: set initial_state or pass --state");
  return *cfg.initial_state;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write '" + path.string() + "'");
  return os;
}

void write_json(const fs::path& path, const json& j) {
  auto os = open_output(path);
  os << j.dump(2) << '\n';
}

void write_curve_csv(const fs::path& path, const ClosedCurve& curve) {
  auto os = open_output(path);
  os << "x,y\n";
  for (const Point2& p : curve.vertices()) os << fmt17(p.x) << ',' << fmt17(p.y) << '\n';
}

struct Classification {
  FrequencyEstimate freqs;
  ResonanceLabel label;
  double horizon = 0.0;
  double periods_observed = 0.0;
};

Classification run_classification(const SystemSpec& spec, const RunConfig& cfg, const PhaseState& s0,
                                  double horizon) {
  const Trajectory traj = integrate(spec, s0, s0.t + horizon, cfg.integrator);
  Classification c;
  c.horizon = horizon;
  c.freqs = estimate_frequencies(traj, cfg.classification.samples);
  c.periods_observed = horizon * std::min(c.freqs.f1, c.freqs.f2) / (2.0 * std::numbers::pi);
  if (c.periods_observed < 20.0) {
    throw ConfigError("classification horizon " + fmt17(horizon) + " covers only " +
                      fmt17(c.periods_observed) + " periods (need >= 20)");
  }
  c.label = classify(c.freqs, cfg.classification.max_den, cfg.classification.tol);
  return c;
}

json classification_json(const Classification& c) {
  return {{"frequencies", to_json(c.freqs)},
          {"label", to_json(c.label)},
          {"horizon", c.horizon},
          {"periods_observed", c.periods_observed}};
}

// Seed period from the config or, failing that, from a classification run.
// Returns nullopt for quasi-periodic motion.
std::optional<double> seed_period(const SystemSpec& spec, const RunConfig& cfg, const PhaseState& s0,
                                  std::optional<ResonanceLabel>& label, std::ostream& log) {
  if (cfg.seed_period) return cfg.seed_period;
  const Classification c = run_classification(spec, cfg, s0, cfg.classification.horizon);
  log << "classified as " << to_string(c.label.kind);
  if (!c.label.periodic()) {
    log << '\n';
    return std::nullopt;
  }
  log << " (m = " << c.label.m << ", n = " << c.label.n << "), T = " << fmt17(c.label.period) << '\n';
  label = c.label;
  return c.label.period;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const Options& opt, std::ostream& log) {
  Context ctx = make_context(opt);
  const SystemSpec spec = ctx.cfg.make_system();
  const PhaseState s0 = initial_state(ctx.cfg);
  if (!ctx.cfg.t_end) throw ConfigError("no end time: set t_end or pass --t-end");
  const double t_end = *ctx.cfg.t_end;
  const double dt = ctx.cfg.output_dt.value_or(t_end / 1000.0);

  const Trajectory traj = integrate(spec, s0, t_end, ctx.cfg.integrator);
  {
    auto os = open_output(ctx.out / "trajectory.csv");
    write_trajectory_csv(os, spec, traj, dt);
  }
  const PowerIntegral work = integrate_power(spec, traj);
  const double H0 = energy(spec, traj.front());
  const double H1 = energy(spec, traj.back());
  const double balance = H1 - H0 - work.work;
  const double scale = std::abs(H0) + work.absolute;
  json summary{{"system", spec.name()},
               {"initial", to_json(traj.front())},
               {"final", to_json(traj.back())},
               {"t_end", t_end},
               {"output_dt", dt},
               {"steps", traj.stats().steps},
               {"rejected_steps", traj.stats().rejected},
               {"evaluations", traj.stats().evaluations},
               {"H_initial", H0},
               {"H_final", H1},
               {"work", work.work},
               {"work_absolute", work.absolute},
               {"energy_balance", balance},
               {"energy_balance_relative", scale > 0.0 ? std::abs(balance) / scale : 0.0}};
  write_json(ctx.out / "summary.json", summary);
  log << "simulated " << traj.stats().steps << " steps to t = " << fmt17(t_end)
      << ", energy balance " << fmt17(balance) << '\n';
  return kExitOk;
}

int cmd_classify(const Options& opt, std::ostream& log) {
  Context ctx = make_context(opt);
  const SystemSpec spec = ctx.cfg.make_system();
  const PhaseState s0 = initial_state(ctx.cfg);
  const double horizon = opt.t_end ? *opt.t_end : ctx.cfg.classification.horizon;
  const Classification c = run_classification(spec, ctx.cfg, s0, horizon);
  write_json(ctx.out / "classification.json", classification_json(c));
  log << "f1 = " << fmt17(c.freqs.f1) << ", f2 = " << fmt17(c.freqs.f2) << ": " << to_string(c.label.kind);
  if (c.label.periodic()) log << " m = " << c.label.m << ", n = " << c.label.n << ", T = " << fmt17(c.label.period);
  log << '\n';
  return kExitOk;
}

struct OrbitRun {
  std::optional<PeriodicOrbit> orbit;
  std::string failure;
};

OrbitRun find_orbit(const SystemSpec& spec, const RunConfig& cfg, const PhaseState& s0, std::ostream& log) {
  OrbitRun run;
  std::optional<ResonanceLabel> label;
  const auto T = seed_period(spec, cfg, s0, label, log);
  if (!T) {
    run.failure = "motion is quasi-periodic; no closed orbit to refine";
    return run;
  }
  try {
    run.orbit = refine_orbit(spec, s0, *T, cfg.integrator, cfg.orbit_tol);
    run.orbit->label = label;
  } catch (const OrbitNotFound& e) {
    run.failure = std::string(e.what()) + " (best closure " + fmt17(e.best_closure()) + ")";
  }
  return run;
}

int cmd_find_orbit(const Options& opt, std::ostream& log, std::ostream& err) {
  Context ctx = make_context(opt);
  const SystemSpec spec = ctx.cfg.make_system();
  const OrbitRun run = find_orbit(spec, ctx.cfg, initial_state(ctx.cfg), log);
  if (!run.orbit) {
    write_json(ctx.out / "orbit.json", {{"found", false}, {"reason", run.failure}});
    err << "no periodic orbit: " << run.failure << '\n';
    return kExitNoOrbit;
  }
  json j = to_json(*run.orbit);
  j["found"] = true;
  write_json(ctx.out / "orbit.json", j);
  write_curve_csv(ctx.out / "curve.csv", run.orbit->curve);
  log << "periodic orbit: T = " << fmt17(run.orbit->period) << ", closure " << fmt17(run.orbit->closure) << '\n';
  return kExitOk;
}

int cmd_verify(const Options& opt, std::ostream& log, std::ostream& err) {
  Context ctx = make_context(opt);
  const SystemSpec spec = ctx.cfg.make_system();
  const OrbitRun run = find_orbit(spec, ctx.cfg, initial_state(ctx.cfg), log);
  if (!run.orbit) {
    write_json(ctx.out / "report.json", {{"found", false}, {"reason", run.failure}});
    err << "no periodic orbit: " << run.failure << '\n';
    return kExitNoOrbit;
  }
  const InvariantReport rep = report(spec, *run.orbit, ctx.cfg.resolution, ctx.cfg.invariant_tol);
  json j{{"found", true}, {"orbit", to_json(*run.orbit)}, {"invariants", to_json(rep)}};
  write_json(ctx.out / "report.json", j);
  write_curve_csv(ctx.out / "curve.csv", run.orbit->curve);
  log << "I7 = " << fmt17(rep.I7) << ", I8 = " << fmt17(rep.I8) << ", I9 = " << fmt17(rep.I9) << '\n';
  if (!rep.holds) {
    err << "invariant violated: |I7|/N7 = " << fmt17(std::abs(rep.I7) / std::max(rep.N7, kNormalizerFloor))
        << ", |I8|/N8 = " << fmt17(std::abs(rep.I8) / std::max(rep.N8, kNormalizerFloor)) << " (tolerance "
        << fmt17(rep.tolerance) << ")\n";
    return kExitVerdictViolated;
  }
  log << "verdict: holds\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// scan

struct ScanRow {
  std::vector<double> axis_values;
  std::string status = "ok";
  std::string classification;
  std::optional<ResonanceLabel> label;
  std::optional<double> closure;
  std::optional<InvariantReport> rep;
  std::string verdict;
  std::string message;
};

ScanRow scan_cell(const RunConfig& cfg, const std::vector<double>& values) {
  ScanRow row;
  row.axis_values = values;
  try {
    ParameterMap overrides;
    PhaseState s0 = initial_state(cfg);
    for (std::size_t a = 0; a < cfg.scan.size(); ++a) {
      const ScanAxis& axis = cfg.scan[a];
      if (!axis.is_state()) {
        overrides[axis.name] = values[a];
        continue;
      }
      const char c = axis.name.back();
      (c == 'x' ? s0.x : c == 'y' ? s0.y : c == 'p' ? s0.p : s0.r) = values[a];
    }
    const SystemSpec spec = cfg.make_system(overrides);
    const Classification c = run_classification(spec, cfg, s0, cfg.classification.horizon);
    row.classification = to_string(c.label.kind);
    row.label = c.label;
    if (!c.label.periodic()) {
      row.verdict = "skipped";
      return row;
    }
    try {
      const PeriodicOrbit orbit = refine_orbit(spec, s0, c.label.period, cfg.integrator, cfg.orbit_tol);
      row.closure = orbit.closure;
      row.rep = report(spec, orbit, cfg.resolution, cfg.invariant_tol);
      row.verdict = row.rep->holds ? "holds" : "violated";
    } catch (const OrbitNotFound& e) {
      row.verdict = "no-orbit";
      row.message = e.what();
    }
  } catch (const std::exception& e) {
    row.status = "error";
    row.message = e.what();
  }
  std::replace(row.message.begin(), row.message.end(), ',', ';');
  std::replace(row.message.begin(), row.message.end(), '\n', ' ');
  return row;
}

int cmd_scan(const Options& opt, std::ostream& log) {
  Context ctx = make_context(opt);
  const RunConfig& cfg = ctx.cfg;
  initial_state(cfg);

  std::vector<std::vector<double>> cells{{}};
  for (const ScanAxis& axis : cfg.scan) {
    std::vector<std::vector<double>> next;
    for (const auto& prefix : cells) {
      for (std::size_t k = 0; k < axis.count; ++k) {
        auto v = prefix;
        v.push_back(axis.value(k));
        next.push_back(std::move(v));
      }
    }
    cells = std::move(next);
  }

  std::vector<ScanRow> rows(cells.size());
  const std::size_t workers = std::min(scan_workers(), cells.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < cells.size();) rows[k] = scan_cell(cfg, cells[k]);
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  auto os = open_output(ctx.out / "scan.csv");
  for (const ScanAxis& axis : cfg.scan) os << axis.name << ',';
  os << "status,classification,m,n,period,closure,I7,I8,I9,verdict,message\n";
  auto opt_num = [](const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); };
  std::size_t errors = 0;
  for (const ScanRow& row : rows) {
    for (double v : row.axis_values) os << fmt17(v) << ',';
    os << row.status << ',' << row.classification << ',';
    if (row.label && row.label->periodic()) {
      os << row.label->m << ',' << row.label->n << ',' << fmt17(row.label->period) << ',';
    } else {
      os << ",,,";
    }
    os << opt_num(row.closure) << ',';
    if (row.rep) {
      os << fmt17(row.rep->I7) << ',' << fmt17(row.rep->I8) << ',' << fmt17(row.rep->I9) << ',';
    } else {
      os << ",,,";
    }
    os << row.verdict << ',' << row.message << '\n';
    errors += row.status == "error";
  }
  log << "scanned " << rows.size() << " cells with " << workers << " worker(s), " << errors << " error(s)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_decompose(const Options& opt, std::ostream& log) {
  Context ctx = make_context(opt, false);
  if (!opt.field_path) throw ConfigError("--field is required for decompose");
  BoundaryMode mode;
  try {
    mode = boundary_mode_from_string(opt.mode);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::ifstream in(*opt.field_path);
  if (!in) throw ConfigError("cannot open field '" + *opt.field_path + "'");
  GridField field;
  try {
    field = read_grid_field_csv(in);
    field.validate();
  } catch (const std::invalid_argument& e) {
    throw GridFormatError(e.what());
  }
  const DecompositionResult res = decompose(field, mode);
  {
    auto os = open_output(ctx.out / "U.csv");
    write_grid_scalar_csv(os, res.potential, "U");
  }
  {
    auto os = open_output(ctx.out / "psi.csv");
    write_grid_scalar_csv(os, res.stream, "psi");
  }
  write_json(ctx.out / "decomposition.json", {{"mode", to_string(mode)},
                                              {"geometry", to_json(field.geom)},
                                              {"residual", res.residual},
                                              {"warnings", res.warnings}});
  log << "decomposed " << field.geom.nx << "x" << field.geom.ny << " field, residual " << fmt17(res.residual) << '\n';
  for (const auto& w : res.warnings) log << "warning: " << w << '\n';
  return kExitOk;
}

int cmd_demo(const Options& opt, std::ostream& log, std::ostream& err) {
  const fs::path out = opt.out_dir.value_or("demo");
  std::error_code ec;
  fs::create_directories(out / "configs", ec);
  if (ec) throw ConfigError("cannot create '" + (out / "configs").string() + "'");
  const std::pair<const char*, RunConfig> configs[] = {{"harmonic", demo_harmonic()},
                                                        {"resonant_1_2", demo_resonant()},
                                                        {"quasi_periodic", demo_quasi_periodic()},
                                                        {"scan_gamma", demo_scan()}};
  for (const auto& [name, cfg] : configs) {
    RunConfig c = cfg;
    c.output_dir = fs::absolute(out / name).lexically_normal().string();
    write_json(out / "configs" / (std::string(name) + ".json"), to_json(c));
  }
  log << "wrote demo configs to " << (out / "configs").string() << '\n';
  Options verify;
  verify.config_path = (out / "configs" / "resonant_1_2.json").string();
  log << "verify resonant_1_2:\n";
  return run_command("verify", verify, log, err);
}

}  // namespace

std::size_t scan_workers() {
  if (const char* env = std::getenv("ORBITINV_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1) throw ConfigError("ORBITINV_WORKERS must be a positive integer");
    return static_cast<std::size_t>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

RunConfig demo_harmonic() {
  RunConfig c;
  c.system = {"harmonic", "(x^2+y^2)/2", "0", {}};
  c.initial_state = PhaseState{1.0, 0.0, 0.0, 1.0, 0.0};
  c.t_end = 2.0 * std::numbers::pi;
  c.output_dt = std::numbers::pi / 100.0;
  return c;
}

RunConfig demo_resonant() {
  RunConfig c;
  c.system = {"resonant-1-2", "(2*x^2+3*y^2)/2", "x*y", {}};
  c.initial_state = PhaseState{1.0, 0.0, 0.0, 1.0, 0.0};
  c.t_end = 2.0 * std::numbers::pi;
  c.output_dt = std::numbers::pi / 100.0;
  c.classification.tol = 1e-3;
  return c;
}

RunConfig demo_quasi_periodic() {
  RunConfig c;
  c.system = {"sqrt3", "x^2+y^2", "x*y", {}};
  c.initial_state = PhaseState{1.0, 0.0, 0.0, 1.0, 0.0};
  c.t_end = 20.0;
  c.seed_period = 2.0 * std::numbers::pi;
  return c;
}

RunConfig demo_scan() {
  RunConfig c;
  c.system = {"gamma-scan", "(a*x^2+b*y^2)/2", "g*x*y", {{"a", 2.0}, {"b", 3.0}, {"g", 1.0}}};
  c.initial_state = PhaseState{1.0, 0.0, 0.0, 1.0, 0.0};
  c.classification.tol = 1e-3;
  c.scan = {{"g", 0.5, 1.5, 11}};
  return c;
}

int run_command(const std::string& name, const Options& opt, std::ostream& log, std::ostream& err) {
  try {
    if (name == "simulate") return cmd_simulate(opt, log);
    if (name == "classify") return cmd_classify(opt, log);
    if (name == "find-orbit") return cmd_find_orbit(opt, log, err);
    if (name == "verify") return cmd_verify(opt, log, err);
    if (name == "scan") return cmd_scan(opt, log);
    if (name == "decompose") return cmd_decompose(opt, log);
    if (name == "demo") return cmd_demo(opt, log, err);
    err << "unknown command '" << name << "'\n";
    return kExitConfigError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const GridFormatError& e) {
    err << "malformed grid: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const IntegrationError& e) {
    err << "integration failed: " << e.what() << '\n';
    return kExitIntegrationFailure;
  } catch (const DomainErrorException& e) {
    err << "integration failed: " << e.what() << '\n';
    return kExitIntegrationFailure;
  } catch (const PoissonNotConverged& e) {
    err << "decomposition failed: " << e.what() << '\n';
    return kExitIntegrationFailure;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIntegrationFailure;
  }
}

}  // namespace orbitinv::cli
