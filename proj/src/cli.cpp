#include "varkg/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "varkg/evolution.hpp"
#include "varkg/ground_state.hpp"
#include "varkg/model.hpp"
#include "varkg/paths.hpp"
#include "varkg/radial_grid.hpp"

namespace varkg::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

// ---- config ---------------------------------------------------------------

template <typename T>
void read_key(const json& j, const char* key, T& into) {
  if (!j.contains(key)) return;
  try {
    into = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("config key '") + key + "': " + e.what());
  }
}

void check_config(const ExperimentConfig& c) {
  auto positive = [](double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x))
      throw Error(ErrorCode::InvalidInput, std::string(what) + " must be positive");
  };
  positive(c.tol_rel, "tol_rel");
  positive(c.tol_path, "tol_path");
  positive(c.cfl, "cfl");
  positive(c.t_max, "t_max");
  positive(c.elliptic_R, "elliptic_R");
  positive(c.evolution_R, "evolution_R");
  if (c.kappa < 0.0) throw Error(ErrorCode::InvalidInput, "kappa must be nonnegative");
  if (!(c.blowup_factor > 1.0)) throw Error(ErrorCode::InvalidInput, "blowup_factor must exceed 1");
  if (c.trials < 1) throw Error(ErrorCode::InvalidInput, "trials must be at least 1");
  if (c.diag_stride < 1) throw Error(ErrorCode::InvalidInput, "diag_stride must be at least 1");
  if (c.exponents.empty()) throw Error(ErrorCode::InvalidInput, "exponent list is empty");
}

// ---- output helpers -------------------------------------------------------

std::string cell(double x) { return std::isfinite(x) ? format_number(x) : std::string(); }

class CsvWriter {
 public:
  CsvWriter(const fs::path& file, const std::vector<std::string>& header) : out_(file, std::ios::binary) {
    if (!out_) throw Error(ErrorCode::InvalidInput, "cannot write " + file.string());
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

void write_json(const fs::path& file, const json& j) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + file.string());
  out << j.dump(2) << '\n';
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---- shared setup ---------------------------------------------------------

struct Context {
  ExperimentConfig config;
  std::string command;
  fs::path outdir;
  std::ostream& out;
  std::ostream& err;
};

Nonlinearity make_nonlinearity(const ExperimentConfig& c) {
  if (c.nonlinearity == "power") return Nonlinearity::power(c.p, c.omega);
  return Nonlinearity::registered(c.nonlinearity);
}

GridFunction load_profile(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot read profile " + file);
  return read_grid_function_csv(in);
}

GroundState make_ground_state(const ExperimentConfig& c, const std::string& from = {}) {
  if (!from.empty()) return ground_state_from_profile(load_profile(from), make_nonlinearity(c));
  if (c.nonlinearity != "power")
    throw Error(ErrorCode::InvalidParameter, "a non-power nonlinearity needs a ground-state profile file");
  auto grid = RadialGrid::make(c.dimension, c.elliptic_R, c.elliptic_M);
  if (c.dimension == 1) return closed_form_1d(c.p, c.omega, std::move(grid));
  return shoot_radial(c.p, c.omega, std::move(grid));
}

json exponents_json(const ScalingExponents& se) {
  return {{"alpha", se.alpha}, {"beta", se.beta}, {"region", std::string(to_string(se.region))}};
}

int emit(Context& ctx, json report, bool pass) {
  report["pass"] = pass;
  write_json(ctx.outdir / (ctx.command + ".json"), report);
  ctx.out << report.dump(2) << '\n';
  return pass ? 0 : 1;
}

// ---- subcommands ----------------------------------------------------------

int cmd_selftest(Context& ctx) {
  auto gs = closed_form_1d(3.0, 0.0, RadialGrid::make(1, 20.0, 40000));
  const auto& phi = gs.profile;
  const auto& nl = gs.nonlinearity;
  struct Check {
    const char* name;
    double value, expected;
  };
  const Check checks[] = {
      {"S", action_S(phi, nl), 4.0 / 3.0},
      {"T", kinetic_T(phi), 2.0 / 3.0},
      {"P", pohozaev_P(phi, nl), -2.0 / 3.0},
      {"K_1_0", constraint_K(phi, nl, classify_exponents(1.0, 0.0, 3.0, 1)), 0.0},
      {"pohozaev_residual", pohozaev_residual(phi, nl), 0.0},
  };
  json report;
  bool pass = true;
  for (const auto& c : checks) {
    const bool ok = std::abs(c.value - c.expected) <= 1e-4;
    pass = pass && ok;
    report[c.name] = {{"value", c.value}, {"expected", c.expected}, {"ok", ok}};
    ctx.err << (ok ? "ok   " : "FAIL ") << c.name << " = " << format_number(c.value) << '\n';
  }
  std::ostringstream m;
  m << std::fixed << std::setprecision(6) << least_energy(gs);
  ctx.out << "m = " << m.str() << '\n';
  report["m"] = least_energy(gs);
  report["pass"] = pass;
  write_json(ctx.outdir / "selftest.json", report);
  return pass ? 0 : 1;
}

int cmd_ground_state(Context& ctx) {
  const auto& c = ctx.config;
  auto gs = make_ground_state(c, c.profile);
  {
    std::ofstream csv(ctx.outdir / "ground_state.csv", std::ios::binary);
    write_csv(csv, gs.profile);
  }
  const auto check = check_stationary(gs.profile, gs.nonlinearity);
  json report{{"p", c.p},
              {"omega", c.omega},
              {"N", c.dimension},
              {"phi0", gs.center_value},
              {"m", gs.level},
              {"nehari_residual", check.nehari},
              {"pohozaev_residual", check.pohozaev},
              {"ode_residual", check.ode_residual}};
  return emit(ctx, report, check.ok());
}

int cmd_functionals(Context& ctx) {
  const auto& c = ctx.config;
  const auto nl = make_nonlinearity(c);
  const GridFunction v = c.profile.empty() ? make_ground_state(c).profile : load_profile(c.profile);
  json report{{"N", v.grid().dimension()},
              {"l2_norm_sq", l2_norm_sq(v)},
              {"grad_norm_sq", grad_norm_sq(v)},
              {"S", action_S(v, nl)},
              {"T", kinetic_T(v)},
              {"P", pohozaev_P(v, nl)},
              {"E_at_rest", energy_E(v, GridFunction::zeros(v.grid_ptr()), nl)},
              {"nehari_residual", nehari_residual(v, nl)},
              {"pohozaev_residual", pohozaev_residual(v, nl)}};
  if (nl.is_power()) {
    json ks = json::array();
    for (const auto& [a, b] : c.exponents) {
      const auto se = classify_exponents(a, b, c.p, v.grid().dimension());
      auto k = exponents_json(se);
      k["K"] = constraint_K(v, nl, se);
      ks.push_back(k);
    }
    report["constraints"] = ks;
  }
  return emit(ctx, report, true);
}

int cmd_path(Context& ctx) {
  const auto& c = ctx.config;
  auto gs = make_ground_state(c);
  const auto& nl = gs.nonlinearity;
  const double m = gs.level;
  const auto [alpha, beta] = c.exponents.front();
  const auto se = classify_exponents(alpha, beta, c.p, c.dimension);
  if (se.region == Region::Invalid) throw Error(ErrorCode::WrongRegion, "exponents lie outside both regions");
  const GridFunction v = c.profile.empty() ? gs.profile : load_profile(c.profile);
  const auto on = place_on_constraint(v, nl, se);
  const auto path = se.region == Region::Interior ? build_path_interior(on.function, nl, se)
                                                  : build_path_limit(on.function, nl, se);
  CsvWriter csv(ctx.outdir / "path.csv", {"t", "S"});
  for (std::size_t j = 0; j < path.t.size(); ++j) csv.row({cell(path.t[j]), cell(path.action[j])});
  auto report = exponents_json(se);
  report["max_S"] = path.max_action();
  report["m_ref"] = m;
  report["samples"] = path.t.size();
  report["starts_at_zero"] = path.starts_at_zero;
  report["ends_negative"] = path.ends_negative;
  const bool pass = path.starts_at_zero && path.ends_negative && path.max_action() >= m * (1.0 - c.tol_path);
  return emit(ctx, report, pass);
}

void write_members(const fs::path& file, const std::vector<std::pair<ScalingExponents, ConstraintReport>>& reps,
                   const char* value_name) {
  CsvWriter csv(file, {"alpha", "beta", "member", "route", value_name, "argmax_offset"});
  for (const auto& [se, rep] : reps)
    for (std::size_t i = 0; i < rep.values.size(); ++i)
      csv.row({cell(se.alpha), cell(se.beta), std::to_string(i), std::string(to_string(rep.routes[i])),
               cell(rep.values[i]), std::to_string(rep.argmax_offset[i])});
}

json constraint_json(const ScalingExponents& se, const ConstraintReport& rep) {
  auto j = exponents_json(se);
  j["min_S"] = rep.min_value;
  j["m_ref"] = rep.reference;
  j["argmin"] = rep.argmin;
  j["tolerance"] = rep.tolerance;
  return j;
}

int finish_pairs(Context& ctx, std::vector<json> results, bool pass) {
  if (results.size() == 1) return emit(ctx, results.front(), pass);
  return emit(ctx, json{{"results", results}}, pass);
}

int cmd_theorem1(Context& ctx) {
  const auto& c = ctx.config;
  auto gs = make_ground_state(c);
  const auto trials = default_trial_family(gs, static_cast<std::size_t>(c.trials), c.seed);
  std::vector<std::pair<ScalingExponents, ConstraintReport>> reps;
  std::vector<json> results;
  bool pass = true;
  for (const auto& [a, b] : c.exponents) {
    const auto se = classify_exponents(a, b, c.p, c.dimension);
    if (se.region != Region::Interior)
      throw Error(ErrorCode::WrongRegion, "(" + format_number(a) + ", " + format_number(b) + ") is not Interior");
    auto rep = verify_min_on_constraint(trials, gs.nonlinearity, se, gs.level, c.tol_rel * gs.level, 0);
    const int worst = *std::max_element(rep.argmax_offset.begin(), rep.argmax_offset.end());
    const bool ok = rep.pass() && worst <= 1;
    auto j = constraint_json(se, rep);
    j["max_argmax_offset"] = worst;
    j["pass"] = ok;
    pass = pass && ok;
    results.push_back(j);
    reps.emplace_back(se, std::move(rep));
  }
  write_members(ctx.outdir / "theorem1_members.csv", reps, "S");
  return finish_pairs(ctx, results, pass);
}

int cmd_theorem2(Context& ctx) {
  const auto& c = ctx.config;
  auto gs = make_ground_state(c);
  const auto trials = default_trial_family(gs, static_cast<std::size_t>(c.trials), c.seed);
  std::vector<std::pair<ScalingExponents, ConstraintReport>> reps;
  std::vector<json> results;
  bool pass = true;
  for (const auto& [a, b] : c.exponents) {
    const auto se = classify_exponents(a, b, c.p, c.dimension);
    if (se.region != Region::Limit)
      throw Error(ErrorCode::WrongRegion, "(" + format_number(a) + ", " + format_number(b) + ") is not Limit");
    const auto start = place_on_constraint(gs.profile, gs.nonlinearity, se);
    const auto path = build_path_limit(start.function, gs.nonlinearity, se);
    auto rep = verify_min_on_constraint(trials, gs.nonlinearity, se, gs.level, c.tol_rel * gs.level, 0);
    const bool path_ok = std::abs(path.max_action() - gs.level) <= c.tol_path * gs.level;
    auto j = constraint_json(se, rep);
    j["path_max"] = path.max_action();
    j["pass"] = rep.pass() && path_ok;
    pass = pass && rep.pass() && path_ok;
    results.push_back(j);
    reps.emplace_back(se, std::move(rep));
  }
  write_members(ctx.outdir / "theorem2_members.csv", reps, "S");
  return finish_pairs(ctx, results, pass);
}

int cmd_lemma_min_t(Context& ctx) {
  const auto& c = ctx.config;
  if (c.dimension != 2) throw Error(ErrorCode::Unsupported, "the kinetic minimization runs in N = 2");
  auto gs = make_ground_state(c, c.profile);
  std::vector<GridFunction> trials;
  for (int k = 0; k <= 10; ++k) trials.push_back(gs.profile.scaled(1.0 + 0.1 * k));
  auto family = default_trial_family(gs, static_cast<std::size_t>(c.trials), c.seed);
  for (std::size_t i = 1; i < family.size(); ++i) trials.push_back(std::move(family[i]));
  const auto rep = verify_T_min_over_P(trials, gs.nonlinearity, gs.level, c.tol_rel * gs.level, 0);
  write_members(ctx.outdir / "lemma_minT_members.csv", {{ScalingExponents{1.0, 1.0, Region::Limit}, rep}}, "T");
  json report{{"min_T", rep.min_value}, {"m_ref", rep.reference}, {"argmin", rep.argmin},
              {"tolerance", rep.tolerance}};
  return emit(ctx, report, rep.pass());
}

struct RunSummary {
  InitialData data;
  Trajectory traj;
};

RunSummary run_evolution(const ExperimentConfig& c, const GroundState& gs, double lambda, double mu) {
  auto grid = RadialGrid::make(2, c.evolution_R, c.evolution_M);
  auto data = make_initial_data(gs, lambda, mu, grid);
  EvolveOptions opt;
  opt.cfl = c.cfl;
  opt.diag_stride = c.diag_stride;
  opt.level = data.level;
  opt.kappa = c.kappa;
  auto traj = evolve(data.u, GridFunction::zeros(grid), evolution_nonlinearity(gs.nonlinearity), c.t_max,
                     c.blowup_factor, opt);
  return {std::move(data), std::move(traj)};
}

int cmd_evolve(Context& ctx) {
  const auto& c = ctx.config;
  if (c.dimension != 2) throw Error(ErrorCode::Unsupported, "evolution runs in N = 2");
  auto gs = make_ground_state(c, c.profile);
  const auto run = run_evolution(c, gs, c.lambda, c.mu);
  const auto& traj = run.traj;
  CsvWriter csv(ctx.outdir / "trajectory.csv", {"t", "E", "S", "P", "T", "H1", "in_I"});
  for (const auto& r : traj.records)
    csv.row({cell(r.t), cell(r.E), cell(r.S), cell(r.P), cell(r.T), cell(r.h1), r.in_I ? "1" : "0"});
  json report{{"lambda", c.lambda},
              {"mu", c.mu},
              {"termination", std::string(to_string(traj.termination))},
              {"t_end", traj.end_time},
              {"m", run.data.level},
              {"S0", run.data.S},
              {"P0", run.data.P},
              {"E0", run.data.E},
              {"in_I_initial", run.data.in_I},
              {"records", traj.records.size()}};
  bool pass = true;
  if (traj.records.size() >= 2) report["energy_drift"] = energy_drift(traj);
  if (run.data.in_I) {
    const auto mon = invariant_monitor(traj);
    report["in_I_throughout"] = mon.in_I_throughout;
    report["min_P"] = mon.min_P;
    report["delta_obs"] = mon.delta_obs;
    pass = mon.in_I_throughout;
  }
  return emit(ctx, report, pass);
}

int cmd_sweep(Context& ctx) {
  const auto& c = ctx.config;
  if (c.dimension != 2) throw Error(ErrorCode::Unsupported, "evolution runs in N = 2");
  auto gs = make_ground_state(c, c.profile);
  struct Job {
    double lambda, mu;
    std::vector<std::string> row;
  };
  std::vector<Job> jobs;
  for (double l : c.lambda_grid)
    for (double m : c.mu_grid) jobs.push_back({l, m, {}});
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      auto& job = jobs[i];
      std::string in_I, termination, escape;
      try {
        const auto run = run_evolution(c, gs, job.lambda, job.mu);
        in_I = run.data.in_I ? "1" : "0";
        termination = to_string(run.traj.termination);
        if (run.traj.termination == Termination::BlowupDetected) escape = cell(run.traj.end_time);
      } catch (const Error& e) {
        termination = to_string(e.code());
      }
      job.row = {cell(job.lambda), cell(job.mu), in_I, termination, escape};
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n = std::min<std::size_t>(jobs.size(), c.threads > 0 ? c.threads : hw);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  CsvWriter csv(ctx.outdir / "instability_sweep.csv", {"lambda", "mu", "in_I_initial", "termination", "t_escape"});
  json rows = json::array();
  for (const auto& job : jobs) {
    csv.row(job.row);
    rows.push_back({{"lambda", job.lambda}, {"mu", job.mu}, {"in_I_initial", job.row[2] == "1"},
                    {"termination", job.row[3]}});
  }
  return emit(ctx, json{{"runs", rows}}, true);
}

bool usage_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput:
    case ErrorCode::InvalidParameter:
    case ErrorCode::InvalidMass:
    case ErrorCode::Unsupported:
    case ErrorCode::WrongRegion:
    case ErrorCode::GridMismatch:
    case ErrorCode::TruncationOverflow:
      return true;
    default:
      return false;
  }
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  json exps = json::array();
  for (const auto& [a, b] : c.exponents) exps.push_back({a, b});
  const json nonlinearity = c.nonlinearity == "power"
                                ? json{{"kind", "power"}, {"p", c.p}, {"omega", c.omega}}
                                : json{{"kind", "general"}, {"name", c.nonlinearity}};
  return {{"dimension", c.dimension},       {"nonlinearity", nonlinearity},
          {"elliptic_R", c.elliptic_R},     {"elliptic_M", c.elliptic_M},
          {"evolution_R", c.evolution_R},   {"evolution_M", c.evolution_M},
          {"exponents", exps},              {"lambda", c.lambda},
          {"mu", c.mu},                     {"t_max", c.t_max},
          {"cfl", c.cfl},                   {"blowup_factor", c.blowup_factor},
          {"diag_stride", c.diag_stride},   {"kappa", c.kappa},
          {"lambda_grid", c.lambda_grid},   {"mu_grid", c.mu_grid},
          {"threads", c.threads},           {"tol_rel", c.tol_rel},
          {"tol_path", c.tol_path},         {"trials", c.trials},
          {"seed", c.seed},                 {"outdir", c.outdir},
          {"profile", c.profile}};
}

ExperimentConfig from_json(const json& j, ExperimentConfig c) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidInput, "config must be a JSON object");
  const json known = to_json(c);
  for (const auto& [key, _] : j.items())
    if (!known.contains(key)) throw Error(ErrorCode::InvalidInput, "unknown config key '" + key + "'");
  read_key(j, "dimension", c.dimension);
  if (j.contains("nonlinearity")) {
    const json& nl = j.at("nonlinearity");
    std::string kind;
    if (!nl.is_object()) throw Error(ErrorCode::InvalidInput, "nonlinearity must be an object with a 'kind'");
    read_key(nl, "kind", kind);
    if (kind == "power") {
      c.nonlinearity = "power";
      read_key(nl, "p", c.p);
      read_key(nl, "omega", c.omega);
    } else if (kind == "general") {
      read_key(nl, "name", c.nonlinearity);
      if (c.nonlinearity.empty() || c.nonlinearity == "power")
        throw Error(ErrorCode::InvalidInput, "general nonlinearity needs a registered name");
    } else {
      throw Error(ErrorCode::InvalidInput, "nonlinearity kind must be 'power' or 'general'");
    }
  }
  read_key(j, "elliptic_R", c.elliptic_R);
  read_key(j, "elliptic_M", c.elliptic_M);
  read_key(j, "evolution_R", c.evolution_R);
  read_key(j, "evolution_M", c.evolution_M);
  if (j.contains("exponents")) {
    std::vector<std::vector<double>> exps;
    read_key(j, "exponents", exps);
    c.exponents.clear();
    for (const auto& e : exps) {
      if (e.size() != 2) throw Error(ErrorCode::InvalidInput, "exponents are [alpha, beta] pairs");
      c.exponents.emplace_back(e[0], e[1]);
    }
  }
  read_key(j, "lambda", c.lambda);
  read_key(j, "mu", c.mu);
  read_key(j, "t_max", c.t_max);
  read_key(j, "cfl", c.cfl);
  read_key(j, "blowup_factor", c.blowup_factor);
  read_key(j, "diag_stride", c.diag_stride);
  read_key(j, "kappa", c.kappa);
  read_key(j, "lambda_grid", c.lambda_grid);
  read_key(j, "mu_grid", c.mu_grid);
  read_key(j, "threads", c.threads);
  read_key(j, "tol_rel", c.tol_rel);
  read_key(j, "tol_path", c.tol_path);
  read_key(j, "trials", c.trials);
  read_key(j, "seed", c.seed);
  read_key(j, "outdir", c.outdir);
  read_key(j, "profile", c.profile);
  check_config(c);
  return c;
}

std::string config_hash(const ExperimentConfig& c) {
  auto doc = to_json(c);
  doc.erase("outdir");  // where results land does not change them
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : doc.dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variational ground states and instability for nonlinear Klein-Gordon equations", "varkg"};
  app.require_subcommand(1);

  struct Flags {
    std::string config_file, nonlinearity, outdir, from;
    int N = 0, M = 0, evo_M = 0, diag_stride = 0, trials = 0, threads = 0;
    double p = 0, omega = 0, R = 0, evo_R = 0, alpha = 0, beta = 0, lambda = 0, mu = 0, tmax = 0, cfl = 0,
           blowup = 0, tol = 0, kappa = 0;
    std::uint64_t seed = 0;
    std::vector<double> lambda_grid, mu_grid;
  } f;
  std::vector<std::pair<std::string, CLI::Option*>> given;

  const std::pair<const char*, const char*> commands[] = {
      {"ground-state", "compute the ground state and write its profile"},
      {"functionals", "evaluate S, T, P, K and the identity residuals"},
      {"path", "build a mountain-pass path along a rescaling family"},
      {"verify-theorem1", "minimality of the ground state on Interior constraints"},
      {"verify-theorem2", "limit-case constraints and glued paths"},
      {"verify-lemma-minT", "m = min T over P >= 0 in the plane"},
      {"evolve", "evolve perturbed ground-state data"},
      {"instability-sweep", "evolve a grid of (lambda, mu) perturbations"},
      {"selftest", "closed-form one-dimensional checks"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    auto opt = [&](const std::string& flag, auto& into, const std::string& desc) {
      given.emplace_back(flag, sub->add_option(flag, into, desc));
    };
    opt("--config", f.config_file, "JSON config file; flags override its keys");
    opt("--N", f.N, "spatial dimension");
    opt("--p", f.p, "power exponent");
    opt("--omega", f.omega, "frequency");
    opt("--nonlinearity", f.nonlinearity, "'power' or a registered name");
    opt("--R", f.R, "elliptic outer radius");
    opt("--M", f.M, "elliptic grid intervals");
    opt("--evo-R", f.evo_R, "evolution outer radius");
    opt("--evo-M", f.evo_M, "evolution grid intervals");
    opt("--alpha", f.alpha, "scaling exponent alpha");
    opt("--beta", f.beta, "scaling exponent beta");
    opt("--lambda", f.lambda, "amplitude factor of the initial data");
    opt("--mu", f.mu, "dilation factor of the initial data");
    opt("--tmax", f.tmax, "final time");
    opt("--cfl", f.cfl, "dt / h");
    opt("--kappa", f.kappa, "step bound against the nonlinear rate");
    opt("--blowup-factor", f.blowup, "H1 escape factor");
    opt("--diag-stride", f.diag_stride, "steps between diagnostic records");
    opt("--tol", f.tol, "relative tolerance of the theorem checks");
    opt("--trials", f.trials, "trial family size");
    opt("--seed", f.seed, "seed of the trial perturbations");
    opt("--outdir", f.outdir, "output directory");
    opt("--from", f.from, "input profile CSV");
    opt("--threads", f.threads, "sweep worker threads");
    given.emplace_back("--lambda-grid", sub->add_option("--lambda-grid", f.lambda_grid, "sweep amplitudes")->delimiter(','));
    given.emplace_back("--mu-grid", sub->add_option("--mu-grid", f.mu_grid, "sweep dilations")->delimiter(','));
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "varkg: " << e.what() << '\n' << "run 'varkg --help' for usage\n";
    return 2;
  }
  const auto subs = app.get_subcommands();
  const std::string command = subs.front()->get_name();
  auto is_set = [&](const std::string& flag) {
    for (const auto& [name, option] : given)
      if (name == flag && option->count() > 0) return true;
    return false;
  };

  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig config;
  try {
    if (is_set("--config")) {
      std::ifstream in(f.config_file);
      if (!in) throw Error(ErrorCode::InvalidInput, "cannot read config " + f.config_file);
      json j;
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidInput, std::string("malformed config: ") + e.what());
      }
      config = from_json(j);
    }
    if (const char* env = std::getenv("VARKG_OUTDIR"); env && *env) config.outdir = env;
    if (is_set("--N")) config.dimension = f.N;
    if (is_set("--p")) config.p = f.p;
    if (is_set("--omega")) config.omega = f.omega;
    if (is_set("--nonlinearity")) config.nonlinearity = f.nonlinearity;
    if (is_set("--R")) config.elliptic_R = f.R;
    if (is_set("--M")) config.elliptic_M = f.M;
    if (is_set("--evo-R")) config.evolution_R = f.evo_R;
    if (is_set("--evo-M")) config.evolution_M = f.evo_M;
    if (is_set("--alpha") || is_set("--beta")) {
      const auto first = config.exponents.front();
      config.exponents = {{is_set("--alpha") ? f.alpha : first.first, is_set("--beta") ? f.beta : first.second}};
    }
    if (is_set("--lambda")) config.lambda = f.lambda;
    if (is_set("--mu")) config.mu = f.mu;
    if (is_set("--tmax")) config.t_max = f.tmax;
    if (is_set("--cfl")) config.cfl = f.cfl;
    if (is_set("--kappa")) config.kappa = f.kappa;
    if (is_set("--blowup-factor")) config.blowup_factor = f.blowup;
    if (is_set("--diag-stride")) config.diag_stride = f.diag_stride;
    if (is_set("--tol")) config.tol_rel = f.tol;
    if (is_set("--trials")) config.trials = f.trials;
    if (is_set("--seed")) config.seed = f.seed;
    if (is_set("--outdir")) config.outdir = f.outdir;
    if (is_set("--from")) config.profile = f.from;
    if (is_set("--threads")) config.threads = f.threads;
    if (is_set("--lambda-grid")) config.lambda_grid = f.lambda_grid;
    if (is_set("--mu-grid")) config.mu_grid = f.mu_grid;
    check_config(config);

    Context ctx{config, command, fs::path(config.outdir), out, err};
    fs::create_directories(ctx.outdir);
    int status = 0;
    if (command == "selftest") status = cmd_selftest(ctx);
    else if (command == "ground-state") status = cmd_ground_state(ctx);
    else if (command == "functionals") status = cmd_functionals(ctx);
    else if (command == "path") status = cmd_path(ctx);
    else if (command == "verify-theorem1") status = cmd_theorem1(ctx);
    else if (command == "verify-theorem2") status = cmd_theorem2(ctx);
    else if (command == "verify-lemma-minT") status = cmd_lemma_min_t(ctx);
    else if (command == "evolve") status = cmd_evolve(ctx);
    else status = cmd_sweep(ctx);

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json versions{{"varkg", kVersion},
                  {"compiler", __VERSION__},
                  {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                        std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                        std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                  {"cli11", CLI11_VERSION}};
    write_json(ctx.outdir / "manifest.json", {{"subcommand", command},
                                             {"config_hash", config_hash(config)},
                                             {"config", to_json(config)},
                                             {"versions", versions},
                                             {"seed", config.seed},
                                             {"exit_status", status},
                                             {"wall_time", wall},
                                             {"timestamp", utc_timestamp()}});
    return status;
  } catch (const Error& e) {
    err << "varkg " << command << ": " << e.what() << '\n';
    return usage_error(e.code()) ? 2 : 1;
  } catch (const fs::filesystem_error& e) {
    err << "varkg " << command << ": " << e.what() << '\n';
    return 2;
  }
}

}  // namespace varkg::cli
