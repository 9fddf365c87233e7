#include "varkg/evolution.hpp"

#include <algorithm>
#include <cmath>

namespace varkg {

namespace {

struct Fields {
  std::vector<double> u, v, acc;
};

bool all_finite(const std::vector<double>& x) {
  return std::all_of(x.begin(), x.end(), [](double s) { return std::isfinite(s); });
}

void acceleration(const RadialGrid& grid, const Nonlinearity& nl, const std::vector<double>& u,
                  std::vector<double>& acc) {
  apply_laplacian(grid, u, acc);
  for (std::size_t i = 0; i + 1 < u.size(); ++i) acc[i] += nl.g(u[i]);
}

// Kick-drift-kick; acc holds Δu + g(u) for the incoming u and is refreshed.
void leapfrog(const RadialGrid& grid, const Nonlinearity& nl, double dt, Fields& f) {
  const std::size_t last = f.u.size() - 1;
  for (std::size_t i = 0; i < last; ++i) {
    f.v[i] += 0.5 * dt * f.acc[i];
    f.u[i] += dt * f.v[i];
  }
  acceleration(grid, nl, f.u, f.acc);
  for (std::size_t i = 0; i < last; ++i) f.v[i] += 0.5 * dt * f.acc[i];
}

double weighted_sq(const RadialGrid& grid, const std::vector<double>& x, std::size_t from = 0) {
  const auto w = grid.weights();
  double sum = 0.0;
  for (std::size_t i = from; i < x.size(); ++i) sum += w[i] * x[i] * x[i];
  return sum;
}

double edge_sq(const RadialGrid& grid, const std::vector<double>& x, std::size_t from = 0) {
  const auto a = grid.edge_weights();
  double sum = 0.0;
  for (std::size_t i = from; i + 1 < x.size(); ++i) {
    const double d = x[i + 1] - x[i];
    sum += a[i] * d * d;
  }
  return sum / (grid.spacing() * grid.spacing());
}

double h1_sq(const RadialGrid& grid, const std::vector<double>& u) {
  return weighted_sq(grid, u) + edge_sq(grid, u);
}

DiagnosticRecord diagnose(const RadialGrid& grid, const Nonlinearity& nl, const Fields& f, double t,
                          double level) {
  const auto w = grid.weights();
  double P = 0.0;
  for (std::size_t i = 0; i < f.u.size(); ++i) P += w[i] * nl.G(f.u[i]);
  DiagnosticRecord rec;
  rec.t = t;
  rec.T = 0.5 * edge_sq(grid, f.u);
  rec.P = P;
  rec.S = rec.T - P;
  rec.E = 0.5 * weighted_sq(grid, f.v) + rec.S;
  rec.h1 = std::sqrt(h1_sq(grid, f.u));
  rec.in_I = rec.E < level && rec.P > 0.0;
  return rec;
}

// Largest secant slope of the nonlinear part of g, i.e. |g(u)/u + rho|; its
// square root bounds the rate at which the focusing term acts.
double stiffness(const Nonlinearity& nl, const std::vector<double>& u) {
  const double rho = nl.linear_coefficient();
  double k = 0.0;
  for (double x : u)
    if (x != 0.0) k = std::max(k, std::abs(nl.g(x) / x + rho));
  return k;
}

bool record_finite(const DiagnosticRecord& r) {
  return std::isfinite(r.E) && std::isfinite(r.S) && std::isfinite(r.P) && std::isfinite(r.T) &&
         std::isfinite(r.h1);
}

}  // namespace

std::string_view to_string(Termination reason) {
  switch (reason) {
    case Termination::ReachedTmax: return "ReachedTmax";
    case Termination::BlowupDetected: return "BlowupDetected";
    case Termination::NonFinite: return "NonFinite";
    case Termination::BoundaryContamination: return "BoundaryContamination";
  }
  return "NonFinite";
}

Nonlinearity evolution_nonlinearity(const Nonlinearity& nl) {
  return nl.is_power() ? Nonlinearity::power(nl.power_law().p, 0.0) : nl;
}

InitialData make_initial_data(const GroundState& gs, double lambda, double mu, GridPtr grid) {
  if (!(lambda > 0.0) || !(mu > 0.0)) throw Error(ErrorCode::InvalidParameter, "lambda and mu must be positive");
  if (grid->dimension() != 2) throw Error(ErrorCode::Unsupported, "initial data are built for N = 2");
  if (gs.profile.grid().dimension() != 2) throw Error(ErrorCode::GridMismatch, "profile is not two-dimensional");
  if (mu * support_radius(gs.profile) > grid->radius())
    throw Error(ErrorCode::TruncationOverflow, "dilated profile does not fit in the evolution grid");
  const auto nl = evolution_nonlinearity(gs.nonlinearity);
  const auto& phi = gs.profile;
  auto base = GridFunction::sample(grid, [&](double r) { return interpolate(phi, r); });
  auto u = GridFunction::sample(grid, [&](double r) { return lambda * interpolate(phi, r / mu); });
  InitialData out{u, action_S(u, nl), pohozaev_P(u, nl), 0.0, action_S(base, nl), false};
  out.E = energy_E(u, GridFunction::zeros(grid), nl);
  out.in_I = out.E < out.level && out.P > 0.0;
  return out;
}

std::optional<EvolutionState> step(const EvolutionState& state, double dt, const Nonlinearity& nl, double cfl) {
  require_same_grid(state.u.grid(), state.v.grid());
  const RadialGrid& grid = state.u.grid();
  if (!(dt > 0.0) || dt > cfl * grid.spacing() * (1.0 + 1e-12))
    throw Error(ErrorCode::InvalidParameter, "time step must satisfy 0 < dt <= cfl h");
  Fields f{{state.u.values().begin(), state.u.values().end()},
           {state.v.values().begin(), state.v.values().end()},
           std::vector<double>(state.u.size())};
  acceleration(grid, nl, f.u, f.acc);
  leapfrog(grid, nl, dt, f);
  f.u.back() = 0.0;
  f.v.back() = 0.0;
  if (!all_finite(f.u) || !all_finite(f.v)) return std::nullopt;
  return EvolutionState{GridFunction(state.u.grid_ptr(), std::move(f.u)),
                        GridFunction(state.u.grid_ptr(), std::move(f.v)), state.t + dt};
}

Trajectory evolve(const GridFunction& u0, const GridFunction& v0, const Nonlinearity& nl, double t_max,
                  double blowup_factor, const EvolveOptions& options) {
  require_same_grid(u0.grid(), v0.grid());
  if (!(t_max > 0.0) || !(blowup_factor > 1.0) || !(options.cfl > 0.0) || options.diag_stride < 1)
    throw Error(ErrorCode::InvalidParameter, "evolution needs t_max > 0, blowup factor > 1, cfl > 0, stride >= 1");
  const RadialGrid& grid = u0.grid();
  const auto steps = static_cast<long>(std::ceil(t_max / (options.cfl * grid.spacing()) - 1e-9));
  const double dt = t_max / static_cast<double>(steps);

  Fields f{{u0.values().begin(), u0.values().end()},
           {v0.values().begin(), v0.values().end()},
           std::vector<double>(u0.size())};
  f.u.back() = 0.0;
  f.v.back() = 0.0;
  acceleration(grid, nl, f.u, f.acc);

  Trajectory traj;
  traj.level = options.level;
  traj.records.push_back(diagnose(grid, nl, f, 0.0, options.level));
  const double escape_sq = blowup_factor * blowup_factor * h1_sq(grid, f.u);
  const std::size_t outer = static_cast<std::size_t>(std::floor(0.9 * grid.intervals()));
  const double share_sq = options.boundary_share * options.boundary_share;
  auto tail_sq = [&] { return weighted_sq(grid, f.u, outer) + edge_sq(grid, f.u, outer); };
  // Data that already reach the boundary (a box eigenmode, say) are not
  // modelling the whole space, so the guard only watches localized data.
  const bool guarded = tail_sq() <= share_sq * h1_sq(grid, f.u);

  long n = 0;
  double t = 0.0;
  auto stop = [&](Termination why) {
    traj.termination = why;
    traj.end_time = t;
  };
  bool done = false;
  while (!done) {
    double h = dt;
    if (options.kappa > 0.0) {
      const double k = stiffness(nl, f.u);
      if (k > 0.0) h = std::min(h, options.kappa / std::sqrt(k));
    }
    if (t + h >= t_max * (1.0 - 1e-12)) {
      h = t_max - t;
      done = true;
    }
    leapfrog(grid, nl, h, f);
    ++n;
    t = done ? t_max : t + h;
    if (!all_finite(f.u) || !all_finite(f.v) || !all_finite(f.acc)) {
      stop(Termination::NonFinite);
      return traj;
    }
    const double norm_sq = h1_sq(grid, f.u);
    if (norm_sq > escape_sq) {
      stop(Termination::BlowupDetected);
      break;
    }
    if (n % options.diag_stride == 0 || done) {
      const auto rec = diagnose(grid, nl, f, t, options.level);
      if (!record_finite(rec)) {
        stop(Termination::NonFinite);
        return traj;
      }
      traj.records.push_back(rec);
      if (guarded && norm_sq > 0.0 && tail_sq() > share_sq * norm_sq) {
        stop(Termination::BoundaryContamination);
        break;
      }
    }
    if (done) stop(Termination::ReachedTmax);
  }
  traj.final_state = EvolutionState{GridFunction(u0.grid_ptr(), f.u), GridFunction(u0.grid_ptr(), f.v),
                                    traj.end_time};
  return traj;
}

InvariantReport invariant_monitor(const Trajectory& traj) {
  if (traj.records.empty() || !traj.records.front().in_I)
    throw Error(ErrorCode::PreconditionFailed, "trajectory does not start in the invariant set");
  InvariantReport rep;
  rep.P0 = traj.records.front().P;
  rep.min_P = rep.P0;
  rep.min_T_margin = traj.records.front().T - traj.level;
  for (const auto& r : traj.records) {
    if (!r.in_I && !rep.first_exit) rep.first_exit = r.t;
    rep.min_P = std::min(rep.min_P, r.P);
    if (r.in_I) rep.min_T_margin = std::min(rep.min_T_margin, r.T - traj.level);
  }
  rep.in_I_throughout = !rep.first_exit;
  rep.delta_obs = rep.min_P > 0.0 ? rep.min_P : 0.0;
  return rep;
}

double energy_drift(const Trajectory& traj) {
  if (traj.records.size() < 2) throw Error(ErrorCode::InvalidParameter, "energy drift needs two records");
  const double e0 = traj.records.front().E;
  const double scale = e0 == 0.0 ? 1.0 : std::abs(e0);
  double worst = 0.0;
  for (const auto& r : traj.records) {
    const double d = (r.E - e0) / scale;
    if (std::abs(d) > std::abs(worst)) worst = d;
  }
  return worst;
}

}  // namespace varkg
