#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "varkg/ground_state.hpp"
#include "varkg/model.hpp"
#include "varkg/radial_grid.hpp"

namespace varkg {

/// (u, u_t) at time t on a shared grid.
struct EvolutionState {
  GridFunction u;
  GridFunction v;
  double t = 0.0;
};

enum class Termination { ReachedTmax, BlowupDetected, NonFinite, BoundaryContamination };

std::string_view to_string(Termination reason);

struct DiagnosticRecord {
  double t = 0.0;
  double E = 0.0;
  double S = 0.0;
  double P = 0.0;
  double T = 0.0;
  double h1 = 0.0;
  bool in_I = false;
};

struct Trajectory {
  std::vector<DiagnosticRecord> records;
  Termination termination = Termination::ReachedTmax;
  double end_time = 0.0;   // time at which stepping stopped
  double level = 0.0;      // m used for the in_I flag
  std::optional<EvolutionState> final_state;  // absent after NonFinite
};

/// Power data evolves with g(u) = -u + |u|^{p-1}u whatever ω the profile was
/// computed for; general nonlinearities are used as given.
Nonlinearity evolution_nonlinearity(const Nonlinearity& nl);

struct InitialData {
  GridFunction u;
  double S = 0.0;
  double P = 0.0;
  double E = 0.0;
  double level = 0.0;  // S of the undeformed profile on the same grid
  bool in_I = false;   // E < level and P > 0
};

/// λ φ(r/μ) sampled on `grid` (N = 2) with zero velocity.
InitialData make_initial_data(const GroundState& gs, double lambda, double mu, GridPtr grid);

/// One kick-drift-kick step of u_tt = Δu + g(u), Dirichlet at R. Returns
/// nothing when the new state is not finite. Throws InvalidParameter if
/// dt > cfl h.
std::optional<EvolutionState> step(const EvolutionState& state, double dt, const Nonlinearity& nl,
                                   double cfl = 0.4);

struct EvolveOptions {
  double cfl = 0.4;
  int diag_stride = 10;
  double level = 0.0;             // m for the in_I flag
  double boundary_share = 0.01;   // outer 10% may carry at most this share of the H¹ norm
  double kappa = 1e-3;            // dt <= kappa / sqrt(max |g(u)/u + rho|); 0 disables
};

/// Steps to t_max with dt = t_max / ceil(t_max / (cfl h)), shortened while the
/// nonlinearity is stiff, recording diagnostics every diag_stride steps and
/// at the final time. Stops early on
/// H¹ escape past blowup_factor times the initial norm, on non-finite values
/// or on boundary contamination.
Trajectory evolve(const GridFunction& u0, const GridFunction& v0, const Nonlinearity& nl, double t_max,
                  double blowup_factor, const EvolveOptions& options = {});

struct InvariantReport {
  std::optional<double> first_exit;  // first record time with in_I false
  double min_P = 0.0;
  double P0 = 0.0;
  double delta_obs = 0.0;            // min_P when positive, else 0
  bool in_I_throughout = false;
  double min_T_margin = 0.0;         // min over in_I records of T - level
};

/// Throws PreconditionFailed unless the first record is in the invariant set.
InvariantReport invariant_monitor(const Trajectory& traj);

/// Relative energy change (E(t) - E(0))/|E(0)| of largest magnitude, with
/// its sign; absolute change when E(0) = 0.
double energy_drift(const Trajectory& traj);

}  // namespace varkg
