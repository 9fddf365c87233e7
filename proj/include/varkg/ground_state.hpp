#pragma once

#include <cmath>
#include <optional>

#include "varkg/model.hpp"
#include "varkg/radial_grid.hpp"

namespace varkg {

struct GroundState {
  GridFunction profile;
  Nonlinearity nonlinearity;
  double level = 0.0;         // m = S(profile)
  double center_value = 0.0;  // φ(0)
};

/// Residuals of a candidate stationary profile against the ground-state
/// invariants (ODE residual, Nehari, Pohozaev, positivity, monotone decay).
struct StationaryCheck {
  double ode_residual = 0.0;
  double ode_tolerance = 0.0;
  double nehari = 0.0;
  double pohozaev = 0.0;
  double h1_sq = 0.0;
  bool positive = false;
  bool monotone = false;

  bool ok() const noexcept {
    return ode_residual <= ode_tolerance && std::abs(nehari) <= 1e-3 * h1_sq &&
           std::abs(pohozaev) <= 1e-3 * h1_sq && positive && monotone;
  }
};

/// The ODE residual uses fourth-order differences so that it measures the
/// profile rather than the stencil.
StationaryCheck check_stationary(const GridFunction& profile, const Nonlinearity& nl);

/// Explicit N = 1 profile
///   φ(x) = [m0 (p+1)/2]^{1/(p-1)} sech^{2/(p-1)}((p-1) sqrt(m0) x / 2).
GroundState closed_form_1d(double p, double omega, GridPtr grid);

struct ShootingBracket {
  double lo = 1.0;
  double hi = 4.0;
};

/// Bisection on the central amplitude: an overshooting trajectory crosses
/// zero, an undershooting one turns back up before reaching it. The converged
/// trajectory is continued past the point where it loses accuracy by the
/// decaying solution of the linearized equation.
GroundState shoot_radial(double p, double omega, GridPtr grid,
                         std::optional<ShootingBracket> bracket = std::nullopt);

/// Bracket [m0^{1/(p-1)}, hi] with hi doubled until the trajectory overshoots.
ShootingBracket default_bracket(double p, double omega, int dimension);

/// Wraps an externally supplied profile, validating it against the
/// stationary-profile invariants. Throws InvalidInput if any fails.
GroundState ground_state_from_profile(GridFunction profile, Nonlinearity nl);

double least_energy(const GroundState& gs);

}  // namespace varkg
