#include "varkg/ground_state.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace varkg {

namespace {

constexpr int kMaxBisections = 200;
constexpr double kTailThreshold = 1e-6;   // relative to φ(0)
constexpr double kBranchAgreement = 1e-4; // lo/hi trajectories must agree this well
constexpr double kDecayFloor = 1e-10;

enum class Outcome { Overshoot, Undershoot };

struct RadialOde {
  int dimension;
  double p;
  double mass;

  double source(double phi) const {
    const double a = std::abs(phi);
    const double pw = p == 3.0 ? a * a : std::pow(a, p - 1.0);
    return mass * phi - pw * phi;
  }
};

struct Shot {
  Outcome outcome = Outcome::Undershoot;
  std::vector<double> phi;  // values at r = k dr
  std::vector<double> slope;
};

// One shot from φ(0) = a, φ'(0) = 0. The first substep uses the regular series
// φ ≈ a + (m0 a - a^p) r² / (2N); RK4 with step dr afterwards.
Shot integrate(const RadialOde& ode, double a, double dr, std::size_t steps, bool keep) {
  Shot shot;
  const double c = ode.source(a) / (2.0 * ode.dimension);
  double r = dr;
  double y = a + c * dr * dr;
  double z = 2.0 * c * dr;
  if (keep) {
    shot.phi.reserve(steps + 1);
    shot.slope.reserve(steps + 1);
    shot.phi = {a, y};
    shot.slope = {0.0, z};
  }
  const double nm1 = ode.dimension - 1.0;
  auto accel = [&](double rr, double yy, double zz) { return -nm1 / rr * zz + ode.source(yy); };
  for (std::size_t k = 1; k < steps; ++k) {
    if (y < 0.0) {
      shot.outcome = Outcome::Overshoot;
      return shot;
    }
    if (z > 0.0 || y > 2.0 * a) {
      shot.outcome = Outcome::Undershoot;
      return shot;
    }
    const double k1y = z, k1z = accel(r, y, z);
    const double k2y = z + 0.5 * dr * k1z, k2z = accel(r + 0.5 * dr, y + 0.5 * dr * k1y, k2y);
    const double k3y = z + 0.5 * dr * k2z, k3z = accel(r + 0.5 * dr, y + 0.5 * dr * k2y, k3y);
    const double k4y = z + dr * k3z, k4z = accel(r + dr, y + dr * k3y, k4y);
    y += dr / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    z += dr / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
    r += dr;
    if (keep) {
      shot.phi.push_back(y);
      shot.slope.push_back(z);
    }
  }
  // Never crossed zero on [0, R]: counted with the undershooting side.
  shot.outcome = y < 0.0 ? Outcome::Overshoot : Outcome::Undershoot;
  return shot;
}

// Decaying solution of the linearized equation -f'' - (N-1)/r f' + m0 f = 0.
double decaying_mode(int dimension, double k, double r) {
  switch (dimension) {
    case 1: return std::exp(-k * r);
    case 2: return std::cyl_bessel_k(0.0, k * r);
    default: return std::exp(-k * r) / r;
  }
}

double fd_value(std::span<const double> v, long k) {
  if (k < 0) k = -k;
  return v[static_cast<std::size_t>(k)];
}

}  // namespace

StationaryCheck check_stationary(const GridFunction& profile, const Nonlinearity& nl) {
  const RadialGrid& grid = profile.grid();
  const auto v = profile.values();
  const double h = grid.spacing();
  const int dim = grid.dimension();
  StationaryCheck out;
  double scale = 0.0;
  if (nl.is_power()) {
    scale = std::pow(std::abs(v[0]), nl.power_law().p);
  } else {
    for (double x : v) scale = std::max(scale, std::abs(nl.g(x)));
  }
  out.ode_tolerance = 1e-4 * scale;
  const long last = static_cast<long>(v.size()) - 1;
  for (long i = 0; i + 2 <= last; ++i) {
    const double fm2 = fd_value(v, i - 2), fm1 = fd_value(v, i - 1), f0 = v[i];
    const double fp1 = v[i + 1], fp2 = v[i + 2];
    const double d2 = (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h);
    const double d1 = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
    const double lap = i == 0 ? dim * d2 : d2 + (dim - 1.0) / grid.r(i) * d1;
    out.ode_residual = std::max(out.ode_residual, std::abs(-lap - nl.g(f0)));
  }
  out.nehari = nehari_residual(profile, nl);
  out.pohozaev = pohozaev_residual(profile, nl);
  out.h1_sq = l2_norm_sq(profile) + grad_norm_sq(profile);
  const std::size_t interior = dim >= 2 ? v.size() - 1 : v.size();
  out.positive = std::all_of(v.begin(), v.begin() + interior, [](double x) { return x > 0.0; });
  out.monotone = true;
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (v[i + 1] > v[i]) out.monotone = false;
  return out;
}

GroundState closed_form_1d(double p, double omega, GridPtr grid) {
  if (grid->dimension() != 1)
    throw Error(ErrorCode::InvalidParameter, "closed-form profile exists only for N = 1");
  auto nl = Nonlinearity::power(p, omega);
  const double m0 = 1.0 - omega * omega;
  const double amp = std::pow(0.5 * m0 * (p + 1.0), 1.0 / (p - 1.0));
  const double width = 0.5 * (p - 1.0) * std::sqrt(m0);
  const double expo = 2.0 / (p - 1.0);
  auto profile = GridFunction::sample(std::move(grid), [&](double x) {
    return amp * std::pow(1.0 / std::cosh(width * x), expo);
  });
  return ground_state_from_profile(std::move(profile), std::move(nl));
}

ShootingBracket default_bracket(double p, double omega, int dimension) {
  auto nl = Nonlinearity::power(p, omega);
  nl.check_dimension(dimension);
  const double m0 = nl.power_law().mass();
  const RadialOde ode{dimension, p, m0};
  const double lo = std::pow(m0, 1.0 / (p - 1.0));
  const double dr = 2e-3 / std::sqrt(m0);
  const auto steps = static_cast<std::size_t>(60.0 / std::sqrt(m0) / dr);
  double hi = 2.0 * lo;
  for (int i = 0; i < 60; ++i) {
    if (integrate(ode, hi, dr, steps, false).outcome == Outcome::Overshoot) return {lo, hi};
    hi *= 2.0;
  }
  throw Error(ErrorCode::BracketError, "no overshooting amplitude found");
}

GroundState shoot_radial(double p, double omega, GridPtr grid, std::optional<ShootingBracket> bracket) {
  auto nl = Nonlinearity::power(p, omega);
  const int dim = grid->dimension();
  nl.check_dimension(dim);
  const double m0 = nl.power_law().mass();
  const RadialOde ode{dim, p, m0};
  const ShootingBracket br = bracket ? *bracket : default_bracket(p, omega, dim);
  if (!(br.lo < br.hi) || !(br.lo > 0.0))
    throw Error(ErrorCode::BracketError, "bracket must satisfy 0 < lo < hi");

  constexpr int kSub = 4;
  const double dr = grid->spacing() / kSub;
  const std::size_t steps = static_cast<std::size_t>(grid->intervals()) * kSub;

  double lo = br.lo, hi = br.hi;
  if (integrate(ode, lo, dr, steps, false).outcome != Outcome::Undershoot ||
      integrate(ode, hi, dr, steps, false).outcome != Outcome::Overshoot)
    throw Error(ErrorCode::BracketError, "bracket does not straddle the overshoot/undershoot dichotomy");

  int iterations = 0;
  for (; iterations < kMaxBisections; ++iterations) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (integrate(ode, mid, dr, steps, false).outcome == Outcome::Overshoot) hi = mid;
    else lo = mid;
  }
  if (iterations == kMaxBisections)
    throw Error(ErrorCode::ConvergenceError, "amplitude bisection did not converge");

  const Shot under = integrate(ode, lo, dr, steps, true);
  const Shot over = integrate(ode, hi, dr, steps, true);
  const std::size_t usable = std::min(under.phi.size(), over.phi.size());
  const double a = 0.5 * (lo + hi);

  // Trust the shot while both branches agree, and hand over to the linear
  // tail once the profile is small enough for the nonlinearity not to matter.
  std::size_t cut = 0;
  bool decayed = false;
  for (std::size_t k = 0; k < usable; ++k) {
    const double mean = 0.5 * (under.phi[k] + over.phi[k]);
    if (std::abs(under.phi[k] - over.phi[k]) > kBranchAgreement * std::abs(mean)) break;
    cut = k;
    if (mean <= kTailThreshold * a) {
      decayed = true;
      break;
    }
  }
  if (!decayed)
    throw Error(ErrorCode::ConvergenceError, "profile did not decay before the outer radius");

  const double r_cut = static_cast<double>(cut) * dr;
  const double phi_cut = 0.5 * (under.phi[cut] + over.phi[cut]);
  const double k = std::sqrt(m0);
  const double mode_cut = decaying_mode(dim, k, r_cut);

  std::vector<double> values(grid->size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t s = i * kSub;
    if (s <= cut) {
      values[i] = 0.5 * (under.phi[s] + over.phi[s]);
    } else {
      values[i] = phi_cut * decaying_mode(dim, k, grid->r(i)) / mode_cut;
    }
  }
  if (dim >= 2) values.back() = 0.0;
  if (values.size() >= 2 && std::abs(values[values.size() - 2]) > kDecayFloor)
    throw Error(ErrorCode::ConvergenceError, "profile does not fall below 1e-10 before R");

  GridFunction profile(std::move(grid), std::move(values));
  const auto check = check_stationary(profile, nl);
  if (!check.ok())
    throw Error(ErrorCode::ConvergenceError, "shooting profile fails the stationary checks");
  const double level = action_S(profile, nl);
  return GroundState{std::move(profile), std::move(nl), level, a};
}

GroundState ground_state_from_profile(GridFunction profile, Nonlinearity nl) {
  const auto check = check_stationary(profile, nl);
  if (!check.ok())
    throw Error(ErrorCode::InvalidInput, "profile fails the stationary-solution checks");
  const double level = action_S(profile, nl);
  const double center = profile[0];
  return GroundState{std::move(profile), std::move(nl), level, center};
}

double least_energy(const GroundState& gs) { return action_S(gs.profile, gs.nonlinearity); }

}  // namespace varkg
