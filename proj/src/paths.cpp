#include "varkg/paths.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

namespace varkg {

namespace {

constexpr std::size_t kPathPoints = 64;
constexpr double kRefineTol = 1e-6;
constexpr double kConstraintTol = 1e-6;
constexpr double kProjectionTol = 1e-8;
constexpr double kMaxEndpoint = 1073741824.0;  // 2^30
constexpr int kGluingHalvings = 40;

double h1_sq(const GridFunction& v) { return l2_norm_sq(v) + grad_norm_sq(v); }

bool is_zero(const GridFunction& v) {
  const auto x = v.values();
  return std::all_of(x.begin(), x.end(), [](double s) { return s == 0.0; });
}

void require_nonzero(const GridFunction& v) {
  if (is_zero(v)) throw Error(ErrorCode::InvalidInput, "function must be nonzero");
}

void require_on_constraint(const GridFunction& v, const Nonlinearity& nl, const ScalingExponents& se) {
  require_nonzero(v);
  const double k = constraint_K(v, nl, se);
  if (!(std::abs(k) <= kConstraintTol * h1_sq(v)))
    throw Error(ErrorCode::NotOnConstraint, "K residual " + format_number(k) + " above tolerance");
}

// Samples t -> S(γ(t)) on 64 uniform points, then keeps adding points at a
// quarter of the local spacing around the argmax until the maximum settles.
void sample_path(PathSample& path, const std::function<double(double)>& S) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t j = 0; j < kPathPoints; ++j) {
    const double t = static_cast<double>(j) / (kPathPoints - 1);
    pts.emplace_back(t, S(t));
  }
  auto argmax = [&] {
    return static_cast<std::size_t>(std::max_element(pts.begin(), pts.end(),
                                                     [](auto& a, auto& b) { return a.second < b.second; }) -
                                    pts.begin());
  };
  std::size_t j = argmax();
  double best = pts[j].second;
  for (int pass = 0; pass < 200; ++pass) {
    std::vector<std::pair<double, double>> fresh;
    for (std::size_t side : {j - 1, j}) {
      if (side + 1 == 0 || side + 1 >= pts.size()) continue;
      const double a = pts[side].first, b = pts[side + 1].first;
      for (int q = 1; q < 4; ++q) {
        const double t = a + (b - a) * q / 4.0;
        if (t > a && t < b) fresh.emplace_back(t, S(t));
      }
    }
    if (fresh.empty()) break;
    pts.insert(pts.end(), fresh.begin(), fresh.end());
    std::sort(pts.begin(), pts.end());
    j = argmax();
    const double next = pts[j].second;
    const bool settled = std::abs(next - best) <= kRefineTol * std::abs(best);
    best = next;
    if (settled) break;
  }
  path.t.clear();
  path.action.clear();
  for (const auto& [t, s] : pts) {
    if (!std::isfinite(s)) throw Error(ErrorCode::NumericalOverflow, "non-finite action along path");
    path.t.push_back(t);
    path.action.push_back(s);
  }
  path.argmax = j;
}

double endpoint_scale(const std::function<double(double)>& S) {
  for (double c = 2.0; c <= kMaxEndpoint; c *= 2.0)
    if (S(c) < 0.0) return c;
  throw Error(ErrorCode::NoNegativeEndpoint, "action stays nonnegative up to 2^30");
}

bool ray_increasing(const ScalingLaw& law, double lambda, const ScalingExponents& se) {
  double prev = 0.0;
  for (std::size_t k = 1; k <= kPathPoints; ++k) {
    const double s = law.ray_action(static_cast<double>(k) / kPathPoints, lambda, se);
    if (!(s > prev)) return false;
    prev = s;
  }
  return true;
}

// S(v_λ) independent of λ on the constraint: every term that moves with λ
// moves with the same power, so K = 0 cancels them all.
bool flat_family(const ScalingLaw& law, const ScalingExponents& se) {
  const auto e = scaling_powers(se.alpha, se.beta, law.p, law.dimension);
  const std::pair<double, double> terms[] = {
      {e.grad, law.grad}, {e.mass, law.m0 * law.mass}, {e.nonlinear, law.nonlinear}};
  std::optional<double> common;
  for (const auto& [power, coeff] : terms) {
    if (power == 0.0 || coeff == 0.0) continue;
    if (common && std::abs(*common - power) > 1e-12 * std::max(1.0, std::abs(power))) return false;
    common = power;
  }
  return true;
}

Projection materialize(const GridFunction& v, double lambda, const ScalingExponents& se,
                       const Nonlinearity& nl) {
  Projection out{lambda, rescale_exact(v, lambda, se)};
  const double k = constraint_K(out.function, nl, se);
  if (!(std::abs(k) <= kProjectionTol * h1_sq(out.function)))
    throw Error(ErrorCode::ConvergenceError, "projected function misses the constraint");
  return out;
}

double integral_G(const GridFunction& v, double scale, const Nonlinearity& nl) {
  const auto w = v.grid().weights();
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) sum += w[i] * nl.G(scale * v[i]);
  return sum;
}

}  // namespace

GridFunction rescale(const GridFunction& v, double lambda, const ScalingExponents& se) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw Error(ErrorCode::InvalidParameter, "rescaling needs lambda > 0");
  if (lambda == 1.0) return v;
  if (se.beta == 0.0) return v.scaled(std::pow(lambda, se.alpha));
  const double stretch = std::pow(lambda, se.beta);
  const double R = v.grid().radius();
  if (support_radius(v) / stretch > R * (1.0 + 1e-12))
    throw Error(ErrorCode::TruncationOverflow, "rescaled support leaves the grid");
  const double amp = std::pow(lambda, se.alpha);
  return GridFunction::sample(v.grid_ptr(), [&](double r) { return amp * interpolate(v, stretch * r); });
}

GridFunction rescale_exact(const GridFunction& v, double lambda, const ScalingExponents& se) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw Error(ErrorCode::InvalidParameter, "rescaling needs lambda > 0");
  const RadialGrid& g = v.grid();
  GridPtr grid = se.beta == 0.0 || lambda == 1.0
                     ? v.grid_ptr()
                     : RadialGrid::make(g.dimension(), g.radius() * std::pow(lambda, -se.beta), g.intervals());
  const double amp = std::pow(lambda, se.alpha);
  std::vector<double> values(v.values().begin(), v.values().end());
  for (double& x : values) x *= amp;
  return GridFunction(std::move(grid), std::move(values));
}

ScalingLaw ScalingLaw::of(const GridFunction& v, const Nonlinearity& nl) {
  const auto& law = nl.power_law();
  const int dim = v.grid().dimension();
  nl.check_dimension(dim);
  return {grad_norm_sq(v), l2_norm_sq(v), power_norm(v, law.p), law.mass(), law.p, dim};
}

double ScalingLaw::action(double lambda, const ScalingExponents& se) const {
  return ray_action(1.0, lambda, se);
}

double ScalingLaw::ray_action(double s, double lambda, const ScalingExponents& se) const {
  const auto e = scaling_powers(se.alpha, se.beta, p, dimension);
  const double quad = 0.5 * std::pow(lambda, e.grad) * grad + 0.5 * m0 * std::pow(lambda, e.mass) * mass;
  const double top = std::pow(lambda, e.nonlinear) * nonlinear / (p + 1.0);
  return s * s * quad - std::pow(s, p + 1.0) * top;
}

double ScalingLaw::constraint(double lambda, const ScalingExponents& se) const {
  const auto e = scaling_powers(se.alpha, se.beta, p, dimension);
  return 0.5 * e.grad * std::pow(lambda, e.grad) * grad +
         0.5 * e.mass * m0 * std::pow(lambda, e.mass) * mass -
         e.nonlinear / (p + 1.0) * std::pow(lambda, e.nonlinear) * nonlinear;
}

double ScalingLaw::nehari(double lambda, const ScalingExponents& se) const {
  const auto e = scaling_powers(se.alpha, se.beta, p, dimension);
  return std::pow(lambda, e.grad) * grad + m0 * std::pow(lambda, e.mass) * mass -
         std::pow(lambda, e.nonlinear) * nonlinear;
}

std::vector<std::pair<double, double>> action_profile(const GridFunction& v, const Nonlinearity& nl,
                                                      const ScalingExponents& se,
                                                      const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw Error(ErrorCode::InvalidParameter, "empty lambda grid");
  std::vector<std::pair<double, double>> out;
  out.reserve(lambdas.size());
  std::optional<ScalingLaw> law;
  if (nl.is_power()) law = ScalingLaw::of(v, nl);
  for (double lambda : lambdas) {
    if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidParameter, "lambda must be positive");
    const double s = law ? law->action(lambda, se) : action_S(rescale_exact(v, lambda, se), nl);
    out.emplace_back(lambda, s);
  }
  return out;
}

std::vector<double> geometric_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2)
    throw Error(ErrorCode::InvalidParameter, "geometric grid needs 0 < lo < hi and n >= 2");
  std::vector<double> out(n);
  const double step = std::log(hi / lo) / static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) out[k] = lo * std::exp(step * static_cast<double>(k));
  out.back() = hi;
  return out;
}

void validate(PathSample& path, const Nonlinearity& nl) {
  path.starts_at_zero = is_zero(path.start);
  path.ends_negative = action_S(path.end, nl) < 0.0;
  const bool finite = std::all_of(path.action.begin(), path.action.end(),
                                  [](double s) { return std::isfinite(s); });
  if (!path.starts_at_zero) throw Error(ErrorCode::InvalidInput, "path does not start at 0");
  if (!path.ends_negative) throw Error(ErrorCode::InvalidInput, "path does not end at negative action");
  if (!finite || path.t.empty()) throw Error(ErrorCode::InvalidInput, "path samples are not finite");
}

PathSample build_path_interior(const GridFunction& v, const Nonlinearity& nl, const ScalingExponents& se) {
  if (se.region != Region::Interior) throw Error(ErrorCode::WrongRegion, "exponents are not Interior");
  require_on_constraint(v, nl, se);
  const auto law = ScalingLaw::of(v, nl);
  const double C = endpoint_scale([&](double c) { return law.action(c, se); });

  PathSample path{{}, {}, 0, GridFunction::zeros(v.grid_ptr()), rescale_exact(v, C, se)};
  sample_path(path, [&](double t) { return t == 0.0 ? 0.0 : law.action(t * C, se); });
  validate(path, nl);
  return path;
}

PathSample build_path_limit(const GridFunction& v, const Nonlinearity& nl, const ScalingExponents& se) {
  if (se.region != Region::Limit) throw Error(ErrorCode::WrongRegion, "exponents are not Limit");
  require_on_constraint(v, nl, se);
  const auto law = ScalingLaw::of(v, nl);

  double lambda0 = 0.5;
  int halvings = 0;
  while (!ray_increasing(law, lambda0, se)) {
    if (++halvings > kGluingHalvings) throw Error(ErrorCode::GluingFailed, "no lambda0 found in 40 halvings");
    lambda0 *= 0.5;
  }

  PathSample path{{}, {}, 0, GridFunction::zeros(v.grid_ptr()), v};
  if (!flat_family(law, se)) {
    const double C = endpoint_scale([&](double c) { return law.action(c, se); });
    const double tb = lambda0 / C;
    path.end = rescale_exact(v, C, se);
    path.ray_end = tb;
    sample_path(path, [&](double t) {
      return t <= tb ? law.ray_action(t / tb, lambda0, se) : law.action(C * t, se);
    });
  } else {
    // Smallest λ1 >= 1 past which s -> S(s v_λ1) already decreases at s = 1.
    double lambda1 = 1.0;
    if (law.nehari(1.0, se) > 0.0) {
      double hi = 2.0;
      while (law.nehari(hi, se) > 0.0) {
        hi *= 2.0;
        if (hi > kMaxEndpoint) throw Error(ErrorCode::NoNegativeEndpoint, "Nehari slope stays positive");
      }
      double lo = 0.5 * hi;
      for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (law.nehari(mid, se) > 0.0 ? lo : hi) = mid;
      }
      lambda1 = hi;
    }
    const double s_end = endpoint_scale([&](double s) { return law.ray_action(s, lambda1, se); });
    path.end = rescale_exact(v, lambda1, se).scaled(s_end);
    path.ray_end = 1.0 / 3.0;
    sample_path(path, [&](double t) {
      if (t <= 1.0 / 3.0) return law.ray_action(3.0 * t, lambda0, se);
      if (t <= 2.0 / 3.0) return law.action(lambda0 * std::pow(lambda1 / lambda0, 3.0 * t - 1.0), se);
      return law.ray_action(1.0 + (s_end - 1.0) * (3.0 * t - 2.0), lambda1, se);
    });
  }
  validate(path, nl);
  return path;
}

Projection project_to_constraint(const GridFunction& v, const Nonlinearity& nl, const ScalingExponents& se) {
  require_nonzero(v);
  const auto law = ScalingLaw::of(v, nl);
  auto f = [&](double log_lambda) { return law.constraint(std::exp(log_lambda), se); };
  double lo = std::log(1e-4), hi = std::log(1e4);
  double flo = f(lo);
  const double fhi = f(hi);
  if (!std::isfinite(flo) || !std::isfinite(fhi) || flo * fhi > 0.0)
    throw Error(ErrorCode::NoRoot, "K does not change sign along the scaling family");
  if (flo == 0.0) return materialize(v, std::exp(lo), se, nl);
  if (fhi == 0.0) return materialize(v, std::exp(hi), se, nl);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) {
      lo = hi = mid;
      break;
    }
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  const double root = std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
  return materialize(v, std::exp(root), se, nl);
}

Projection project_along_ray(const GridFunction& v, const Nonlinearity& nl, const ScalingExponents& se) {
  require_nonzero(v);
  const auto law = ScalingLaw::of(v, nl);
  const auto e = scaling_powers(se.alpha, se.beta, law.p, law.dimension);
  const double quad = 0.5 * (e.grad * law.grad + e.mass * law.m0 * law.mass);
  const double top = e.nonlinear / (law.p + 1.0) * law.nonlinear;
  if (!(quad > 0.0) || !(top > 0.0)) throw Error(ErrorCode::NoRoot, "K has no positive root along the ray");
  const double s = std::pow(quad / top, 1.0 / (law.p - 1.0));
  Projection out{s, v.scaled(s)};
  const double k = constraint_K(out.function, nl, se);
  if (!(std::abs(k) <= kProjectionTol * h1_sq(out.function)))
    throw Error(ErrorCode::ConvergenceError, "ray projection misses the constraint");
  return out;
}

Projection place_on_constraint(const GridFunction& v, const Nonlinearity& nl, const ScalingExponents& se) {
  require_nonzero(v);
  if (std::abs(constraint_K(v, nl, se)) <= kConstraintTol * h1_sq(v)) return {1.0, v};
  try {
    return project_to_constraint(v, nl, se);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoRoot) throw;
    return project_along_ray(v, nl, se);
  }
}

Projection project_to_P_zero(const GridFunction& v, const Nonlinearity& nl) {
  if (v.grid().dimension() != 2) throw Error(ErrorCode::Unsupported, "P-projection is implemented for N = 2");
  const double tol = kProjectionTol * l2_norm_sq(v);
  const double p0 = pohozaev_P(v, nl);
  if (tol > 0.0 && std::abs(p0) <= tol) return {1.0, v};
  if (!(p0 > 0.0)) throw Error(ErrorCode::PreconditionFailed, "P-projection needs P(v) > 0");

  // P(λ v(λ ·)) = λ^{-2} ∫ G(λ v); the quadratic part of G wins as λ -> 0.
  double lo = 0.5;
  int halvings = 0;
  while (!(integral_G(v, lo, nl) < 0.0)) {
    if (++halvings > 60) throw Error(ErrorCode::NoRoot, "P stays positive along the family");
    lo *= 0.5;
  }
  double hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (integral_G(v, mid, nl) < 0.0 ? lo : hi) = mid;
  }
  const double root = std::abs(integral_G(v, lo, nl)) <= std::abs(integral_G(v, hi, nl)) ? lo : hi;
  Projection out{root, rescale_exact(v, root, {1.0, 1.0, Region::Limit})};
  if (!(std::abs(pohozaev_P(out.function, nl)) <= tol))
    throw Error(ErrorCode::ConvergenceError, "P-projection misses P = 0");
  return out;
}

std::string_view to_string(ProjectionRoute route) {
  switch (route) {
    case ProjectionRoute::Family: return "family";
    case ProjectionRoute::Ray: return "ray";
    case ProjectionRoute::Direct: return "direct";
    case ProjectionRoute::Skipped: return "skipped";
  }
  return "skipped";
}

namespace {

void finish_report(ConstraintReport& rep, std::optional<std::size_t> ground_index) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  rep.min_value = nan;
  for (std::size_t i = 0; i < rep.values.size(); ++i) {
    const double x = rep.values[i];
    if (std::isnan(x)) continue;
    if (std::isnan(rep.min_value) || x < rep.min_value) {
      rep.min_value = x;
      rep.argmin = i;
    }
  }
  if (std::isnan(rep.min_value))
    throw Error(ErrorCode::EmptyConstraintSample, "no trial could be placed on the constraint");
  rep.bounded_below = rep.min_value >= rep.reference - rep.tolerance;
  double witness = rep.min_value;
  if (ground_index) {
    if (*ground_index >= rep.values.size()) throw Error(ErrorCode::InvalidParameter, "ground index out of range");
    witness = rep.values[*ground_index];
  }
  rep.attained = std::abs(witness - rep.reference) <= rep.tolerance;
}

}  // namespace

ConstraintReport verify_min_on_constraint(const std::vector<GridFunction>& trials, const Nonlinearity& nl,
                                          const ScalingExponents& se, double m_ref, double tol,
                                          std::optional<std::size_t> ground_index) {
  if (se.region == Region::Invalid) throw Error(ErrorCode::WrongRegion, "exponents outside both regions");
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidParameter, "tolerance must be positive");
  ConstraintReport rep;
  rep.reference = m_ref;
  rep.tolerance = tol;
  const auto lambdas = geometric_grid(0.01, 10.0, 301);
  const auto unit = static_cast<std::size_t>(
      std::min_element(lambdas.begin(), lambdas.end(),
                       [](double a, double b) { return std::abs(std::log(a)) < std::abs(std::log(b)); }) -
      lambdas.begin());

  for (const auto& v : trials) {
    std::optional<Projection> proj;
    ProjectionRoute route = ProjectionRoute::Family;
    try {
      proj = project_to_constraint(v, nl, se);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoRoot) throw;
      try {
        proj = project_along_ray(v, nl, se);
        route = ProjectionRoute::Ray;
      } catch (const Error& e2) {
        if (e2.code() != ErrorCode::NoRoot) throw;
        route = ProjectionRoute::Skipped;
      }
    }
    rep.routes.push_back(route);
    if (!proj) {
      rep.values.push_back(std::numeric_limits<double>::quiet_NaN());
      rep.argmax_offset.push_back(-1);
      continue;
    }
    rep.values.push_back(action_S(proj->function, nl));
    int offset = -1;
    if (se.region == Region::Interior) {
      const auto law = ScalingLaw::of(proj->function, nl);
      std::size_t best = 0;
      for (std::size_t k = 1; k < lambdas.size(); ++k)
        if (law.action(lambdas[k], se) > law.action(lambdas[best], se)) best = k;
      offset = static_cast<int>(best > unit ? best - unit : unit - best);
    }
    rep.argmax_offset.push_back(offset);
  }
  finish_report(rep, ground_index);
  return rep;
}

ConstraintReport verify_T_min_over_P(const std::vector<GridFunction>& trials, const Nonlinearity& nl,
                                     double m_ref, double tol, std::optional<std::size_t> ground_index) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidParameter, "tolerance must be positive");
  ConstraintReport rep;
  rep.reference = m_ref;
  rep.tolerance = tol;
  for (const auto& v : trials) {
    if (v.grid().dimension() != 2) throw Error(ErrorCode::Unsupported, "T-minimization is implemented for N = 2");
    const double p = pohozaev_P(v, nl);
    const double on_boundary = 1e-4 * h1_sq(v);
    rep.argmax_offset.push_back(-1);
    if (std::abs(p) <= on_boundary) {
      rep.routes.push_back(ProjectionRoute::Direct);
      rep.values.push_back(kinetic_T(v));
    } else if (p > 0.0) {
      rep.routes.push_back(ProjectionRoute::Family);
      rep.values.push_back(kinetic_T(project_to_P_zero(v, nl).function));
    } else {
      rep.routes.push_back(ProjectionRoute::Skipped);
      rep.values.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  finish_report(rep, ground_index);
  return rep;
}

double mountain_pass_estimate(const std::vector<PathSample>& paths) {
  if (paths.empty()) throw Error(ErrorCode::InvalidParameter, "no paths given");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : paths) best = std::min(best, p.max_action());
  return best;
}

std::vector<GridFunction> default_trial_family(const GroundState& gs, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw Error(ErrorCode::InvalidParameter, "trial family needs at least one member");
  const GridFunction& phi = gs.profile;
  const double top = phi[0];
  std::vector<GridFunction> out{phi};
  constexpr std::size_t kWidths = 9;
  for (std::size_t k = 0; k < kWidths && out.size() < count; ++k) {
    const double a = 0.5 * std::pow(4.0, static_cast<double>(k) / (kWidths - 1));
    out.push_back(GridFunction::sample(phi.grid_ptr(), [&](double r) { return top / std::cosh(a * r); }));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> eps(-0.3, 0.3), centre(0.0, 3.0), width(0.5, 2.0);
  while (out.size() < count) {
    const double e = eps(rng), c = centre(rng), w = width(rng);
    std::vector<double> values(phi.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double z = (phi.grid().r(i) - c) / w;
      values[i] = phi[i] * (1.0 + e * std::exp(-z * z));
    }
    out.emplace_back(phi.grid_ptr(), std::move(values));
  }
  return out;
}

}  // namespace varkg
