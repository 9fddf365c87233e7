#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "varkg/ground_state.hpp"
#include "varkg/model.hpp"
#include "varkg/radial_grid.hpp"

namespace varkg {

/// λ^α v(λ^β ·) resampled on the grid of v by cubic interpolation, zero
/// beyond R. Throws TruncationOverflow when the rescaled support
/// R_support·λ^{-β} no longer fits inside R.
GridFunction rescale(const GridFunction& v, double lambda, const ScalingExponents& se);

/// Same function represented without interpolation: values λ^α v_i placed on
/// the grid of radius R·λ^{-β} with the same number of intervals. Discrete
/// norms then pick up exactly the powers of λ returned by scaling_powers().
GridFunction rescale_exact(const GridFunction& v, double lambda, const ScalingExponents& se);

/// The three discrete norms of a profile. Along any rescaling family the
/// power-law action and constraint become sums of monomials in λ.
struct ScalingLaw {
  double grad = 0.0;     // ||∇v||²
  double mass = 0.0;     // ||v||²
  double nonlinear = 0.0;  // ||v||_{p+1}^{p+1}
  double m0 = 1.0;
  double p = 3.0;
  int dimension = 1;

  static ScalingLaw of(const GridFunction& v, const Nonlinearity& nl);

  double action(double lambda, const ScalingExponents& se) const;
  double constraint(double lambda, const ScalingExponents& se) const;
  /// S(s·v_λ).
  double ray_action(double s, double lambda, const ScalingExponents& se) const;
  /// K_{1,0}(v_λ): slope of s -> S(s v_λ) at s = 1.
  double nehari(double lambda, const ScalingExponents& se) const;
};

std::vector<std::pair<double, double>> action_profile(const GridFunction& v, const Nonlinearity& nl,
                                                      const ScalingExponents& se,
                                                      const std::vector<double>& lambdas);

/// n geometric points from lo to hi.
std::vector<double> geometric_grid(double lo, double hi, std::size_t n);

struct PathSample {
  std::vector<double> t;
  std::vector<double> action;
  std::size_t argmax = 0;
  GridFunction start;
  GridFunction end;
  bool starts_at_zero = false;
  bool ends_negative = false;
  double ray_end = 0.0;  // limit paths: γ(t) = s v_{λ0} for t <= ray_end

  double max_action() const { return action.at(argmax); }
};

/// Recomputes both admissibility flags from the endpoint states and throws
/// InvalidInput unless γ(0) = 0 and S(γ(1)) < 0.
void validate(PathSample& path, const Nonlinearity& nl);

/// γ(t) = v_{tC} for v on the constraint and Interior exponents.
PathSample build_path_interior(const GridFunction& v, const Nonlinearity& nl,
                               const ScalingExponents& se);

/// Glued path for Limit exponents: γ(t) = s v_{λ0} up to s = 1, then the
/// scaling family from λ0 on. When S(v_λ) does not depend on λ the scaling
/// family never reaches negative action, and a third piece s v_{λ1} with
/// K_{1,0}(v_{λ1}) <= 0 carries the path down.
PathSample build_path_limit(const GridFunction& v, const Nonlinearity& nl,
                            const ScalingExponents& se);

struct Projection {
  double lambda = 1.0;
  GridFunction function;
};

/// Root of λ -> K_{α,β}(v_λ) on [1e-4, 1e4]; throws NoRoot without a sign change.
Projection project_to_constraint(const GridFunction& v, const Nonlinearity& nl,
                                 const ScalingExponents& se);

/// Root of s -> K_{α,β}(s v), s > 0.
Projection project_along_ray(const GridFunction& v, const Nonlinearity& nl,
                             const ScalingExponents& se);

/// v itself when |K| <= 1e-6 ||v||²_{H¹}; otherwise the scaling-family
/// projection, or the ray projection when the family has no root.
Projection place_on_constraint(const GridFunction& v, const Nonlinearity& nl,
                               const ScalingExponents& se);

/// N = 2 only: λ0 in (0, 1] with P(v_{λ0}) = 0 for v_λ = λ v(λ ·).
Projection project_to_P_zero(const GridFunction& v, const Nonlinearity& nl);

enum class ProjectionRoute { Family, Ray, Direct, Skipped };

std::string_view to_string(ProjectionRoute route);

struct ConstraintReport {
  std::vector<double> values;  // S or T of each projected member; NaN when skipped
  std::vector<ProjectionRoute> routes;
  std::vector<int> argmax_offset;  // grid cells between the scaling argmax and λ = 1; -1 if not checked
  double min_value = 0.0;
  std::size_t argmin = 0;
  double reference = 0.0;
  double tolerance = 0.0;
  bool bounded_below = false;  // min >= reference - tolerance
  bool attained = false;       // ground-state member within tolerance of reference
  bool pass() const noexcept { return bounded_below && attained; }
};

/// Projects every trial onto the constraint and checks min S >= m_ref - tol.
/// With ground_index set, attainment means that member's S is within tol of
/// m_ref; otherwise the minimum itself must be.
ConstraintReport verify_min_on_constraint(const std::vector<GridFunction>& trials,
                                          const Nonlinearity& nl, const ScalingExponents& se,
                                          double m_ref, double tol,
                                          std::optional<std::size_t> ground_index = std::nullopt);

/// min T over {P >= 0} sampled through project_to_P_zero.
ConstraintReport verify_T_min_over_P(const std::vector<GridFunction>& trials,
                                     const Nonlinearity& nl, double m_ref, double tol,
                                     std::optional<std::size_t> ground_index = std::nullopt);

double mountain_pass_estimate(const std::vector<PathSample>& paths);

/// φ first, then sech(a r) profiles of matching height for geometric widths,
/// then seeded bump perturbations φ (1 + ε e^{-((r-c)/w)²}).
std::vector<GridFunction> default_trial_family(const GroundState& gs, std::size_t count,
                                               std::uint64_t seed);

}  // namespace varkg
