#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "varkg/radial_grid.hpp"

namespace varkg {

/// Power nonlinearity of the standing-wave equation
///   -Δφ + (1 - ω²) φ - |φ|^{p-1} φ = 0,
/// written as g(s) = -m0 s + |s|^{p-1} s with effective mass m0 = 1 - ω².
struct PowerLaw {
  double p = 3.0;
  double omega = 0.0;
  double mass() const noexcept { return 1.0 - omega * omega; }
};

/// User-registered nonlinearity: g, its primitive G (G(0) = 0) and the
/// linearization coefficient rho = -lim g(s)/s.
struct GeneralLaw {
  std::string name;
  std::function<double(double)> g;
  std::function<double(double)> G;
  double rho = 1.0;
};

class Nonlinearity {
 public:
  /// Throws InvalidParameter for p <= 1 and InvalidMass for |ω| >= 1.
  static Nonlinearity power(double p, double omega = 0.0);

  /// Checks G(0) = 0 and G(s) + rho s²/2 = o(s²) at s = 1e-3, 1e-4, 1e-5.
  static Nonlinearity general(GeneralLaw law);

  /// Looks up a nonlinearity registered with register_nonlinearity().
  static Nonlinearity registered(const std::string& name);

  bool is_power() const noexcept { return power_ != nullptr; }
  const PowerLaw& power_law() const;
  std::string name() const;

  /// Coefficient of the quadratic part: m0 for the power law, rho otherwise.
  double linear_coefficient() const;

  double g(double s) const;
  /// Primitive evaluated on the modulus, G(|s|).
  double G(double s) const;

  /// Throws InvalidParameter when p is not H¹-subcritical in dimension N.
  void check_dimension(int dimension) const;

 private:
  std::shared_ptr<const PowerLaw> power_;
  std::shared_ptr<const GeneralLaw> general_;
};

void register_nonlinearity(const std::string& name, std::function<GeneralLaw()> factory);
std::vector<std::string> registered_nonlinearities();

enum class Region { Interior, Limit, Invalid };

std::string_view to_string(Region region);

struct ScalingExponents {
  double alpha = 1.0;
  double beta = 0.0;
  Region region = Region::Invalid;
};

/// Region membership is decided by exact comparisons on the inputs.
ScalingExponents classify_exponents(double alpha, double beta, double p, int dimension);

/// Powers of λ picked up by ||∇v||², ||v||² and ||v||_{p+1}^{p+1} under
/// v -> λ^α v(λ^β ·).
struct ScalingPowers {
  double grad = 0.0;
  double mass = 0.0;
  double nonlinear = 0.0;
};

ScalingPowers scaling_powers(double alpha, double beta, double p, int dimension);

/// ||v||_{p+1}^{p+1}.
double power_norm(const GridFunction& v, double p);

double action_S(const GridFunction& v, const Nonlinearity& nl);
double action_S(const ComplexGridFunction& v, const Nonlinearity& nl);
double constraint_K(const GridFunction& v, const Nonlinearity& nl, const ScalingExponents& se);
double pohozaev_P(const GridFunction& v, const Nonlinearity& nl);
double pohozaev_P(const ComplexGridFunction& v, const Nonlinearity& nl);
double kinetic_T(const GridFunction& v);
double energy_E(const GridFunction& u, const GridFunction& v, const Nonlinearity& nl);
double pohozaev_residual(const GridFunction& v, const Nonlinearity& nl);

/// ||∇v||² - ∫ g(v) v; equals K_{1,0}(v) for the power law.
double nehari_residual(const GridFunction& v, const Nonlinearity& nl);

}  // namespace varkg
