#include "varkg/model.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace varkg {

namespace {

// |s|^q with a multiplication fast path for the common integer exponents.
double abs_pow(double s, double q) {
  const double a = std::abs(s);
  if (a == 0.0) return 0.0;
  if (q == 2.0) return a * a;
  if (q == 3.0) return a * a * a;
  if (q == 4.0) {
    const double a2 = a * a;
    return a2 * a2;
  }
  return std::exp(q * std::log(a));
}

struct Registry {
  std::mutex mutex;
  std::map<std::string, std::function<GeneralLaw()>> factories;

  Registry() {
    factories["linear"] = [] {
      return GeneralLaw{"linear", [](double s) { return -s; },
                        [](double s) { return -0.5 * s * s; }, 1.0};
    };
    factories["cubic"] = [] {
      return GeneralLaw{"cubic", [](double s) { return -s + s * s * s; },
                        [](double s) { return -0.5 * s * s + 0.25 * s * s * s * s; }, 1.0};
    };
    // Exponential growth admissible in the plane: g(s) = -s + s (e^{s²} - 1).
    factories["exponential"] = [] {
      return GeneralLaw{"exponential",
                        [](double s) { return -s + s * std::expm1(s * s); },
                        [](double s) {
                          const double s2 = s * s;
                          return -0.5 * s2 + 0.5 * (std::expm1(s2) - s2);
                        },
                        1.0};
    };
  }
};

Registry& registry() {
  static Registry r;
  return r;
}

double checked(double x, const char* what) {
  if (!std::isfinite(x)) throw Error(ErrorCode::NumericalOverflow, std::string(what) + " is not finite");
  return x;
}

double potential_integral(const RadialGrid& grid, std::span<const double> moduli,
                          const Nonlinearity& nl) {
  const auto w = grid.weights();
  double sum = 0.0;
  for (std::size_t i = 0; i < moduli.size(); ++i) sum += w[i] * nl.G(moduli[i]);
  return checked(sum, "integral of G");
}

}  // namespace

Nonlinearity Nonlinearity::power(double p, double omega) {
  if (!(p > 1.0) || !std::isfinite(p)) throw Error(ErrorCode::InvalidParameter, "power needs p > 1");
  if (!(std::abs(omega) < 1.0)) throw Error(ErrorCode::InvalidMass, "frequency needs |omega| < 1");
  Nonlinearity nl;
  nl.power_ = std::make_shared<const PowerLaw>(PowerLaw{p, omega});
  return nl;
}

Nonlinearity Nonlinearity::general(GeneralLaw law) {
  if (!law.g || !law.G) throw Error(ErrorCode::InvalidInput, "general nonlinearity needs g and G");
  if (!(law.rho > 0.0)) throw Error(ErrorCode::InvalidParameter, "rho must be positive");
  if (law.G(0.0) != 0.0) throw Error(ErrorCode::InvalidInput, "G(0) must vanish");
  double previous = INFINITY;
  for (double s : {1e-3, 1e-4, 1e-5}) {
    const double ratio = std::abs(law.G(s) + 0.5 * law.rho * s * s) / (s * s);
    if (!(ratio <= 1e-2) || ratio > previous + 1e-12)
      throw Error(ErrorCode::InvalidInput,
                  "G(s) + rho s^2/2 is not o(s^2) near 0 for '" + law.name + "'");
    previous = ratio;
  }
  Nonlinearity nl;
  nl.general_ = std::make_shared<const GeneralLaw>(std::move(law));
  return nl;
}

Nonlinearity Nonlinearity::registered(const std::string& name) {
  std::function<GeneralLaw()> factory;
  {
    auto& reg = registry();
    std::lock_guard lock(reg.mutex);
    const auto it = reg.factories.find(name);
    if (it == reg.factories.end())
      throw Error(ErrorCode::InvalidParameter, "no nonlinearity registered as '" + name + "'");
    factory = it->second;
  }
  return general(factory());
}

void register_nonlinearity(const std::string& name, std::function<GeneralLaw()> factory) {
  auto& reg = registry();
  std::lock_guard lock(reg.mutex);
  reg.factories[name] = std::move(factory);
}

std::vector<std::string> registered_nonlinearities() {
  auto& reg = registry();
  std::lock_guard lock(reg.mutex);
  std::vector<std::string> names;
  for (const auto& [name, _] : reg.factories) names.push_back(name);
  return names;
}

const PowerLaw& Nonlinearity::power_law() const {
  if (!power_) throw Error(ErrorCode::Unsupported, "operation needs the power nonlinearity");
  return *power_;
}

std::string Nonlinearity::name() const {
  if (power_) return "power";
  return general_ ? general_->name : "none";
}

double Nonlinearity::linear_coefficient() const {
  if (power_) return power_->mass();
  return general_->rho;
}

double Nonlinearity::g(double s) const {
  if (power_) return -power_->mass() * s + abs_pow(s, power_->p - 1.0) * s;
  return general_->g(s);
}

double Nonlinearity::G(double s) const {
  const double a = std::abs(s);
  if (power_) return -0.5 * power_->mass() * a * a + abs_pow(a, power_->p + 1.0) / (power_->p + 1.0);
  return general_->G(a);
}

void Nonlinearity::check_dimension(int dimension) const {
  if (!power_ || dimension < 3) return;
  const double critical = 1.0 + 4.0 / (dimension - 2);
  if (!(power_->p < critical))
    throw Error(ErrorCode::InvalidParameter, "p must be below the Sobolev-critical exponent");
}

std::string_view to_string(Region region) {
  switch (region) {
    case Region::Interior: return "Interior";
    case Region::Limit: return "Limit";
    case Region::Invalid: return "Invalid";
  }
  return "Invalid";
}

ScalingExponents classify_exponents(double alpha, double beta, double p, int dimension) {
  const double n = dimension;
  const bool balance = alpha * (p - 1.0) - 2.0 * beta >= 0.0;
  const double grad_power = 2.0 * alpha - beta * (n - 2.0);
  const double mass_power = 2.0 * alpha - beta * n;
  Region region = Region::Invalid;
  if (balance) {
    if (beta < 0.0) {
      if (grad_power > 0.0) region = Region::Interior;
      else if (grad_power == 0.0) region = Region::Limit;
    } else {
      if (mass_power > 0.0) region = Region::Interior;
      else if (mass_power == 0.0 && beta > 0.0) region = Region::Limit;
    }
  }
  return {alpha, beta, region};
}

ScalingPowers scaling_powers(double alpha, double beta, double p, int dimension) {
  const double n = dimension;
  return {2.0 * alpha - beta * (n - 2.0), 2.0 * alpha - beta * n, (p + 1.0) * alpha - beta * n};
}

double power_norm(const GridFunction& v, double p) { return lebesgue_norm_pow(v, p + 1.0); }

double action_S(const GridFunction& v, const Nonlinearity& nl) {
  nl.check_dimension(v.grid().dimension());
  if (nl.is_power()) {
    const auto& law = nl.power_law();
    const double s = 0.5 * grad_norm_sq(v) + 0.5 * law.mass() * l2_norm_sq(v) -
                     power_norm(v, law.p) / (law.p + 1.0);
    return checked(s, "action");
  }
  return checked(0.5 * grad_norm_sq(v) - potential_integral(v.grid(), v.values(), nl), "action");
}

double action_S(const ComplexGridFunction& v, const Nonlinearity& nl) {
  return checked(0.5 * grad_norm_sq(v) - pohozaev_P(v, nl), "action");
}

double constraint_K(const GridFunction& v, const Nonlinearity& nl, const ScalingExponents& se) {
  const auto& law = nl.power_law();
  const int dim = v.grid().dimension();
  nl.check_dimension(dim);
  const auto e = scaling_powers(se.alpha, se.beta, law.p, dim);
  const double k = 0.5 * e.grad * grad_norm_sq(v) + 0.5 * e.mass * law.mass() * l2_norm_sq(v) -
                   e.nonlinear / (law.p + 1.0) * power_norm(v, law.p);
  return checked(k, "constraint");
}

double pohozaev_P(const GridFunction& v, const Nonlinearity& nl) {
  nl.check_dimension(v.grid().dimension());
  return potential_integral(v.grid(), v.values(), nl);
}

double pohozaev_P(const ComplexGridFunction& v, const Nonlinearity& nl) {
  nl.check_dimension(v.grid().dimension());
  std::vector<double> moduli(v.size());
  for (std::size_t i = 0; i < moduli.size(); ++i) moduli[i] = std::abs(v[i]);
  return potential_integral(v.grid(), moduli, nl);
}

double kinetic_T(const GridFunction& v) { return 0.5 * grad_norm_sq(v); }

double energy_E(const GridFunction& u, const GridFunction& v, const Nonlinearity& nl) {
  require_same_grid(u.grid(), v.grid());
  return checked(0.5 * l2_norm_sq(v) + action_S(u, nl), "energy");
}

double pohozaev_residual(const GridFunction& v, const Nonlinearity& nl) {
  const double n = v.grid().dimension();
  return 0.5 * (n - 2.0) * grad_norm_sq(v) - n * pohozaev_P(v, nl);
}

double nehari_residual(const GridFunction& v, const Nonlinearity& nl) {
  const auto w = v.grid().weights();
  double work = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) work += w[i] * nl.g(v[i]) * v[i];
  return checked(grad_norm_sq(v) - work, "Nehari residual");
}

}  // namespace varkg
