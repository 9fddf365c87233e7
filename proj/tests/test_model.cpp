#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "fixtures.hpp"
#include "varkg/model.hpp"
#include "varkg/paths.hpp"

using namespace varkg;
using fixtures::sech;

namespace {

const Nonlinearity cubic = Nonlinearity::power(3.0, 0.0);

GridPtr line_grid() {
  static const GridPtr g = RadialGrid::make(1, 20.0, 40000);
  return g;
}

GridFunction scaled_sech(double c) {
  return GridFunction::sample(line_grid(), [c](double x) { return c * sech(x); });
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected varkg::Error");
  return ErrorCode::InvalidInput;
}

}  // namespace

TEST_CASE("nonlinearity validation") {
  CHECK(code_of([] { Nonlinearity::power(1.0); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { Nonlinearity::power(3.0, 1.0); }) == ErrorCode::InvalidMass);
  CHECK(code_of([] { Nonlinearity::power(3.0, -1.2); }) == ErrorCode::InvalidMass);
  CHECK(code_of([] { Nonlinearity::power(5.0).check_dimension(3); }) == ErrorCode::InvalidParameter);
  CHECK_NOTHROW(Nonlinearity::power(4.9).check_dimension(3));
  CHECK_NOTHROW(Nonlinearity::power(9.0).check_dimension(2));

  // The small-s test wants G ~ -(rho/2) s².
  GeneralLaw wrong{"wrong", [](double s) { return -2.0 * s; }, [](double s) { return -s * s; }, 1.0};
  CHECK(code_of([&] { Nonlinearity::general(wrong); }) == ErrorCode::InvalidInput);
  GeneralLaw shifted{"shifted", [](double s) { return -s; }, [](double s) { return 1.0 - 0.5 * s * s; }, 1.0};
  CHECK(code_of([&] { Nonlinearity::general(shifted); }) == ErrorCode::InvalidInput);
  CHECK(code_of([] { Nonlinearity::registered("nope"); }) == ErrorCode::InvalidParameter);

  const auto names = registered_nonlinearities();
  CHECK(std::find(names.begin(), names.end(), "exponential") != names.end());
  const auto expo = Nonlinearity::registered("exponential");
  CHECK_FALSE(expo.is_power());
  CHECK(expo.linear_coefficient() == 1.0);
  CHECK(code_of([&] { expo.power_law(); }) == ErrorCode::Unsupported);

  const auto w = Nonlinearity::power(3.0, 0.6);
  CHECK(w.linear_coefficient() == doctest::Approx(0.64));
  CHECK(w.g(2.0) == doctest::Approx(-0.64 * 2.0 + 8.0));
  CHECK(w.G(-2.0) == doctest::Approx(-0.32 * 4.0 + 4.0));
}

TEST_CASE("action on the line") {
  CHECK(action_S(GridFunction::zeros(line_grid()), cubic) == 0.0);
  CHECK(std::abs(action_S(scaled_sech(std::sqrt(2.0)), cubic) - 4.0 / 3.0) <= 1e-5);
  CHECK(std::abs(action_S(scaled_sech(2.0 * std::sqrt(2.0)), cubic) + 32.0 / 3.0) <= 1e-4);
}

TEST_CASE("constraint functional") {
  const auto se10 = classify_exponents(1.0, 0.0, 3.0, 1);
  CHECK(constraint_K(GridFunction::zeros(line_grid()), cubic, se10) == 0.0);
  CHECK(std::abs(constraint_K(scaled_sech(std::sqrt(2.0)), cubic, se10)) <= 1e-5);
  const auto& q = fixtures::townes().profile;
  CHECK(std::abs(constraint_K(q, cubic, classify_exponents(1.0, 1.0, 3.0, 2))) <= 0.05);
  CHECK(code_of([&] { constraint_K(q, Nonlinearity::registered("cubic"), se10); }) == ErrorCode::Unsupported);
}

TEST_CASE("Pohozaev functional, kinetic term and energy") {
  const auto phi = scaled_sech(std::sqrt(2.0));
  const auto zero = GridFunction::zeros(line_grid());
  CHECK(pohozaev_P(zero, cubic) == 0.0);
  CHECK(std::abs(pohozaev_P(phi, cubic) + 2.0 / 3.0) <= 1e-5);
  CHECK(std::abs(pohozaev_P(fixtures::townes().profile, cubic)) <= 0.05);

  CHECK(kinetic_T(zero) == 0.0);
  CHECK(std::abs(kinetic_T(phi) - 2.0 / 3.0) <= 1e-5);
  CHECK(std::abs(kinetic_T(fixtures::townes().profile) - 5.850) <= 0.03);

  CHECK(energy_E(zero, zero, cubic) == 0.0);
  CHECK(std::abs(energy_E(phi, zero, cubic) - 4.0 / 3.0) <= 1e-5);
  CHECK(energy_E(phi, zero, cubic) == action_S(phi, cubic));
  CHECK(energy_E(zero, phi, cubic) == doctest::Approx(0.5 * l2_norm_sq(phi)).epsilon(1e-15));
  const auto other = GridFunction::zeros(RadialGrid::make(1, 20.0, 100));
  CHECK(code_of([&] { energy_E(phi, other, cubic); }) == ErrorCode::GridMismatch);
}

TEST_CASE("Pohozaev residual") {
  CHECK(pohozaev_residual(GridFunction::zeros(line_grid()), cubic) == 0.0);
  CHECK(std::abs(pohozaev_residual(scaled_sech(std::sqrt(2.0)), cubic)) <= 1e-5);
  CHECK(std::abs(pohozaev_residual(scaled_sech(1.0), cubic) - 1.0 / 3.0) <= 1e-5);
}

TEST_CASE("exponent classification") {
  CHECK(classify_exponents(1.0, 0.0, 3.0, 2).region == Region::Interior);
  CHECK(classify_exponents(1.0, 1.0, 3.0, 2).region == Region::Limit);
  CHECK(classify_exponents(0.5, 1.0, 3.0, 1).region == Region::Invalid);
  CHECK(classify_exponents(0.0, -1.0, 3.0, 2).region == Region::Limit);
  CHECK(classify_exponents(1.0, -1.0, 3.0, 2).region == Region::Interior);
  // β < 0 with 2α - β(N-2) = 0 in N = 3.
  CHECK(classify_exponents(-0.5, -1.0, 3.0, 3).region == Region::Limit);
  CHECK(classify_exponents(0.0, 0.0, 3.0, 2).region == Region::Invalid);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 500; ++i) {
    const double a = u(rng), b = u(rng), p = 1.5 + std::abs(u(rng));
    for (int dim : {1, 2, 3}) {
      const auto base = classify_exponents(a, b, p, dim).region;
      for (double c : {0.5, 2.0, 4.0}) CHECK(classify_exponents(c * a, c * b, p, dim).region == base);
    }
  }
  // Dyadic pairs keep the boundary equalities exact under scaling.
  for (double c : {0.25, 2.0, 8.0}) CHECK(classify_exponents(c, c, 3.0, 2).region == Region::Limit);
}

TEST_CASE("constraint is the derivative of the action along the rescaling") {
  const double d = 1e-4;
  struct Case {
    int dim;
    double alpha, beta;
  };
  const auto& q = fixtures::townes().profile;
  const auto bump = GridFunction::sample(q.grid_ptr(), [](double r) { return 1.3 * std::exp(-0.7 * r * r); });
  const auto line = GridFunction::sample(RadialGrid::make(1, 20.0, 4000), [](double x) { return 0.8 * sech(1.3 * x); });
  for (const auto& c : {Case{1, 1.0, 0.0}, Case{1, 2.0, 1.0}, Case{1, 1.0, -1.0}, Case{2, 1.0, 0.0}, Case{2, 1.0, 1.0},
                        Case{2, 0.0, -1.0}, Case{2, 2.0, -1.0}, Case{2, 1.0, 0.5}}) {
    const auto se = classify_exponents(c.alpha, c.beta, 3.0, c.dim);
    REQUIRE(se.region != Region::Invalid);
    for (const auto* v : c.dim == 1 ? std::vector<const GridFunction*>{&line}
                                    : std::vector<const GridFunction*>{&q, &bump}) {
      const double fd = (action_S(rescale_exact(*v, 1.0 + d, se), cubic) -
                         action_S(rescale_exact(*v, 1.0 - d, se), cubic)) /
                        (2.0 * d);
      const double k = constraint_K(*v, cubic, se);
      // Relative to the size of the terms, since K itself vanishes at Q.
      const double scale = std::max(std::abs(k), h1_norm(*v) * h1_norm(*v));
      CHECK(std::abs(fd - k) <= 1e-5 * scale);
    }
  }
  // Pure amplitude scaling needs no resampling, so the interpolated rescale
  // gives the same derivative.
  const auto se = classify_exponents(1.0, 0.0, 3.0, 2);
  const double fd =
      (action_S(rescale(bump, 1.0 + d, se), cubic) - action_S(rescale(bump, 1.0 - d, se), cubic)) / (2.0 * d);
  CHECK(fd == doctest::Approx(constraint_K(bump, cubic, se)).epsilon(1e-6));
}

TEST_CASE("constraint values at the ground state span from two identities") {
  const auto& gs = fixtures::townes();
  const double h1sq = h1_norm(gs.profile) * h1_norm(gs.profile);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int i = 0; i < 100; ++i) {
    ScalingExponents se{u(rng), u(rng), Region::Invalid};
    CHECK(std::abs(constraint_K(gs.profile, cubic, se)) <= 1e-3 * (std::abs(se.alpha) + std::abs(se.beta)) * h1sq);
  }
  const auto& line = fixtures::sech_1d();
  const double h1line = h1_norm(line.profile) * h1_norm(line.profile);
  for (int i = 0; i < 100; ++i) {
    ScalingExponents se{u(rng), u(rng), Region::Invalid};
    CHECK(std::abs(constraint_K(line.profile, cubic, se)) <= 1e-3 * (std::abs(se.alpha) + std::abs(se.beta)) * h1line);
  }
}

TEST_CASE("scaling powers") {
  const auto s = scaling_powers(1.0, 1.0, 3.0, 2);
  CHECK(s.grad == 2.0);
  CHECK(s.mass == 0.0);
  CHECK(s.nonlinear == 2.0);
  const auto t = scaling_powers(0.0, -1.0, 3.0, 2);
  CHECK(t.grad == 0.0);
  CHECK(t.mass == 2.0);
  CHECK(t.nonlinear == 2.0);
}

TEST_CASE("potential depends on the modulus only") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  auto g = RadialGrid::make(2, 10.0, 200);
  for (const auto& nl : {cubic, Nonlinearity::power(2.5, 0.3), Nonlinearity::registered("exponential")}) {
    std::vector<std::complex<double>> vals(g->size());
    for (auto& x : vals) x = 0.5 * std::complex<double>(z(rng), z(rng));
    vals.back() = 0.0;
    ComplexGridFunction v(g, vals);
    CHECK(pohozaev_P(v, nl) == pohozaev_P(modulus(v), nl));
    CHECK(action_S(modulus(v), nl) <= action_S(v, nl));
  }
}

TEST_CASE("general nonlinearity functionals") {
  const auto lin = Nonlinearity::registered("linear");
  const auto phi = scaled_sech(std::sqrt(2.0));
  CHECK(pohozaev_P(phi, lin) == doctest::Approx(-0.5 * l2_norm_sq(phi)));
  CHECK(action_S(phi, lin) == doctest::Approx(0.5 * grad_norm_sq(phi) + 0.5 * l2_norm_sq(phi)));
  // The registered cubic and the power law agree.
  const auto reg = Nonlinearity::registered("cubic");
  CHECK(action_S(phi, reg) == doctest::Approx(action_S(phi, cubic)).epsilon(1e-12));
  CHECK(nehari_residual(phi, reg) == doctest::Approx(constraint_K(phi, cubic, {1.0, 0.0, Region::Interior})).scale(1.0));
  const auto big = GridFunction::sample(RadialGrid::make(2, 5.0, 50), [](double r) { return r < 1.0 ? 40.0 : 0.0; });
  CHECK(code_of([&] { pohozaev_P(big, Nonlinearity::registered("exponential")); }) == ErrorCode::NumericalOverflow);
}
