#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "varkg/radial_grid.hpp"

using namespace varkg;
using fixtures::sech;

namespace {

GridFunction root2_sech(int M = 40000) {
  return GridFunction::sample(RadialGrid::make(1, 20.0, M), [](double x) { return std::sqrt(2.0) * sech(x); });
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

TEST_CASE("weights integrate the constant to the domain measure") {
  for (int dim : {1, 2, 3}) {
    for (int M : {16, 101, 4000}) {
      auto g = RadialGrid::make(dim, 7.5, M);
      double sum = 0.0;
      for (double w : g->weights()) {
        CHECK(w >= 0.0);
        sum += w;
      }
      CHECK(std::abs(sum - g->domain_measure()) <= 1e-12 * g->domain_measure());
      CHECK(g->spacing() > 0.0);
      CHECK(g->size() == static_cast<std::size_t>(M) + 1);
    }
  }
}

TEST_CASE("grid construction rejects bad parameters") {
  CHECK(code_of([] { RadialGrid::make(2, 10.0, 15); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { RadialGrid::make(4, 10.0, 100); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { RadialGrid::make(2, -1.0, 100); }) == ErrorCode::InvalidParameter);
}

TEST_CASE("grid functions validate their values") {
  auto g2 = RadialGrid::make(2, 5.0, 20);
  std::vector<double> bad(g2->size(), 0.0);
  bad[3] = NAN;
  CHECK(code_of([&] { GridFunction(g2, bad); }) == ErrorCode::InvalidInput);
  std::vector<double> edge(g2->size(), 0.0);
  edge.back() = 1.0;
  CHECK(code_of([&] { GridFunction(g2, edge); }) == ErrorCode::InvalidInput);
  CHECK(code_of([&] { GridFunction(g2, std::vector<double>(3)); }) == ErrorCode::InvalidInput);
  // N = 1 keeps its outer value.
  auto g1 = RadialGrid::make(1, 5.0, 20);
  CHECK_NOTHROW(GridFunction(g1, std::vector<double>(g1->size(), 1.0)));
  auto sampled = GridFunction::sample(g2, [](double) { return 1.0; });
  CHECK(sampled[sampled.size() - 1] == 0.0);
}

TEST_CASE("l2 and gradient norms of closed-form profiles") {
  auto g = RadialGrid::make(1, 20.0, 40000);
  CHECK(l2_norm_sq(GridFunction::zeros(g)) == 0.0);
  CHECK(grad_norm_sq(GridFunction::zeros(g)) == 0.0);
  const auto v = root2_sech();
  CHECK(std::abs(l2_norm_sq(v) - 4.0) <= 1e-6);
  CHECK(std::abs(grad_norm_sq(v) - 4.0 / 3.0) <= 1e-5);

  const auto& q = fixtures::townes().profile;
  CHECK(std::abs(l2_norm_sq(q) - 11.7009) <= 0.01);
  CHECK(std::abs(grad_norm_sq(q) - 11.7009) <= 0.05);
}

TEST_CASE("gaussian quadrature in the plane converges at second order") {
  // ∫ e^{-2r²} 2πr dr over [0, R] = (π/2)(1 - e^{-2R²}).
  const double R = 3.0;
  const double exact = 0.5 * std::numbers::pi * (1.0 - std::exp(-2.0 * R * R));
  double previous = 0.0;
  for (int M : {25, 50, 100, 200}) {
    auto v = GridFunction::sample(RadialGrid::make(2, R, M), [](double r) { return std::exp(-r * r); });
    const double err = std::abs(l2_norm_sq(v) - exact);
    if (previous > 0.0) CHECK(previous / err >= 3.5);
    previous = err;
  }
}

TEST_CASE("norms are homogeneous of degree two") {
  const auto& q = fixtures::townes().profile;
  for (double c : {-3.0, 0.1, 2.5, 7.0}) {
    const auto v = q.scaled(c);
    CHECK(std::abs(l2_norm_sq(v) - c * c * l2_norm_sq(q)) <= 1e-13 * c * c * l2_norm_sq(q));
    CHECK(std::abs(grad_norm_sq(v) - c * c * grad_norm_sq(q)) <= 1e-13 * c * c * grad_norm_sq(q));
  }
}

TEST_CASE("modulus never increases the discrete kinetic energy") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> z;
  for (int dim : {1, 2, 3}) {
    auto g = RadialGrid::make(dim, 10.0, 64);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<std::complex<double>> vals(g->size());
      for (auto& x : vals) x = {z(rng), z(rng)};
      if (dim >= 2) vals.back() = 0.0;
      ComplexGridFunction v(g, vals);
      CHECK(grad_norm_sq(modulus(v)) <= grad_norm_sq(v));
      CHECK(l2_norm_sq(modulus(v)) == doctest::Approx(l2_norm_sq(v)).epsilon(1e-14));
    }
  }
}

TEST_CASE("laplacian matches the radial stencil and is the gradient of the Dirichlet form") {
  for (int dim : {1, 2, 3}) {
    auto g = RadialGrid::make(dim, 4.0, 40);
    std::vector<double> r2(g->size()), lap(g->size());
    for (std::size_t i = 0; i < r2.size(); ++i) r2[i] = g->r(i) * g->r(i);
    apply_laplacian(*g, r2, lap);
    CHECK(std::abs(lap[0] - 2.0 * dim) <= 1e-10);
    for (std::size_t i = 1; i + 1 < lap.size(); ++i) CHECK(std::abs(lap[i] - 2.0 * dim) <= 1e-9);
  }
  // -<u, Δu>_w = ||∇u||² for u vanishing at R.
  auto g = RadialGrid::make(2, 6.0, 120);
  auto u = GridFunction::sample(g, [](double r) { return std::exp(-r * r) * (1.0 + r); });
  std::vector<double> lap(g->size());
  apply_laplacian(*g, u.values(), lap);
  double pairing = 0.0;
  for (std::size_t i = 0; i < lap.size(); ++i) pairing += g->weights()[i] * u[i] * lap[i];
  CHECK(-pairing == doctest::Approx(grad_norm_sq(u)).epsilon(1e-12));
}

TEST_CASE("centered derivative with even symmetry at the origin") {
  auto g = RadialGrid::make(2, 5.0, 500);
  auto v = GridFunction::sample(g, [](double r) { return std::exp(-r * r); });
  const auto d = radial_derivative(v);
  CHECK(d[0] == 0.0);
  CHECK(d[100] == doctest::Approx(-2.0 * std::exp(-1.0)).epsilon(1e-4));
}

TEST_CASE("decay profile of the planar ground state") {
  const auto& q = fixtures::townes().profile;
  const auto prof = strauss_decay_profile(q);
  double peak = 0.0;
  for (double x : prof.ratio) peak = std::max(peak, x);
  CHECK(peak <= 1.0);
  for (std::size_t i = 1; i < prof.r.size(); ++i)
    if (prof.r[i - 1] >= 5.0) CHECK(prof.ratio[i] <= prof.ratio[i - 1]);

  const auto twice = strauss_decay_profile(q.scaled(2.0));
  for (std::size_t i = 0; i < prof.ratio.size(); i += 97)
    CHECK(twice.ratio[i] == doctest::Approx(prof.ratio[i]).epsilon(1e-13));
}

TEST_CASE("decay profile of a plateau") {
  // The weighted sup r^{1/2}|v| of the plateau grows like sqrt(R); the
  // normalized ratio stays below 1.
  auto plateau = [](double R) {
    auto g = RadialGrid::make(2, R, 400);
    return GridFunction::sample(g, [](double) { return 1.0; });
  };
  auto raw_peak = [](const GridFunction& v) {
    const auto p = strauss_decay_profile(v);
    double best = 0.0;
    for (double x : p.ratio) best = std::max(best, x * h1_norm(v));
    return best;
  };
  const auto a = plateau(10.0), b = plateau(20.0);
  CHECK(raw_peak(b) / raw_peak(a) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
  for (const auto* v : {&a, &b})
    for (double x : strauss_decay_profile(*v).ratio) CHECK(x <= 1.0);
}

TEST_CASE("decay profile errors") {
  CHECK(code_of([] { strauss_decay_profile(root2_sech(100)); }) == ErrorCode::Unsupported);
  CHECK(code_of([] { strauss_decay_profile(GridFunction::zeros(RadialGrid::make(2, 5.0, 50))); }) ==
        ErrorCode::InvalidInput);
}

TEST_CASE("support radius and interpolation") {
  auto g = RadialGrid::make(2, 10.0, 100);
  auto v = GridFunction::sample(g, [](double r) { return r < 3.05 ? 1.0 : 0.0; });
  CHECK(support_radius(v) == doctest::Approx(3.0));
  CHECK(support_radius(GridFunction::zeros(g)) == 0.0);

  // Cubic Lagrange reproduces cubics away from the reflection and the cutoff.
  auto g1 = RadialGrid::make(1, 10.0, 100);
  auto cubic = [](double r) { return 1.0 - 0.3 * r + 0.05 * r * r - 0.002 * r * r * r; };
  auto c = GridFunction::sample(g1, cubic);
  for (double r : {1.03, 2.5, 4.77, 8.91}) CHECK(interpolate(c, r) == doctest::Approx(cubic(r)).epsilon(1e-12));
  CHECK(interpolate(c, 0.4) == interpolate(c, -0.4));
  CHECK(interpolate(c, 10.5) == 0.0);
  CHECK(interpolate(c, 2.0) == c[20]);
}

TEST_CASE("csv round trip is exact") {
  const auto& q = fixtures::townes().profile;
  std::stringstream s;
  write_csv(s, q);
  const auto back = read_grid_function_csv(s);
  REQUIRE(back.grid().same_as(q.grid()));
  for (std::size_t i = 0; i < q.size(); ++i) CHECK(back[i] == q[i]);

  auto g = RadialGrid::make(2, 3.0, 30);
  auto z = ComplexGridFunction::sample(g, [](double r) { return std::complex<double>(std::cos(r), 0.1 * r); });
  std::stringstream sc;
  write_csv(sc, z);
  CHECK(sc.str().rfind("# N=2 R=3 M=30\nr,re,im\n", 0) == 0);
  const auto zb = read_complex_grid_function_csv(sc);
  for (std::size_t i = 0; i < z.size(); ++i) CHECK(zb[i] == z[i]);

  std::stringstream broken("# N=2 R=3\nr,value\n0,1\n");
  CHECK(code_of([&] { read_grid_function_csv(broken); }) == ErrorCode::InvalidInput);
  std::stringstream shifted("# N=1 R=1.6 M=16\n0.5,1\n");
  CHECK(code_of([&] { read_grid_function_csv(shifted); }) == ErrorCode::GridMismatch);
}

TEST_CASE("number formatting round-trips") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.0}) CHECK(std::stod(format_number(x)) == x);
  CHECK(format_number(0.5) == "0.5");
}
