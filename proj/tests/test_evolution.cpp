#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "varkg/evolution.hpp"

using namespace varkg;

namespace {

constexpr double kJ01 = 2.404825557695773;

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected varkg::Error");
  return ErrorCode::InvalidInput;
}

GridFunction eigenmode(GridPtr g) {
  const double R = g->radius();
  return GridFunction::sample(g, [R](double r) { return std::cyl_bessel_j(0.0, kJ01 * r / R); });
}

double eigen_period(double R) { return 2.0 * std::numbers::pi / std::sqrt(std::pow(kJ01 / R, 2) + 1.0); }

GridPtr evolution_grid() {
  static const GridPtr g = RadialGrid::make(2, 80.0, 4000);
  return g;
}

}  // namespace

TEST_CASE("zero state stays at rest") {
  auto g = RadialGrid::make(2, 10.0, 100);
  const auto nl = Nonlinearity::power(3.0);
  const auto z = GridFunction::zeros(g);
  const auto next = step({z, z, 0.0}, 0.04, nl);
  REQUIRE(next);
  for (std::size_t i = 0; i < next->u.size(); ++i) CHECK(next->u[i] == 0.0);
  CHECK(next->t == doctest::Approx(0.04));

  const auto traj = evolve(z, z, nl, 2.0, 5.0);
  CHECK(traj.termination == Termination::ReachedTmax);
  CHECK(traj.end_time == 2.0);
  for (const auto& r : traj.records) {
    CHECK(r.E == 0.0);
    CHECK(r.P == 0.0);
    CHECK(r.h1 == 0.0);
  }
  CHECK(energy_drift(traj) == 0.0);
  CHECK(code_of([&] { invariant_monitor(traj); }) == ErrorCode::PreconditionFailed);
}

TEST_CASE("step preconditions and non-finite detection") {
  auto g = RadialGrid::make(2, 10.0, 100);
  const auto nl = Nonlinearity::power(3.0);
  const auto z = GridFunction::zeros(g);
  CHECK(code_of([&] { step({z, z, 0.0}, 0.05, nl); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([&] { step({z, z, 0.0}, 0.0, nl); }) == ErrorCode::InvalidParameter);
  const auto huge = GridFunction::sample(g, [](double r) { return r < 2.0 ? 1e200 : 0.0; });
  CHECK_FALSE(step({huge, z, 0.0}, 0.04, nl).has_value());
  CHECK(code_of([&] { evolve(z, z, nl, 1.0, 1.0); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([&] { evolve(z, GridFunction::zeros(RadialGrid::make(2, 10.0, 50)), nl, 1.0, 5.0); }) ==
        ErrorCode::GridMismatch);
}

TEST_CASE("origin stencil is exact on r squared") {
  for (int dim : {1, 2, 3}) {
    auto g = RadialGrid::make(dim, 5.0, 50);
    std::vector<double> r2(g->size()), lap(g->size());
    for (std::size_t i = 0; i < r2.size(); ++i) r2[i] = g->r(i) * g->r(i);
    apply_laplacian(*g, r2, lap);
    CHECK(std::abs(lap[0] - 2.0 * dim) <= 1e-10);
  }
}

TEST_CASE("linear eigenmode converges at second order") {
  const double R = 10.0;
  const auto lin = Nonlinearity::registered("linear");
  std::vector<double> errors;
  for (int M : {100, 200, 400}) {
    auto g = RadialGrid::make(2, R, M);
    const auto u0 = eigenmode(g);
    const auto traj = evolve(u0, GridFunction::zeros(g), lin, eigen_period(R), 5.0, {.diag_stride = 1000});
    REQUIRE(traj.termination == Termination::ReachedTmax);
    double err = 0.0;
    for (std::size_t i = 0; i < u0.size(); ++i) err = std::max(err, std::abs(traj.final_state->u[i] - u0[i]));
    errors.push_back(err);
  }
  CHECK(errors[0] / errors[1] >= 3.5);
  CHECK(errors[1] / errors[2] >= 3.5);
}

TEST_CASE("linear eigenmode conserves energy over ten periods") {
  const double R = 10.0;
  auto g = RadialGrid::make(2, R, 1000);
  const auto traj = evolve(eigenmode(g), GridFunction::zeros(g), Nonlinearity::registered("linear"),
                           10.0 * eigen_period(R), 5.0, {.diag_stride = 50});
  CHECK(traj.termination == Termination::ReachedTmax);
  CHECK(std::abs(energy_drift(traj)) <= 1e-5);
  for (std::size_t i = 1; i < traj.records.size(); ++i) CHECK(traj.records[i].t > traj.records[i - 1].t);

  // Linear data have P < 0, so they are outside the invariant set.
  auto low = traj;
  low.level = 100.0;
  for (auto& r : low.records) r.in_I = r.E < low.level && r.P > 0.0;
  CHECK(code_of([&] { invariant_monitor(low); }) == ErrorCode::PreconditionFailed);
}

TEST_CASE("leapfrog is time reversible") {
  auto g = RadialGrid::make(2, 20.0, 400);
  const auto nl = Nonlinearity::power(3.0);
  EvolutionState s{GridFunction::sample(g, [](double r) { return 1.5 * std::exp(-r * r); }), GridFunction::zeros(g), 0.0};
  const auto start = s;
  const double dt = 0.4 * g->spacing();
  for (int n = 0; n < 200; ++n) s = *step(s, dt, nl);
  s.v = s.v.scaled(-1.0);
  for (int n = 0; n < 200; ++n) s = *step(s, dt, nl);
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < s.u.size(); ++i) {
    err = std::max(err, std::abs(s.u[i] - start.u[i]));
    scale = std::max(scale, std::abs(start.u[i]));
  }
  CHECK(err <= 1e-10 * scale);
}

TEST_CASE("half steps agree with a full step to third order") {
  auto g = RadialGrid::make(2, 20.0, 400);
  const auto nl = Nonlinearity::power(3.0);
  const EvolutionState s{GridFunction::sample(g, [](double r) { return 1.2 * std::exp(-0.5 * r * r); }),
                         GridFunction::sample(g, [](double r) { return 0.3 * std::exp(-r * r); }), 0.0};
  auto gap = [&](double dt) {
    const auto full = *step(s, dt, nl);
    const auto half = *step(*step(s, 0.5 * dt, nl), 0.5 * dt, nl);
    double d = 0.0;
    for (std::size_t i = 0; i < full.u.size(); ++i) d = std::max(d, std::abs(full.u[i] - half.u[i]));
    return d;
  };
  const double a = gap(0.02), b = gap(0.01);
  CHECK(a / b >= 7.0);
  CHECK(a / b <= 9.0);
}

TEST_CASE("initial data near the planar ground state") {
  const auto& gs = fixtures::townes();
  const auto grid = evolution_grid();
  const auto at_q = make_initial_data(gs, 1.0, 1.0, grid);
  CHECK(at_q.S == doctest::Approx(at_q.level).epsilon(1e-12));
  CHECK(std::abs(at_q.P) <= 1e-3);
  CHECK_FALSE(at_q.in_I);

  const auto d = make_initial_data(gs, 1.05, 1.05, grid);
  CHECK(d.S / d.level == doctest::Approx(0.9779).epsilon(5e-4));
  CHECK(std::abs(d.S - 5.721) <= 0.03);
  CHECK(std::abs(d.P - 0.729) <= 0.005);
  CHECK(d.E == d.S);
  CHECK(d.in_I);

  const auto below = make_initial_data(gs, 0.9, 1.0, grid);
  CHECK(below.P < 0.0);
  CHECK_FALSE(below.in_I);

  CHECK(code_of([&] { make_initial_data(gs, 1.0, 5.0, grid); }) == ErrorCode::TruncationOverflow);
  CHECK(code_of([&] { make_initial_data(gs, -1.0, 1.0, grid); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([&] { make_initial_data(gs, 1.0, 1.0, RadialGrid::make(1, 80.0, 400)); }) == ErrorCode::Unsupported);
}

TEST_CASE("data in the invariant set escape while staying inside it") {
  const auto& gs = fixtures::townes();
  const auto d = make_initial_data(gs, 1.05, 1.05, evolution_grid());
  EvolveOptions opts;
  opts.level = d.level;
  const auto traj = evolve(d.u, GridFunction::zeros(evolution_grid()), evolution_nonlinearity(gs.nonlinearity), 50.0,
                           5.0, opts);
  CHECK(traj.termination == Termination::BlowupDetected);
  CHECK(traj.end_time < 50.0);
  const auto rep = invariant_monitor(traj);
  CHECK(rep.in_I_throughout);
  CHECK_FALSE(rep.first_exit.has_value());
  CHECK(rep.min_P >= 0.5 * rep.P0);
  CHECK(rep.delta_obs > 0.0);
  CHECK(rep.min_T_margin >= -1e-3 * d.level);
  CHECK(std::abs(energy_drift(traj)) <= 1e-3);
}

TEST_CASE("radiation reaching the outer shell stops the run") {
  auto g = RadialGrid::make(2, 10.0, 200);
  const auto u0 = GridFunction::sample(g, [](double r) { return std::exp(-4.0 * r * r); });
  const auto traj = evolve(u0, GridFunction::zeros(g), Nonlinearity::registered("linear"), 30.0, 5.0, {.diag_stride = 5});
  CHECK(traj.termination == Termination::BoundaryContamination);
  CHECK(traj.end_time < 30.0);
  CHECK(traj.end_time > 5.0);
}

TEST_CASE("evolution nonlinearity drops the frequency") {
  const auto nl = evolution_nonlinearity(Nonlinearity::power(3.0, 0.6));
  CHECK(nl.linear_coefficient() == 1.0);
  CHECK(nl.g(2.0) == doctest::Approx(6.0));
  const auto expo = Nonlinearity::registered("exponential");
  CHECK(evolution_nonlinearity(expo).name() == expo.name());
}
