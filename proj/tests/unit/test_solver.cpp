#include <cmath>
#include <random>

#include <doctest.h>

#include "support.hpp"
#include "swarmsim/diagnostics.hpp"
#include "swarmsim/solver.hpp"

using namespace swarmsim;

namespace {

struct Setup {
  CoefficientSet cs;
  SolverConfig cfg;
  SpaceGrid space = SpaceGrid::make(8, 8, 1.0, 1.0);
  AgeGrid age;

  Setup() {
    cfg.dt = 0.125;
    cfg.t_end = 0.5;
    age = AgeGrid::make(cs.A, cfg.dt, cs.a_min);
  }
  Solver solver() const { return Solver(cs, cfg, space, age); }
};

SwarmerField bump_rho(const SpaceGrid& g, const AgeGrid& a, double amp) {
  SwarmerField r(g, a);
  for (int k = 0; k < a.na; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double x = g.x_center(i) - 0.4, y = g.y_center(j) - 0.6, s = a.age(k) - 0.5;
        r.at(k, i, j) = amp * std::exp(-(x * x + y * y) / 0.05 - s * s / 0.1);
      }
  return r;
}

ScalarField bump_q(const SpaceGrid& g, double amp) {
  ScalarField q(g, FieldRole::Q);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double x = g.x_center(i) - 0.5, y = g.y_center(j) - 0.5;
      q(i, j) = amp * std::exp(-(x * x + y * y) / 0.04);
    }
  return q;
}

}  // namespace

TEST_CASE("time step must match the age step") {
  Setup s;
  s.cfg.dt = 0.1;
  CHECK_THROWS_AS(s.solver(), std::invalid_argument);
}

TEST_CASE("Q step: constant with xi = 1, exponential with xi = 0") {
  Setup s;
  s.cs.xi = {XiModel::constant, 1.0, 1.0};
  auto q = bump_q(s.space, 1.5);
  ScalarField zero(s.space, FieldRole::Q);
  CHECK(s.solver().step_Q(q, zero, 0.0) == q);

  s.cs.xi.value = 0.0;
  s.cs.tau = 0.7;
  auto out = s.solver().step_Q(q, zero, 0.0);
  for (std::size_t c = 0; c < q.size(); ++c) CHECK(out[c] == doctest::Approx(q[c] * std::exp(0.125 / 0.7)).epsilon(1e-14));
}

TEST_CASE("Q source of the finite-age reduction is the top level flux") {
  Setup s;
  s.cs.tau = 2.0;
  auto rho = bump_rho(s.space, s.age, 1.0);
  auto src = s.solver().q_source(rho, 0.0);
  const auto top = rho.level(s.age.na - 1);
  for (std::size_t c = 0; c < src.size(); ++c) CHECK(src[c] == doctest::Approx(top[c] * std::exp(0.5)));
}

TEST_CASE("transport along characteristics is exact") {
  Setup s;
  s.cs.xi.value = 0.0;
  s.cfg.diffusion_enabled = false;
  auto solver = s.solver();
  auto rho0 = bump_rho(s.space, s.age, 1.0);
  auto state = solver.make_state(rho0, bump_q(s.space, 1.0), ScalarField(s.space, FieldRole::M));
  for (int n = 1; n <= 4; ++n) {
    state = solver.advance(state).state;
    for (int k = 0; k < s.age.na; ++k) {
      const auto lvl = state.rho.level(k);
      if (k < n) {
        for (double v : lvl) CHECK(v == 0.0);
      } else {
        const auto src = rho0.level(k - n);
        for (std::size_t c = 0; c < lvl.size(); ++c) CHECK(lvl[c] == src[c]);
      }
    }
  }
}

TEST_CASE("constant dedifferentiation rate decays by the exact factor") {
  Setup s;
  s.cs.mu = {MuModel::constant, 0.8, 1.0};
  s.cs.xi.value = 0.0;
  s.cfg.diffusion_enabled = false;
  auto solver = s.solver();
  auto rho0 = bump_rho(s.space, s.age, 1.0);
  auto next = solver.advance(solver.make_state(rho0, bump_q(s.space, 1.0), ScalarField(s.space, FieldRole::M)));
  for (int k = 1; k < s.age.na; ++k)
    for (std::size_t c = 0; c < s.space.cells(); ++c)
      CHECK(next.state.rho.level(k)[c] == doctest::Approx(rho0.level(k - 1)[c] * std::exp(-0.8 * 0.125)).epsilon(1e-15));
}

TEST_CASE("tiny diffusion only perturbs the shift") {
  Setup s;
  s.cs.xi.value = 0.0;
  s.cs.d = 1e-9;
  s.cs.diffusion.kind = DiffusionKind::zero;
  s.cfg.scheme = DiffusionScheme::explicit_euler;
  auto solver = s.solver();
  auto rho0 = bump_rho(s.space, s.age, 1.0);
  auto next = solver.advance(solver.make_state(rho0, bump_q(s.space, 1.0), ScalarField(s.space, FieldRole::M)));
  const double bound = 10.0 * s.cs.d * s.cfg.dt / (s.space.dx() * s.space.dx());
  for (int k = 1; k < s.age.na; ++k)
    for (std::size_t c = 0; c < s.space.cells(); ++c)
      CHECK(std::abs(next.state.rho.level(k)[c] - rho0.level(k - 1)[c]) <= bound);
}

TEST_CASE("zero data stays exactly zero") {
  Setup s;
  auto solver = s.solver();
  auto res = run(solver, solver.make_state(SwarmerField(s.space, s.age), ScalarField(s.space, FieldRole::Q),
                                           ScalarField(s.space, FieldRole::M)));
  REQUIRE(res.ok);
  for (double v : res.final_state.rho.values()) CHECK(v == 0.0);
  for (double v : res.final_state.Q.values()) CHECK(v == 0.0);
  for (const auto& r : res.reports) CHECK(r.biomass_residual == 0.0);
}

TEST_CASE("random nonnegative data stays nonnegative") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Setup s;
    s.cs.mu = {MuModel::smooth, 2.0 * u(rng), 0.3};
    s.cs.xi = {XiModel::logistic, u(rng), 0.5};
    auto solver = s.solver();
    SwarmerField rho(s.space, s.age);
    for (auto& v : rho.values()) v = u(rng) < 0.5 ? 0.0 : 3.0 * u(rng);
    ScalarField q(s.space, FieldRole::Q);
    for (auto& v : q.values()) v = u(rng) < 0.5 ? 0.0 : u(rng);
    auto res = run(solver, solver.make_state(rho, q, ScalarField(s.space, FieldRole::M)));
    CHECK(res.ok);
    for (const auto& r : res.reports) {
      CHECK(r.min_rho >= 0.0);
      CHECK(r.min_Q >= 0.0);
    }
  }
}

TEST_CASE("biomass residual is first order") {
  double prev = 0.0;
  for (int n : {16, 32, 64}) {
    Setup s;
    s.space = SpaceGrid::make(n, n, 1.0, 1.0);
    s.cfg.dt = 1.0 / n;
    s.age = AgeGrid::make(1.0, s.cfg.dt, s.cs.a_min);
    auto solver = s.solver();
    auto res = run(solver, solver.make_state(bump_rho(s.space, s.age, 1.0), bump_q(s.space, 1.0),
                                             ScalarField(s.space, FieldRole::M)));
    REQUIRE(res.ok);
    double mx = 0.0;
    for (const auto& r : res.reports) mx = std::max(mx, r.biomass_residual);
    if (prev > 0.0) CHECK(std::log2(prev / mx) > 0.9);
    prev = mx;
  }
}

TEST_CASE("Picard with a state-independent law takes one iteration") {
  Setup s;
  s.cs.diffusion.kind = DiffusionKind::zero;
  s.cfg.mode = SolverMode::picard;
  auto solver = s.solver();
  auto res = run(solver, solver.make_state(bump_rho(s.space, s.age, 2.0), bump_q(s.space, 1.0),
                                           ScalarField(s.space, FieldRole::M, 1.0)));
  REQUIRE(res.ok);
  for (std::size_t i = 1; i < res.reports.size(); ++i) CHECK(res.reports[i].picard_iters == 1);
}

TEST_CASE("Picard and direct modes agree to first order") {
  Setup s;
  s.cs.diffusion.gamma = GammaVariant::one;
  s.cs.diffusion.kind = DiffusionKind::mkk;
  auto rho = bump_rho(s.space, s.age, 3.0);
  auto q = bump_q(s.space, 1.0);
  ScalarField m(s.space, FieldRole::M, 1.0);
  auto direct = run(s.solver(), s.solver().make_state(rho, q, m));
  s.cfg.mode = SolverMode::picard;
  auto picard = run(s.solver(), s.solver().make_state(rho, q, m));
  REQUIRE(direct.ok);
  REQUIRE(picard.ok);
  double diff = 0.0, norm = 0.0;
  for (std::size_t c = 0; c < q.size(); ++c) {
    diff = std::max(diff, std::abs(direct.final_state.Q[c] - picard.final_state.Q[c]));
    norm = std::max(norm, direct.final_state.Q[c]);
  }
  CHECK(diff <= 0.1 * norm);
  for (std::size_t i = 1; i < picard.reports.size(); ++i) {
    const auto& inc = picard.reports[i].picard_increments;
    for (std::size_t k = 1; k < inc.size(); ++k) CHECK(inc[k] <= inc[k - 1] * (1.0 + 1e-12));
  }
}

TEST_CASE("thread count does not change results") {
  Setup s;
  auto rho = bump_rho(s.space, s.age, 3.0);
  auto q = bump_q(s.space, 1.0);
  ScalarField m(s.space, FieldRole::M, 1.0);
  auto a = run(s.solver(), s.solver().make_state(rho, q, m));
  s.cfg.threads = 3;
  auto b = run(s.solver(), s.solver().make_state(rho, q, m));
  CHECK(a.final_state == b.final_state);
}

TEST_CASE("empty horizon and tripwires") {
  Setup s;
  s.cfg.t_end = 0.0;
  auto rho = bump_rho(s.space, s.age, 3.0);
  auto q = bump_q(s.space, 1.0);
  ScalarField m(s.space, FieldRole::M);
  auto r0 = run(s.solver(), s.solver().make_state(rho, q, m));
  CHECK(r0.ok);
  CHECK(r0.reports.size() == 1);

  s.cfg.t_end = 0.3;
  auto bad = run(s.solver(), s.solver().make_state(rho, q, m));
  CHECK_FALSE(bad.ok);

  s.cfg.t_end = 0.5;
  s.cfg.l2_blowup_factor = 1.01;
  auto trip = run(s.solver(), s.solver().make_state(rho, q, m));
  CHECK_FALSE(trip.ok);
  CHECK(trip.error.find("blow-up") != std::string::npos);
}
