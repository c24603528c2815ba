#include <cmath>
#include <numbers>
#include <random>
#include <algorithm>

#include <doctest.h>

#include "swarmsim/diffusion.hpp"

using namespace swarmsim;

namespace {

// Max error of the implicit scheme on u = 1 + cos(pi x / lx) at time T.
double heat_mode_error(int n, double k, double T) {
  auto g = SpaceGrid::make(n, 3, 1.0, 0.5);
  const double dt = 0.1 * g.dx() * g.dx();
  const int steps = static_cast<int>(std::lround(T / dt));
  std::vector<double> coeff(g.cells(), k), u(g.cells()), next(g.cells());
  const double w = std::numbers::pi / g.lx;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) u[g.index(i, j)] = 1.0 + std::cos(w * g.x_center(i));
  DiffusionOperator op(g, coeff, dt);
  for (int s = 0; s < steps; ++s) {
    op.solve_implicit(u, next, CgOptions{1e-13, 2000});
    u.swap(next);
  }
  const double t = steps * dt;
  double err = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      err = std::max(err, std::abs(u[g.index(i, j)] - 1.0 - std::exp(-k * w * w * t) * std::cos(w * g.x_center(i))));
  return err;
}

}  // namespace

TEST_CASE("implicit heat mode decays at the Neumann rate") {
  const double e1 = heat_mode_error(8, 0.5, 0.05);
  const double e2 = heat_mode_error(16, 0.5, 0.05);
  const double e3 = heat_mode_error(32, 0.5, 0.05);
  CHECK(e1 < 1e-2);
  CHECK(std::log2(e1 / e2) > 1.9);
  CHECK(std::log2(e2 / e3) > 1.9);
}

TEST_CASE("implicit solve preserves sign, mass and constants") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto g = SpaceGrid::make(12, 9, 1.0, 1.0);
  std::vector<double> coeff(g.cells()), b(g.cells()), x(g.cells());
  for (auto& c : coeff) c = 0.001 + u(rng);
  for (auto& v : b) v = u(rng) < 0.3 ? 0.0 : u(rng);
  DiffusionOperator op(g, coeff, 10.0 * explicit_dt_limit(g, *std::max_element(coeff.begin(), coeff.end())));
  auto r = op.solve_implicit(b, x, CgOptions{});
  CHECK(r.converged);
  double mb = 0.0, mx = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    CHECK(x[i] >= 0.0);
    mb += b[i];
    mx += x[i];
  }
  CHECK(mx == doctest::Approx(mb).epsilon(1e-8));

  std::vector<double> ones(g.cells(), 2.0);
  op.solve_implicit(ones, x, CgOptions{});
  for (double v : x) CHECK(v == doctest::Approx(2.0).epsilon(1e-9));

  std::vector<double> zero(g.cells(), 0.0);
  auto rz = op.solve_implicit(zero, x, CgOptions{});
  CHECK(rz.iterations == 0);
  for (double v : x) CHECK(v == 0.0);
}

TEST_CASE("explicit step and stability limit") {
  auto g = SpaceGrid::make(10, 10, 1.0, 1.0);
  std::vector<double> coeff(g.cells(), 0.5);
  const double lim = explicit_dt_limit(g, 0.5);
  CHECK(lim == doctest::Approx(1.0 / (0.5 * 4.0 * 100.0)));
  CHECK(DiffusionOperator(g, coeff, lim).explicit_stable());
  CHECK_FALSE(DiffusionOperator(g, coeff, 1.01 * lim).explicit_stable());

  DiffusionOperator op(g, coeff, 0.5 * lim);
  std::vector<double> b(g.cells(), 0.0), x(g.cells());
  b[g.index(4, 4)] = 1.0;
  op.step_explicit(b, x);
  double total = 0.0;
  for (double v : x) {
    CHECK(v >= 0.0);
    total += v;
  }
  CHECK(total == doctest::Approx(1.0));
}
