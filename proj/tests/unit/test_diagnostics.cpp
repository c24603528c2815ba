#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "swarmsim/diagnostics.hpp"

using namespace swarmsim;

TEST_CASE("norms of zero and of one") {
  auto g = SpaceGrid::make(4, 4, 1, 1);
  auto a = AgeGrid::make(1.0, 1.0 / 64, 0.25);
  ScalarField q(g, FieldRole::Q);
  auto z = compute_norms(SwarmerField(g, a), q, 1.0);
  CHECK(z.rho_L1 == 0.0);
  CHECK(z.rho_L2 == 0.0);
  CHECK(z.sup_rho == 0.0);

  auto n = compute_norms(SwarmerField(g, a, 1.0), q, 1.0);
  CHECK(n.rho_L1 == doctest::Approx(std::numbers::e - 1.0).epsilon(1e-4));
  CHECK(n.rho_L2 == doctest::Approx(std::sqrt(std::numbers::e - 1.0)).epsilon(1e-4));
}

TEST_CASE("norm inequalities, homogeneity and permutation invariance") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto g = SpaceGrid::make(6, 5, 1.0, 1.3);
  auto a = AgeGrid::make(1.0, 0.125, 0.25);
  for (int trial = 0; trial < 20; ++trial) {
    SwarmerField r(g, a);
    ScalarField q(g, FieldRole::Q);
    for (auto& v : r.values()) v = u(rng);
    for (auto& v : q.values()) v = u(rng);
    auto n = compute_norms(r, q, 1.0, true);
    CHECK(n.rho_L2 <= std::sqrt(n.sup_rho * n.rho_L1) * (1.0 + 1e-14));
    CHECK(n.Q_L2 <= std::sqrt(n.sup_Q * n.Q_L1) * (1.0 + 1e-14));
    CHECK(n.grad_rho_L2 >= 0.0);

    const double alpha = 0.25;  // power of two keeps scaling exact
    SwarmerField rs = r;
    ScalarField qs = q;
    for (auto& v : rs.values()) v *= alpha;
    for (auto& v : qs.values()) v *= alpha;
    auto ns = compute_norms(rs, qs, 1.0);
    CHECK(ns.rho_L1 == alpha * n.rho_L1);
    CHECK(ns.Q_L1 == alpha * n.Q_L1);
    CHECK(ns.rho_L2 == doctest::Approx(alpha * n.rho_L2).epsilon(1e-15));

    // Permuting cells within every age level and Q.
    std::vector<std::size_t> perm(g.cells());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    SwarmerField rp = r;
    ScalarField qp = q;
    for (int k = 0; k < a.na; ++k)
      for (std::size_t c = 0; c < perm.size(); ++c) rp.level(k)[c] = r.level(k)[perm[c]];
    for (std::size_t c = 0; c < perm.size(); ++c) qp[c] = q[perm[c]];
    auto np = compute_norms(rp, qp, 1.0);
    CHECK(np.rho_L1 == doctest::Approx(n.rho_L1).epsilon(1e-13));
    CHECK(np.rho_L2 == doctest::Approx(n.rho_L2).epsilon(1e-13));
    CHECK(np.Q_L2 == doctest::Approx(n.Q_L2).epsilon(1e-13));
  }
}

TEST_CASE("biomass residual") {
  CHECK(biomass_residual(0.0, 2.0 * std::exp(0.5), 2.0, 0.5, 1.0) == doctest::Approx(0.0));
  bool absolute = false;
  CHECK(biomass_residual(0.0, 0.0, 0.0, 1.0, 1.0, &absolute) == 0.0);
  CHECK(absolute);

  std::vector<StepReport> reps(11);
  for (int n = 0; n <= 10; ++n) {
    reps[n].t = 0.1 * n;
    reps[n].Q_L1 = 3.0 * std::exp(reps[n].t / 2.0);
  }
  auto series = biomass_residual(reps, 2.0);
  CHECK_FALSE(series.absolute);
  for (double v : series.values) CHECK(v <= 1e-15);
}

TEST_CASE("order of convergence") {
  auto a = order_of_convergence(1.0, 0.25, 0.0625);
  CHECK(a.coarse == doctest::Approx(2.0));
  CHECK(a.fine == doctest::Approx(2.0));
  CHECK(a.monotone);
  auto b = order_of_convergence(1.0, 0.5, 0.25);
  CHECK(b.fine == doctest::Approx(1.0));
  auto c = order_of_convergence(0.1, 0.3, 0.2);
  CHECK_FALSE(c.monotone);
  auto d = order_of_convergence(1e-15, 1e-16, 0.0, 1e-13);
  CHECK(d.at_floor);
  CHECK(std::isinf(d.coarse));
  auto e = observed_orders(std::vector<double>{8.0, 4.0, 2.0});
  REQUIRE(e.size() == 2);
  CHECK(e[1] == doctest::Approx(1.0));
}
