#include "swarmsim/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace swarmsim {

double spatial_power_sum(const SpaceGrid& grid, std::span<const double> f, double p) {
  double s = 0.0;
  if (p == 1.0) {
    for (double v : f) s += std::abs(v);
  } else if (p == 2.0) {
    for (double v : f) s += v * v;
  } else {
    for (double v : f) s += std::pow(std::abs(v), p);
  }
  return s * grid.cell_area();
}

namespace {

double gradient_square_sum(const SpaceGrid& g, std::span<const double> f) {
  double s = 0.0;
  const double idx = 1.0 / g.dx();
  const double idy = 1.0 / g.dy();
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t c = g.index(i, j);
      if (i + 1 < g.nx) {
        const double d = (f[c + 1] - f[c]) * idx;
        s += d * d;
      }
      if (j + 1 < g.ny) {
        const double d = (f[c + g.nx] - f[c]) * idy;
        s += d * d;
      }
    }
  }
  return s * g.cell_area();
}

}  // namespace

NormSet compute_norms(const SwarmerField& rho, const ScalarField& Q, double tau, bool with_gradient) {
  NormSet n;
  const auto& space = rho.space();
  const auto w1 = age_quadrature_weights(rho.age(), 1.0 / tau, 0);
  const auto w2 = age_quadrature_weights(rho.age(), 2.0 / tau, 0);
  double l1 = 0.0, l2 = 0.0, l2w2 = 0.0, grad = 0.0;
  for (int k = 0; k < rho.levels(); ++k) {
    const auto lvl = rho.level(k);
    const double s1 = spatial_power_sum(space, lvl, 1.0);
    const double s2 = spatial_power_sum(space, lvl, 2.0);
    l1 += w1[k] * s1;
    l2 += w1[k] * s2;
    l2w2 += w2[k] * s2;
    if (with_gradient) grad += w1[k] * gradient_square_sum(space, lvl);
    for (double v : lvl) n.sup_rho = std::max(n.sup_rho, std::abs(v));
  }
  n.rho_L1 = l1;
  n.rho_L2 = std::sqrt(l2);
  n.rho_L2_w2 = std::sqrt(l2w2);
  n.grad_rho_L2 = std::sqrt(grad);
  n.Q_L1 = spatial_power_sum(Q.grid(), Q.values(), 1.0);
  n.Q_L2 = std::sqrt(spatial_power_sum(Q.grid(), Q.values(), 2.0));
  for (double v : Q.values()) n.sup_Q = std::max(n.sup_Q, std::abs(v));
  return n;
}

double biomass_residual(double rho_L1, double Q_L1, double initial_total, double t, double tau, bool* absolute) {
  const double expected = initial_total * std::exp(t / tau);
  const double diff = std::abs(rho_L1 + Q_L1 - expected);
  if (absolute) *absolute = initial_total == 0.0;
  if (initial_total == 0.0) return diff;
  return diff / expected;
}

ResidualSeries biomass_residual(std::span<const StepReport> reports, double tau) {
  ResidualSeries out;
  if (reports.empty()) return out;
  const double b0 = reports.front().rho_L1 + reports.front().Q_L1;
  const double t0 = reports.front().t;
  out.absolute = b0 == 0.0;
  out.values.reserve(reports.size());
  for (const auto& r : reports) out.values.push_back(biomass_residual(r.rho_L1, r.Q_L1, b0, r.t - t0, tau));
  return out;
}

namespace {

double pair_order(double coarse, double fine, double floor, bool& at_floor) {
  if (fine <= floor) {
    at_floor = true;
    return std::numeric_limits<double>::infinity();
  }
  if (coarse <= floor) {
    at_floor = true;
    return -std::numeric_limits<double>::infinity();
  }
  return std::log2(coarse / fine);
}

}  // namespace

OrderEstimate order_of_convergence(double e_h, double e_h2, double e_h4, double floor) {
  OrderEstimate est;
  est.coarse = pair_order(e_h, e_h2, floor, est.at_floor);
  est.fine = pair_order(e_h2, e_h4, floor, est.at_floor);
  est.monotone = e_h >= e_h2 && e_h2 >= e_h4;
  return est;
}

std::vector<double> observed_orders(std::span<const double> errors, double floor) {
  std::vector<double> out;
  bool unused = false;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) out.push_back(pair_order(errors[i], errors[i + 1], floor, unused));
  return out;
}

}  // namespace swarmsim
