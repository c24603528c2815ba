#pragma once

#include <span>
#include <vector>

#include "swarmsim/grid.hpp"
#include "swarmsim/solver.hpp"

namespace swarmsim {

/// Discrete versions of the biomass-weighted norms
///   ||rho||_p = (int int |rho|^p e^{a/tau} dx da)^{1/p},  ||Q||_p = (int |Q|^p dx)^{1/p}
/// using the age quadrature of age_quadrature_weights and the midpoint rule
/// in space. Sums run over cells in storage order, then over ages in
/// increasing order.
struct NormSet {
  double rho_L1 = 0.0;
  double rho_L2 = 0.0;
  double Q_L1 = 0.0;
  double Q_L2 = 0.0;
  double rho_L2_w2 = 0.0;    // weight e^{2a/tau}
  double grad_rho_L2 = 0.0;  // only when requested
  double sup_rho = 0.0;
  double sup_Q = 0.0;
};

NormSet compute_norms(const SwarmerField& rho, const ScalarField& Q, double tau, bool with_gradient = false);

/// Sum over cells of |f|^p times the cell area, in storage order.
double spatial_power_sum(const SpaceGrid& grid, std::span<const double> f, double p);

/// Relative residual of the exponential biomass law at time t:
/// |B(t) - B0 e^{t/tau}| / (B0 e^{t/tau}). With B0 == 0 the absolute value
/// |B(t)| is returned and `absolute` is set.
double biomass_residual(double rho_L1, double Q_L1, double initial_total, double t, double tau,
                        bool* absolute = nullptr);

struct ResidualSeries {
  std::vector<double> values;
  bool absolute = false;  // zero initial biomass
};

/// Residual per report, relative to the first report.
ResidualSeries biomass_residual(std::span<const StepReport> reports, double tau);

struct OrderEstimate {
  double coarse = 0.0;  // log2(e_h / e_{h/2})
  double fine = 0.0;    // log2(e_{h/2} / e_{h/4})
  bool monotone = true;
  bool at_floor = false;  // some error at or below the floor; order reported as +inf there
};

/// Observed orders from errors at h, h/2, h/4. Errors <= floor are treated
/// as exact, giving an infinite order for that pair.
OrderEstimate order_of_convergence(double e_h, double e_h2, double e_h4, double floor = 0.0);

/// log2 ratios of successive errors; same floor rule.
std::vector<double> observed_orders(std::span<const double> errors, double floor = 0.0);

}  // namespace swarmsim
