#pragma once

#include <span>
#include <vector>

#include "swarmsim/grid.hpp"

namespace swarmsim {

struct CgOptions {
  double rel_tol = 1e-10;
  int max_iter = 2000;
};

struct CgResult {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = true;
};

/// Backward-Euler diffusion operator A = I - dt * div(c grad .) on a
/// Neumann rectangle, with face coefficients precomputed as arithmetic
/// means of the cell coefficient c.
///
/// A is symmetric positive definite and an M-matrix (positive diagonal,
/// nonpositive off-diagonals, strictly diagonally dominant), so A^{-1} >= 0.
class DiffusionOperator {
 public:
  DiffusionOperator(const SpaceGrid& grid, std::span<const double> coeff, double dt);

  const SpaceGrid& grid() const { return grid_; }
  double max_coeff() const { return max_coeff_; }

  /// y = A x.
  void apply(std::span<const double> x, std::span<double> y) const;

  /// Solves A x = b by Jacobi-preconditioned conjugate gradients, starting
  /// from x = b. The result is projected onto x >= 0: the exact solution is
  /// nonnegative for b >= 0, so the projection only removes solver error.
  CgResult solve_implicit(std::span<const double> b, std::span<double> x, const CgOptions& opt) const;

  /// Forward Euler x = b + dt * div(c grad b). Requires explicit_stable().
  void step_explicit(std::span<const double> b, std::span<double> x) const;

  /// dt * max(c) * (2/dx^2 + 2/dy^2) <= 1.
  bool explicit_stable() const;

 private:
  SpaceGrid grid_;
  double dt_;
  double max_coeff_ = 0.0;
  std::vector<double> east_;   // coefficient on face (i+1/2, j), scaled by dt/dx^2
  std::vector<double> north_;  // coefficient on face (i, j+1/2), scaled by dt/dy^2
  std::vector<double> diag_;
};

/// Explicit stability limit dt_max = 1 / (max_c * (2/dx^2 + 2/dy^2)).
double explicit_dt_limit(const SpaceGrid& grid, double max_coeff);

}  // namespace swarmsim
