#include "swarmsim/diffusion.hpp"

#include <algorithm>
#include <cmath>

namespace swarmsim {

DiffusionOperator::DiffusionOperator(const SpaceGrid& grid, std::span<const double> coeff, double dt)
    : grid_(grid), dt_(dt), east_(grid.cells(), 0.0), north_(grid.cells(), 0.0), diag_(grid.cells(), 1.0) {
  const int nx = grid.nx;
  const int ny = grid.ny;
  const double sx = dt / (grid.dx() * grid.dx());
  const double sy = dt / (grid.dy() * grid.dy());
  for (std::size_t c = 0; c < grid.cells(); ++c) max_coeff_ = std::max(max_coeff_, coeff[c]);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t c = grid.index(i, j);
      if (i + 1 < nx) east_[c] = sx * 0.5 * (coeff[c] + coeff[c + 1]);
      if (j + 1 < ny) north_[c] = sy * 0.5 * (coeff[c] + coeff[c + nx]);
    }
  }
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t c = grid.index(i, j);
      double d = 1.0 + east_[c] + north_[c];
      if (i > 0) d += east_[c - 1];
      if (j > 0) d += north_[c - nx];
      diag_[c] = d;
    }
  }
}

void DiffusionOperator::apply(std::span<const double> x, std::span<double> y) const {
  const int nx = grid_.nx;
  const int ny = grid_.ny;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t c = grid_.index(i, j);
      double v = diag_[c] * x[c];
      if (i + 1 < nx) v -= east_[c] * x[c + 1];
      if (i > 0) v -= east_[c - 1] * x[c - 1];
      if (j + 1 < ny) v -= north_[c] * x[c + nx];
      if (j > 0) v -= north_[c - nx] * x[c - nx];
      y[c] = v;
    }
  }
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

CgResult DiffusionOperator::solve_implicit(std::span<const double> b, std::span<double> x,
                                           const CgOptions& opt) const {
  const std::size_t n = b.size();
  std::copy(b.begin(), b.end(), x.begin());

  CgResult res;
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) return res;

  std::vector<double> r(n), z(n), p(n), q(n);
  apply(x, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
  double rnorm = std::sqrt(dot(r, r));
  res.rel_residual = rnorm / bnorm;
  if (res.rel_residual <= opt.rel_tol) return res;

  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag_[i];
  p = z;
  double rz = dot(r, z);
  res.converged = false;
  while (res.iterations < opt.max_iter) {
    apply(p, q);
    const double alpha = rz / dot(p, q);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    ++res.iterations;
    rnorm = std::sqrt(dot(r, r));
    res.rel_residual = rnorm / bnorm;
    if (res.rel_residual <= opt.rel_tol) {
      res.converged = true;
      break;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag_[i];
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  for (auto& v : x) v = std::max(v, 0.0);
  return res;
}

void DiffusionOperator::step_explicit(std::span<const double> b, std::span<double> x) const {
  const int nx = grid_.nx;
  const int ny = grid_.ny;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t c = grid_.index(i, j);
      double v = (2.0 - diag_[c]) * b[c];
      if (i + 1 < nx) v += east_[c] * b[c + 1];
      if (i > 0) v += east_[c - 1] * b[c - 1];
      if (j + 1 < ny) v += north_[c] * b[c + nx];
      if (j > 0) v += north_[c - nx] * b[c - nx];
      x[c] = v;
    }
  }
}

bool DiffusionOperator::explicit_stable() const {
  return dt_ * max_coeff_ * (2.0 / (grid_.dx() * grid_.dx()) + 2.0 / (grid_.dy() * grid_.dy())) <= 1.0;
}

double explicit_dt_limit(const SpaceGrid& grid, double max_coeff) {
  return 1.0 / (max_coeff * (2.0 / (grid.dx() * grid.dx()) + 2.0 / (grid.dy() * grid.dy())));
}

}  // namespace swarmsim
