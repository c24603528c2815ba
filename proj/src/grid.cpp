#include "swarmsim/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace swarmsim {

SpaceGrid SpaceGrid::make(int nx, int ny, double lx, double ly) {
  if (nx < 3 || ny < 3) throw std::invalid_argument("space grid needs at least 3 cells per direction");
  if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly))
    throw std::invalid_argument("space grid side lengths must be positive and finite");
  return SpaceGrid{nx, ny, lx, ly};
}

namespace {

// Number of whole steps of size `step` in `length`; throws unless exact to
// a relative 1e-12.
int whole_levels(double length, double step, const char* what) {
  const double ratio = length / step;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(n * step - length) > 1e-12 * length)
    throw std::invalid_argument(std::string("age step does not divide ") + what);
  return static_cast<int>(n);
}

}  // namespace

AgeGrid AgeGrid::make(double max_age, double da, double a_min, double truncation) {
  if (!(da > 0.0) || !std::isfinite(da)) throw std::invalid_argument("age step must be positive");
  if (!(max_age > 0.0)) throw std::invalid_argument("maximum age must be positive");
  if (!(a_min >= 0.0) || !(a_min < max_age)) throw std::invalid_argument("activation age must satisfy 0 <= a_min < A");

  AgeGrid g;
  g.da = da;
  g.finite_max_age = std::isfinite(max_age);
  if (g.finite_max_age) {
    g.na = whole_levels(max_age, da, "the maximum age");
    g.horizon = max_age;
  } else {
    if (!(truncation > 0.0) || !std::isfinite(truncation))
      throw std::invalid_argument("unbounded maximum age needs a finite truncation horizon");
    g.na = whole_levels(truncation, da, "the truncation horizon");
    g.horizon = truncation;
  }
  g.a_min_index = static_cast<int>(std::ceil(a_min / da - 1e-12));
  if (g.a_min_index < 0) g.a_min_index = 0;
  if (g.a_min_index >= g.na) throw std::invalid_argument("activation age lies beyond the last age level");
  return g;
}

std::string_view to_string(FieldRole role) {
  switch (role) {
    case FieldRole::rho: return "rho";
    case FieldRole::Q: return "Q";
    case FieldRole::P: return "P";
    case FieldRole::M: return "M";
  }
  return "?";
}

FieldRole field_role_from_string(std::string_view s) {
  if (s == "rho") return FieldRole::rho;
  if (s == "Q") return FieldRole::Q;
  if (s == "P") return FieldRole::P;
  if (s == "M") return FieldRole::M;
  throw std::invalid_argument("unknown field role '" + std::string(s) + "'");
}

std::vector<double> age_quadrature_weights(const AgeGrid& age, double weight_exponent, int lower_index) {
  if (lower_index < 0 || lower_index >= age.na) throw std::invalid_argument("age quadrature lower index out of range");
  std::vector<double> w(age.na, 0.0);
  const double half = 0.5 * age.da;
  for (int k = lower_index; k + 1 < age.na; ++k) {
    w[k] += half * std::exp(weight_exponent * age.age(k));
    w[k + 1] += half * std::exp(weight_exponent * age.age(k + 1));
  }
  // Closing interval up to the horizon, with f held at its top-level value.
  const int top = age.na - 1;
  const double tail = age.horizon - age.age(top);
  w[top] += 0.5 * tail * (std::exp(weight_exponent * age.age(top)) + std::exp(weight_exponent * age.horizon));
  return w;
}

ScalarField weighted_age_integral(const SwarmerField& f, double weight_exponent, int lower_index) {
  const auto w = age_quadrature_weights(f.age(), weight_exponent, lower_index);
  ScalarField out(f.space(), FieldRole::P, 0.0);
  auto dst = out.values();
  for (int k = lower_index; k < f.levels(); ++k) {
    const auto src = f.level(k);
    const double wk = w[k];
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += wk * src[c];
  }
  return out;
}

void laplacian_variable_coeff(const SpaceGrid& grid, std::span<const double> u, std::span<const double> coeff,
                              std::span<double> out) {
  const int nx = grid.nx;
  const int ny = grid.ny;
  const double idx2 = 1.0 / (grid.dx() * grid.dx());
  const double idy2 = 1.0 / (grid.dy() * grid.dy());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t c = grid.index(i, j);
      double acc = 0.0;
      if (i + 1 < nx) acc += 0.5 * (coeff[c] + coeff[c + 1]) * (u[c + 1] - u[c]) * idx2;
      if (i > 0) acc -= 0.5 * (coeff[c] + coeff[c - 1]) * (u[c] - u[c - 1]) * idx2;
      if (j + 1 < ny) acc += 0.5 * (coeff[c] + coeff[c + nx]) * (u[c + nx] - u[c]) * idy2;
      if (j > 0) acc -= 0.5 * (coeff[c] + coeff[c - nx]) * (u[c] - u[c - nx]) * idy2;
      out[c] = acc;
    }
  }
}

}  // namespace swarmsim
