#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace swarmsim {

/// Uniform cell-centered grid on the rectangle [0,lx] x [0,ly].
///
/// Cell (i,j) has center ((i+1/2)dx, (j+1/2)dy) and is stored at index
/// j*nx + i. Boundary faces carry zero normal flux.
struct SpaceGrid {
  int nx = 0;
  int ny = 0;
  double lx = 1.0;
  double ly = 1.0;

  static SpaceGrid make(int nx, int ny, double lx, double ly);

  double dx() const { return lx / nx; }
  double dy() const { return ly / ny; }
  double cell_area() const { return dx() * dy(); }
  std::size_t cells() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  double x_center(int i) const { return (i + 0.5) * dx(); }
  double y_center(int j) const { return (j + 0.5) * dy(); }

  bool operator==(const SpaceGrid&) const = default;
};

/// Age levels a_k = k*da, k = 0..na-1, covering [0, horizon).
///
/// For a finite maximum age, horizon == na*da == A. For an unbounded
/// maximum age the lattice is truncated at horizon.
struct AgeGrid {
  int na = 0;
  double da = 0.0;
  double horizon = 0.0;
  int a_min_index = 0;
  bool finite_max_age = true;

  /// Builds the lattice. `max_age` may be +inf, in which case `truncation`
  /// must be a positive multiple of `da`. Throws std::invalid_argument.
  static AgeGrid make(double max_age, double da, double a_min, double truncation = 0.0);

  double age(int k) const { return k * da; }

  bool operator==(const AgeGrid&) const = default;
};

enum class FieldRole { rho, Q, P, M };

std::string_view to_string(FieldRole role);
FieldRole field_role_from_string(std::string_view s);

/// Q, P or M sampled on the space lattice.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(const SpaceGrid& grid, FieldRole role, double fill = 0.0)
      : grid_(grid), role_(role), values_(grid.cells(), fill) {}

  const SpaceGrid& grid() const { return grid_; }
  FieldRole role() const { return role_; }
  void set_role(FieldRole role) { role_ = role; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  double& operator[](std::size_t c) { return values_[c]; }
  double operator[](std::size_t c) const { return values_[c]; }
  double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
  double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }

  bool operator==(const ScalarField&) const = default;

 private:
  SpaceGrid grid_;
  FieldRole role_ = FieldRole::Q;
  std::vector<double> values_;
};

/// Swarmer density rho(a, x) on the age x space lattice, age-major.
class SwarmerField {
 public:
  SwarmerField() = default;
  SwarmerField(const SpaceGrid& space, const AgeGrid& age, double fill = 0.0)
      : space_(space), age_(age), values_(static_cast<std::size_t>(age.na) * space.cells(), fill) {}

  const SpaceGrid& space() const { return space_; }
  const AgeGrid& age() const { return age_; }
  int levels() const { return age_.na; }

  std::span<double> level(int k) { return {values_.data() + offset(k), space_.cells()}; }
  std::span<const double> level(int k) const { return {values_.data() + offset(k), space_.cells()}; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double& at(int k, int i, int j) { return values_[offset(k) + space_.index(i, j)]; }
  double at(int k, int i, int j) const { return values_[offset(k) + space_.index(i, j)]; }

  bool operator==(const SwarmerField&) const = default;

 private:
  std::size_t offset(int k) const { return static_cast<std::size_t>(k) * space_.cells(); }

  SpaceGrid space_;
  AgeGrid age_;
  std::vector<double> values_;
};

/// Per-level weights q_k such that sum_k q_k f_k approximates
/// int_{a_lower}^{horizon} f(a) exp(weight_exponent * a) da.
///
/// Trapezoidal rule on the lattice points a_lower..a_{na-1}, closed by the
/// interval [a_{na-1}, horizon] on which f is taken equal to its top-level
/// value. Levels below `lower_index` get weight 0.
std::vector<double> age_quadrature_weights(const AgeGrid& age, double weight_exponent, int lower_index);

/// Trapezoidal quadrature of f(a,x) exp(weight_exponent * a) over
/// [a_lower, horizon], cell by cell. Summation runs over ages in increasing
/// order.
ScalarField weighted_age_integral(const SwarmerField& f, double weight_exponent, int lower_index);

/// out = div(coeff grad u) with the 5-point flux stencil.
///
/// Face coefficients are arithmetic means of the adjacent cell values;
/// boundary faces carry zero flux.
void laplacian_variable_coeff(const SpaceGrid& grid, std::span<const double> u,
                              std::span<const double> coeff, std::span<double> out);

}  // namespace swarmsim
