#pragma once

#include <limits>
#include <string>
#include <vector>

namespace swarmsim {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// P_min < p_min < p_max < P_max. The memory field switches on between
/// p_max and P_max and off between P_min and p_min.
struct Thresholds {
  double P_min = 0.18;
  double p_min = 0.2;
  double p_max = 1.0;
  double P_max = 1.05;

  bool operator==(const Thresholds&) const = default;
};

enum class MuModel { zero, constant, smooth };

/// Dedifferentiation rate mu(t, a, x).
///
/// constant: mu = value.  smooth: mu = value * (1 - exp(-a / scale)), which
/// tends to `value` for large ages.
struct MuSpec {
  MuModel model = MuModel::zero;
  double value = 0.0;
  double scale = 1.0;

  bool operator==(const MuSpec&) const = default;
};

enum class XiModel { constant, logistic };

/// Differentiation fraction xi(t, Q).
///
/// logistic: xi = value / (1 + Q / q_scale), vanishing at high swimmer
/// density. Both variants are clamped to [0,1].
struct XiSpec {
  XiModel model = XiModel::constant;
  double value = 0.5;
  double q_scale = 1.0;

  bool operator==(const XiSpec&) const = default;
};

enum class GammaVariant { ramp_shifted, linear_shifted, square, one };

enum class DiffusionKind { esipov_shapiro, mkk, zero };

struct DiffusionLaw {
  DiffusionKind kind = DiffusionKind::esipov_shapiro;
  double D0bar = 1.0;
  double Q_sat = 1.0;
  GammaVariant gamma = GammaVariant::ramp_shifted;
  double k = 1.0;  // MKK weight on Q

  bool operator==(const DiffusionLaw&) const = default;
};

struct CoefficientSet {
  double tau = 1.0;
  double d = 1e-3;
  double A = 1.0;  // maximum age, may be kInfinity
  double a_min = 0.25;
  MuSpec mu;
  XiSpec xi;
  DiffusionLaw diffusion;
  Thresholds thresholds;

  bool operator==(const CoefficientSet&) const = default;
};

/// One violated hypothesis: `tag` names the hypothesis block, `message`
/// says what failed.
struct Violation {
  std::string tag;
  std::string message;
};

/// 1 for a finite maximum age, 0 for an unbounded one.
double chi(double A);

/// 0 below 0, identity on [0,1], 1 above 1.
double ramp_Hr(double p);

/// Step function with H(0) = 0.
double heaviside(double p);

/// gamma(p) for p = P / P_max; `shift` is P_min / P_max.
double gamma_fn(GammaVariant variant, double p, double shift);

/// D(M, Q, P) >= 0. M is clamped to [0,1], Q and P to >= 0, and for the
/// Esipov-Shapiro law P / P_max to [0,1]; the result is clamped to >= 0.
/// Bounded by D0bar for every variant.
double eval_diffusion(const DiffusionLaw& law, const Thresholds& th, double M, double Q, double P);

double eval_mu(const MuSpec& mu, double t, double a);
double eval_xi(const XiSpec& xi, double t, double Q);

std::vector<Violation> validate(const CoefficientSet& cs);

}  // namespace swarmsim
