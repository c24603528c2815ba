#include "swarmsim/coefficients.hpp"

#include <algorithm>
#include <cmath>

namespace swarmsim {

double chi(double A) { return std::isfinite(A) ? 1.0 : 0.0; }

double ramp_Hr(double p) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  return p;
}

double heaviside(double p) { return p > 0.0 ? 1.0 : 0.0; }

double gamma_fn(GammaVariant variant, double p, double shift) {
  switch (variant) {
    case GammaVariant::ramp_shifted: return (p - shift) * heaviside(p - shift);
    case GammaVariant::linear_shifted: return p - shift;
    case GammaVariant::square: return p * p;
    case GammaVariant::one: return 1.0;
  }
  return 0.0;
}

double eval_diffusion(const DiffusionLaw& law, const Thresholds& th, double M, double Q, double P) {
  Q = std::max(Q, 0.0);
  P = std::max(P, 0.0);
  switch (law.kind) {
    case DiffusionKind::esipov_shapiro: {
      const double m = std::clamp(M, 0.0, 1.0);
      if (m == 0.0) return 0.0;
      const double p = std::min(P / th.P_max, 1.0);
      const double g = gamma_fn(law.gamma, p, th.P_min / th.P_max);
      return std::max(0.0, law.D0bar * m * g * std::exp(-Q / law.Q_sat));
    }
    case DiffusionKind::mkk: {
      const double denom = P + law.k * Q;
      if (denom <= 0.0) return 0.0;
      return law.D0bar * (P / denom);
    }
    case DiffusionKind::zero: return 0.0;
  }
  return 0.0;
}

double eval_mu(const MuSpec& mu, double /*t*/, double a) {
  switch (mu.model) {
    case MuModel::zero: return 0.0;
    case MuModel::constant: return mu.value;
    case MuModel::smooth: return mu.value * (1.0 - std::exp(-a / mu.scale));
  }
  return 0.0;
}

double eval_xi(const XiSpec& xi, double /*t*/, double Q) {
  switch (xi.model) {
    case XiModel::constant: return std::clamp(xi.value, 0.0, 1.0);
    case XiModel::logistic: return std::clamp(xi.value / (1.0 + std::max(Q, 0.0) / xi.q_scale), 0.0, 1.0);
  }
  return 0.0;
}

std::vector<Violation> validate(const CoefficientSet& cs) {
  std::vector<Violation> out;
  auto add = [&](const char* tag, std::string msg) { out.push_back({tag, std::move(msg)}); };

  if (!(cs.tau > 0.0) || !std::isfinite(cs.tau)) add("tau", "tau must be positive and finite");
  if (!(cs.d > 0.0) || !std::isfinite(cs.d)) add("HypD", "d must be positive");
  if (!(cs.A > 0.0)) add("DefP", "maximum age A must be positive");
  if (!(cs.a_min >= 0.0) || !(cs.a_min < cs.A)) add("DefP", "activation age must satisfy 0 <= a_min < A");

  const auto& th = cs.thresholds;
  if (!(th.P_min < th.p_min && th.p_min < th.p_max && th.p_max < th.P_max))
    add("Defm", "threshold order P_min < p_min < p_max < P_max violated");
  if (!(th.P_min >= 0.0)) add("Defm", "thresholds must be nonnegative");

  switch (cs.mu.model) {
    case MuModel::zero:
      if (!std::isfinite(cs.A)) add("Hypmu", "unbounded maximum age requires a positive limiting rate mu_bar");
      break;
    case MuModel::constant:
    case MuModel::smooth:
      if (!(cs.mu.value >= 0.0) || !std::isfinite(cs.mu.value)) add("Hypmu", "mu must be nonnegative and bounded");
      if (cs.mu.model == MuModel::smooth && !(cs.mu.scale > 0.0)) add("Hypmu", "smooth mu needs a positive age scale");
      if (!std::isfinite(cs.A) && !(cs.mu.value > 0.0))
        add("Hypmu", "unbounded maximum age requires a positive limiting rate mu_bar");
      break;
  }

  if (!(cs.xi.value >= 0.0 && cs.xi.value <= 1.0)) add("Hypxi", "xi out of [0,1]");
  if (cs.xi.model == XiModel::logistic && !(cs.xi.q_scale > 0.0)) add("Hypxi", "logistic xi needs a positive Q scale");

  const auto& law = cs.diffusion;
  if (law.kind != DiffusionKind::zero && (!(law.D0bar >= 0.0) || !std::isfinite(law.D0bar)))
    add("HypD", "D0bar must be nonnegative and finite");
  if (law.kind == DiffusionKind::esipov_shapiro && !(law.Q_sat > 0.0)) add("HypD", "Q_sat must be positive");
  if (law.kind == DiffusionKind::mkk && !(law.k > 0.0)) add("HypD", "MKK weight k must be positive");
  return out;
}

}  // namespace swarmsim
