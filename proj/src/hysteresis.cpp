#include "swarmsim/hysteresis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace swarmsim {

namespace {

double switch_on_rate(double P, const Thresholds& th) {
  const double gap = th.P_max - th.p_max;
  return ramp_Hr((P - th.p_max) / gap) / gap;
}

double switch_off_rate(double P, const Thresholds& th) {
  const double gap = th.p_min - th.P_min;
  return ramp_Hr((th.p_min - P) / gap) / gap;
}

}  // namespace

double memory_rhs(double M, double P, const Thresholds& th) {
  return switch_on_rate(P, th) * ramp_Hr(1.0 - M) - switch_off_rate(P, th) * ramp_Hr(M);
}

double memory_step_cell(double M, double P, double dt, const Thresholds& th, MemoryIntegrator integrator,
                        double* clamp_correction) {
  double next = M;
  switch (integrator) {
    case MemoryIntegrator::exact: {
      // dM/dt = on*(1-M) - off*M on [0,1]; at most one rate is nonzero.
      const double on = switch_on_rate(P, th);
      const double off = switch_off_rate(P, th);
      const double rate = on + off;
      if (rate > 0.0) {
        const double m0 = std::clamp(M, 0.0, 1.0);
        const double target = on / rate;
        next = target + (m0 - target) * std::exp(-rate * dt);
      }
      break;
    }
    case MemoryIntegrator::heun: {
      const double k1 = memory_rhs(M, P, th);
      const double k2 = memory_rhs(M + dt * k1, P, th);
      next = M + 0.5 * dt * (k1 + k2);
      break;
    }
  }
  const double clamped = std::clamp(next, 0.0, 1.0);
  if (clamp_correction) *clamp_correction = std::abs(clamped - next);
  return clamped;
}

MemoryStepResult memory_step(const ScalarField& M, const ScalarField& P, double dt, const Thresholds& th,
                             MemoryIntegrator integrator) {
  MemoryStepResult r{ScalarField(M.grid(), FieldRole::M), 0.0};
  for (std::size_t c = 0; c < M.size(); ++c) {
    double corr = 0.0;
    r.M[c] = memory_step_cell(M[c], P[c], dt, th, integrator, &corr);
    r.max_clamp_correction = std::max(r.max_clamp_correction, corr);
  }
  return r;
}

RelayState relay_step(const RelayState& state, const ScalarField& /*P_prev*/, const ScalarField& P_now,
                      const Thresholds& th) {
  RelayState next = state;
  next.state.resize(P_now.size(), 0);
  for (std::size_t c = 0; c < P_now.size(); ++c) {
    if (P_now[c] >= th.P_max)
      next.state[c] = 1;
    else if (P_now[c] <= th.P_min)
      next.state[c] = 0;
  }
  return next;
}

std::vector<Violation> validate_m0(const ScalarField& M0, const ScalarField& P0, const Thresholds& th) {
  std::size_t out_of_range = 0, not_off = 0, not_on = 0;
  for (std::size_t c = 0; c < M0.size(); ++c) {
    const double m = M0[c];
    if (!(m >= 0.0 && m <= 1.0)) ++out_of_range;
    if (P0[c] < th.P_min && m != 0.0) ++not_off;
    if (P0[c] > th.P_max && m != 1.0) ++not_on;
  }
  std::vector<Violation> v;
  if (out_of_range) v.push_back({"Hypm0", std::to_string(out_of_range) + " cell(s) with M0 outside [0,1]"});
  if (not_off) v.push_back({"Hypm0", std::to_string(not_off) + " cell(s) with P0 < P_min but M0 != 0"});
  if (not_on) v.push_back({"Hypm0", std::to_string(not_on) + " cell(s) with P0 > P_max but M0 != 1"});
  return v;
}

}  // namespace swarmsim
