#pragma once

#include <cstdint>
#include <vector>

#include "swarmsim/coefficients.hpp"
#include "swarmsim/grid.hpp"

namespace swarmsim {

enum class MemoryIntegrator {
  /// Closed-form update of the ODE with P frozen over the step. On [0,1]
  /// the right side is affine in M, so this is exact and stays in range.
  exact,
  /// Explicit trapezoidal rule followed by a clamp to [0,1]. Range is kept
  /// without the clamp when dt <= min(P_max - p_max, p_min - P_min).
  heun,
};

/// Right side of the regularized relay ODE dM/dt.
double memory_rhs(double M, double P, const Thresholds& th);

/// Advances one cell. `clamp_correction` receives |M_unclamped - M_new|.
double memory_step_cell(double M, double P, double dt, const Thresholds& th, MemoryIntegrator integrator,
                        double* clamp_correction = nullptr);

struct MemoryStepResult {
  ScalarField M;
  double max_clamp_correction = 0.0;
};

/// Advances M by dt with P taken from the start of the step.
MemoryStepResult memory_step(const ScalarField& M, const ScalarField& P, double dt, const Thresholds& th,
                             MemoryIntegrator integrator);

/// Ideal relay: 1 once P reaches P_max, 0 once it falls to P_min, unchanged
/// in between. Crossings are detected at sample times only.
struct RelayState {
  std::vector<std::uint8_t> state;
};

RelayState relay_step(const RelayState& state, const ScalarField& P_prev, const ScalarField& P_now,
                      const Thresholds& th);

/// Cells where M0 leaves [0,1], or disagrees with P0 outside the dead band.
std::vector<Violation> validate_m0(const ScalarField& M0, const ScalarField& P0, const Thresholds& th);

}  // namespace swarmsim
