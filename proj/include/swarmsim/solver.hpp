#pragma once

#include <functional>
#include <string>
#include <vector>

#include "swarmsim/coefficients.hpp"
#include "swarmsim/diffusion.hpp"
#include "swarmsim/grid.hpp"
#include "swarmsim/hysteresis.hpp"

namespace swarmsim {

enum class SolverMode { direct, picard };
enum class DiffusionScheme { implicit, explicit_euler };

struct SolverConfig {
  double dt = 1.0 / 32.0;  // must equal the age step
  double t_end = 1.0;
  SolverMode mode = SolverMode::direct;
  double picard_tol = 1e-8;
  int picard_max_iters = 50;
  DiffusionScheme scheme = DiffusionScheme::implicit;
  CgOptions cg;
  MemoryIntegrator memory = MemoryIntegrator::exact;
  double l2_blowup_factor = 1e3;
  int threads = 1;
  /// Verification switch: skip the spatial diffusion solve entirely.
  bool diffusion_enabled = true;

  bool operator==(const SolverConfig& o) const {
    return dt == o.dt && t_end == o.t_end && mode == o.mode && picard_tol == o.picard_tol &&
           picard_max_iters == o.picard_max_iters && scheme == o.scheme && cg.rel_tol == o.cg.rel_tol &&
           cg.max_iter == o.cg.max_iter && memory == o.memory && l2_blowup_factor == o.l2_blowup_factor &&
           threads == o.threads && diffusion_enabled == o.diffusion_enabled;
  }
};

struct SystemState {
  double t = 0.0;
  SwarmerField rho;
  ScalarField Q;
  ScalarField P;  // active swarmer biomass of rho, kept in sync
  ScalarField M;

  bool operator==(const SystemState&) const = default;
};

/// Per-step diagnostics. The first ten members are the CSV columns.
struct StepReport {
  double t = 0.0;
  double rho_L1 = 0.0;
  double Q_L1 = 0.0;
  double rho_L2 = 0.0;
  double Q_L2 = 0.0;
  double biomass_residual = 0.0;
  double min_rho = 0.0;
  double min_Q = 0.0;
  int picard_iters = 0;
  long cg_iters = 0;

  double l2_ratio = 0.0;
  double memory_clamp = 0.0;
  std::vector<double> picard_increments;
};

struct StepOutcome {
  SystemState state;
  StepReport report;
  bool ok = true;
  std::string error;
};

/// Sub-step building blocks and the two time integrators.
///
/// One step of size dt = da: P -> M -> D -> Q -> rho. The rho update shifts
/// every age level up by one (exact transport along a - t = const), fills
/// level 0 from the renewal condition with the updated Q, applies the
/// exact decay factor along each characteristic, then diffuses levels >= 1
/// with the coefficient D + d.
class Solver {
 public:
  Solver(CoefficientSet cs, SolverConfig cfg, SpaceGrid space, AgeGrid age);

  const CoefficientSet& coefficients() const { return cs_; }
  const SolverConfig& config() const { return cfg_; }
  const SpaceGrid& space() const { return space_; }
  const AgeGrid& age() const { return age_; }

  SystemState make_state(SwarmerField rho, ScalarField Q, ScalarField M, double t = 0.0) const;

  ScalarField active_biomass(const SwarmerField& rho) const;

  /// D(M, Q, P) + d per cell.
  ScalarField diffusion_coefficient(const ScalarField& M, const ScalarField& Q, const ScalarField& P) const;

  /// Dedifferentiation source of the Q equation at time t: the mu-weighted
  /// biomass integral plus chi(A) rho(A) exp(A/tau), rho(A) being the top
  /// level.
  ScalarField q_source(const SwarmerField& rho, double t) const;

  /// Q(t+dt) for dQ/dt = (1-xi)/tau Q + S with S frozen: the linear part is
  /// integrated exactly, so Q stays >= 0 whenever Q, S >= 0.
  ScalarField step_Q(const ScalarField& Q, const ScalarField& source, double t) const;

  struct RhoStepStats {
    long cg_iters = 0;
    bool ok = true;
    std::string error;
  };

  SwarmerField step_rho(const SwarmerField& rho, const ScalarField& Q_new, const ScalarField& coeff, double t,
                        RhoStepStats& stats) const;

  StepOutcome advance_direct(const SystemState& s) const;
  StepOutcome advance_picard(const SystemState& s) const;
  StepOutcome advance(const SystemState& s) const {
    return cfg_.mode == SolverMode::picard ? advance_picard(s) : advance_direct(s);
  }

 private:
  struct LinearUpdate {
    ScalarField Q;
    SwarmerField rho;
    RhoStepStats stats;
  };
  LinearUpdate linear_update(const SystemState& s, const ScalarField& coeff) const;

  CoefficientSet cs_;
  SolverConfig cfg_;
  SpaceGrid space_;
  AgeGrid age_;
  std::vector<double> biomass_weights_;  // age quadrature with exp(a/tau), from age 0
};

struct RunResult {
  std::vector<StepReport> reports;  // reports[0] describes the initial state
  SystemState final_state;
  bool ok = true;
  std::string error;
};

/// Called after every accepted step (and once for the initial state with
/// step index 0).
using StepObserver = std::function<void(int step, const SystemState&, const StepReport&)>;

/// Integrates from `initial` to t_end. Stops at the first failed step:
/// a linear or Picard solve that does not converge, a negative or
/// non-finite value, or the L2 ratio exceeding the blow-up factor.
RunResult run(const Solver& solver, const SystemState& initial, const StepObserver& observer = {});

}  // namespace swarmsim
