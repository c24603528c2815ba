#include "swarmsim/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "swarmsim/diagnostics.hpp"

namespace swarmsim {

namespace {

// (e^z - 1) / z
double phi1(double z) { return z == 0.0 ? 1.0 : std::expm1(z) / z; }

// Runs fn(k) for k in [first, last) on up to `threads` workers, each owning
// a contiguous block. fn must only touch data belonging to level k.
template <class Fn>
void for_each_level(int first, int last, int threads, Fn&& fn) {
  const int count = last - first;
  if (count <= 0) return;
  const int workers = std::clamp(threads, 1, count);
  if (workers == 1) {
    for (int k = first; k < last; ++k) fn(k);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const int lo = first + count * w / workers;
    const int hi = first + count * (w + 1) / workers;
    pool.emplace_back([lo, hi, &fn] {
      for (int k = lo; k < hi; ++k) fn(k);
    });
  }
}

bool all_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

// sqrt(||dQ||_2^2 + ||drho||_2^2) with the biomass-weighted age quadrature.
double iterate_distance(const ScalarField& Qa, const ScalarField& Qb, const SwarmerField& ra, const SwarmerField& rb,
                        std::span<const double> weights) {
  const auto& g = Qa.grid();
  double q = 0.0;
  for (std::size_t c = 0; c < Qa.size(); ++c) {
    const double d = Qa[c] - Qb[c];
    q += d * d;
  }
  double r = 0.0;
  for (int k = 0; k < ra.levels(); ++k) {
    const auto a = ra.level(k);
    const auto b = rb.level(k);
    double s = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
      const double d = a[c] - b[c];
      s += d * d;
    }
    r += weights[k] * s;
  }
  return std::sqrt((q + r) * g.cell_area());
}

}  // namespace

Solver::Solver(CoefficientSet cs, SolverConfig cfg, SpaceGrid space, AgeGrid age)
    : cs_(std::move(cs)), cfg_(cfg), space_(space), age_(age) {
  if (std::abs(cfg_.dt - age_.da) > 1e-14 * age_.da)
    throw std::invalid_argument("time step must equal the age step");
  biomass_weights_ = age_quadrature_weights(age_, 1.0 / cs_.tau, 0);
}

SystemState Solver::make_state(SwarmerField rho, ScalarField Q, ScalarField M, double t) const {
  SystemState s;
  s.t = t;
  s.P = active_biomass(rho);
  s.rho = std::move(rho);
  s.Q = std::move(Q);
  s.Q.set_role(FieldRole::Q);
  s.M = std::move(M);
  s.M.set_role(FieldRole::M);
  return s;
}

ScalarField Solver::active_biomass(const SwarmerField& rho) const {
  return weighted_age_integral(rho, 1.0 / cs_.tau, age_.a_min_index);
}

ScalarField Solver::diffusion_coefficient(const ScalarField& M, const ScalarField& Q, const ScalarField& P) const {
  ScalarField c(space_, FieldRole::Q);
  for (std::size_t i = 0; i < c.size(); ++i)
    c[i] = eval_diffusion(cs_.diffusion, cs_.thresholds, M[i], Q[i], P[i]) + cs_.d;
  return c;
}

ScalarField Solver::q_source(const SwarmerField& rho, double t) const {
  ScalarField s(space_, FieldRole::Q, 0.0);
  auto dst = s.values();
  if (cs_.mu.model != MuModel::zero) {
    for (int k = 0; k < age_.na; ++k) {
      const double wk = biomass_weights_[k] * eval_mu(cs_.mu, t, age_.age(k));
      if (wk == 0.0) continue;
      const auto lvl = rho.level(k);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += wk * lvl[c];
    }
  }
  if (chi(cs_.A) != 0.0) {
    const double w = std::exp(age_.horizon / cs_.tau);
    const auto top = rho.level(age_.na - 1);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += w * top[c];
  }
  return s;
}

ScalarField Solver::step_Q(const ScalarField& Q, const ScalarField& source, double t) const {
  const double dt = cfg_.dt;
  ScalarField out(space_, FieldRole::Q);
  for (std::size_t c = 0; c < Q.size(); ++c) {
    const double rate = (1.0 - eval_xi(cs_.xi, t, Q[c])) / cs_.tau;
    const double z = rate * dt;
    out[c] = std::exp(z) * Q[c] + dt * phi1(z) * source[c];
  }
  return out;
}

SwarmerField Solver::step_rho(const SwarmerField& rho, const ScalarField& Q_new, const ScalarField& coeff, double t,
                              RhoStepStats& stats) const {
  const double dt = cfg_.dt;
  const double t_new = t + dt;
  SwarmerField out(space_, age_);

  // Renewal at age 0.
  {
    auto lvl0 = out.level(0);
    for (std::size_t c = 0; c < lvl0.size(); ++c) lvl0[c] = eval_xi(cs_.xi, t_new, Q_new[c]) / cs_.tau * Q_new[c];
  }

  // Exact transport: level k-1 at t becomes level k at t + dt, with the
  // decay exp(-int mu) along the characteristic (trapezoidal in time).
  for (int k = 1; k < age_.na; ++k) {
    const auto src = rho.level(k - 1);
    auto dst = out.level(k);
    std::copy(src.begin(), src.end(), dst.begin());
    if (cs_.mu.model == MuModel::zero) continue;
    const double decay =
        std::exp(-0.5 * dt * (eval_mu(cs_.mu, t, age_.age(k - 1)) + eval_mu(cs_.mu, t_new, age_.age(k))));
    for (auto& v : dst) v *= decay;
  }

  if (!cfg_.diffusion_enabled || age_.na < 2) return out;

  const DiffusionOperator op(space_, coeff.values(), dt);
  if (cfg_.scheme == DiffusionScheme::explicit_euler && !op.explicit_stable()) {
    stats.ok = false;
    stats.error = "explicit diffusion step violates the stability limit dt <= " +
                  std::to_string(explicit_dt_limit(space_, op.max_coeff()));
    return out;
  }

  std::vector<CgResult> results(age_.na);
  for_each_level(1, age_.na, cfg_.threads, [&](int k) {
    auto lvl = out.level(k);
    if (all_zero(lvl)) return;
    std::vector<double> rhs(lvl.begin(), lvl.end());
    if (cfg_.scheme == DiffusionScheme::implicit)
      results[k] = op.solve_implicit(rhs, lvl, cfg_.cg);
    else
      op.step_explicit(rhs, lvl);
  });
  for (int k = 1; k < age_.na; ++k) {
    stats.cg_iters += results[k].iterations;
    if (!results[k].converged && stats.ok) {
      stats.ok = false;
      stats.error = "conjugate gradient did not converge at age level " + std::to_string(k) +
                    " (relative residual " + std::to_string(results[k].rel_residual) + ")";
    }
  }
  return out;
}

Solver::LinearUpdate Solver::linear_update(const SystemState& s, const ScalarField& coeff) const {
  LinearUpdate u;
  u.Q = step_Q(s.Q, q_source(s.rho, s.t), s.t);
  u.rho = step_rho(s.rho, u.Q, coeff, s.t, u.stats);
  return u;
}

StepOutcome Solver::advance_direct(const SystemState& s) const {
  StepOutcome out;
  auto mem = memory_step(s.M, s.P, cfg_.dt, cs_.thresholds, cfg_.memory);
  const auto coeff = diffusion_coefficient(mem.M, s.Q, s.P);
  auto upd = linear_update(s, coeff);

  out.state.t = s.t + cfg_.dt;
  out.state.P = active_biomass(upd.rho);
  out.state.rho = std::move(upd.rho);
  out.state.Q = std::move(upd.Q);
  out.state.M = std::move(mem.M);
  out.report.picard_iters = 1;
  out.report.cg_iters = upd.stats.cg_iters;
  out.report.memory_clamp = mem.max_clamp_correction;
  out.ok = upd.stats.ok;
  out.error = upd.stats.error;
  return out;
}

StepOutcome Solver::advance_picard(const SystemState& s) const {
  StepOutcome out;

  // M is driven by P at the start of the step, so it is shared by every
  // iterate. Iterate k freezes D at (M, Q^{k-1}, P^{k-1}); iterate 0 is the
  // start-of-step state, so iterate 1 coincides with direct mode.
  auto mem = memory_step(s.M, s.P, cfg_.dt, cs_.thresholds, cfg_.memory);
  out.report.memory_clamp = mem.max_clamp_correction;

  LinearUpdate current;
  ScalarField P_current;
  ScalarField coeff_used;
  bool converged = false;

  for (int k = 1; k <= cfg_.picard_max_iters; ++k) {
    const bool first = k == 1;
    auto coeff = first ? diffusion_coefficient(mem.M, s.Q, s.P) : diffusion_coefficient(mem.M, current.Q, P_current);
    if (!first && coeff == coeff_used) {
      // The next iterate would repeat the current one exactly.
      converged = true;
      break;
    }
    auto next = linear_update(s, coeff);
    out.report.cg_iters += next.stats.cg_iters;
    out.report.picard_iters = k;
    const double increment =
        first ? -1.0 : iterate_distance(next.Q, current.Q, next.rho, current.rho, biomass_weights_);
    if (!first) out.report.picard_increments.push_back(increment);
    current = std::move(next);
    coeff_used = std::move(coeff);
    P_current = active_biomass(current.rho);
    if (!current.stats.ok) {
      out.ok = false;
      out.error = current.stats.error;
      break;
    }
    if (!first && increment < cfg_.picard_tol) {
      converged = true;
      break;
    }
  }

  if (out.ok && !converged) {
    out.ok = false;
    out.error = "Picard iteration did not converge in " + std::to_string(cfg_.picard_max_iters) + " iterations";
    if (!out.report.picard_increments.empty())
      out.error += " (last increment " + std::to_string(out.report.picard_increments.back()) + ")";
  }
  out.state.t = s.t + cfg_.dt;
  out.state.rho = std::move(current.rho);
  out.state.Q = std::move(current.Q);
  out.state.P = std::move(P_current);
  out.state.M = std::move(mem.M);
  return out;
}

namespace {

void fill_report(StepReport& r, const SystemState& s, double tau, double initial_total, double initial_l2,
                 double elapsed) {
  const auto n = compute_norms(s.rho, s.Q, tau);
  r.t = s.t;
  r.rho_L1 = n.rho_L1;
  r.Q_L1 = n.Q_L1;
  r.rho_L2 = n.rho_L2;
  r.Q_L2 = n.Q_L2;
  r.biomass_residual = biomass_residual(n.rho_L1, n.Q_L1, initial_total, elapsed, tau);
  const auto rv = s.rho.values();
  const auto qv = s.Q.values();
  r.min_rho = rv.empty() ? 0.0 : *std::min_element(rv.begin(), rv.end());
  r.min_Q = qv.empty() ? 0.0 : *std::min_element(qv.begin(), qv.end());
  const double l2 = n.rho_L2 + n.Q_L2;
  r.l2_ratio = l2 == 0.0 ? 0.0 : (initial_l2 == 0.0 ? std::numeric_limits<double>::infinity() : l2 / initial_l2);
}

bool all_finite(const SystemState& s) {
  auto finite = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return finite(s.rho.values()) && finite(s.Q.values()) && finite(s.M.values());
}

}  // namespace

RunResult run(const Solver& solver, const SystemState& initial, const StepObserver& observer) {
  const double tau = solver.coefficients().tau;
  const auto& cfg = solver.config();
  const auto n0 = compute_norms(initial.rho, initial.Q, tau);
  const double b0 = n0.rho_L1 + n0.Q_L1;
  const double l2_0 = n0.rho_L2 + n0.Q_L2;

  RunResult res;
  StepReport r0;
  fill_report(r0, initial, tau, b0, l2_0, 0.0);
  r0.picard_iters = 0;
  res.reports.push_back(r0);
  if (observer) observer(0, initial, r0);

  const long steps = std::lround(cfg.t_end / cfg.dt);
  if (std::abs(steps * cfg.dt - cfg.t_end) > 1e-9 * std::max(1.0, cfg.t_end)) {
    res.ok = false;
    res.error = "t_end is not a whole number of time steps";
    res.final_state = initial;
    return res;
  }

  SystemState state = initial;
  const double t0 = initial.t;
  for (long n = 1; n <= steps; ++n) {
    auto step = solver.advance(state);
    step.state.t = t0 + n * cfg.dt;
    fill_report(step.report, step.state, tau, b0, l2_0, n * cfg.dt);

    std::string failure = step.error;
    if (step.ok) {
      if (!all_finite(step.state))
        failure = "non-finite value";
      else if (step.report.min_rho < 0.0 || step.report.min_Q < 0.0)
        failure = "negative density";
      else if (step.report.l2_ratio > cfg.l2_blowup_factor)
        failure = "L2 norm ratio exceeded blow-up factor " + std::to_string(cfg.l2_blowup_factor);
    }
    res.reports.push_back(step.report);
    state = std::move(step.state);
    if (!step.ok || !failure.empty()) {
      res.ok = false;
      res.error = "step " + std::to_string(n) + " (t=" + std::to_string(state.t) + "): " + failure;
      break;
    }
    if (observer) observer(static_cast<int>(n), state, res.reports.back());
  }
  res.final_state = std::move(state);
  return res;
}

}  // namespace swarmsim
