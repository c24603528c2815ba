#include "swarmsim/run.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "swarmsim/diagnostics.hpp"
#include "swarmsim/snapshot.hpp"

namespace swarmsim {

namespace fs = std::filesystem;

SpaceGrid make_space_grid(const RunConfig& cfg) {
  return SpaceGrid::make(cfg.grid.nx, cfg.grid.ny, cfg.grid.lx, cfg.grid.ly);
}

AgeGrid make_age_grid(const RunConfig& cfg) {
  return AgeGrid::make(cfg.coefficients.A, cfg.age.da, cfg.coefficients.a_min, cfg.age.horizon);
}

Solver make_solver(const RunConfig& cfg) {
  return Solver(cfg.coefficients, cfg.solver, make_space_grid(cfg), make_age_grid(cfg));
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

double spatial_gaussian(double x, double y, double cx, double cy, double sigma) {
  const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
  return std::exp(-r2 / (2.0 * sigma * sigma));
}

}  // namespace

SystemState build_initial_state(const RunConfig& cfg, const Solver& solver, const fs::path& base_dir) {
  const auto& space = solver.space();
  const auto& age = solver.age();
  const auto& in = cfg.initial;

  ScalarField Q(space, FieldRole::Q, 0.0);
  switch (in.q0) {
    case Profile::zero: break;
    case Profile::uniform: std::fill(Q.values().begin(), Q.values().end(), in.q0_amplitude); break;
    case Profile::gaussian:
      for (int j = 0; j < space.ny; ++j)
        for (int i = 0; i < space.nx; ++i)
          Q(i, j) = in.q0_amplitude *
                    spatial_gaussian(space.x_center(i), space.y_center(j), in.q0_cx, in.q0_cy, in.q0_sigma);
      break;
    case Profile::file: Q = to_scalar_field(snapshot_read(resolve(base_dir, in.q0_file)), space); break;
  }

  SwarmerField rho(space, age, 0.0);
  switch (in.rho0) {
    case Profile::zero: break;
    case Profile::uniform: std::fill(rho.values().begin(), rho.values().end(), in.rho0_amplitude); break;
    case Profile::gaussian:
      for (int k = 0; k < age.na; ++k) {
        const double da = age.age(k) - in.rho0_age_center;
        const double ga = std::exp(-da * da / (2.0 * in.rho0_age_sigma * in.rho0_age_sigma));
        for (int j = 0; j < space.ny; ++j)
          for (int i = 0; i < space.nx; ++i)
            rho.at(k, i, j) = in.rho0_amplitude * ga *
                              spatial_gaussian(space.x_center(i), space.y_center(j), in.rho0_cx, in.rho0_cy,
                                               in.rho0_sigma);
      }
      break;
    case Profile::file: rho = to_swarmer_field(snapshot_read(resolve(base_dir, in.rho0_file)), space, age); break;
  }

  const auto P = solver.active_biomass(rho);
  ScalarField M(space, FieldRole::M, 0.0);
  switch (in.m0) {
    case MemoryProfile::automatic:
      for (std::size_t c = 0; c < M.size(); ++c) M[c] = P[c] > cfg.coefficients.thresholds.P_max ? 1.0 : 0.0;
      break;
    case MemoryProfile::zero: break;
    case MemoryProfile::one: std::fill(M.values().begin(), M.values().end(), 1.0); break;
    case MemoryProfile::file: M = to_scalar_field(snapshot_read(resolve(base_dir, in.m0_file)), space); break;
  }
  return solver.make_state(std::move(rho), std::move(Q), std::move(M), 0.0);
}

namespace {

// |grad f|^2 per cell from forward differences, zero across the boundary.
std::vector<double> gradient_square(const SpaceGrid& g, std::span<const double> f) {
  std::vector<double> out(f.size(), 0.0);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t c = g.index(i, j);
      const double gx = i + 1 < g.nx ? (f[c + 1] - f[c]) / g.dx() : 0.0;
      const double gy = j + 1 < g.ny ? (f[c + g.nx] - f[c]) / g.dy() : 0.0;
      out[c] = gx * gx + gy * gy;
    }
  }
  return out;
}

std::string ratio_text(double r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", r);
  return buf;
}

}  // namespace

InitialDataReport check_initial_data(const RunConfig& cfg, const SystemState& s) {
  InitialDataReport rep;
  auto bad = [](std::span<const double> v) {
    return std::any_of(v.begin(), v.end(), [](double x) { return !std::isfinite(x) || x < 0.0; });
  };
  if (bad(s.rho.values())) rep.errors.push_back({"Hyprho0", "rho0 must be finite and nonnegative"});
  if (bad(s.Q.values())) rep.errors.push_back({"Thm1", "Q0 must be finite and nonnegative"});
  for (auto& v : validate_m0(s.M, s.P, cfg.coefficients.thresholds)) rep.errors.push_back(std::move(v));

  const double tau = cfg.coefficients.tau;
  const double b = cfg.initial.hyprho0_b;
  const auto& age = s.rho.age();
  const auto& space = s.rho.space();

  // Per age, int rho0^2 e^{2a/tau} / int rho0^2 e^{a/tau} = e^{a/tau}
  // wherever the slice is nonzero.
  double worst = 0.0;
  for (int k = 0; k < age.na; ++k) {
    if (spatial_power_sum(space, s.rho.level(k), 2.0) > 0.0) worst = std::max(worst, std::exp(age.age(k) / tau));
  }
  if (worst > b)
    rep.warnings.push_back({"Hyprho0", "L2 age-weight ratio " + ratio_text(worst) + " exceeds b = " + ratio_text(b)});

  const auto w1 = age_quadrature_weights(age, 1.0 / tau, 0);
  const auto w2 = age_quadrature_weights(age, 2.0 / tau, 0);
  const auto w4 = age_quadrature_weights(age, 4.0 / tau, 0);
  double g2_1 = 0.0, g2_2 = 0.0, g4_1 = 0.0, g4_4 = 0.0;
  for (int k = 0; k < age.na; ++k) {
    const auto g = gradient_square(space, s.rho.level(k));
    double s2 = 0.0, s4 = 0.0;
    for (double v : g) {
      s2 += v;
      s4 += v * v;
    }
    g2_1 += w1[k] * s2;
    g2_2 += w2[k] * s2;
    g4_1 += w1[k] * s4;
    g4_4 += w4[k] * s4;
  }
  if (g4_1 > 0.0 && g4_4 / g4_1 > b)
    rep.warnings.push_back(
        {"Hyprho0", "W1,4 age-weight ratio " + ratio_text(g4_4 / g4_1) + " exceeds b = " + ratio_text(b)});
  if (g2_1 > 0.0 && g2_2 / g2_1 > b)
    rep.warnings.push_back(
        {"Hyprho0", "W1,2 age-weight ratio " + ratio_text(g2_2 / g2_1) + " exceeds b = " + ratio_text(b)});

  // Unbounded age: the lattice is exact only while no mass reaches the
  // truncation age, i.e. horizon >= t_end + oldest populated initial age.
  if (!age.finite_max_age) {
    int oldest = -1;
    for (int k = 0; k < age.na; ++k)
      if (spatial_power_sum(space, s.rho.level(k), 1.0) > 0.0) oldest = k;
    const double reach = cfg.solver.t_end + (oldest < 0 ? 0.0 : age.age(oldest) + age.da);
    if (reach > age.horizon + 1e-12 * age.horizon)
      rep.warnings.push_back({"truncation", "age horizon " + ratio_text(age.horizon) + " is below t_end + initial age support " +
                                                ratio_text(reach) + "; mass leaving the lattice is dropped"});
  }
  return rep;
}

void write_report_csv(std::ostream& out, std::span<const StepReport> reports) {
  out << kReportCsvHeader << '\n';
  for (const auto& r : reports) {
    out << format_double(r.t) << ',' << format_double(r.rho_L1) << ',' << format_double(r.Q_L1) << ','
        << format_double(r.rho_L2) << ',' << format_double(r.Q_L2) << ',' << format_double(r.biomass_residual) << ','
        << format_double(r.min_rho) << ',' << format_double(r.min_Q) << ',' << r.picard_iters << ',' << r.cg_iters
        << '\n';
  }
}

std::string report_csv(std::span<const StepReport> reports) {
  std::ostringstream ss;
  write_report_csv(ss, reports);
  return ss.str();
}

RunArtifacts execute_run(const RunConfig& cfg, const fs::path& base_dir, bool write_files) {
  const auto solver = make_solver(cfg);
  const auto initial = build_initial_state(cfg, solver, base_dir);
  const auto check = check_initial_data(cfg, initial);
  if (!check.errors.empty()) {
    std::string msg = "initial data violates hypotheses:";
    for (const auto& v : check.errors) msg += "\n  " + v.tag + ": " + v.message;
    throw ConfigError(msg, check.errors);
  }

  const int stride = cfg.output.snapshot_stride;
  const fs::path snap_dir = resolve(base_dir, cfg.output.snapshot_dir);
  if (write_files && stride > 0) fs::create_directories(snap_dir);

  StepObserver observer;
  if (write_files && stride > 0) {
    observer = [&](int step, const SystemState& s, const StepReport&) {
      if (step % stride != 0) return;
      char suffix[32];
      std::snprintf(suffix, sizeof suffix, "_%06d.bin", step);
      for (const auto& f : cfg.output.fields) {
        const auto path = snap_dir / (f + suffix);
        switch (field_role_from_string(f)) {
          case FieldRole::rho: snapshot_write(s.rho, path); break;
          case FieldRole::Q: snapshot_write(s.Q, path); break;
          case FieldRole::P: snapshot_write(s.P, path); break;
          case FieldRole::M: snapshot_write(s.M, path); break;
        }
      }
    };
  }

  RunArtifacts art;
  art.result = run(solver, initial, observer);
  art.csv = report_csv(art.result.reports);
  if (write_files) {
    const auto csv_path = resolve(base_dir, cfg.output.csv);
    if (csv_path.has_parent_path()) fs::create_directories(csv_path.parent_path());
    std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + csv_path.string() + "'");
    out << art.csv;
  }
  return art;
}

namespace {

std::string_view trim_view(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

namespace {

void check_point_count(const SweepSpec& spec) {
  std::size_t total = 1;
  for (const auto& [k, v] : spec.axes) total *= v.size();
  if (total > spec.max_points)
    throw ConfigError("sweep has " + std::to_string(total) + " points, above sweep.max_points = " +
                      std::to_string(spec.max_points));
}

}  // namespace

SweepSpec parse_sweep(std::string_view text) {
  SweepSpec spec;
  bool have_base = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  auto fail = [&](const std::string& msg) { throw ConfigError("sweep line " + std::to_string(line_no) + ": " + msg); };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim_view(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail("expected 'key = value'");
    const auto key = std::string(trim_view(line.substr(0, eq)));
    const auto value = std::string(trim_view(line.substr(eq + 1)));
    try {
      if (key == "sweep.base") {
        spec.base_config = value;
        have_base = true;
      } else if (key == "sweep.output_dir") {
        spec.output_dir = value;
      } else if (key == "sweep.max_points") {
        spec.max_points = static_cast<std::size_t>(std::stoul(value));
      } else if (key == "sweep.workers") {
        spec.workers = std::stoi(value);
      } else if (key.rfind("axis.", 0) == 0) {
        const auto target = key.substr(5);
        const auto& keys = config_keys();
        if (std::find(keys.begin(), keys.end(), target) == keys.end()) fail("axis key '" + target + "' does not resolve");
        if (target == "model.preset") fail("the preset cannot be swept");
        std::vector<std::string> values;
        std::istringstream vs(value);
        std::string item;
        while (std::getline(vs, item, ',')) {
          const auto t = std::string(trim_view(item));
          if (!t.empty()) values.push_back(t);
        }
        if (values.empty()) fail("axis '" + target + "' has no values");
        spec.axes.emplace_back(target, std::move(values));
      } else {
        fail("unknown key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      fail("bad value for '" + key + "'");
    }
  }
  if (!have_base) throw ConfigError("sweep spec needs sweep.base");
  if (spec.workers < 1) throw ConfigError("sweep.workers must be at least 1");
  check_point_count(spec);
  return spec;
}

std::vector<SweepPoint> run_sweep(const SweepSpec& spec, const fs::path& base_dir) {
  check_point_count(spec);
  const auto base_path = spec.base_config.is_absolute() || base_dir.empty() ? spec.base_config : base_dir / spec.base_config;
  std::ifstream in(base_path);
  if (!in) throw ConfigError("cannot open base config '" + base_path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  const auto base = parse_config_unchecked(text.str());
  const auto config_dir = base_path.parent_path();
  const auto out_dir = spec.output_dir.is_absolute() || base_dir.empty() ? spec.output_dir : base_dir / spec.output_dir;
  fs::create_directories(out_dir);

  std::size_t total = 1;
  for (const auto& [k, v] : spec.axes) total *= v.size();
  std::vector<SweepPoint> points(total);
  for (std::size_t p = 0; p < total; ++p) {
    points[p].index = p;
    std::size_t rem = p;
    for (auto it = spec.axes.rbegin(); it != spec.axes.rend(); ++it) {
      points[p].values.insert(points[p].values.begin(), it->second[rem % it->second.size()]);
      rem /= it->second.size();
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t p = next++; p < total; p = next++) {
      auto& pt = points[p];
      char name[32];
      std::snprintf(name, sizeof name, "point_%04zu", p);
      const auto dir = fs::absolute(out_dir / name);
      try {
        fs::create_directories(dir);
        auto cfg = base;
        for (std::size_t a = 0; a < spec.axes.size(); ++a) set_config_value(cfg, spec.axes[a].first, pt.values[a]);
        cfg.output.csv = (dir / "report.csv").string();
        cfg.output.snapshot_dir = (dir / "snapshots").string();
        {
          std::ofstream cf(dir / "config.txt");
          cf << serialize_config(cfg);
        }
        const auto violations = validate_run_config(cfg);
        if (!violations.empty()) {
          pt.error = violations.front().tag + ": " + violations.front().message;
          continue;
        }
        const auto art = execute_run(cfg, config_dir, true);
        pt.ok = art.result.ok;
        pt.error = art.result.error;
        pt.final_report = art.result.reports.back();
        for (const auto& r : art.result.reports) pt.max_residual = std::max(pt.max_residual, r.biomass_residual);
      } catch (const std::exception& e) {
        pt.ok = false;
        pt.error = e.what();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const int n = std::max(1, std::min<int>(spec.workers, static_cast<int>(total)));
    for (int w = 0; w < n; ++w) pool.emplace_back(worker);
  }

  std::ofstream manifest(out_dir / "manifest.csv", std::ios::binary | std::ios::trunc);
  manifest << "point";
  for (const auto& [k, v] : spec.axes) manifest << ',' << k;
  manifest << ",status,t,rho_L1,Q_L1,rho_L2,Q_L2,max_biomass_residual\n";
  for (const auto& pt : points) {
    manifest << pt.index;
    for (const auto& v : pt.values) manifest << ',' << v;
    const auto& r = pt.final_report;
    manifest << ',' << (pt.ok ? "ok" : "failed") << ',' << format_double(r.t) << ',' << format_double(r.rho_L1) << ','
             << format_double(r.Q_L1) << ',' << format_double(r.rho_L2) << ',' << format_double(r.Q_L2) << ','
             << format_double(pt.max_residual) << '\n';
  }
  return points;
}

namespace {

// 2x2 cell average of a fine field onto the coarse lattice.
std::vector<double> restrict_space(const SpaceGrid& coarse, std::span<const double> fine) {
  std::vector<double> out(coarse.cells());
  const int fnx = 2 * coarse.nx;
  for (int j = 0; j < coarse.ny; ++j) {
    for (int i = 0; i < coarse.nx; ++i) {
      const std::size_t f = static_cast<std::size_t>(2 * j) * fnx + 2 * i;
      out[coarse.index(i, j)] = 0.25 * (fine[f] + fine[f + 1] + fine[f + fnx] + fine[f + fnx + 1]);
    }
  }
  return out;
}

struct LevelResult {
  SystemState final_state;
  std::vector<std::vector<double>> renewal_history;  // level 0 at every step
  SwarmerField rho0;
};

}  // namespace

ConvergenceTable run_convergence(const RunConfig& cfg, int levels, const fs::path& base_dir) {
  if (levels < 2) throw ConfigError("convergence study needs at least 2 levels");
  if (cfg.initial.q0 == Profile::file || cfg.initial.rho0 == Profile::file || cfg.initial.m0 == MemoryProfile::file)
    throw ConfigError("convergence study needs built-in initial profiles");

  const bool transport_check = !cfg.solver.diffusion_enabled && cfg.coefficients.mu.model == MuModel::zero;
  ConvergenceTable table;
  std::vector<LevelResult> results;
  for (int l = 0; l < levels; ++l) {
    auto c = cfg;
    const int scale = 1 << l;
    c.grid.nx *= scale;
    c.grid.ny *= scale;
    c.age.da /= scale;
    c.solver.dt /= scale;

    ConvergenceLevel row;
    row.level = l;
    row.dt = c.solver.dt;
    row.nx = c.grid.nx;
    row.ny = c.grid.ny;

    LevelResult lr;
    const auto solver = make_solver(c);
    const auto initial = build_initial_state(c, solver, base_dir);
    lr.rho0 = initial.rho;
    StepObserver obs;
    if (transport_check) {
      obs = [&](int, const SystemState& s, const StepReport&) {
        const auto l0 = s.rho.level(0);
        lr.renewal_history.emplace_back(l0.begin(), l0.end());
      };
    }
    auto res = run(solver, initial, obs);
    row.ok = res.ok;
    row.error = res.error;
    for (const auto& r : res.reports) row.max_residual = std::max(row.max_residual, r.biomass_residual);

    if (transport_check && res.ok) {
      const auto& rho = res.final_state.rho;
      const int steps = static_cast<int>(lr.renewal_history.size()) - 1;
      double err = 0.0, scale_max = 0.0;
      for (int k = 0; k < rho.levels(); ++k) {
        const auto got = rho.level(k);
        std::span<const double> want;
        if (k >= steps)
          want = lr.rho0.level(k - steps);
        else
          want = lr.renewal_history[steps - k];
        for (std::size_t i = 0; i < got.size(); ++i) {
          err = std::max(err, std::abs(got[i] - want[i]));
          scale_max = std::max(scale_max, std::abs(want[i]));
        }
      }
      row.transport_error = scale_max > 0.0 ? err / scale_max : err;
    }
    lr.final_state = std::move(res.final_state);
    lr.renewal_history.clear();
    results.push_back(std::move(lr));
    table.levels.push_back(row);
  }

  for (int l = 0; l + 1 < levels; ++l) {
    const auto& coarse = results[l].final_state;
    const auto& fine = results[l + 1].final_state;
    const auto& g = coarse.Q.grid();
    const auto qf = restrict_space(g, fine.Q.values());
    double q = 0.0;
    for (std::size_t c = 0; c < qf.size(); ++c) q += (coarse.Q[c] - qf[c]) * (coarse.Q[c] - qf[c]);
    const auto w = age_quadrature_weights(coarse.rho.age(), 1.0 / cfg.coefficients.tau, 0);
    double r = 0.0;
    for (int k = 0; k < coarse.rho.levels(); ++k) {
      const auto rf = restrict_space(g, fine.rho.level(2 * k));
      const auto rc = coarse.rho.level(k);
      double s = 0.0;
      for (std::size_t c = 0; c < rf.size(); ++c) s += (rc[c] - rf[c]) * (rc[c] - rf[c]);
      r += w[k] * s;
    }
    table.levels[l].diff_to_next = std::sqrt((q + r) * g.cell_area());
  }

  std::vector<double> residuals, diffs, transport;
  for (const auto& row : table.levels) {
    residuals.push_back(row.max_residual);
    if (row.transport_error >= 0.0) transport.push_back(row.transport_error);
  }
  for (int l = 0; l + 1 < levels; ++l) diffs.push_back(table.levels[l].diff_to_next);
  constexpr double kFloor = 1e-13;
  table.residual_orders = observed_orders(residuals, kFloor);
  table.difference_orders = observed_orders(diffs, kFloor);
  if (transport.size() == table.levels.size()) table.transport_orders = observed_orders(transport, kFloor);
  return table;
}

void print_convergence(std::ostream& out, const ConvergenceTable& table) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return std::string(buf);
  };
  auto ord = [](double v) {
    if (std::isinf(v)) return std::string(v > 0 ? "inf" : "-inf");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return std::string(buf);
  };
  out << "level,dt,nx,ny,max_biomass_residual,diff_to_next,transport_error,status\n";
  for (std::size_t i = 0; i < table.levels.size(); ++i) {
    const auto& r = table.levels[i];
    const bool last = i + 1 == table.levels.size();
    out << r.level << ',' << num(r.dt) << ',' << r.nx << ',' << r.ny << ',' << num(r.max_residual) << ','
        << (last ? std::string("n/a") : num(r.diff_to_next)) << ',' << (r.transport_error >= 0.0 ? num(r.transport_error) : std::string("n/a"))
        << ',' << (r.ok ? "ok" : "failed: " + r.error) << '\n';
  }
  auto list = [&](const char* name, const std::vector<double>& v) {
    out << name << ':';
    for (double o : v) out << ' ' << ord(o);
    out << '\n';
  };
  list("residual_order", table.residual_orders);
  list("difference_order", table.difference_orders);
  if (!table.transport_orders.empty()) list("transport_order", table.transport_orders);
}

}  // namespace swarmsim
