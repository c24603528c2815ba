#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "swarmsim/config.hpp"
#include "swarmsim/solver.hpp"

namespace swarmsim {

/// Column order of the report CSV.
inline constexpr const char* kReportCsvHeader =
    "t,rho_L1,Q_L1,rho_L2,Q_L2,biomass_residual,min_rho,min_Q,picard_iters,cg_iters";

SpaceGrid make_space_grid(const RunConfig& cfg);
AgeGrid make_age_grid(const RunConfig& cfg);
Solver make_solver(const RunConfig& cfg);

/// Initial (rho0, Q0, M0) from the built-in profiles or snapshot files.
/// Relative file paths are resolved against `base_dir`.
SystemState build_initial_state(const RunConfig& cfg, const Solver& solver,
                                const std::filesystem::path& base_dir = {});

/// Hypothesis checks on the initial data. Errors: M0 incompatible with P0,
/// negative or non-finite rho0 or Q0. Warnings: the weighted-norm ratio
/// conditions on rho0 exceeding initial.hyprho0_b.
struct InitialDataReport {
  std::vector<Violation> errors;
  std::vector<Violation> warnings;
};
InitialDataReport check_initial_data(const RunConfig& cfg, const SystemState& s);

void write_report_csv(std::ostream& out, std::span<const StepReport> reports);
std::string report_csv(std::span<const StepReport> reports);

struct RunArtifacts {
  RunResult result;
  std::string csv;
};

/// Runs a configuration, writing the report CSV and strided snapshots as
/// configured (paths relative to `base_dir`). Set `write_files` false to
/// keep everything in memory.
RunArtifacts execute_run(const RunConfig& cfg, const std::filesystem::path& base_dir = {}, bool write_files = true);

struct SweepSpec {
  std::filesystem::path base_config;
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  std::filesystem::path output_dir = "sweep";
  std::size_t max_points = 256;
  int workers = 1;
};

/// Parses "sweep.base", "sweep.output_dir", "sweep.max_points",
/// "sweep.workers" and "axis.<dotted key> = v1, v2, ..." lines.
SweepSpec parse_sweep(std::string_view text);

struct SweepPoint {
  std::size_t index = 0;
  std::vector<std::string> values;
  bool ok = false;
  std::string error;
  StepReport final_report;
  double max_residual = 0.0;
};

/// Runs the Cartesian product of the axes; one subdirectory point_NNNN per
/// point and a manifest.csv in the output directory. Relative paths in the
/// spec resolve against `base_dir`.
std::vector<SweepPoint> run_sweep(const SweepSpec& spec, const std::filesystem::path& base_dir = {});

struct ConvergenceLevel {
  int level = 0;
  double dt = 0.0;
  int nx = 0;
  int ny = 0;
  double max_residual = 0.0;
  double diff_to_next = 0.0;     // L2 distance to the next finer level, restricted
  double transport_error = -1.0;  // only with diffusion off and mu = 0; relative max error
  bool ok = true;
  std::string error;
};

struct ConvergenceTable {
  std::vector<ConvergenceLevel> levels;
  std::vector<double> residual_orders;
  std::vector<double> difference_orders;
  std::vector<double> transport_orders;
};

/// Runs `cfg` at `levels` resolutions, halving dt, da, dx and dy together.
ConvergenceTable run_convergence(const RunConfig& cfg, int levels, const std::filesystem::path& base_dir = {});

void print_convergence(std::ostream& out, const ConvergenceTable& table);

}  // namespace swarmsim
