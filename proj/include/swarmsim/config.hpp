#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "swarmsim/coefficients.hpp"
#include "swarmsim/solver.hpp"

namespace swarmsim {

struct GridBlock {
  int nx = 32;
  int ny = 32;
  double lx = 1.0;
  double ly = 1.0;

  bool operator==(const GridBlock&) const = default;
};

/// Age lattice. The maximum age A and the activation age a_min live in the
/// coefficient set; `horizon` is the truncation used when A is unbounded.
struct AgeBlock {
  double da = 1.0 / 32.0;
  double horizon = 0.0;

  bool operator==(const AgeBlock&) const = default;
};

enum class Profile { zero, uniform, gaussian, file };
enum class MemoryProfile { automatic, zero, one, file };

/// Built-in initial data.
///
/// gaussian Q0:   amplitude * exp(-|x - c|^2 / (2 sigma^2))
/// gaussian rho0: the same in space times exp(-(a - age_center)^2 / (2 age_sigma^2))
/// uniform:       amplitude everywhere
/// automatic M0:  1 where P0 > P_max, 0 elsewhere
struct InitialBlock {
  Profile q0 = Profile::gaussian;
  double q0_amplitude = 2.0;
  double q0_sigma = 0.15;
  double q0_cx = 0.5;
  double q0_cy = 0.5;
  std::string q0_file;

  Profile rho0 = Profile::gaussian;
  double rho0_amplitude = 1.0;
  double rho0_sigma = 0.15;
  double rho0_cx = 0.5;
  double rho0_cy = 0.5;
  double rho0_age_center = 0.5;
  double rho0_age_sigma = 0.15;
  std::string rho0_file;

  MemoryProfile m0 = MemoryProfile::automatic;
  std::string m0_file;

  /// Constant b of the weighted-norm ratio checks on rho0 (warnings only).
  double hyprho0_b = 1e6;

  bool operator==(const InitialBlock&) const = default;
};

struct OutputBlock {
  std::string csv = "report.csv";
  int snapshot_stride = 0;  // 0 disables snapshots
  std::string snapshot_dir = "snapshots";
  std::vector<std::string> fields = {"rho", "Q", "P", "M"};

  bool operator==(const OutputBlock&) const = default;
};

struct RunConfig {
  std::string preset = "reference";
  double a_bar = 1.0;  // mean dedifferentiation age of the model_b preset
  GridBlock grid;
  AgeBlock age;
  CoefficientSet coefficients;
  SolverConfig solver;
  InitialBlock initial;
  OutputBlock output;

  bool operator==(const RunConfig&) const = default;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::string what, std::vector<Violation> violations = {})
      : std::runtime_error(std::move(what)), violations_(std::move(violations)) {}
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// Preset defaults: "reference", "model_a", "model_b". Throws ConfigError
/// for an unknown name.
RunConfig preset_config(std::string_view name, double a_bar = 1.0);

/// Parses line-oriented "section.key = value" text ('#' starts a comment).
/// The preset named by model.preset (default "reference") is applied
/// first, then every other key in file order. Unknown or repeated keys and
/// malformed values are errors carrying the line number. No semantic
/// validation.
RunConfig parse_config_unchecked(std::string_view text);

/// parse_config_unchecked followed by validate_run_config; throws
/// ConfigError with all violations aggregated.
RunConfig parse_config(std::string_view text);

RunConfig load_config(const std::string& path);

/// Sets one dotted key from its text form. Throws ConfigError.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);

/// Text form of one dotted key.
std::string get_config_value(const RunConfig& cfg, std::string_view key);

/// All keys in canonical order.
const std::vector<std::string>& config_keys();

/// Full text form; parse_config_unchecked(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& cfg);

/// Every violated hypothesis and grid rule.
std::vector<Violation> validate_run_config(const RunConfig& cfg);

/// Exact decimal-to-double conversion; throws std::invalid_argument.
double parse_double(std::string_view s);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

}  // namespace swarmsim
