// Command-line driver: run, validate, sweep, convergence.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "swarmsim/config.hpp"
#include "swarmsim/run.hpp"

namespace fs = std::filesystem;
using namespace swarmsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitStep = 2;

void print_violations(std::ostream& out, const std::vector<Violation>& v) {
  for (const auto& x : v) out << x.tag << ": " << x.message << '\n';
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path dir_of(const std::string& path) { return fs::path(path).parent_path(); }

int cmd_validate(const std::string& path) {
  RunConfig cfg;
  try {
    cfg = parse_config_unchecked(read_file(path));
  } catch (const ConfigError& e) {
    std::cout << "syntax: " << e.what() << '\n';
    return kExitConfig;
  }
  auto violations = validate_run_config(cfg);
  if (violations.empty()) {
    try {
      const auto solver = make_solver(cfg);
      const auto state = build_initial_state(cfg, solver, dir_of(path));
      auto rep = check_initial_data(cfg, state);
      violations = rep.errors;
      for (const auto& w : rep.warnings) std::cout << "warning: " << w.tag << ": " << w.message << '\n';
    } catch (const std::exception& e) {
      violations.push_back({"initial", e.what()});
    }
  }
  print_violations(std::cout, violations);
  return violations.empty() ? kExitOk : kExitConfig;
}

int cmd_run(const std::string& path, const std::string& mode, int dump_every, bool seed_check) {
  RunConfig cfg;
  try {
    cfg = parse_config_unchecked(read_file(path));
    if (!mode.empty()) set_config_value(cfg, "solver.mode", mode);
    if (dump_every >= 0) cfg.output.snapshot_stride = dump_every;
    const auto violations = validate_run_config(cfg);
    if (!violations.empty()) {
      print_violations(std::cerr, violations);
      return kExitConfig;
    }
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  }

  try {
    const auto art = execute_run(cfg, dir_of(path), true);
    if (seed_check) {
      const auto again = execute_run(cfg, dir_of(path), false);
      if (again.csv != art.csv) {
        std::cerr << "determinism check failed: repeated run produced different output\n";
        return kExitStep;
      }
      std::cout << "determinism check passed\n";
    }
    if (!art.result.ok) {
      std::cerr << "step failure: " << art.result.error << '\n';
      return kExitStep;
    }
    const auto& last = art.result.reports.back();
    std::cout << "finished t=" << format_double(last.t) << " steps=" << art.result.reports.size() - 1
              << " biomass_residual=" << format_double(last.biomass_residual) << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

int cmd_sweep(const std::string& path) {
  try {
    const auto spec = parse_sweep(read_file(path));
    const auto points = run_sweep(spec, dir_of(path));
    int failed = 0;
    for (const auto& p : points) {
      if (!p.ok) {
        ++failed;
        std::cerr << "point " << p.index << ": " << p.error << '\n';
      }
    }
    std::cout << points.size() << " point(s), " << failed << " failed\n";
    return failed ? kExitStep : kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  }
}

int cmd_convergence(const std::string& path, int levels) {
  try {
    const auto cfg = load_config(path);
    const auto table = run_convergence(cfg, levels, dir_of(path));
    print_convergence(std::cout, table);
    for (const auto& l : table.levels)
      if (!l.ok) return kExitStep;
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-structured swarm colony simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string mode;
  int dump_every = -1;
  bool seed_check = false;
  auto* run = app.add_subcommand("run", "Integrate a configuration and write the report CSV");
  run->add_option("config", config_path, "Configuration file")->required();
  run->add_option("--mode", mode, "Override solver.mode (direct|picard)");
  run->add_option("--dump-every", dump_every, "Override output.snapshot_stride");
  run->add_flag("--seed-check", seed_check, "Run twice and require identical output");

  auto* validate = app.add_subcommand("validate", "Check a configuration against the model hypotheses");
  validate->add_option("config", config_path, "Configuration file")->required();

  std::string sweep_path;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  sweep->add_option("spec", sweep_path, "Sweep specification")->required();

  int levels = 3;
  auto* conv = app.add_subcommand("convergence", "Refinement study with observed orders");
  conv->add_option("config", config_path, "Configuration file")->required();
  conv->add_option("--levels", levels, "Number of refinement levels")->check(CLI::Range(2, 8));

  CLI11_PARSE(app, argc, argv);

  if (*run) return cmd_run(config_path, mode, dump_every, seed_check);
  if (*validate) return cmd_validate(config_path);
  if (*sweep) return cmd_sweep(sweep_path);
  if (*conv) return cmd_convergence(config_path, levels);
  return kExitConfig;
}
