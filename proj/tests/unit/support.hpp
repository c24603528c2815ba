#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "swarmsim/config.hpp"
#include "swarmsim/run.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("swarmsim_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Reference preset on a coarse lattice, short horizon.
inline swarmsim::RunConfig small_config(int n = 8, double t_end = 0.25) {
  auto cfg = swarmsim::preset_config("reference");
  cfg.grid.nx = n;
  cfg.grid.ny = n;
  cfg.age.da = 1.0 / n;
  cfg.solver.dt = 1.0 / n;
  cfg.solver.t_end = t_end;
  return cfg;
}

}  // namespace testing
