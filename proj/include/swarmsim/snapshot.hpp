#pragma once

#include <filesystem>
#include <stdexcept>
#include <vector>

#include "swarmsim/grid.hpp"

namespace swarmsim {

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raw content of a snapshot file.
///
/// Layout: a text line "SWARMSIM1", a line with the role tag and the
/// dimensions ("rho na ny nx" or "<Q|P|M> ny nx"), a line with the matching
/// spacings ("da dy dx" or "dy dx"), then the values as row-major
/// little-endian IEEE-754 doubles.
struct Snapshot {
  FieldRole role = FieldRole::Q;
  std::vector<int> dims;
  std::vector<double> spacings;
  std::vector<double> values;
};

void snapshot_write(const ScalarField& field, const std::filesystem::path& path);
void snapshot_write(const SwarmerField& field, const std::filesystem::path& path);
Snapshot snapshot_read(const std::filesystem::path& path);

/// Checks dimensions and spacings against `grid` and wraps the values.
ScalarField to_scalar_field(const Snapshot& snap, const SpaceGrid& grid);
SwarmerField to_swarmer_field(const Snapshot& snap, const SpaceGrid& grid, const AgeGrid& age);

}  // namespace swarmsim
