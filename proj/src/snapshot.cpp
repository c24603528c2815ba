#include "swarmsim/snapshot.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace swarmsim {

namespace {

constexpr const char* kMagic = "SWARMSIM1";

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t r = 0;
    for (int b = 0; b < 8; ++b) r |= ((v >> (8 * b)) & 0xffu) << (8 * (7 - b));
    return r;
  }
}

void write_file(const std::filesystem::path& path, FieldRole role, const std::vector<int>& dims,
                const std::vector<double>& spacings, std::span<const double> values) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SnapshotError("cannot open '" + path.string() + "' for writing");
  out << kMagic << '\n' << to_string(role);
  for (int d : dims) out << ' ' << d;
  out << '\n';
  for (std::size_t i = 0; i < spacings.size(); ++i) out << (i ? " " : "") << format_double(spacings[i]);
  out << '\n';
  for (double v : values) {
    const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
  if (!out) throw SnapshotError("write failed for '" + path.string() + "'");
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

}  // namespace

void snapshot_write(const ScalarField& field, const std::filesystem::path& path) {
  const auto& g = field.grid();
  write_file(path, field.role(), {g.ny, g.nx}, {g.dy(), g.dx()}, field.values());
}

void snapshot_write(const SwarmerField& field, const std::filesystem::path& path) {
  const auto& g = field.space();
  write_file(path, FieldRole::rho, {field.levels(), g.ny, g.nx}, {field.age().da, g.dy(), g.dx()}, field.values());
}

Snapshot snapshot_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw SnapshotError("header mismatch: bad magic in '" + path.string() + "'");

  Snapshot snap;
  if (!std::getline(in, line)) throw SnapshotError("header mismatch: missing dimension line");
  {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    try {
      snap.role = field_role_from_string(tag);
    } catch (const std::invalid_argument&) {
      throw SnapshotError("header mismatch: unknown role tag '" + tag + "'");
    }
    int d = 0;
    while (ls >> d) snap.dims.push_back(d);
    if (!ls.eof()) throw SnapshotError("header mismatch: malformed dimension line");
  }
  const std::size_t expected_rank = snap.role == FieldRole::rho ? 3 : 2;
  if (snap.dims.size() != expected_rank) throw SnapshotError("header mismatch: wrong number of dimensions");
  std::size_t count = 1;
  for (int d : snap.dims) {
    if (d <= 0) throw SnapshotError("header mismatch: empty or negative dimension");
    count *= static_cast<std::size_t>(d);
  }

  if (!std::getline(in, line)) throw SnapshotError("header mismatch: missing spacing line");
  {
    std::istringstream ls(line);
    double h = 0.0;
    while (ls >> h) snap.spacings.push_back(h);
    if (snap.spacings.size() != expected_rank) throw SnapshotError("header mismatch: wrong number of spacings");
    for (double s : snap.spacings)
      if (!(s > 0.0)) throw SnapshotError("header mismatch: non-positive spacing");
  }

  snap.values.resize(count);
  for (auto& v : snap.values) {
    std::uint64_t bits = 0;
    if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits)) throw SnapshotError("truncated snapshot payload");
    v = std::bit_cast<double>(to_little_endian(bits));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw SnapshotError("trailing bytes after snapshot payload");
  return snap;
}

ScalarField to_scalar_field(const Snapshot& snap, const SpaceGrid& grid) {
  if (snap.role == FieldRole::rho) throw SnapshotError("expected a scalar field snapshot, got rho");
  if (snap.dims[0] != grid.ny || snap.dims[1] != grid.nx) throw SnapshotError("snapshot dimensions do not match grid");
  if (!close(snap.spacings[0], grid.dy()) || !close(snap.spacings[1], grid.dx()))
    throw SnapshotError("snapshot spacings do not match grid");
  ScalarField f(grid, snap.role);
  std::copy(snap.values.begin(), snap.values.end(), f.values().begin());
  return f;
}

SwarmerField to_swarmer_field(const Snapshot& snap, const SpaceGrid& grid, const AgeGrid& age) {
  if (snap.role != FieldRole::rho) throw SnapshotError("expected a rho snapshot");
  if (snap.dims[0] != age.na || snap.dims[1] != grid.ny || snap.dims[2] != grid.nx)
    throw SnapshotError("snapshot dimensions do not match grid");
  if (!close(snap.spacings[0], age.da) || !close(snap.spacings[1], grid.dy()) || !close(snap.spacings[2], grid.dx()))
    throw SnapshotError("snapshot spacings do not match grid");
  SwarmerField f(grid, age);
  std::copy(snap.values.begin(), snap.values.end(), f.values().begin());
  return f;
}

}  // namespace swarmsim
