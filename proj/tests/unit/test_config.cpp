#include <cmath>

#include <doctest.h>

#include "swarmsim/config.hpp"

using namespace swarmsim;

namespace {
bool has_tag(const std::vector<Violation>& v, const std::string& tag) {
  for (const auto& x : v)
    if (x.tag == tag) return true;
  return false;
}
}  // namespace

TEST_CASE("model B preset") {
  auto cfg = parse_config("model.preset = model_b\nmodel.a_bar = 2\n");
  CHECK(chi(cfg.coefficients.A) == 0.0);
  CHECK(cfg.coefficients.mu.model == MuModel::constant);
  CHECK(cfg.coefficients.mu.value == 0.5);
  CHECK(cfg.age.horizon == 2.0);
}

TEST_CASE("model A preset") {
  auto cfg = parse_config("model.preset = model_a\n");
  CHECK(cfg.coefficients.mu.model == MuModel::zero);
  CHECK(chi(cfg.coefficients.A) == 1.0);
}

TEST_CASE("reference preset defaults") {
  auto cfg = parse_config("");
  CHECK(cfg.grid.nx == 32);
  CHECK(cfg.age.da == 1.0 / 32);
  CHECK(cfg.solver.dt == cfg.age.da);
  CHECK(cfg.coefficients.thresholds == Thresholds{0.18, 0.2, 1.0, 1.05});
  CHECK(cfg.coefficients.d == 1e-3);
}

TEST_CASE("invalid configurations are rejected") {
  try {
    parse_config("coefficients.d = 0\n");
    FAIL("expected rejection");
  } catch (const ConfigError& e) {
    CHECK(has_tag(e.violations(), "HypD"));
  }
  CHECK_THROWS_AS(parse_config("age.da = 0.3\nsolver.dt = 0.3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("age.da = 0.125\nsolver.dt = 0.25\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("grid.nx = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("grid.bogus = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("grid.nx = 8\ngrid.nx = 9\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("nx = 8\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("grid.nx = eight\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("model.preset = nonsense\n"), ConfigError);
}

TEST_CASE("explicit scheme needs a stable step") {
  CHECK_THROWS_AS(parse_config("solver.diffusion_scheme = explicit\n"), ConfigError);
  CHECK_NOTHROW(parse_config("solver.diffusion_scheme = explicit\ngrid.nx = 4\ngrid.ny = 4\n"
                             "coefficients.D0bar = 0.1\n"));
}

TEST_CASE("config round trip") {
  auto cfg = parse_config(
      "# comment\n"
      "model.preset = model_b\n"
      "model.a_bar = 3\n"
      "grid.nx = 12\n"
      "grid.ly = 0.75\n"
      "age.da = 0.0625\n"
      "coefficients.xi_model = logistic\n"
      "coefficients.diffusion_law = mkk\n"
      "coefficients.gamma = square\n"
      "solver.mode = picard\n"
      "solver.memory_integrator = heun\n"
      "solver.threads = 2\n"
      "initial.q0 = uniform\n"
      "output.fields = Q, M\n");
  const auto text = serialize_config(cfg);
  CHECK(parse_config(text) == cfg);
  for (const auto& key : config_keys()) {
    auto copy = cfg;
    const auto v = get_config_value(cfg, key);
    if (v.empty()) continue;
    set_config_value(copy, key, v);
    CHECK_MESSAGE(copy == cfg, key);
  }
}

TEST_CASE("number formatting round trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678, kInfinity}) CHECK(parse_double(format_double(v)) == v);
}
