#include "swarmsim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "swarmsim/grid.hpp"

namespace swarmsim {

double parse_double(std::string_view s) {
  if (s == "inf" || s == "+inf") return kInfinity;
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  if (!std::isfinite(v)) throw std::invalid_argument("not a finite number: '" + std::string(s) + "'");
  return v;
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

namespace {

int parse_int(std::string_view s) {
  int v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
  return v;
}

bool parse_bool(std::string_view s) {
  if (s == "on" || s == "true" || s == "1") return true;
  if (s == "off" || s == "false" || s == "0") return false;
  throw std::invalid_argument("expected on/off: '" + std::string(s) + "'");
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Bidirectional mapping between an enum and its names.
template <class E>
struct EnumNames {
  std::vector<std::pair<E, std::string_view>> names;

  E parse(std::string_view s) const {
    for (const auto& [e, n] : names)
      if (n == s) return e;
    std::string allowed;
    for (const auto& [e, n] : names) allowed += (allowed.empty() ? "" : "|") + std::string(n);
    throw std::invalid_argument("expected one of " + allowed + ", got '" + std::string(s) + "'");
  }
  std::string format(E v) const {
    for (const auto& [e, n] : names)
      if (e == v) return std::string(n);
    return "?";
  }
};

const EnumNames<MuModel> kMu{{{MuModel::zero, "zero"}, {MuModel::constant, "constant"}, {MuModel::smooth, "smooth"}}};
const EnumNames<XiModel> kXi{{{XiModel::constant, "constant"}, {XiModel::logistic, "logistic"}}};
const EnumNames<DiffusionKind> kLaw{{{DiffusionKind::esipov_shapiro, "esipov_shapiro"},
                                     {DiffusionKind::mkk, "mkk"},
                                     {DiffusionKind::zero, "zero"}}};
const EnumNames<GammaVariant> kGamma{{{GammaVariant::ramp_shifted, "ramp_shifted"},
                                      {GammaVariant::linear_shifted, "linear_shifted"},
                                      {GammaVariant::square, "square"},
                                      {GammaVariant::one, "one"}}};
const EnumNames<SolverMode> kMode{{{SolverMode::direct, "direct"}, {SolverMode::picard, "picard"}}};
const EnumNames<DiffusionScheme> kScheme{
    {{DiffusionScheme::implicit, "implicit"}, {DiffusionScheme::explicit_euler, "explicit"}}};
const EnumNames<MemoryIntegrator> kMemory{{{MemoryIntegrator::exact, "exact"}, {MemoryIntegrator::heun, "heun"}}};
const EnumNames<Profile> kProfile{
    {{Profile::zero, "zero"}, {Profile::uniform, "uniform"}, {Profile::gaussian, "gaussian"}, {Profile::file, "file"}}};
const EnumNames<MemoryProfile> kMemProfile{{{MemoryProfile::automatic, "auto"},
                                            {MemoryProfile::zero, "zero"},
                                            {MemoryProfile::one, "one"},
                                            {MemoryProfile::file, "file"}}};

struct Key {
  std::string name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

template <class Ref>
Key make_real(std::string name, Ref ref) {
  return {std::move(name), [ref](const RunConfig& c) { return format_double(ref(const_cast<RunConfig&>(c))); },
          [ref](RunConfig& c, std::string_view v) { ref(c) = parse_double(v); }};
}

template <class Ref>
Key make_int(std::string name, Ref ref) {
  return {std::move(name), [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); },
          [ref](RunConfig& c, std::string_view v) { ref(c) = parse_int(v); }};
}

template <class Ref>
Key make_text(std::string name, Ref ref) {
  return {std::move(name), [ref](const RunConfig& c) { return ref(const_cast<RunConfig&>(c)); },
          [ref](RunConfig& c, std::string_view v) { ref(c) = std::string(v); }};
}

template <class E, class Ref>
Key make_enum(std::string name, const EnumNames<E>& names, Ref ref) {
  return {std::move(name), [&names, ref](const RunConfig& c) { return names.format(ref(const_cast<RunConfig&>(c))); },
          [&names, ref](RunConfig& c, std::string_view v) { ref(c) = names.parse(v); }};
}

#define SWARMSIM_REF(expr) [](RunConfig& c) -> auto& { return expr; }

const std::vector<Key>& key_table() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back(make_text("model.preset", SWARMSIM_REF(c.preset)));
    k.push_back(make_real("model.a_bar", SWARMSIM_REF(c.a_bar)));

    k.push_back(make_int("grid.nx", SWARMSIM_REF(c.grid.nx)));
    k.push_back(make_int("grid.ny", SWARMSIM_REF(c.grid.ny)));
    k.push_back(make_real("grid.lx", SWARMSIM_REF(c.grid.lx)));
    k.push_back(make_real("grid.ly", SWARMSIM_REF(c.grid.ly)));

    k.push_back(make_real("age.A", SWARMSIM_REF(c.coefficients.A)));
    k.push_back(make_real("age.da", SWARMSIM_REF(c.age.da)));
    k.push_back(make_real("age.a_min", SWARMSIM_REF(c.coefficients.a_min)));
    k.push_back(make_real("age.horizon", SWARMSIM_REF(c.age.horizon)));

    k.push_back(make_real("coefficients.tau", SWARMSIM_REF(c.coefficients.tau)));
    k.push_back(make_real("coefficients.d", SWARMSIM_REF(c.coefficients.d)));
    k.push_back(make_enum("coefficients.mu_model", kMu, SWARMSIM_REF(c.coefficients.mu.model)));
    k.push_back(make_real("coefficients.mu_value", SWARMSIM_REF(c.coefficients.mu.value)));
    k.push_back(make_real("coefficients.mu_scale", SWARMSIM_REF(c.coefficients.mu.scale)));
    k.push_back(make_enum("coefficients.xi_model", kXi, SWARMSIM_REF(c.coefficients.xi.model)));
    k.push_back(make_real("coefficients.xi_value", SWARMSIM_REF(c.coefficients.xi.value)));
    k.push_back(make_real("coefficients.xi_q_scale", SWARMSIM_REF(c.coefficients.xi.q_scale)));
    k.push_back(make_enum("coefficients.diffusion_law", kLaw, SWARMSIM_REF(c.coefficients.diffusion.kind)));
    k.push_back(make_real("coefficients.D0bar", SWARMSIM_REF(c.coefficients.diffusion.D0bar)));
    k.push_back(make_real("coefficients.Q_sat", SWARMSIM_REF(c.coefficients.diffusion.Q_sat)));
    k.push_back(make_enum("coefficients.gamma", kGamma, SWARMSIM_REF(c.coefficients.diffusion.gamma)));
    k.push_back(make_real("coefficients.mkk_k", SWARMSIM_REF(c.coefficients.diffusion.k)));
    k.push_back(make_real("coefficients.P_min", SWARMSIM_REF(c.coefficients.thresholds.P_min)));
    k.push_back(make_real("coefficients.p_min", SWARMSIM_REF(c.coefficients.thresholds.p_min)));
    k.push_back(make_real("coefficients.p_max", SWARMSIM_REF(c.coefficients.thresholds.p_max)));
    k.push_back(make_real("coefficients.P_max", SWARMSIM_REF(c.coefficients.thresholds.P_max)));

    k.push_back(make_real("solver.dt", SWARMSIM_REF(c.solver.dt)));
    k.push_back(make_real("solver.t_end", SWARMSIM_REF(c.solver.t_end)));
    k.push_back(make_enum("solver.mode", kMode, SWARMSIM_REF(c.solver.mode)));
    k.push_back(make_real("solver.picard_tol", SWARMSIM_REF(c.solver.picard_tol)));
    k.push_back(make_int("solver.picard_max_iters", SWARMSIM_REF(c.solver.picard_max_iters)));
    k.push_back(make_enum("solver.diffusion_scheme", kScheme, SWARMSIM_REF(c.solver.scheme)));
    k.push_back(make_real("solver.cg_tol", SWARMSIM_REF(c.solver.cg.rel_tol)));
    k.push_back(make_int("solver.cg_max_iter", SWARMSIM_REF(c.solver.cg.max_iter)));
    k.push_back(make_enum("solver.memory_integrator", kMemory, SWARMSIM_REF(c.solver.memory)));
    k.push_back(make_real("solver.l2_blowup_factor", SWARMSIM_REF(c.solver.l2_blowup_factor)));
    k.push_back(make_int("solver.threads", SWARMSIM_REF(c.solver.threads)));
    k.push_back({"solver.diffusion", [](const RunConfig& c) { return std::string(c.solver.diffusion_enabled ? "on" : "off"); },
                 [](RunConfig& c, std::string_view v) { c.solver.diffusion_enabled = parse_bool(v); }});

    k.push_back(make_enum("initial.q0", kProfile, SWARMSIM_REF(c.initial.q0)));
    k.push_back(make_real("initial.q0_amplitude", SWARMSIM_REF(c.initial.q0_amplitude)));
    k.push_back(make_real("initial.q0_sigma", SWARMSIM_REF(c.initial.q0_sigma)));
    k.push_back(make_real("initial.q0_cx", SWARMSIM_REF(c.initial.q0_cx)));
    k.push_back(make_real("initial.q0_cy", SWARMSIM_REF(c.initial.q0_cy)));
    k.push_back(make_text("initial.q0_file", SWARMSIM_REF(c.initial.q0_file)));
    k.push_back(make_enum("initial.rho0", kProfile, SWARMSIM_REF(c.initial.rho0)));
    k.push_back(make_real("initial.rho0_amplitude", SWARMSIM_REF(c.initial.rho0_amplitude)));
    k.push_back(make_real("initial.rho0_sigma", SWARMSIM_REF(c.initial.rho0_sigma)));
    k.push_back(make_real("initial.rho0_cx", SWARMSIM_REF(c.initial.rho0_cx)));
    k.push_back(make_real("initial.rho0_cy", SWARMSIM_REF(c.initial.rho0_cy)));
    k.push_back(make_real("initial.rho0_age_center", SWARMSIM_REF(c.initial.rho0_age_center)));
    k.push_back(make_real("initial.rho0_age_sigma", SWARMSIM_REF(c.initial.rho0_age_sigma)));
    k.push_back(make_text("initial.rho0_file", SWARMSIM_REF(c.initial.rho0_file)));
    k.push_back(make_enum("initial.m0", kMemProfile, SWARMSIM_REF(c.initial.m0)));
    k.push_back(make_text("initial.m0_file", SWARMSIM_REF(c.initial.m0_file)));
    k.push_back(make_real("initial.hyprho0_b", SWARMSIM_REF(c.initial.hyprho0_b)));

    k.push_back(make_text("output.csv", SWARMSIM_REF(c.output.csv)));
    k.push_back(make_int("output.snapshot_stride", SWARMSIM_REF(c.output.snapshot_stride)));
    k.push_back(make_text("output.snapshot_dir", SWARMSIM_REF(c.output.snapshot_dir)));
    k.push_back({"output.fields",
                 [](const RunConfig& c) {
                   std::string s;
                   for (const auto& f : c.output.fields) s += (s.empty() ? "" : ",") + f;
                   return s;
                 },
                 [](RunConfig& c, std::string_view v) {
                   c.output.fields.clear();
                   std::string item;
                   std::istringstream in{std::string(v)};
                   while (std::getline(in, item, ',')) {
                     const auto t = std::string(trim(item));
                     if (t.empty()) continue;
                     field_role_from_string(t);
                     c.output.fields.push_back(t);
                   }
                 }});
    return k;
  }();
  return table;
}

#undef SWARMSIM_REF

const Key& find_key(std::string_view name) {
  for (const auto& k : key_table())
    if (k.name == name) return k;
  throw ConfigError("unknown key '" + std::string(name) + "'");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& k : key_table()) n.push_back(k.name);
    return n;
  }();
  return names;
}

RunConfig preset_config(std::string_view name, double a_bar) {
  RunConfig c;
  c.a_bar = a_bar;
  if (name == "reference") {
    c.preset = "reference";
  } else if (name == "model_a") {
    // Dedifferentiation at the fixed age a_max = A, no swarmers at t = 0.
    c.preset = "model_a";
    c.coefficients.mu = {MuModel::zero, 0.0, 1.0};
    c.initial.rho0 = Profile::zero;
  } else if (name == "model_b") {
    // Dedifferentiation with rate 1/a_bar and no maximum age.
    c.preset = "model_b";
    c.coefficients.A = kInfinity;
    c.age.horizon = 2.0;
    c.coefficients.mu = {MuModel::constant, 1.0 / a_bar, 1.0};
    c.initial.rho0 = Profile::zero;
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "'");
  }
  return c;
}

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  const auto& k = find_key(key);
  try {
    k.set(cfg, value);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

std::string get_config_value(const RunConfig& cfg, std::string_view key) { return find_key(key).get(cfg); }

RunConfig parse_config_unchecked(std::string_view text) {
  struct Entry {
    int line;
    std::string key;
    std::string value;
  };
  std::vector<Entry> entries;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  auto fail = [&](const std::string& msg) { throw ConfigError("line " + std::to_string(line_no) + ": " + msg); };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail("expected 'section.key = value'");
    const auto key = std::string(trim(line.substr(0, eq)));
    const auto value = std::string(trim(line.substr(eq + 1)));
    if (key.find('.') == std::string::npos) fail("key '" + key + "' has no section");
    if (value.empty()) fail("empty value for '" + key + "'");
    if (!seen.insert(key).second) fail("duplicate key '" + key + "'");
    entries.push_back({line_no, key, value});
  }

  std::string preset = "reference";
  double a_bar = 1.0;
  for (const auto& e : entries) {
    line_no = e.line;
    if (e.key == "model.preset") preset = e.value;
    if (e.key == "model.a_bar") {
      try {
        a_bar = parse_double(e.value);
      } catch (const std::invalid_argument& ex) {
        fail(std::string("model.a_bar: ") + ex.what());
      }
    }
  }
  RunConfig cfg;
  try {
    cfg = preset_config(preset, a_bar);
  } catch (const ConfigError& ex) {
    fail(ex.what());
  }

  bool dt_given = false;
  for (const auto& e : entries) {
    line_no = e.line;
    if (e.key == "model.preset") continue;
    try {
      set_config_value(cfg, e.key, e.value);
    } catch (const ConfigError& ex) {
      fail(ex.what());
    }
    if (e.key == "solver.dt") dt_given = true;
  }
  if (!dt_given) cfg.solver.dt = cfg.age.da;
  return cfg;
}

std::vector<Violation> validate_run_config(const RunConfig& cfg) {
  auto v = validate(cfg.coefficients);
  auto add = [&](const char* tag, std::string msg) { v.push_back({tag, std::move(msg)}); };

  try {
    (void)SpaceGrid::make(cfg.grid.nx, cfg.grid.ny, cfg.grid.lx, cfg.grid.ly);
  } catch (const std::invalid_argument& e) {
    add("grid", e.what());
  }
  if (cfg.coefficients.A > 0.0 && cfg.coefficients.a_min >= 0.0 && cfg.coefficients.a_min < cfg.coefficients.A) {
    try {
      (void)AgeGrid::make(cfg.coefficients.A, cfg.age.da, cfg.coefficients.a_min, cfg.age.horizon);
    } catch (const std::invalid_argument& e) {
      add("grid", e.what());
    }
  }

  const auto& s = cfg.solver;
  if (s.dt != cfg.age.da) add("grid", "time step must equal the age step (da = dt)");
  if (!(s.dt > 0.0)) add("solver", "dt must be positive");
  if (!(s.t_end >= 0.0)) add("solver", "t_end must be nonnegative");
  if (s.dt > 0.0 && s.t_end >= 0.0) {
    const double steps = std::round(s.t_end / s.dt);
    if (std::abs(steps * s.dt - s.t_end) > 1e-9 * std::max(1.0, s.t_end))
      add("solver", "t_end must be a whole number of time steps");
  }
  if (!(s.picard_tol > 0.0)) add("solver", "picard_tol must be positive");
  if (s.picard_max_iters < 1) add("solver", "picard_max_iters must be at least 1");
  if (!(s.cg.rel_tol > 0.0)) add("solver", "cg_tol must be positive");
  if (s.cg.max_iter < 1) add("solver", "cg_max_iter must be at least 1");
  if (!(s.l2_blowup_factor > 0.0)) add("solver", "l2_blowup_factor must be positive");
  if (s.threads < 1) add("solver", "threads must be at least 1");

  if (s.scheme == DiffusionScheme::explicit_euler && cfg.grid.nx > 0 && cfg.grid.ny > 0 && cfg.grid.lx > 0 &&
      cfg.grid.ly > 0) {
    const double dmax = (cfg.coefficients.diffusion.kind == DiffusionKind::zero ? 0.0 : cfg.coefficients.diffusion.D0bar) +
                        cfg.coefficients.d;
    const double dx = cfg.grid.lx / cfg.grid.nx;
    const double dy = cfg.grid.ly / cfg.grid.ny;
    if (s.dt * dmax * (2.0 / (dx * dx) + 2.0 / (dy * dy)) > 1.0)
      add("solver", "explicit scheme needs dt * max(D+d) * (2/dx^2 + 2/dy^2) <= 1");
  }

  const auto& in = cfg.initial;
  if (in.q0 == Profile::file && in.q0_file.empty()) add("initial", "q0 = file needs initial.q0_file");
  if (in.rho0 == Profile::file && in.rho0_file.empty()) add("initial", "rho0 = file needs initial.rho0_file");
  if (in.m0 == MemoryProfile::file && in.m0_file.empty()) add("initial", "m0 = file needs initial.m0_file");
  if (in.q0 != Profile::file && !(in.q0_amplitude >= 0.0)) add("initial", "q0_amplitude must be nonnegative");
  if (in.rho0 != Profile::file && !(in.rho0_amplitude >= 0.0)) add("initial", "rho0_amplitude must be nonnegative");
  if (in.q0 == Profile::gaussian && !(in.q0_sigma > 0.0)) add("initial", "q0_sigma must be positive");
  if (in.rho0 == Profile::gaussian && !(in.rho0_sigma > 0.0 && in.rho0_age_sigma > 0.0))
    add("initial", "rho0 sigmas must be positive");

  if (cfg.output.snapshot_stride < 0) add("output", "snapshot_stride must be nonnegative");
  return v;
}

RunConfig parse_config(std::string_view text) {
  auto cfg = parse_config_unchecked(text);
  auto violations = validate_run_config(cfg);
  if (!violations.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& v : violations) msg += "\n  " + v.tag + ": " + v.message;
    throw ConfigError(msg, std::move(violations));
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& k : key_table()) {
    const auto sec = k.name.substr(0, k.name.find('.'));
    if (sec != section) {
      if (!section.empty()) out += '\n';
      section = sec;
    }
    const auto value = k.get(cfg);
    if (value.empty()) continue;  // unset file paths
    out += k.name + " = " + value + '\n';
  }
  return out;
}

}  // namespace swarmsim
