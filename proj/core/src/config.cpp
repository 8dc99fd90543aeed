#include "chsd/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace chsd {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "nx", "ny", "Lx", "Ly", "y_interface", "conduit_enclosed", "conduit_x0", "conduit_x1",
      "conduit_y0", "varpi", "epsilon", "alpha_bjsj", "kappa_model", "kappa", "kappa_slope",
      "nu1", "nu2", "m1", "m2", "dt", "T", "picard_tol", "picard_max_iter",
      "picard_max_halvings", "picard_cubic", "energy_tol_factor", "ic", "ic_value", "ic_mean",
      "ic_amplitude", "seed", "ic_width", "ic_center_x", "ic_center_y", "ic_radius",
      "output_dir", "snapshot_every", "csv_name"};
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Reader {
 public:
  Reader(std::map<std::string, std::string> values, std::string origin)
      : values_(std::move(values)), origin_(std::move(origin)) {}

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  void require(const std::string& key) const {
    if (!has(key)) fail(key, "is required");
  }

  double real(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = values_.at(key);
    double x = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(x))
      fail(key, "expects a finite real number, got '" + v + "'");
    return x;
  }

  long long integer(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = values_.at(key);
    long long x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size()) fail(key, "expects an integer, got '" + v + "'");
    return x;
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = values_.at(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail(key, "expects true or false, got '" + v + "'");
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    return has(key) ? values_.at(key) : fallback;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(origin_ + ": key '" + key + "' " + what);
  }

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

[[noreturn]] void reject(const std::string& key, const std::string& constraint) {
  throw ConfigError("key '" + key + "' violates constraint " + constraint);
}

std::string number(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

}  // namespace

int Config::steps() const { return static_cast<int>(std::llround(T / dt)); }

Params Config::params() const {
  Params p;
  p.varpi = varpi;
  p.epsilon = epsilon;
  p.dt = dt;
  p.alpha_bjsj = alpha_bjsj;
  if (kappa_model == "linear_x") {
    const double k = kappa, s = kappa_slope, lx = mesh.Lx;
    p.kappa = CoeffField::function([k, s, lx](Vec2 x) { return k * (1.0 + s * x.x / lx); },
                                   k * std::min(1.0, 1.0 + s), k * std::max(1.0, 1.0 + s));
  } else {
    p.kappa = CoeffField::constant(kappa);
  }
  p.nu = {nu1, nu2};
  p.mobility = {m1, m2};
  p.picard = picard;
  p.energy_tol_factor = energy_tol_factor;
  return p;
}

void Config::validate() const {
  if (mesh.nx < 2) reject("nx", "nx >= 2");
  if (mesh.ny < 2) reject("ny", "ny >= 2");
  if (!(mesh.Lx > 0.0)) reject("Lx", "Lx > 0");
  if (!(mesh.Ly > 0.0)) reject("Ly", "Ly > 0");
  if (!(mesh.y_interface > 0.0 && mesh.y_interface < mesh.Ly))
    reject("y_interface", "0 < y_interface < Ly");
  if (!(epsilon > 0.0)) reject("epsilon", "epsilon > 0");
  if (!(varpi >= 0.0)) reject("varpi", "varpi >= 0");
  if (!(alpha_bjsj >= 0.0)) reject("alpha_bjsj", "alpha_bjsj >= 0");
  if (kappa_model != "constant" && kappa_model != "linear_x")
    reject("kappa_model", "kappa_model in {constant, linear_x}");
  if (!(kappa > 0.0)) reject("kappa", "kappa > 0");
  if (kappa_model == "linear_x" && !(1.0 + kappa_slope > 0.0))
    reject("kappa_slope", "kappa_slope > -1 (permeability stays positive)");
  if (!(nu1 > 0.0)) reject("nu1", "nu1 > 0");
  if (!(nu2 > 0.0)) reject("nu2", "nu2 > 0");
  if (!(m1 > 0.0)) reject("m1", "m1 > 0");
  if (!(m2 > 0.0)) reject("m2", "m2 > 0");
  if (!(dt > 0.0)) reject("dt", "dt > 0");
  if (!(T >= 0.0)) reject("T", "T >= 0");
  const double n = T / dt;
  if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
    reject("T", "T = N dt for an integer N");
  if (!(picard.tol_rel > 0.0)) reject("picard_tol", "picard_tol > 0");
  if (picard.max_iter < 1) reject("picard_max_iter", "picard_max_iter >= 1");
  if (picard.max_dt_halvings < 0) reject("picard_max_halvings", "picard_max_halvings >= 0");
  if (!(energy_tol_factor > 0.0)) reject("energy_tol_factor", "energy_tol_factor > 0");

  const double lim = 1.0 + kPhaseRangeSlack;
  switch (ic.kind) {
    case InitialCondition::Kind::Uniform:
      if (!(std::abs(ic.value) <= lim)) reject("ic_value", "|ic_value| <= 1.1");
      break;
    case InitialCondition::Kind::Random:
      if (!(ic.amplitude >= 0.0)) reject("ic_amplitude", "ic_amplitude >= 0");
      if (!(std::abs(ic.mean) + ic.amplitude <= lim))
        reject("ic_mean", "|ic_mean| + ic_amplitude <= 1.1");
      break;
    case InitialCondition::Kind::Stripe:
      if (!(ic.width > 0.0 && ic.width < mesh.Lx)) reject("ic_width", "0 < ic_width < Lx");
      break;
    case InitialCondition::Kind::Bubble:
      if (!(ic.radius > 0.0)) reject("ic_radius", "ic_radius > 0");
      break;
  }
  if (snapshot_every < 0) reject("snapshot_every", "snapshot_every >= 0");
  if (output_dir.empty()) reject("output_dir", "non-empty");
  if (csv_name.empty() || csv_name.find('/') != std::string::npos)
    reject("csv_name", "a plain, non-empty file name");
  try {
    build_rect_karst(mesh);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("mesh keys rejected: ") + e.what());
  }
  try {
    params().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("physical parameters rejected: ") + e.what());
  }
}

Config parse_config_text(const std::string& text, const std::string& origin) {
  std::map<std::string, std::string> values;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!known_keys().count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    if (value.empty()) throw ConfigError(where + ": key '" + key + "' has no value");
    if (!values.emplace(key, value).second)
      throw ConfigError(where + ": key '" + key + "' given more than once");
  }

  const Reader r(std::move(values), origin);
  for (const char* k : {"nx", "ny", "epsilon", "dt", "T", "ic"}) r.require(k);

  Config c;
  KarstLayout& m = c.mesh;
  m.nx = static_cast<int>(r.integer("nx", 0));
  m.ny = static_cast<int>(r.integer("ny", 0));
  m.Lx = r.real("Lx", 1.0);
  m.Ly = r.real("Ly", 1.0);
  m.y_interface = r.real("y_interface", 0.5 * m.Ly);
  m.conduit_enclosed = r.boolean("conduit_enclosed", false);
  m.x0 = r.real("conduit_x0", 0.25 * m.Lx);
  m.x1 = r.real("conduit_x1", 0.75 * m.Lx);
  m.y0 = r.real("conduit_y0", 0.25 * m.Ly);

  c.varpi = r.real("varpi", c.varpi);
  c.epsilon = r.real("epsilon", c.epsilon);
  c.alpha_bjsj = r.real("alpha_bjsj", c.alpha_bjsj);
  c.kappa_model = r.text("kappa_model", c.kappa_model);
  c.kappa = r.real("kappa", c.kappa);
  c.kappa_slope = r.real("kappa_slope", c.kappa_slope);
  c.nu1 = r.real("nu1", c.nu1);
  c.nu2 = r.real("nu2", c.nu2);
  c.m1 = r.real("m1", c.m1);
  c.m2 = r.real("m2", c.m2);

  c.dt = r.real("dt", c.dt);
  c.T = r.real("T", c.T);
  c.picard.tol_rel = r.real("picard_tol", c.picard.tol_rel);
  c.picard.max_iter = static_cast<int>(r.integer("picard_max_iter", c.picard.max_iter));
  c.picard.max_dt_halvings = static_cast<int>(r.integer("picard_max_halvings", c.picard.max_dt_halvings));
  const std::string cubic = r.text("picard_cubic", "newton");
  if (cubic == "newton") c.picard.cubic = CubicLinearization::Newton;
  else if (cubic == "lagged") c.picard.cubic = CubicLinearization::Lagged;
  else r.fail("picard_cubic", "expects newton or lagged, got '" + cubic + "'");
  c.energy_tol_factor = r.real("energy_tol_factor", c.energy_tol_factor);

  try {
    c.ic.kind = InitialCondition::parse_kind(r.text("ic", ""));
  } catch (const std::invalid_argument& e) {
    r.fail("ic", e.what());
  }
  c.ic.value = r.real("ic_value", 0.0);
  c.ic.mean = r.real("ic_mean", 0.0);
  c.ic.amplitude = r.real("ic_amplitude", 0.05);
  const long long seed = r.integer("seed", 42);
  if (seed < 0) r.fail("seed", "must be >= 0");
  c.ic.seed = static_cast<std::uint64_t>(seed);
  c.ic.width = r.real("ic_width", 0.5 * m.Lx);
  c.ic.center = {r.real("ic_center_x", 0.5 * m.Lx), r.real("ic_center_y", 0.5 * m.Ly)};
  c.ic.radius = r.real("ic_radius", 0.25 * std::min(m.Lx, m.Ly));

  c.output_dir = r.text("output_dir", c.output_dir);
  c.snapshot_every = static_cast<int>(r.integer("snapshot_every", c.snapshot_every));
  c.csv_name = r.text("csv_name", c.csv_name);

  c.validate();
  return c;
}

Config parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

std::string serialize(const Config& c) {
  std::map<std::string, std::string> kv;
  const KarstLayout& m = c.mesh;
  kv["nx"] = std::to_string(m.nx);
  kv["ny"] = std::to_string(m.ny);
  kv["Lx"] = number(m.Lx);
  kv["Ly"] = number(m.Ly);
  kv["y_interface"] = number(m.y_interface);
  kv["conduit_enclosed"] = m.conduit_enclosed ? "true" : "false";
  kv["conduit_x0"] = number(m.x0);
  kv["conduit_x1"] = number(m.x1);
  kv["conduit_y0"] = number(m.y0);
  kv["varpi"] = number(c.varpi);
  kv["epsilon"] = number(c.epsilon);
  kv["alpha_bjsj"] = number(c.alpha_bjsj);
  kv["kappa_model"] = c.kappa_model;
  kv["kappa"] = number(c.kappa);
  kv["kappa_slope"] = number(c.kappa_slope);
  kv["nu1"] = number(c.nu1);
  kv["nu2"] = number(c.nu2);
  kv["m1"] = number(c.m1);
  kv["m2"] = number(c.m2);
  kv["dt"] = number(c.dt);
  kv["T"] = number(c.T);
  kv["picard_tol"] = number(c.picard.tol_rel);
  kv["picard_max_iter"] = std::to_string(c.picard.max_iter);
  kv["picard_max_halvings"] = std::to_string(c.picard.max_dt_halvings);
  kv["picard_cubic"] = c.picard.cubic == CubicLinearization::Newton ? "newton" : "lagged";
  kv["energy_tol_factor"] = number(c.energy_tol_factor);
  kv["ic"] = to_string(c.ic.kind);
  kv["ic_value"] = number(c.ic.value);
  kv["ic_mean"] = number(c.ic.mean);
  kv["ic_amplitude"] = number(c.ic.amplitude);
  kv["seed"] = std::to_string(c.ic.seed);
  kv["ic_width"] = number(c.ic.width);
  kv["ic_center_x"] = number(c.ic.center.x);
  kv["ic_center_y"] = number(c.ic.center.y);
  kv["ic_radius"] = number(c.ic.radius);
  kv["output_dir"] = c.output_dir;
  kv["snapshot_every"] = std::to_string(c.snapshot_every);
  kv["csv_name"] = c.csv_name;

  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

}  // namespace chsd
