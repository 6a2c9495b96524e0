#ifndef FLRWKG_CONFIG_HPP
#define FLRWKG_CONFIG_HPP

// Sectioned key-value run configuration (INI syntax).

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "flrwkg/curved_mass.hpp"
#include "flrwkg/gamma_weight.hpp"
#include "flrwkg/nonlinearity.hpp"
#include "flrwkg/scale_factor.hpp"
#include "flrwkg/spectral_solver.hpp"
#include "flrwkg/torus.hpp"

namespace flrwkg {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InitialSpec {
  std::string profile = "zero";  // zero | gaussian | mode | random
  double amplitude = 1.0;
  double width = 0.5;
  std::array<double, 3> center{M_PI, M_PI, M_PI};
  std::array<int, 3> mode{1, 0, 0};
  double phase = 0.0;
  int band = 3;
  double velocity_amplitude = 0.0;  // psi1 = this * (random field, seed + 1)
};

struct LifespanSpec {
  std::optional<double> alpha0;
  double alpha = 0.0;
  double data_norm = 1.0;
  double constant_C = 1.0;
  double fixedpoint_c0 = 1.0;
};

struct CheckSpec {
  std::vector<std::string> conditions;  // empty: defaults from what is configured
  double horizon = 1e4;
  int samples = 4000;
  double derivative_tol = 1e-12;
  double w_max = 10.0;  // dissipativity sample range [-w_max, w_max]
};

struct VerifySpec {
  double energy_tol = 1e-8;  // per unit time, relative to E(t0)
  int gn_count = 1000;
  int gn_band_min = 1;
  int gn_band_max = 4;
  int estimate_count = 20;
  double estimate_amplitude = 0.01;
  int picard_max_iter = 15;
  double picard_tol = 1e-8;
  double picard_match_tol = 1e-6;
};

struct SweepAxis {
  std::string key;  // section.key
  std::vector<std::string> values;
};

struct SweepSpec {
  std::string command = "check";  // check | lifespan
  std::vector<SweepAxis> axes;
};

struct OutputSpec {
  bool snapshots = false;
  bool plot_script = true;
};

struct RunConfig {
  std::string name = "run";
  std::uint64_t seed = 1;
  std::string output_dir;
  ScaleFactorModel model{Exponential{1.0, 1.0}, 1.0};
  CurvedMassProfile profile;
  std::optional<GammaWeight> gamma;
  std::optional<NonlinearityModel> nonlinearity;
  std::optional<PotentialModel> potential;
  LifespanSpec lifespan;
  TorusGrid grid;
  double horizon = 10.0;
  SolverOptions solver;
  InitialSpec initial;
  CheckSpec check;
  VerifySpec verify;
  SweepSpec sweep;
  OutputSpec output;
  std::string canonical;  // sorted section.key=value lines
  std::uint64_t hash = 0;
};

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* d = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = d[v & 0xF];
  return s;
}

namespace detail {

using ptree = boost::property_tree::ptree;

inline const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> k{
      {"run", {"name", "seed", "output_dir"}},
      {"background", {"family", "ell", "H", "beta", "t0"}},
      {"mass", {"n", "m", "c0"}},
      {"gamma", {"form", "c", "gamma", "rate", "coef", "t", "values"}},
      {"nonlinearity", {"form", "alpha", "lambda", "sign", "name", "lipschitz_C"}},
      {"potential", {"form", "alpha", "lambda"}},
      {"lifespan", {"alpha0", "alpha", "data_norm", "constant_C", "fixedpoint_c0"}},
      {"grid", {"points", "L"}},
      {"time", {"horizon", "dt_max", "cfl", "record_dt", "blowup_threshold", "fixed_dt", "dealias"}},
      {"initial",
       {"profile", "amplitude", "width", "center", "mode", "phase", "band", "velocity_amplitude"}},
      {"check", {"conditions", "horizon", "samples", "derivative_tol", "w_max"}},
      {"verify",
       {"energy_tol", "gn_count", "gn_band_min", "gn_band_max", "estimate_count", "estimate_amplitude",
        "picard_max_iter", "picard_tol", "picard_match_tol"}},
      {"sweep", {"command"}},
      {"output", {"snapshots", "plot_script"}}};
  return k;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

inline double parse_double(const std::string& where, const std::string& text) {
  const std::string s = trim(text);
  double v = 0.0;
  if (s == "inf" || s == "+inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  const auto* b = s.data();
  const auto* e = s.data() + s.size();
  if (!s.empty() && *b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, v);
  if (s.empty() || ec != std::errc() || p != e) throw ConfigError(where + ": expected a number, got '" + s + "'");
  return v;
}

inline long parse_int(const std::string& where, const std::string& text) {
  const std::string s = trim(text);
  long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    throw ConfigError(where + ": expected an integer, got '" + s + "'");
  return v;
}

inline bool parse_bool(const std::string& where, const std::string& text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(where + ": expected true/false, got '" + s + "'");
}

class Reader {
 public:
  explicit Reader(const ptree& t) : t_(t) {}

  bool has(const std::string& sec, const std::string& key) const {
    const auto s = t_.get_child_optional(sec);
    return s && s->get_child_optional(key);
  }
  bool has_section(const std::string& sec) const { return static_cast<bool>(t_.get_child_optional(sec)); }
  std::string raw(const std::string& sec, const std::string& key) const {
    return trim(t_.get_child(sec).get_child(key).data());
  }
  std::string str(const std::string& sec, const std::string& key, const std::string& def) const {
    return has(sec, key) ? raw(sec, key) : def;
  }
  double num(const std::string& sec, const std::string& key, double def) const {
    return has(sec, key) ? parse_double(sec + "." + key, raw(sec, key)) : def;
  }
  double need_num(const std::string& sec, const std::string& key) const {
    if (!has(sec, key)) throw ConfigError(sec + "." + key + ": required");
    return parse_double(sec + "." + key, raw(sec, key));
  }
  long integer(const std::string& sec, const std::string& key, long def) const {
    return has(sec, key) ? parse_int(sec + "." + key, raw(sec, key)) : def;
  }
  bool flag(const std::string& sec, const std::string& key, bool def) const {
    return has(sec, key) ? parse_bool(sec + "." + key, raw(sec, key)) : def;
  }
  std::vector<double> nums(const std::string& sec, const std::string& key) const {
    std::vector<double> v;
    for (const auto& s : split(raw(sec, key), ',')) v.push_back(parse_double(sec + "." + key, s));
    return v;
  }

 private:
  const ptree& t_;
};

inline std::string canonical_text(const ptree& t) {
  std::vector<std::string> lines;
  for (const auto& [sec, body] : t)
    for (const auto& [key, val] : body) lines.push_back(sec + "." + key + "=" + trim(val.data()));
  std::sort(lines.begin(), lines.end());
  std::string s;
  for (const auto& l : lines) s += l + "\n";
  return s;
}

}  // namespace detail

/// Builds a RunConfig from a parsed tree; sweeps re-enter here with overrides.
inline RunConfig config_from_tree(const boost::property_tree::ptree& tree) {
  using detail::Reader;
  const auto& allowed = detail::allowed_keys();
  for (const auto& [sec, body] : tree) {
    if (body.data().size() && body.empty()) throw ConfigError(sec + ": key outside of any section");
    const auto it = allowed.find(sec);
    if (it == allowed.end()) throw ConfigError("unknown section [" + sec + "]");
    if (sec == "sweep") continue;  // sweep axes are free-form section.key entries
    for (const auto& kv : body)
      if (!it->second.count(kv.first)) throw ConfigError(sec + "." + kv.first + ": unknown key");
  }
  if (tree.empty()) throw ConfigError("empty configuration");
  Reader r(tree);
  RunConfig c;
  c.name = r.str("run", "name", "run");
  c.seed = static_cast<std::uint64_t>(r.integer("run", "seed", 1));
  c.output_dir = r.str("run", "output_dir", c.name);

  if (!r.has_section("background")) throw ConfigError("[background]: required section");
  const std::string fam = r.str("background", "family", "");
  const double t0 = r.num("background", "t0", 1.0);
  if (fam == "power_law") c.model = {PowerLaw{r.need_num("background", "ell")}, t0};
  else if (fam == "exponential")
    c.model = {Exponential{r.need_num("background", "H"), r.num("background", "beta", 1.0)}, t0};
  else if (fam == "mixed")
    c.model = {Mixed{r.need_num("background", "ell"), r.need_num("background", "H"),
                     r.need_num("background", "beta")},
               t0};
  else throw ConfigError("background.family: expected power_law, exponential or mixed, got '" + fam + "'");
  if (!(t0 > 0.0)) throw ConfigError("background.t0: must be positive");

  c.profile.model = c.model;
  c.profile.n = static_cast<int>(r.integer("mass", "n", 3));
  c.profile.m = r.num("mass", "m", 1.0);
  if (r.has("mass", "c0")) c.profile.c0 = r.need_num("mass", "c0");
  if (c.profile.n < 1) throw ConfigError("mass.n: must be >= 1");
  if (!(c.profile.m > 0.0)) throw ConfigError("mass.m: must be positive");

  if (r.has_section("gamma")) {
    const std::string form = r.str("gamma", "form", "");
    if (form == "constant") c.gamma = GammaConstant{r.num("gamma", "c", 1.0)};
    else if (form == "power") c.gamma = GammaPower{r.need_num("gamma", "gamma"), r.num("gamma", "coef", 1.0)};
    else if (form == "exponential")
      c.gamma = GammaExponential{r.need_num("gamma", "rate"), r.num("gamma", "coef", 1.0)};
    else if (form == "table") {
      if (!r.has("gamma", "t") || !r.has("gamma", "values")) throw ConfigError("gamma: table needs t and values");
      c.gamma = GammaTable{r.nums("gamma", "t"), r.nums("gamma", "values")};
    } else throw ConfigError("gamma.form: expected constant, power, exponential or table, got '" + form + "'");
    try {
      validate_gamma(*c.gamma);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("gamma: ") + e.what());
    }
  }

  if (r.has_section("nonlinearity")) {
    const std::string form = r.str("nonlinearity", "form", "pure_power");
    if (form == "pure_power") {
      const double sign = r.num("nonlinearity", "sign", -1.0);
      if (sign != 1.0 && sign != -1.0) throw ConfigError("nonlinearity.sign: expected +1 or -1");
      c.nonlinearity = NonlinearityModel{
          PurePower{r.need_num("nonlinearity", "alpha"), r.num("nonlinearity", "lambda", 1.0), int(sign)},
          std::nullopt};
      if (!(declared_alpha(*c.nonlinearity) >= 0.0)) throw ConfigError("nonlinearity.alpha: must be >= 0");
    } else if (form == "custom") {
      try {
        c.nonlinearity = make_custom(r.str("nonlinearity", "name", ""));
      } catch (const std::exception& e) {
        throw ConfigError(std::string("nonlinearity.name: ") + e.what());
      }
    } else if (form != "none") {
      throw ConfigError("nonlinearity.form: expected pure_power, custom or none, got '" + form + "'");
    }
    if (c.nonlinearity && r.has("nonlinearity", "lipschitz_C"))
      c.nonlinearity->lipschitz_C = r.need_num("nonlinearity", "lipschitz_C");
  }

  if (r.has_section("potential")) {
    const std::string form = r.str("potential", "form", "dissipative_power");
    if (form == "dissipative_power") {
      if (c.nonlinearity) throw ConfigError("potential: give either [nonlinearity] or [potential], not both");
      if (!c.gamma) throw ConfigError("potential: needs a [gamma] section");
      c.potential = dissipative_power_potential(r.need_num("potential", "alpha"),
                                                r.num("potential", "lambda", 1.0), *c.gamma);
    } else if (form != "none") {
      throw ConfigError("potential.form: expected dissipative_power or none, got '" + form + "'");
    }
  }

  if (r.has("lifespan", "alpha0")) c.lifespan.alpha0 = r.need_num("lifespan", "alpha0");
  c.lifespan.alpha = r.num("lifespan", "alpha", c.nonlinearity ? declared_alpha(*c.nonlinearity) : 0.0);
  c.lifespan.data_norm = r.num("lifespan", "data_norm", 1.0);
  c.lifespan.constant_C = r.num("lifespan", "constant_C", 1.0);
  c.lifespan.fixedpoint_c0 = r.num("lifespan", "fixedpoint_c0", 1.0);

  c.grid.n = c.profile.n;
  c.grid.points = static_cast<int>(r.integer("grid", "points", 16));
  c.grid.L = r.num("grid", "L", 2.0 * M_PI);
  if (c.profile.n <= 3) {
    try {
      validate_grid(c.grid);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("grid: ") + e.what());
    }
  }

  c.horizon = r.num("time", "horizon", 10.0);
  if (!(c.horizon > t0)) throw ConfigError("time.horizon: must exceed background.t0");
  c.solver.dt_max = r.num("time", "dt_max", 0.05);
  c.solver.cfl = r.num("time", "cfl", 0.5);
  c.solver.record_dt = r.num("time", "record_dt", 0.1);
  c.solver.blowup_threshold = r.num("time", "blowup_threshold", 1e12);
  if (r.has("time", "fixed_dt")) c.solver.fixed_dt = r.need_num("time", "fixed_dt");
  const std::string da = r.str("time", "dealias", "auto");
  if (da == "auto") c.solver.dealias = DealiasMode::automatic;
  else if (da == "on") c.solver.dealias = DealiasMode::on;
  else if (da == "off") c.solver.dealias = DealiasMode::off;
  else throw ConfigError("time.dealias: expected auto, on or off");
  if (!(c.solver.dt_max > 0.0) || !(c.solver.cfl > 0.0) || !(c.solver.record_dt > 0.0))
    throw ConfigError("time: dt_max, cfl and record_dt must be positive");

  auto& in = c.initial;
  in.profile = r.str("initial", "profile", "zero");
  if (in.profile != "zero" && in.profile != "gaussian" && in.profile != "mode" && in.profile != "random")
    throw ConfigError("initial.profile: expected zero, gaussian, mode or random, got '" + in.profile + "'");
  in.amplitude = r.num("initial", "amplitude", 1.0);
  in.width = r.num("initial", "width", 0.5);
  in.center = {c.grid.L / 2, c.grid.L / 2, c.grid.L / 2};
  if (r.has("initial", "center")) {
    const auto v = r.nums("initial", "center");
    for (std::size_t i = 0; i < std::min<std::size_t>(3, v.size()); ++i) in.center[i] = v[i];
  }
  if (r.has("initial", "mode")) {
    const auto v = r.nums("initial", "mode");
    for (std::size_t i = 0; i < std::min<std::size_t>(3, v.size()); ++i) in.mode[i] = static_cast<int>(v[i]);
  }
  in.phase = r.num("initial", "phase", 0.0);
  in.band = static_cast<int>(r.integer("initial", "band", 3));
  in.velocity_amplitude = r.num("initial", "velocity_amplitude", 0.0);

  if (r.has("check", "conditions"))
    for (const auto& s : detail::split(r.raw("check", "conditions"), ','))
      if (!s.empty()) c.check.conditions.push_back(s);
  for (const auto& s : c.check.conditions)
    if (s != "expansion" && s != "mass" && s != "gamma_bound" && s != "gamma_integrable" && s != "dissipativity" &&
        s != "alpha_range")
      throw ConfigError("check.conditions: unknown condition '" + s + "'");
  c.check.horizon = r.num("check", "horizon", 1e4);
  c.check.samples = static_cast<int>(r.integer("check", "samples", 4000));
  c.check.derivative_tol = r.num("check", "derivative_tol", 1e-12);
  c.check.w_max = r.num("check", "w_max", 10.0);
  if (!(c.check.horizon > t0)) throw ConfigError("check.horizon: must exceed background.t0");

  auto& v = c.verify;
  v.energy_tol = r.num("verify", "energy_tol", v.energy_tol);
  v.gn_count = static_cast<int>(r.integer("verify", "gn_count", v.gn_count));
  v.gn_band_min = static_cast<int>(r.integer("verify", "gn_band_min", v.gn_band_min));
  v.gn_band_max = static_cast<int>(r.integer("verify", "gn_band_max", v.gn_band_max));
  v.estimate_count = static_cast<int>(r.integer("verify", "estimate_count", v.estimate_count));
  v.estimate_amplitude = r.num("verify", "estimate_amplitude", v.estimate_amplitude);
  v.picard_max_iter = static_cast<int>(r.integer("verify", "picard_max_iter", v.picard_max_iter));
  v.picard_tol = r.num("verify", "picard_tol", v.picard_tol);
  v.picard_match_tol = r.num("verify", "picard_match_tol", v.picard_match_tol);

  if (r.has_section("sweep")) {
    c.sweep.command = r.str("sweep", "command", "check");
    if (c.sweep.command != "check" && c.sweep.command != "lifespan")
      throw ConfigError("sweep.command: expected check or lifespan");
    for (const auto& [key, val] : tree.get_child("sweep")) {
      if (key == "command") continue;
      const auto dot = key.find('.');
      if (dot == std::string::npos) throw ConfigError("sweep." + key + ": axis keys look like section.key");
      const auto sec = key.substr(0, dot), k = key.substr(dot + 1);
      const auto it = allowed.find(sec);
      if (it == allowed.end() || !it->second.count(k)) throw ConfigError("sweep." + key + ": unknown parameter");
      SweepAxis ax{key, {}};
      const std::string spec = detail::trim(val.data());
      const auto parts = detail::split(spec, ':');
      if (parts.size() == 3) {
        const double lo = detail::parse_double("sweep." + key, parts[0]);
        const double hi = detail::parse_double("sweep." + key, parts[1]);
        const long cnt = detail::parse_int("sweep." + key, parts[2]);
        if (cnt < 1) throw ConfigError("sweep." + key + ": count must be >= 1");
        for (long i = 0; i < cnt; ++i) {
          const double x = cnt == 1 ? lo : lo + (hi - lo) * double(i) / double(cnt - 1);
          char buf[64];
          const auto res = std::to_chars(buf, buf + sizeof buf, x);
          ax.values.emplace_back(buf, res.ptr);
        }
      } else {
        ax.values = detail::split(spec, ',');
      }
      if (ax.values.empty()) throw ConfigError("sweep." + key + ": no values");
      c.sweep.axes.push_back(ax);
    }
  }

  c.output.snapshots = r.flag("output", "snapshots", false);
  c.output.plot_script = r.flag("output", "plot_script", true);

  c.canonical = detail::canonical_text(tree);
  c.hash = fnv1a64(c.canonical);
  return c;
}

inline boost::property_tree::ptree parse_config_tree(const std::string& text, const std::string& origin) {
  boost::property_tree::ptree t;
  std::istringstream is(text);
  try {
    boost::property_tree::ini_parser::read_ini(is, t);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  return t;
}

inline RunConfig parse_config(const std::string& text, const std::string& origin = "<config>") {
  try {
    return config_from_tree(parse_config_tree(text, origin));
  } catch (const ConfigError& e) {
    const std::string m = e.what();
    if (m.rfind(origin, 0) == 0) throw;
    throw ConfigError(origin + ": " + m);
  }
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace flrwkg

#endif  // FLRWKG_CONFIG_HPP
