#include "msim/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "msim/errors.hpp"

namespace msim::cli {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* first = v.data();
  const char* last = v.data() + v.size();
  if (!v.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || !std::isfinite(out)) {
    throw InvalidArgument(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

std::size_t to_count(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw InvalidArgument(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw InvalidArgument(key + ": expected true or false, got '" + v + "'");
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

ModelKind to_model_kind(const std::string& v) {
  if (v == "cavity") return ModelKind::cavity;
  if (v == "free_space") return ModelKind::free_space;
  if (v == "image") return ModelKind::image;
  throw InvalidArgument("model.kind must be cavity, free_space or image, got '" + v + "'");
}

struct Key {
  const char* name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&, std::optional<Command>)> get;
};

// Shortest text that reads back to the same double.
std::string config_number(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string optional_number(const std::optional<double>& v, const char* unset) {
  return v ? config_number(*v) : std::string(unset);
}

bool sweeps(std::optional<Command> cmd) { return cmd == Command::rates || cmd == Command::fraction; }

const std::vector<Key>& keys() {
  using C = RunConfig;
  using O = std::optional<Command>;
  static const std::vector<Key> k = {
      {"geometry.r_d_nm", [](C& c, const std::string& v) { c.physical.geometry.r_d_nm = to_double("geometry.r_d_nm", v); },
       [](const C& c, O) { return config_number(c.physical.geometry.r_d_nm); }},
      {"geometry.lambda0_nm",
       [](C& c, const std::string& v) { c.physical.geometry.lambda0_nm = to_double("geometry.lambda0_nm", v); },
       [](const C& c, O) { return config_number(c.physical.geometry.lambda0_nm); }},
      {"geometry.refractive_index",
       [](C& c, const std::string& v) {
         c.physical.geometry.refractive_index = to_double("geometry.refractive_index", v);
       },
       [](const C& c, O) { return config_number(c.physical.geometry.refractive_index); }},
      {"geometry.orientation",
       [](C& c, const std::string& v) { c.physical.geometry.orientation = parse_orientation(v); },
       [](const C& c, O) { return std::string(orientation_name(c.physical.geometry.orientation)); }},
      {"emitter.gamma0_per_ps",
       [](C& c, const std::string& v) { c.physical.gamma0 = to_double("emitter.gamma0_per_ps", v); },
       [](const C& c, O) { return config_number(c.physical.gamma0); }},
      {"drive.amplitude",
       [](C& c, const std::string& v) { c.physical.drive_amplitude = to_double("drive.amplitude", v); },
       [](const C& c, O) { return config_number(c.physical.drive_amplitude); }},
      {"drive.detuning",
       [](C& c, const std::string& v) {
         if (v == "resonant") c.physical.detuning.reset();
         else c.physical.detuning = to_double("drive.detuning", v);
       },
       [](const C& c, O) { return optional_number(c.physical.detuning, "resonant"); }},
      {"drive.q_l_per_nm",
       [](C& c, const std::string& v) {
         if (v == "q0") c.physical.q_l.reset();
         else c.physical.q_l = to_double("drive.q_l_per_nm", v);
       },
       [](const C& c, O) { return optional_number(c.physical.q_l, "q0"); }},
      {"phonon.alpha_ps2", [](C& c, const std::string& v) { c.physical.env.alpha = to_double("phonon.alpha_ps2", v); },
       [](const C& c, O) { return config_number(c.physical.env.alpha); }},
      {"phonon.omega_c", [](C& c, const std::string& v) { c.physical.env.omega_c = to_double("phonon.omega_c", v); },
       [](const C& c, O) { return config_number(c.physical.env.omega_c); }},
      {"phonon.temperature_k",
       [](C& c, const std::string& v) { c.physical.env.temperature = to_double("phonon.temperature_k", v); },
       [](const C& c, O) { return config_number(c.physical.env.temperature); }},
      {"phonon.rate_argument",
       [](C& c, const std::string& v) { c.physical.rate_argument = parse_rate_argument(v); },
       [](const C& c, O) { return std::string(rate_argument_name(c.physical.rate_argument)); }},
      {"photon.thermal", [](C& c, const std::string& v) { c.physical.photon_thermal = to_bool("photon.thermal", v); },
       [](const C& c, O) { return bool_text(c.physical.photon_thermal); }},
      {"model.kind", [](C& c, const std::string& v) { c.model = to_model_kind(v); },
       [](const C& c, O) { return std::string(model_kind_name(c.model)); }},
      {"model.selection_rules",
       [](C& c, const std::string& v) { c.selection_rules = to_bool("model.selection_rules", v); },
       [](const C& c, O) { return bool_text(c.selection_rules); }},
      {"dynamics.t_max_ps",
       [](C& c, const std::string& v) {
         if (v == "auto") c.t_max_ps.reset();
         else c.t_max_ps = to_double("dynamics.t_max_ps", v);
       },
       [](const C& c, O) { return optional_number(c.t_max_ps, "auto"); }},
      {"dynamics.steps", [](C& c, const std::string& v) { c.steps = to_count("dynamics.steps", v); },
       [](const C& c, O) { return std::to_string(c.steps); }},
      {"dynamics.initial",
       [](C& c, const std::string& v) {
         if (v == "ground") c.initial = InitialState::ground;
         else if (v == "excited") c.initial = InitialState::excited;
         else throw InvalidArgument("dynamics.initial must be ground or excited, got '" + v + "'");
       },
       [](const C& c, O) { return std::string(c.initial == InitialState::ground ? "ground" : "excited"); }},
      {"sweep.min", [](C& c, const std::string& v) { c.sweep.min = v == "auto" ? std::nullopt : std::optional(to_double("sweep.min", v)); },
       [](const C& c, O cmd) { return sweeps(cmd) ? config_number(c.resolved_sweep(*cmd).min) : optional_number(c.sweep.min, "auto"); }},
      {"sweep.max", [](C& c, const std::string& v) { c.sweep.max = v == "auto" ? std::nullopt : std::optional(to_double("sweep.max", v)); },
       [](const C& c, O cmd) { return sweeps(cmd) ? config_number(c.resolved_sweep(*cmd).max) : optional_number(c.sweep.max, "auto"); }},
      {"sweep.points", [](C& c, const std::string& v) {
         c.sweep.points = v == "auto" ? std::nullopt : std::optional(to_count("sweep.points", v));
       },
       [](const C& c, O cmd) {
         if (sweeps(cmd)) return std::to_string(c.resolved_sweep(*cmd).points);
         return c.sweep.points ? std::to_string(*c.sweep.points) : std::string("auto");
       }},
      {"sweep.scale",
       [](C& c, const std::string& v) {
         if (v == "auto") c.sweep.scale.reset();
         else if (v == "linear") c.sweep.scale = SweepScale::linear;
         else if (v == "log") c.sweep.scale = SweepScale::log;
         else throw InvalidArgument("sweep.scale must be linear or log, got '" + v + "'");
       },
       [](const C& c, O cmd) {
         std::optional<SweepScale> s = sweeps(cmd) ? std::optional(c.resolved_sweep(*cmd).scale) : c.sweep.scale;
         if (!s) return std::string("auto");
         return std::string(*s == SweepScale::log ? "log" : "linear");
       }},
      {"spectrum.omega_max", [](C& c, const std::string& v) { c.spectrum_omega_max = to_double("spectrum.omega_max", v); },
       [](const C& c, O) { return config_number(c.spectrum_omega_max); }},
      {"spectrum.max_rows", [](C& c, const std::string& v) { c.spectrum_max_rows = to_count("spectrum.max_rows", v); },
       [](const C& c, O) { return std::to_string(c.spectrum_max_rows); }},
      {"output", [](C& c, const std::string& v) { c.output = v; }, [](const C& c, O) { return c.output; }},
      {"threads", [](C& c, const std::string& v) { c.threads = to_count("threads", v); },
       [](const C& c, O) { return std::to_string(c.threads); }},
  };
  return k;
}

std::string unquote(const std::string& v, const std::string& where) {
  if (v.size() >= 2 && v.front() == '"') {
    if (v.back() != '"') throw InvalidArgument(where + ": unterminated string");
    return v.substr(1, v.size() - 2);
  }
  return v;
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

}  // namespace

std::string_view command_name(Command c) {
  switch (c) {
    case Command::rates: return "rates";
    case Command::dynamics: return "dynamics";
    case Command::spectrum: return "spectrum";
    case Command::fraction: return "fraction";
    case Command::equivalence: return "equivalence";
  }
  return "?";
}

std::vector<double> ResolvedSweep::values() const {
  std::vector<double> v(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
    if (scale == SweepScale::log) v[i] = std::exp(std::log(min) + t * (std::log(max) - std::log(min)));
    else v[i] = min + t * (max - min);
  }
  if (points > 1) {
    v.front() = min;
    v.back() = max;
  }
  return v;
}

ResolvedSweep RunConfig::resolved_sweep(Command c) const {
  ResolvedSweep r;
  if (c == Command::fraction) {
    r = {0.1, 100.0, 13, SweepScale::log};
  } else {
    r = {1e-4, 3.0, 1000, SweepScale::linear};
  }
  if (sweep.min) r.min = *sweep.min;
  if (sweep.max) r.max = *sweep.max;
  if (sweep.points) r.points = *sweep.points;
  if (sweep.scale) r.scale = *sweep.scale;
  if (r.points < 2) throw InvalidArgument("sweep.points must be at least 2");
  if (!(r.max > r.min)) throw InvalidArgument("sweep.max must exceed sweep.min");
  if ((r.scale == SweepScale::log || c == Command::rates || c == Command::fraction) && !(r.min > 0.0)) {
    throw InvalidArgument("sweep.min must be > 0 for this sweep");
  }
  return r;
}

void RunConfig::validate() const {
  physical.validate();
  if (t_max_ps && !(*t_max_ps > 0.0)) throw InvalidArgument("dynamics.t_max_ps must be > 0");
  if (steps == 0) throw InvalidArgument("dynamics.steps must be at least 1");
  if (!(spectrum_omega_max > 0.0)) throw InvalidArgument("spectrum.omega_max must be > 0");
  if (spectrum_max_rows < 3) throw InvalidArgument("spectrum.max_rows must be at least 3");
}

KeyValues parse_config_text(const std::string& text, const std::string& source) {
  KeyValues out;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw InvalidArgument(where + ": malformed section header");
      section = trim(std::string_view(body).substr(1, body.size() - 2));
      if (section.empty()) throw InvalidArgument(where + ": empty section name");
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw InvalidArgument(where + ": expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = unquote(trim(std::string_view(body).substr(eq + 1)), where);
    if (key.empty()) throw InvalidArgument(where + ": missing key");
    out.emplace_back(section.empty() ? key : section + "." + key, value);
  }
  return out;
}

KeyValues read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

std::pair<std::string, std::string> parse_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos) throw InvalidArgument("expected key=value, got '" + s + "'");
  const std::string key = trim(std::string_view(s).substr(0, eq));
  const std::string value = unquote(trim(std::string_view(s).substr(eq + 1)), "--set " + key);
  if (key.empty()) throw InvalidArgument("missing key in '" + s + "'");
  return {key, value};
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const Key& k : keys()) {
    if (key == k.name) {
      k.set(cfg, value);
      return;
    }
  }
  throw InvalidArgument("unknown config key '" + key + "'");
}

void apply_all(RunConfig& cfg, const KeyValues& kv) {
  for (const auto& [k, v] : kv) apply_key(cfg, k, v);
}

std::vector<std::pair<std::string, std::string>> describe(const RunConfig& cfg, std::optional<Command> cmd) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Key& k : keys()) out.emplace_back(k.name, k.get(cfg, cmd));
  return out;
}

std::size_t resolve_threads(const RunConfig& cfg) {
  if (cfg.threads > 0) return cfg.threads;
  if (const char* env = std::getenv("MIRROR_SIM_THREADS"); env != nullptr && *env != '\0') {
    const std::size_t n = to_count("MIRROR_SIM_THREADS", env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace msim::cli
