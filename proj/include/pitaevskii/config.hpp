#pragma once

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pitaevskii/initial_conditions.hpp"
#include "pitaevskii/integrator.hpp"
#include "pitaevskii/stability.hpp"

namespace pitaevskii {

// Line-based configuration:
//
//   # comment
//   section.key = value
//   grid.n = 64, 64
//
// Values are numbers, booleans (true/false), bare strings, or comma lists.

struct GridConfig {
  int d = 2;
  std::vector<std::size_t> n{64, 64};
  std::vector<double> len{2.0 * std::numbers::pi, 2.0 * std::numbers::pi};

  GridPtr make() const { return make_grid(d, n, len); }
  friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

struct OutputConfig {
  std::string timeseries = "timeseries.csv";
  std::string snapshot_prefix;    // empty: no snapshots
  std::size_t snapshot_every = 0;  // steps
  std::size_t csv_every = 1;       // records
  std::string report = "report.csv";
  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct ExperimentConfig {
  double T = 0.5;
  PerturbationSpec perturbation;
  int refinements = 3;        // convergence: number of dt levels
  int samples = 200;          // validate: random fields per sample set
  std::uint64_t seed = 7;     // validate: first sample-set seed
  double cap = 100.0;         // validate: ratio cap
  int validate_n = 32;        // validate: points per axis of the 3D grid
  double oracle_tol = 1e-12;  // oracle: ODE tolerance
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

struct Config {
  GridConfig grid;
  Params params;
  StepConfig integrator;
  InitialCondition ic;
  OutputConfig output;
  ExperimentConfig experiment;
  friend bool operator==(const Config&, const Config&) = default;
};

struct ConfigIssue {
  int line = 0;  // 0: not tied to a line (e.g. a default that became invalid)
  std::string key;
  std::string message;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues)
      : std::runtime_error(render(issues)), issues_(std::move(issues)) {}
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  static std::string render(const std::vector<ConfigIssue>& issues) {
    std::ostringstream os;
    for (std::size_t i = 0; i < issues.size(); ++i) {
      if (i) os << '\n';
      if (issues[i].line > 0) os << "line " << issues[i].line << ": ";
      os << issues[i].key << ": " << issues[i].message;
    }
    return os.str();
  }
  std::vector<ConfigIssue> issues_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  const std::string str(s);
  char* end = nullptr;
  out = std::strtod(str.c_str(), &end);
  return end == str.c_str() + str.size() && std::isfinite(out);
}

template <class I>
bool parse_int(std::string_view s, I& out) {
  if (s.empty()) return false;
  const auto* b = s.data();
  if (*b == '+') ++b;
  const auto [p, ec] = std::from_chars(b, s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& v, const std::function<std::string(const T&)>& f) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += f(v[i]);
  }
  return s;
}

struct KeyHandler {
  std::function<std::string(Config&, std::string_view)> set;  // returns an error message or ""
  std::function<std::string(const Config&)> get;
};

inline KeyHandler num(double Config::*, double) = delete;

template <class Get>
KeyHandler double_key(Get member) {
  return {[member](Config& c, std::string_view v) -> std::string {
            double x;
            if (!parse_double(v, x)) return "expected a number, got '" + std::string(v) + "'";
            member(c) = x;
            return "";
          },
          [member](const Config& c) { return fmt_double(member(const_cast<Config&>(c))); }};
}

template <class I, class Get>
KeyHandler int_key(Get member) {
  return {[member](Config& c, std::string_view v) -> std::string {
            I x;
            if (!parse_int(v, x)) return "expected an integer, got '" + std::string(v) + "'";
            member(c) = x;
            return "";
          },
          [member](const Config& c) { return std::to_string(member(const_cast<Config&>(c))); }};
}

template <class Get>
KeyHandler bool_key(Get member) {
  return {[member](Config& c, std::string_view v) -> std::string {
            if (v == "true") member(c) = true;
            else if (v == "false") member(c) = false;
            else return "expected true or false, got '" + std::string(v) + "'";
            return "";
          },
          [member](const Config& c) { return std::string(member(const_cast<Config&>(c)) ? "true" : "false"); }};
}

template <class Get>
KeyHandler string_key(Get member) {
  return {[member](Config& c, std::string_view v) -> std::string {
            member(c) = std::string(v);
            return "";
          },
          [member](const Config& c) { return member(const_cast<Config&>(c)); }};
}

template <class Get>
KeyHandler double_list_key(Get member) {
  return {[member](Config& c, std::string_view v) -> std::string {
            std::vector<double> out;
            for (auto item : split_list(v)) {
              double x;
              if (!parse_double(item, x)) return "expected a list of numbers, got '" + std::string(v) + "'";
              out.push_back(x);
            }
            member(c) = out;
            return "";
          },
          [member](const Config& c) {
            return join<double>(member(const_cast<Config&>(c)), [](const double& x) { return fmt_double(x); });
          }};
}

template <class I, class Get>
KeyHandler int_list_key(Get member) {
  return {[member](Config& c, std::string_view v) -> std::string {
            std::vector<I> out;
            for (auto item : split_list(v)) {
              I x;
              if (!parse_int(item, x)) return "expected a list of integers, got '" + std::string(v) + "'";
              out.push_back(x);
            }
            member(c) = out;
            return "";
          },
          [member](const Config& c) {
            return join<I>(member(const_cast<Config&>(c)), [](const I& x) { return std::to_string(x); });
          }};
}

/// Every key in serialization order.
inline const std::vector<std::pair<std::string, KeyHandler>>& config_keys() {
  static const std::vector<std::pair<std::string, KeyHandler>> keys = [] {
    std::vector<std::pair<std::string, KeyHandler>> k;
    k.emplace_back("grid.d", int_key<int>([](Config& c) -> int& { return c.grid.d; }));
    k.emplace_back("grid.n", int_list_key<std::size_t>([](Config& c) -> auto& { return c.grid.n; }));
    k.emplace_back("grid.len", double_list_key([](Config& c) -> auto& { return c.grid.len; }));

    k.emplace_back("params.lambda", double_key([](Config& c) -> double& { return c.params.lambda; }));
    k.emplace_back("params.mu", double_key([](Config& c) -> double& { return c.params.mu; }));
    k.emplace_back("params.nu", double_key([](Config& c) -> double& { return c.params.nu; }));
    k.emplace_back("params.m", double_key([](Config& c) -> double& { return c.params.m; }));
    k.emplace_back("params.M", double_key([](Config& c) -> double& { return c.params.M; }));
    k.emplace_back("params.epsilon", double_key([](Config& c) -> double& { return c.params.epsilon; }));
    k.emplace_back("params.delta", double_key([](Config& c) -> double& { return c.params.delta; }));
    k.emplace_back("params.gamma", double_key([](Config& c) -> double& { return c.params.gamma; }));

    k.emplace_back("integrator.dt_init", double_key([](Config& c) -> double& { return c.integrator.dt_init; }));
    k.emplace_back("integrator.cfl", double_key([](Config& c) -> double& { return c.integrator.cfl; }));
    k.emplace_back("integrator.dt_min", double_key([](Config& c) -> double& { return c.integrator.dt_min; }));
    k.emplace_back("integrator.dt_max", double_key([](Config& c) -> double& { return c.integrator.dt_max; }));
    k.emplace_back("integrator.adaptive", bool_key([](Config& c) -> bool& { return c.integrator.adaptive; }));
    auto scheme_key = [](Scheme StepConfig::*field) {
      return KeyHandler{[field](Config& c, std::string_view v) -> std::string {
                          try {
                            c.integrator.*field = parse_scheme(std::string(v));
                          } catch (const std::invalid_argument& e) {
                            return e.what();
                          }
                          return "";
                        },
                        [field](const Config& c) { return std::string(scheme_name(c.integrator.*field)); }};
    };
    k.emplace_back("integrator.nls_scheme", scheme_key(&StepConfig::nls_scheme));
    k.emplace_back("integrator.fluid_scheme", scheme_key(&StepConfig::fluid_scheme));
    k.emplace_back("integrator.dealias", bool_key([](Config& c) -> bool& { return c.integrator.dealias; }));

    k.emplace_back("ic.family", string_key([](Config& c) -> std::string& { return c.ic.family; }));
    k.emplace_back("ic.amplitude", double_key([](Config& c) -> double& { return c.ic.amplitude; }));
    k.emplace_back("ic.phase", double_key([](Config& c) -> double& { return c.ic.phase; }));
    k.emplace_back("ic.velocity", double_list_key([](Config& c) -> auto& { return c.ic.velocity; }));
    k.emplace_back("ic.mode", int_list_key<long>([](Config& c) -> auto& { return c.ic.mode; }));
    k.emplace_back("ic.rho", double_key([](Config& c) -> double& { return c.ic.rho; }));
    k.emplace_back("ic.seed", int_key<std::uint64_t>([](Config& c) -> std::uint64_t& { return c.ic.seed; }));
    k.emplace_back("ic.kmax", int_key<int>([](Config& c) -> int& { return c.ic.kmax; }));

    k.emplace_back("output.timeseries", string_key([](Config& c) -> std::string& { return c.output.timeseries; }));
    k.emplace_back("output.snapshot_prefix",
                   string_key([](Config& c) -> std::string& { return c.output.snapshot_prefix; }));
    k.emplace_back("output.snapshot_every",
                   int_key<std::size_t>([](Config& c) -> std::size_t& { return c.output.snapshot_every; }));
    k.emplace_back("output.csv_every",
                   int_key<std::size_t>([](Config& c) -> std::size_t& { return c.output.csv_every; }));
    k.emplace_back("output.report", string_key([](Config& c) -> std::string& { return c.output.report; }));

    k.emplace_back("experiment.T", double_key([](Config& c) -> double& { return c.experiment.T; }));
    k.emplace_back("experiment.target",
                   KeyHandler{[](Config& c, std::string_view v) -> std::string {
                                try {
                                  c.experiment.perturbation.target = parse_target(std::string(v));
                                } catch (const std::invalid_argument& e) {
                                  return e.what();
                                }
                                return "";
                              },
                              [](const Config& c) { return std::string(target_name(c.experiment.perturbation.target)); }});
    k.emplace_back("experiment.mode",
                   int_list_key<long>([](Config& c) -> auto& { return c.experiment.perturbation.mode; }));
    k.emplace_back("experiment.amplitude",
                   double_key([](Config& c) -> double& { return c.experiment.perturbation.amplitude; }));
    k.emplace_back("experiment.refinements", int_key<int>([](Config& c) -> int& { return c.experiment.refinements; }));
    k.emplace_back("experiment.samples", int_key<int>([](Config& c) -> int& { return c.experiment.samples; }));
    k.emplace_back("experiment.seed",
                   int_key<std::uint64_t>([](Config& c) -> std::uint64_t& { return c.experiment.seed; }));
    k.emplace_back("experiment.cap", double_key([](Config& c) -> double& { return c.experiment.cap; }));
    k.emplace_back("experiment.validate_n", int_key<int>([](Config& c) -> int& { return c.experiment.validate_n; }));
    k.emplace_back("experiment.oracle_tol", double_key([](Config& c) -> double& { return c.experiment.oracle_tol; }));
    return k;
  }();
  return keys;
}

}  // namespace detail

/// Checks every cross-field constraint; issues name the offending key and the
/// line it was set on (0 when it kept its default).
inline std::vector<ConfigIssue> validate_config(Config& c, const std::map<std::string, int>& lines = {}) {
  std::vector<ConfigIssue> issues;
  auto line_of = [&](const std::string& key) {
    auto it = lines.find(key);
    return it == lines.end() ? 0 : it->second;
  };
  auto add = [&](const std::string& key, const std::string& msg) { issues.push_back({line_of(key), key, msg}); };

  // Single-entry lists, and lists left at their default, broadcast to every axis.
  const std::size_t d = c.grid.d >= 1 && c.grid.d <= kMaxDim ? static_cast<std::size_t>(c.grid.d) : 0;
  if (d == 0) {
    add("grid.d", "d must be 1, 2 or 3");
  } else {
    auto broadcast = [&](auto& v, const std::string& key) {
      if (!v.empty() && v.size() != d && (v.size() == 1 || line_of(key) == 0)) v.assign(d, v[0]);
      if (v.size() != d) add(key, "expected 1 or " + std::to_string(d) + " entries, got " + std::to_string(v.size()));
    };
    broadcast(c.grid.n, "grid.n");
    broadcast(c.grid.len, "grid.len");
    if (issues.empty()) {
      try {
        c.grid.make();
      } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        add(msg.find("len") != std::string::npos ? "grid.len" : "grid.n", msg);
      }
    }
  }
  try {
    c.params.validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    add("params." + msg.substr(0, msg.find(' ')), msg);
  }
  try {
    c.integrator.validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    add(msg.rfind("cfl", 0) == 0 ? "integrator.cfl" : "integrator.dt_init", msg);
  }
  const auto& fams = initial_condition_families();
  if (std::find(fams.begin(), fams.end(), c.ic.family) == fams.end())
    add("ic.family", "unknown initial-condition family '" + c.ic.family + "'");
  if (!(c.ic.amplitude >= 0.0)) add("ic.amplitude", "amplitude must be >= 0");
  if (c.ic.rho < 0.0) add("ic.rho", "rho must be >= 0 (0 selects (m+M)/2)");
  if (c.ic.kmax < 1) add("ic.kmax", "kmax must be >= 1");
  if (c.output.csv_every < 1) add("output.csv_every", "csv_every must be >= 1");
  if (!(c.experiment.T >= 0.0)) add("experiment.T", "T must be >= 0");
  if (!(c.experiment.perturbation.amplitude >= 0.0)) add("experiment.amplitude", "amplitude must be >= 0");
  if (c.experiment.refinements < 2) add("experiment.refinements", "refinements must be >= 2");
  if (c.experiment.samples < 1) add("experiment.samples", "samples must be >= 1");
  if (!(c.experiment.cap > 0.0)) add("experiment.cap", "cap must be > 0");
  if (c.experiment.validate_n < 4 || c.experiment.validate_n % 2 != 0)
    add("experiment.validate_n", "validate_n must be even and >= 4");
  if (!(c.experiment.oracle_tol > 0.0)) add("experiment.oracle_tol", "oracle_tol must be > 0");
  return issues;
}

/// Parses and validates configuration text. Throws ConfigError listing every
/// problem found.
inline Config parse_config(std::string_view text) {
  Config c;
  std::vector<ConfigIssue> issues;
  std::map<std::string, int> lines;
  const auto& keys = detail::config_keys();
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      issues.push_back({line_no, std::string(line), "expected 'section.key = value'"});
      continue;
    }
    const std::string key(detail::trim(line.substr(0, eq)));
    const auto value = detail::trim(line.substr(eq + 1));
    auto it = std::find_if(keys.begin(), keys.end(), [&](const auto& kv) { return kv.first == key; });
    if (it == keys.end()) {
      issues.push_back({line_no, key, "unknown key"});
      continue;
    }
    if (lines.count(key)) {
      issues.push_back({line_no, key, "duplicate key (first set on line " + std::to_string(lines[key]) + ")"});
      continue;
    }
    lines[key] = line_no;
    if (auto err = it->second.set(c, value); !err.empty()) issues.push_back({line_no, key, err});
  }
  if (issues.empty()) issues = validate_config(c, lines);
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return c;
}

/// Renders every key, one per line, in a form parse_config reads back to an
/// equal Config.
inline std::string serialize_config(const Config& c) {
  std::string out;
  std::string section;
  for (const auto& [key, handler] : detail::config_keys()) {
    const auto sec = key.substr(0, key.find('.'));
    if (sec != section) {
      if (!section.empty()) out += '\n';
      section = sec;
    }
    out += key + " = " + handler.get(c) + '\n';
  }
  return out;
}

}  // namespace pitaevskii
