#pragma once

// Scenario configuration: flat "key = value" text with SI unit suffixes.
//
//   # comment
//   C_R = 14 fF
//   f_c = 1 kHz
//   column_bases = 2x10        # ten base-2 levels
//   row_bases = 2,5,3
//
// Accepted prefixes: a f p n u µ m k M G T. A bare number is taken in SI
// base units. Unknown keys, duplicate keys and unit mismatches are errors.
// Defaults describe a 2^14 x 2^14 array with 10 nm x 14 nm switch gates.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "qlocksim/mux_topology.hpp"

namespace qlocksim {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, std::string key, const std::string& what)
      : std::runtime_error(line > 0 ? fmt::format("line {}: {}", line, what) : what),
        line_(line),
        key_(std::move(key)) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }
  [[nodiscard]] const std::string& key() const noexcept { return key_; }

 private:
  std::size_t line_;
  std::string key_;
};

struct ScenarioConfig {
  BaseStack column_bases = BaseStack::uniform(2, 14);
  BaseStack row_bases = BaseStack::uniform(2, 14);
  double c_gate = 1.4e-18;         ///< transistor gate [F]
  std::optional<double> c_unit;    ///< MUX unit gate [F]; defaults to c_gate
  double c_holding = 1.4e-12;      ///< [F]
  double c_recharge = 1.4e-15;     ///< [F]
  double v_gate = 1.0;             ///< [V]
  double f_c = 1e3;                ///< refresh frequency [Hz]
  double temperature = 0.1;        ///< [K]
  double dv_recharge = 0.1;        ///< RMS target variation along a column [V]
  double dv_holding = 10e-6;       ///< allowed drift per refresh [V]
  double i_leak = 14e-15;          ///< per holding capacitor [A]
  double injection_fraction = 0.5;
  std::uint64_t seed = 1;
  double r_scale = 1e3;            ///< drive resistance for timing [Ohm]
  std::uint32_t n_inputs = 1;
  double relock_multiplier = 2.0;
  double cooling_budget = 1e-3;    ///< [W]
  std::uint64_t event_cap = 200'000'000;
  std::size_t hold_rows = 32;
  std::size_t hold_cols = 32;
  std::size_t hold_cycles = 100;
  double calibration_error = 0.0;
  std::string targets_file;        ///< optional CSV of M rows x N volts

  [[nodiscard]] std::uint64_t n() const noexcept { return column_bases.output_count(); }
  [[nodiscard]] std::uint64_t m() const noexcept { return row_bases.output_count(); }
  [[nodiscard]] double mux_unit() const noexcept { return c_unit.value_or(c_gate); }
  [[nodiscard]] MuxTopology column_topology() const { return build_topology(column_bases, mux_unit()); }
  [[nodiscard]] MuxTopology row_topology() const { return build_topology(row_bases, mux_unit()); }

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::optional<double> prefix_scale(std::string_view p) {
  static const std::map<std::string_view, double> table{
      {"a", 1e-18}, {"f", 1e-15}, {"p", 1e-12}, {"n", 1e-9},      {"u", 1e-6}, {"\xC2\xB5", 1e-6},
      {"\xCE\xBC", 1e-6}, {"m", 1e-3}, {"k", 1e3}, {"M", 1e6}, {"G", 1e9}, {"T", 1e12}};
  if (p.empty()) return 1.0;
  if (auto it = table.find(p); it != table.end()) return it->second;
  return std::nullopt;
}

inline double parse_number(std::string_view text, std::size_t& consumed) {
  double v = 0.0;
  const auto* first = text.data();
  auto [ptr, ec] = std::from_chars(first, first + text.size(), v);
  if (ec != std::errc{} || ptr == first) throw std::invalid_argument("expected a number");
  consumed = static_cast<std::size_t>(ptr - first);
  return v;
}

}  // namespace detail

/// Parse "<number> [prefix]<unit>". `unit` may list alternatives separated by '|'.
inline double parse_quantity(std::string_view text, std::string_view unit) {
  text = detail::trim(text);
  std::size_t used = 0;
  const double v = detail::parse_number(text, used);
  const auto suffix = detail::trim(text.substr(used));
  if (suffix.empty()) return v;
  std::size_t start = 0;
  while (start <= unit.size()) {
    const auto bar = unit.find('|', start);
    const auto u = unit.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start);
    if (!u.empty() && suffix.size() >= u.size() && suffix.substr(suffix.size() - u.size()) == u) {
      if (auto scale = detail::prefix_scale(suffix.substr(0, suffix.size() - u.size()))) return v * *scale;
    }
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  throw std::invalid_argument(fmt::format("unit '{}' does not match expected '{}'", suffix, unit));
}

/// "2,5,3", "2x14", "[2x2, 4]"
inline BaseStack parse_bases(std::string_view text) {
  text = detail::trim(text);
  if (!text.empty() && text.front() == '[' && text.back() == ']') text = text.substr(1, text.size() - 2);
  std::vector<std::uint32_t> bases;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    auto item = detail::trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (item.empty()) throw std::invalid_argument("empty base entry");
    std::uint32_t base = 0, repeat = 1;
    const auto x = item.find_first_of("x*");
    auto parse_uint = [](std::string_view s, std::uint32_t& out) {
      s = detail::trim(s);
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
      if (ec != std::errc{} || p != s.data() + s.size()) throw std::invalid_argument("bad integer '" + std::string(s) + "'");
    };
    if (x == std::string_view::npos) {
      parse_uint(item, base);
    } else {
      parse_uint(item.substr(0, x), base);
      parse_uint(item.substr(x + 1), repeat);
    }
    if (repeat == 0) throw std::invalid_argument("repeat count must be positive");
    for (std::uint32_t i = 0; i < repeat; ++i) bases.push_back(base);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return BaseStack(std::move(bases));
}

inline std::string format_bases(const BaseStack& s) {
  std::string out;
  const auto b = s.bases();
  for (std::size_t i = 0; i < b.size();) {
    std::size_t j = i;
    while (j < b.size() && b[j] == b[i]) ++j;
    if (!out.empty()) out += ',';
    out += (j - i > 1) ? fmt::format("{}x{}", b[i], j - i) : fmt::format("{}", b[i]);
    i = j;
  }
  return out;
}

/// Checks every scenario invariant; throws ConfigError naming the key.
inline void validate(const ScenarioConfig& c) {
  auto positive = [](double v, const char* key) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(0, key, fmt::format("{} must be positive", key));
  };
  positive(c.c_gate, "C_g");
  if (c.c_unit) positive(*c.c_unit, "C_unit");
  positive(c.c_holding, "C_H");
  positive(c.c_recharge, "C_R");
  positive(c.v_gate, "V_g");
  positive(c.f_c, "f_c");
  positive(c.temperature, "T");
  positive(c.dv_recharge, "dV_R");
  positive(c.dv_holding, "dV_H");
  positive(c.r_scale, "R_scale");
  positive(c.relock_multiplier, "relock_multiplier");
  positive(c.cooling_budget, "cooling_budget");
  if (!(c.i_leak >= 0.0)) throw ConfigError(0, "I_leak", "I_leak must be non-negative");
  if (!(c.injection_fraction >= 0.0 && c.injection_fraction <= 1.0))
    throw ConfigError(0, "injection_fraction", "injection_fraction must lie in [0, 1]");
  if (!(c.calibration_error > -1.0)) throw ConfigError(0, "calibration_error", "calibration_error must exceed -1");
  if (c.n_inputs == 0) throw ConfigError(0, "n_inputs", "n_inputs must be positive");
  if (c.hold_rows == 0 || c.hold_cols == 0) throw ConfigError(0, "hold_rows", "hold array must be non-empty");
  if (c.event_cap == 0) throw ConfigError(0, "event_cap", "event_cap must be positive");
}

inline ScenarioConfig parse_config(std::string_view text) {
  ScenarioConfig c;
  std::optional<std::uint64_t> n_given, m_given;
  std::size_t n_line = 0, m_line = 0;
  bool column_given = false, row_given = false;
  std::map<std::string, std::size_t> seen;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "", "expected 'key = value'");
    std::string key(detail::trim(line.substr(0, eq)));
    const auto value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(line_no, "", "missing key");
    if (value.empty()) throw ConfigError(line_no, key, fmt::format("missing value for '{}'", key));
    if (key == "\xCE\xB4V_R") key = "dV_R";
    if (key == "\xCE\xB4V_H") key = "dV_H";
    if (auto [it, fresh] = seen.emplace(key, line_no); !fresh)
      throw ConfigError(line_no, key, fmt::format("duplicate key '{}' (first on line {})", key, it->second));

    auto as_uint = [&]() -> std::uint64_t {
      std::uint64_t v = 0;
      auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc{} || p != value.data() + value.size())
        throw ConfigError(line_no, key, fmt::format("'{}' expects a non-negative integer", key));
      return v;
    };

    try {
      if (key == "N") { n_given = as_uint(); n_line = line_no; }
      else if (key == "M") { m_given = as_uint(); m_line = line_no; }
      else if (key == "column_bases") { c.column_bases = parse_bases(value); column_given = true; }
      else if (key == "row_bases") { c.row_bases = parse_bases(value); row_given = true; }
      else if (key == "C_g") c.c_gate = parse_quantity(value, "F");
      else if (key == "C_unit") c.c_unit = parse_quantity(value, "F");
      else if (key == "C_H") c.c_holding = parse_quantity(value, "F");
      else if (key == "C_R") c.c_recharge = parse_quantity(value, "F");
      else if (key == "V_g") c.v_gate = parse_quantity(value, "V");
      else if (key == "f_c") c.f_c = parse_quantity(value, "Hz");
      else if (key == "T") c.temperature = parse_quantity(value, "K");
      else if (key == "dV_R") c.dv_recharge = parse_quantity(value, "V");
      else if (key == "dV_H") c.dv_holding = parse_quantity(value, "V");
      else if (key == "I_leak") c.i_leak = parse_quantity(value, "A");
      else if (key == "injection_fraction") c.injection_fraction = parse_quantity(value, "");
      else if (key == "seed") c.seed = as_uint();
      else if (key == "R_scale") c.r_scale = parse_quantity(value, "Ohm|\xCE\xA9");
      else if (key == "n_inputs") c.n_inputs = static_cast<std::uint32_t>(as_uint());
      else if (key == "relock_multiplier") c.relock_multiplier = parse_quantity(value, "");
      else if (key == "cooling_budget") c.cooling_budget = parse_quantity(value, "W");
      else if (key == "event_cap") c.event_cap = as_uint();
      else if (key == "hold_rows") c.hold_rows = as_uint();
      else if (key == "hold_cols") c.hold_cols = as_uint();
      else if (key == "hold_cycles") c.hold_cycles = as_uint();
      else if (key == "calibration_error") c.calibration_error = parse_quantity(value, "");
      else if (key == "targets_file") c.targets_file = std::string(value);
      else throw ConfigError(line_no, key, fmt::format("unknown key '{}'", key));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(line_no, key, fmt::format("{}: {}", key, e.what()));
    }
  }

  // N/M alone imply a base-2 stack; together with explicit bases they must agree.
  auto reconcile = [](std::optional<std::uint64_t> count, std::size_t line, bool bases_given, BaseStack& stack,
                      const char* key) {
    if (!count) return;
    if (bases_given) {
      if (*count != stack.output_count())
        throw ConfigError(line, key,
                          fmt::format("{} = {} disagrees with base stack output count {}", key, *count,
                                      stack.output_count()));
      return;
    }
    if (*count < 2 || (*count & (*count - 1)) != 0)
      throw ConfigError(line, key, fmt::format("{} must be a power of two >= 2 unless bases are given", key));
    std::size_t k = 0;
    for (auto v = *count; v > 1; v >>= 1) ++k;
    stack = BaseStack::uniform(2, k);
  };
  reconcile(n_given, n_line, column_given, c.column_bases, "N");
  reconcile(m_given, m_line, row_given, c.row_bases, "M");

  validate(c);
  return c;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "", "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Canonical text form; parse_config(config_text(c)) == c.
inline std::string config_text(const ScenarioConfig& c) {
  std::string out;
  auto put = [&](std::string_view k, const std::string& v) { out += fmt::format("{} = {}\n", k, v); };
  put("column_bases", format_bases(c.column_bases));
  put("row_bases", format_bases(c.row_bases));
  put("C_g", fmt::format("{} F", c.c_gate));
  if (c.c_unit) put("C_unit", fmt::format("{} F", *c.c_unit));
  put("C_H", fmt::format("{} F", c.c_holding));
  put("C_R", fmt::format("{} F", c.c_recharge));
  put("V_g", fmt::format("{} V", c.v_gate));
  put("f_c", fmt::format("{} Hz", c.f_c));
  put("T", fmt::format("{} K", c.temperature));
  put("dV_R", fmt::format("{} V", c.dv_recharge));
  put("dV_H", fmt::format("{} V", c.dv_holding));
  put("I_leak", fmt::format("{} A", c.i_leak));
  put("injection_fraction", fmt::format("{}", c.injection_fraction));
  put("seed", fmt::format("{}", c.seed));
  put("R_scale", fmt::format("{} Ohm", c.r_scale));
  put("n_inputs", fmt::format("{}", c.n_inputs));
  put("relock_multiplier", fmt::format("{}", c.relock_multiplier));
  put("cooling_budget", fmt::format("{} W", c.cooling_budget));
  put("event_cap", fmt::format("{}", c.event_cap));
  put("hold_rows", fmt::format("{}", c.hold_rows));
  put("hold_cols", fmt::format("{}", c.hold_cols));
  put("hold_cycles", fmt::format("{}", c.hold_cycles));
  put("calibration_error", fmt::format("{}", c.calibration_error));
  if (!c.targets_file.empty()) put("targets_file", c.targets_file);
  return out;
}

}  // namespace qlocksim
