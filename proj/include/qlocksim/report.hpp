#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

namespace qlocksim {

/// "61.57 mW", "1.4 fF", "0 V".
inline std::string si(double value, std::string_view unit, int digits = 4) {
  static constexpr struct {
    double scale;
    const char* prefix;
  } kPrefixes[] = {{1e12, "T"}, {1e9, "G"}, {1e6, "M"}, {1e3, "k"}, {1.0, ""},    {1e-3, "m"},
                   {1e-6, "u"}, {1e-9, "n"}, {1e-12, "p"}, {1e-15, "f"}, {1e-18, "a"}};
  if (value == 0.0 || !std::isfinite(value)) return fmt::format("{} {}", value, unit);
  const double mag = std::abs(value);
  for (const auto& p : kPrefixes)
    if (mag >= p.scale * (1.0 - 1e-12)) return fmt::format("{:.{}g} {}{}", value / p.scale, digits, p.prefix, unit);
  return fmt::format("{:.{}g} {}", value, digits, unit);
}

struct Check {
  std::string name;
  std::string reference;
  std::string computed;
  std::string deviation;
  bool passed = false;
};

inline std::string relative_deviation(double computed, double reference) {
  return fmt::format("{:+.3g}%", 100.0 * (computed - reference) / reference);
}

inline std::string format_checks(const std::vector<Check>& checks) {
  std::size_t w = 0;
  for (const auto& c : checks) w = std::max(w, c.name.size());
  std::string out;
  for (const auto& c : checks) {
    out += fmt::format("{}  {:<{}}  reference={}  computed={}", c.passed ? "PASS" : "FAIL", c.name, w, c.reference,
                       c.computed);
    if (!c.deviation.empty()) out += fmt::format("  deviation={}", c.deviation);
    out += '\n';
  }
  return out;
}

inline bool all_passed(const std::vector<Check>& checks) {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

}  // namespace qlocksim
