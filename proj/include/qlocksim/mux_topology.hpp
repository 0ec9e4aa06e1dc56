#pragma once

// Multi-level selective-gating (MLSG) multiplexer tree.
//
// Level 1 sits nearest the MUX input and holds the most significant digit of
// an output index. A level with base b has b addressing gates; gate g of that
// level passes exactly the channels whose level digit equals g. "Activated"
// means the gate is biased and suppresses its channels, so an output is
// connected to the input iff, at every level, the gate matching its digit is
// deactivated.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qlocksim {

using OutputIndex = std::uint64_t;
using Digit = std::uint32_t;

/// Per-level branching factors b_1..b_K, level 1 first.
class BaseStack {
 public:
  explicit BaseStack(std::vector<std::uint32_t> bases) : bases_(std::move(bases)) {
    if (bases_.empty()) throw std::invalid_argument("base stack needs at least one level");
    std::uint64_t n = 1;
    for (auto b : bases_) {
      if (b < 2) throw std::invalid_argument("every level base must be >= 2, got " + std::to_string(b));
      if (n > std::numeric_limits<std::uint64_t>::max() / b)
        throw std::overflow_error("output count of base stack overflows 64-bit integer");
      n *= b;
    }
    output_count_ = n;
  }

  static BaseStack uniform(std::uint32_t base, std::size_t levels) {
    return BaseStack(std::vector<std::uint32_t>(levels, base));
  }

  [[nodiscard]] std::size_t levels() const noexcept { return bases_.size(); }
  [[nodiscard]] std::uint32_t base(std::size_t level) const { return bases_.at(level); }
  [[nodiscard]] std::span<const std::uint32_t> bases() const noexcept { return bases_; }
  [[nodiscard]] std::uint64_t output_count() const noexcept { return output_count_; }
  [[nodiscard]] bool is_uniform(std::uint32_t b) const noexcept {
    for (auto x : bases_)
      if (x != b) return false;
    return true;
  }
  [[nodiscard]] std::size_t total_gates() const noexcept {
    std::size_t n = 0;
    for (auto b : bases_) n += b;
    return n;
  }

  friend bool operator==(const BaseStack&, const BaseStack&) = default;

 private:
  std::vector<std::uint32_t> bases_;
  std::uint64_t output_count_ = 1;
};

/// Zero-based (level, gate) pair. Level 0 here is "level 1" in table notation.
struct GateId {
  std::size_t level = 0;
  std::size_t index = 0;
  friend auto operator<=>(const GateId&, const GateId&) = default;
};

class MuxTopology {
 public:
  MuxTopology(BaseStack stack, double unit_capacitance)
      : stack_(std::move(stack)), unit_capacitance_(unit_capacitance) {
    if (!(unit_capacitance_ > 0.0)) throw std::invalid_argument("unit gate capacitance must be positive");
    const auto k = stack_.levels();
    level_capacitance_.resize(k);
    weights_.resize(k);
    // A level-i gate covers P_{i-1} channels, P_0 = 1.
    double covered = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      level_capacitance_[i] = covered * unit_capacitance_;
      covered *= stack_.base(i);
    }
    std::uint64_t w = 1;
    for (std::size_t i = k; i-- > 0;) {
      weights_[i] = w;
      w *= stack_.base(i);
    }
  }

  [[nodiscard]] const BaseStack& stack() const noexcept { return stack_; }
  [[nodiscard]] std::size_t levels() const noexcept { return stack_.levels(); }
  [[nodiscard]] std::uint32_t base(std::size_t level) const { return stack_.base(level); }
  [[nodiscard]] std::uint64_t output_count() const noexcept { return stack_.output_count(); }
  [[nodiscard]] double unit_capacitance() const noexcept { return unit_capacitance_; }
  [[nodiscard]] double gate_capacitance(std::size_t level) const { return level_capacitance_.at(level); }
  [[nodiscard]] std::span<const double> level_capacitances() const noexcept { return level_capacitance_; }
  [[nodiscard]] std::uint64_t weight(std::size_t level) const { return weights_.at(level); }
  [[nodiscard]] std::span<const std::uint64_t> weights() const noexcept { return weights_; }

  [[nodiscard]] bool contains(GateId g) const noexcept {
    return g.level < levels() && g.index < stack_.base(g.level);
  }

  /// Table-style label: "1L"/"1R" for all-binary trees, "1A".."1E" otherwise.
  [[nodiscard]] std::string gate_label(GateId g) const {
    std::string s = std::to_string(g.level + 1);
    if (stack_.is_uniform(2))
      s += (g.index == 0 ? 'L' : 'R');
    else if (g.index < 26)
      s += static_cast<char>('A' + g.index);
    else
      s += "#" + std::to_string(g.index);
    return s;
  }

  [[nodiscard]] std::vector<Digit> digits_of(OutputIndex output) const {
    if (output >= output_count()) throw std::out_of_range("output index " + std::to_string(output) + " out of range");
    std::vector<Digit> d(levels());
    for (std::size_t i = 0; i < levels(); ++i) {
      d[i] = static_cast<Digit>(output / weights_[i]);
      output %= weights_[i];
    }
    return d;
  }

 private:
  BaseStack stack_;
  double unit_capacitance_;
  std::vector<double> level_capacitance_;
  std::vector<std::uint64_t> weights_;
};

inline MuxTopology build_topology(BaseStack bases, double unit_capacitance) {
  return MuxTopology(std::move(bases), unit_capacitance);
}

/// Σ d_i·W_i with level 1 as the most significant digit.
inline OutputIndex output_index(const MuxTopology& topo, std::span<const Digit> digits) {
  if (digits.size() != topo.levels())
    throw std::invalid_argument("digit tuple has " + std::to_string(digits.size()) + " entries, topology has " +
                                std::to_string(topo.levels()) + " levels");
  OutputIndex out = 0;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (digits[i] >= topo.base(i))
      throw std::out_of_range("digit " + std::to_string(digits[i]) + " out of range at level " + std::to_string(i + 1));
    out += digits[i] * topo.weight(i);
  }
  return out;
}

/// Activated/deactivated flag for every addressing gate of one MUX.
class GateStateVector {
 public:
  static GateStateVector all_deactivated(const MuxTopology& topo) { return GateStateVector(topo, false); }
  static GateStateVector fully_locked(const MuxTopology& topo) { return GateStateVector(topo, true); }

  /// Exactly one deactivated gate per level, at the given digits.
  static GateStateVector selecting(const MuxTopology& topo, std::span<const Digit> digits) {
    (void)output_index(topo, digits);  // validates
    GateStateVector s(topo, true);
    for (std::size_t i = 0; i < digits.size(); ++i) s.activated_[i][digits[i]] = 0;
    return s;
  }

  [[nodiscard]] std::size_t levels() const noexcept { return activated_.size(); }
  [[nodiscard]] std::size_t gates(std::size_t level) const { return activated_.at(level).size(); }
  [[nodiscard]] bool activated(GateId g) const { return activated_.at(g.level).at(g.index) != 0; }
  void set(GateId g, bool on) { activated_.at(g.level).at(g.index) = on ? 1 : 0; }

  [[nodiscard]] std::size_t deactivated_count(std::size_t level) const {
    std::size_t n = 0;
    for (auto a : activated_.at(level)) n += (a == 0);
    return n;
  }

  [[nodiscard]] bool is_fully_locked() const noexcept {
    for (const auto& lvl : activated_)
      for (auto a : lvl)
        if (!a) return false;
    return true;
  }

  [[nodiscard]] bool is_selecting() const {
    for (std::size_t i = 0; i < levels(); ++i)
      if (deactivated_count(i) != 1) return false;
    return true;
  }

  [[nodiscard]] bool matches(const MuxTopology& topo) const {
    if (levels() != topo.levels()) return false;
    for (std::size_t i = 0; i < levels(); ++i)
      if (activated_[i].size() != topo.base(i)) return false;
    return true;
  }

  friend bool operator==(const GateStateVector&, const GateStateVector&) = default;

 private:
  GateStateVector(const MuxTopology& topo, bool on) : activated_(topo.levels()) {
    for (std::size_t i = 0; i < topo.levels(); ++i) activated_[i].assign(topo.base(i), on ? 1 : 0);
  }

  std::vector<std::vector<unsigned char>> activated_;
};

/// Number of outputs currently connected to the MUX input.
inline std::uint64_t connected_count(const MuxTopology& topo, const GateStateVector& gates) {
  if (!gates.matches(topo)) throw std::invalid_argument("gate state does not match topology");
  std::uint64_t n = 1;
  for (std::size_t i = 0; i < topo.levels(); ++i) n *= gates.deactivated_count(i);
  return n;
}

/// Outputs connected to the input, ascending.
inline std::vector<OutputIndex> connected_outputs(const MuxTopology& topo, const GateStateVector& gates) {
  const auto count = connected_count(topo, gates);
  std::vector<OutputIndex> out;
  if (count == 0) return out;
  out.reserve(count);

  const auto k = topo.levels();
  std::vector<std::vector<Digit>> open(k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t g = 0; g < topo.base(i); ++g)
      if (!gates.activated({i, g})) open[i].push_back(static_cast<Digit>(g));

  // Odometer over the per-level open gates; the last level spins fastest so
  // the result comes out sorted.
  std::vector<std::size_t> pos(k, 0);
  while (true) {
    OutputIndex o = 0;
    for (std::size_t i = 0; i < k; ++i) o += open[i][pos[i]] * topo.weight(i);
    out.push_back(o);
    std::size_t i = k;
    while (i > 0) {
      --i;
      if (++pos[i] < open[i].size()) break;
      pos[i] = 0;
      if (i == 0) return out;
    }
  }
}

/// Control lines fed from the warmer stage: every addressing gate plus every input.
inline std::uint64_t wire_count(std::span<const MuxTopology> muxes, std::span<const std::uint32_t> inputs_per_mux) {
  if (muxes.empty()) throw std::invalid_argument("wire_count needs at least one MUX");
  if (muxes.size() != inputs_per_mux.size()) throw std::invalid_argument("one input count per MUX required");
  std::uint64_t wires = 0;
  for (std::size_t m = 0; m < muxes.size(); ++m) {
    if (inputs_per_mux[m] == 0) throw std::invalid_argument("every MUX needs at least one input");
    wires += muxes[m].stack().total_gates() + inputs_per_mux[m];
  }
  return wires;
}

}  // namespace qlocksim
