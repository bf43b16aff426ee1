#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "invlogic/hamiltonian.hpp"
#include "invlogic/prng.hpp"
#include "invlogic/spin.hpp"

namespace invlogic {

// ---------------------------------------------------------------------------
// Clamps and schedules
// ---------------------------------------------------------------------------

// Nodes forced to fixed values for the whole run.
class ClampSpec {
 public:
  ClampSpec() = default;

  void set(std::size_t node, Spin value) {
    auto [it, inserted] = entries_.emplace(node, value);
    if (!inserted && it->second != value) {
      throw std::invalid_argument("node " + std::to_string(node) + " clamped to both values");
    }
  }

  // Clamps `nodes` (LSB first) to the binary digits of `value`.
  void set_group(std::span<const std::size_t> nodes, std::uint64_t value) {
    if (nodes.size() < 64 && (value >> nodes.size()) != 0) {
      throw std::invalid_argument("value " + std::to_string(value) + " does not fit in " +
                                  std::to_string(nodes.size()) + " bits");
    }
    for (std::size_t k = 0; k < nodes.size(); ++k) set(nodes[k], Spin::from_bool((value >> k) & 1u));
  }

  bool contains(std::size_t node) const { return entries_.count(node) != 0; }
  std::optional<Spin> get(std::size_t node) const {
    auto it = entries_.find(node);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }
  const std::map<std::size_t, Spin>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  void validate(std::size_t n) const {
    for (const auto& [node, _] : entries_) {
      if (node >= n) {
        throw std::out_of_range("clamped node " + std::to_string(node) + " outside network of " +
                                std::to_string(n));
      }
    }
  }

 private:
  std::map<std::size_t, Spin> entries_;
};

// Piecewise-constant noise weight over cycles.
class AnnealSchedule {
 public:
  struct Segment {
    std::uint64_t start;
    int w_rnd;
    friend bool operator==(const Segment&, const Segment&) = default;
  };

  AnnealSchedule() : segments_{{0, 0}} {}

  explicit AnnealSchedule(std::vector<Segment> segments) : segments_(std::move(segments)) {
    if (segments_.empty() || segments_.front().start != 0) {
      throw std::invalid_argument("schedule must start at cycle 0");
    }
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      if (segments_[i].w_rnd < 0) throw std::invalid_argument("w_rnd must be non-negative");
      if (i > 0 && segments_[i].start <= segments_[i - 1].start) {
        throw std::invalid_argument("schedule start cycles must be strictly increasing");
      }
    }
  }

  static AnnealSchedule constant(int w_rnd) { return AnnealSchedule({{0, w_rnd}}); }

  // Single step from `before` to `after` at cycle `at`.
  static AnnealSchedule step(int before, std::uint64_t at, int after) {
    if (at == 0) return constant(after);
    return AnnealSchedule({{0, before}, {at, after}});
  }

  // "start:w,start:w,..." e.g. "0:11,524288:5".
  static AnnealSchedule parse(const std::string& text) {
    std::vector<Segment> segs;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) {
        throw std::invalid_argument("schedule segment '" + item + "' must be start:w_rnd");
      }
      try {
        std::size_t used = 0;
        const auto start = std::stoull(item.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument("");
        const auto wtext = item.substr(colon + 1);
        const int w = std::stoi(wtext, &used);
        if (used != wtext.size()) throw std::invalid_argument("");
        segs.push_back({start, w});
      } catch (const std::logic_error&) {
        throw std::invalid_argument("schedule segment '" + item + "' is not start:w_rnd");
      }
    }
    return AnnealSchedule(std::move(segs));
  }

  int w_at(std::uint64_t cycle) const {
    auto it = std::upper_bound(segments_.begin(), segments_.end(), cycle,
                               [](std::uint64_t c, const Segment& s) { return c < s.start; });
    return std::prev(it)->w_rnd;
  }

  const std::vector<Segment>& segments() const noexcept { return segments_; }

  // Cycle of the last w_rnd change (0 for a constant schedule).
  std::uint64_t last_change() const noexcept { return segments_.back().start; }

  std::string to_string() const {
    std::string s;
    for (const auto& seg : segments_) {
      if (!s.empty()) s += ',';
      s += std::to_string(seg.start) + ':' + std::to_string(seg.w_rnd);
    }
    return s;
  }

 private:
  std::vector<Segment> segments_;
};

// ---------------------------------------------------------------------------
// Neuron arithmetic
// ---------------------------------------------------------------------------

struct NodeRuntime {
  long long acc = 0;
  Spin out = Spin::up();
  friend bool operator==(const NodeRuntime&, const NodeRuntime&) = default;
};

inline long long acc_min(int acc_bits) { return -(1LL << (acc_bits - 1)); }
inline long long acc_max(int acc_bits) { return (1LL << (acc_bits - 1)) - 1; }

// I_i = h_i + sum_j J_ij m_j + w_rnd * noise
inline long long node_input(std::size_t i, std::span<const Spin> m, const Hamiltonian& H,
                            int w_rnd, Spin noise) {
  long long sum = H.h(i);
  const int* row = H.J_row(i);
  for (std::size_t j = 0; j < m.size(); ++j) sum += static_cast<long long>(row[j]) * m[j].value();
  return sum + static_cast<long long>(w_rnd) * noise.value();
}

// Saturating add; output is +1 iff the accumulator is non-negative.
inline NodeRuntime node_update(NodeRuntime rt, long long input, int acc_bits) {
  if (acc_bits < 2 || acc_bits > 62) throw std::invalid_argument("acc_bits must be in [2, 62]");
  rt.acc = std::clamp(rt.acc + input, acc_min(acc_bits), acc_max(acc_bits));
  rt.out = rt.acc >= 0 ? Spin::up() : Spin::down();
  return rt;
}

// Binary value of a terminal group; group[0] is the least significant bit.
inline std::uint64_t decode_terminals(std::span<const Spin> row, std::span<const std::size_t> group) {
  std::uint64_t v = 0;
  for (std::size_t k = 0; k < group.size(); ++k) {
    if (row[group[k]].bit()) v |= std::uint64_t{1} << k;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Network simulation
// ---------------------------------------------------------------------------

enum class UpdateMode {
  synchronous,  // every free node updates from m(t) each cycle
  colored,      // one colour class of a proper graph colouring per cycle
  sequential,   // one free node per cycle, round-robin (debug)
};

inline const char* to_string(UpdateMode m) {
  switch (m) {
    case UpdateMode::synchronous: return "synchronous";
    case UpdateMode::colored: return "colored";
    case UpdateMode::sequential: return "sequential";
  }
  return "?";
}

inline UpdateMode parse_update_mode(const std::string& s) {
  if (s == "synchronous" || s == "sync") return UpdateMode::synchronous;
  if (s == "colored" || s == "color") return UpdateMode::colored;
  if (s == "sequential" || s == "seq") return UpdateMode::sequential;
  throw std::invalid_argument("unknown update mode '" + s + "'");
}

struct EngineOptions {
  int acc_bits = 0;  // 0 -> weight_bits + 2
  UpdateMode mode = UpdateMode::synchronous;
  bool memoryless = false;  // accumulator cleared before every update

  int resolved_acc_bits(const Hamiltonian& H) const {
    return acc_bits > 0 ? acc_bits : H.weight_bits() + 2;
  }
};

// Greedy proper colouring of the free nodes: no two nodes of one class are
// coupled, so updating a class in parallel equals updating it sequentially.
inline std::vector<std::vector<std::size_t>> color_classes(const Hamiltonian& H,
                                                           const ClampSpec& clamps) {
  const std::size_t n = H.size();
  std::vector<int> color(n, -1);
  std::vector<std::vector<std::size_t>> classes;
  for (std::size_t i = 0; i < n; ++i) {
    if (clamps.contains(i)) continue;
    std::vector<bool> used(classes.size() + 1, false);
    for (std::size_t j = 0; j < n; ++j) {
      if (color[j] >= 0 && H.J(i, j) != 0) used[static_cast<std::size_t>(color[j])] = true;
    }
    std::size_t c = 0;
    while (used[c]) ++c;
    if (c == classes.size()) classes.emplace_back();
    classes[c].push_back(i);
    color[i] = static_cast<int>(c);
  }
  return classes;
}

// One simulation instance: network state plus its noise bank.  Single
// threaded; distinct instances share nothing.
class Simulator {
 public:
  Simulator(Hamiltonian H, ClampSpec clamps, std::uint64_t seed, EngineOptions opts = {})
      : H_(std::move(H)),
        clamps_(std::move(clamps)),
        opts_(opts),
        acc_bits_(opts.resolved_acc_bits(H_)),
        rng_(H_.size(), seed) {
    H_.validate();
    clamps_.validate(H_.size());
    if (acc_bits_ < 2 || acc_bits_ > 62) throw std::invalid_argument("acc_bits must be in [2, 62]");
    const std::size_t n = H_.size();
    acc_.assign(n, 0);
    out_.assign(n, Spin::up());
    for (std::size_t i = 0; i < n; ++i) {
      if (!clamps_.contains(i)) free_.push_back(i);
    }
    for (const auto& [node, s] : clamps_.entries()) pin(node, s);
    adj_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (H_.J(i, j) != 0) adj_[i].emplace_back(j, H_.J(i, j));
      }
    }
    if (opts_.mode == UpdateMode::colored) classes_ = color_classes(H_, clamps_);
  }

  const Hamiltonian& hamiltonian() const noexcept { return H_; }
  const ClampSpec& clamps() const noexcept { return clamps_; }
  int acc_bits() const noexcept { return acc_bits_; }
  std::uint64_t cycle() const noexcept { return cycle_; }
  std::span<const Spin> outputs() const noexcept { return out_; }
  std::span<const long long> accumulators() const noexcept { return acc_; }
  std::size_t color_count() const noexcept { return classes_.size(); }

  NodeRuntime node(std::size_t i) const { return {acc_.at(i), out_.at(i)}; }

  // Overrides the state of a free node (initial conditions, tests).
  void set_node(std::size_t i, NodeRuntime rt) {
    if (clamps_.contains(i)) throw std::invalid_argument("cannot set a clamped node");
    if (rt.acc < acc_min(acc_bits_) || rt.acc > acc_max(acc_bits_)) {
      throw std::out_of_range("accumulator value outside saturation bounds");
    }
    acc_.at(i) = rt.acc;
    out_[i] = rt.acc >= 0 ? Spin::up() : Spin::down();
  }

  // Advances one clock cycle at noise weight w_rnd.
  void step(int w_rnd) {
    rng_.advance();
    switch (opts_.mode) {
      case UpdateMode::synchronous:
        update_parallel(free_, w_rnd);
        break;
      case UpdateMode::colored:
        if (!classes_.empty()) update_parallel(classes_[cycle_ % classes_.size()], w_rnd);
        break;
      case UpdateMode::sequential:
        if (!free_.empty()) {
          const std::size_t i = free_[cycle_ % free_.size()];
          update_parallel(std::span<const std::size_t>(&i, 1), w_rnd);
        }
        break;
    }
    ++cycle_;
  }

 private:
  void pin(std::size_t node, Spin s) {
    acc_[node] = s.bit() ? acc_max(acc_bits_) : acc_min(acc_bits_);
    out_[node] = s;
  }

  void update_parallel(std::span<const std::size_t> nodes, int w_rnd) {
    // Inputs for the whole batch are computed from m(t) before any write.
    inputs_.resize(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const std::size_t i = nodes[k];
      long long sum = H_.h(i);
      for (const auto& [j, w] : adj_[i]) sum += w * out_[j].value();
      inputs_[k] = sum + static_cast<long long>(w_rnd) * rng_.noise(i).value();
    }
    const long long lo = acc_min(acc_bits_);
    const long long hi = acc_max(acc_bits_);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const std::size_t i = nodes[k];
      const long long base = opts_.memoryless ? 0 : acc_[i];
      acc_[i] = std::clamp(base + inputs_[k], lo, hi);
      out_[i] = acc_[i] >= 0 ? Spin::up() : Spin::down();
    }
  }

  Hamiltonian H_;
  ClampSpec clamps_;
  EngineOptions opts_;
  int acc_bits_;
  RngBank rng_;
  std::vector<long long> acc_;
  std::vector<Spin> out_;
  std::vector<std::vector<std::pair<std::size_t, int>>> adj_;
  std::vector<std::size_t> free_;
  std::vector<std::vector<std::size_t>> classes_;
  std::vector<long long> inputs_;
  std::uint64_t cycle_ = 0;
};

// Runs a network and records terminal groups every cycle, plus full output
// vectors every `full_every` cycles (0 disables snapshots).
struct TerminalGroup {
  std::string name;
  std::vector<std::size_t> nodes;
};

struct TraceOptions {
  std::uint64_t full_every = 64;
};

struct RunTrace {
  std::uint64_t cycles = 0;
  std::vector<std::string> group_names;
  std::vector<std::uint64_t> values;  // cycles x groups, row-major
  std::vector<std::pair<std::uint64_t, SpinVector>> snapshots;

  std::size_t group_count() const noexcept { return group_names.size(); }
  std::uint64_t value(std::uint64_t cycle, std::size_t group) const {
    return values.at(cycle * group_count() + group);
  }
  friend bool operator==(const RunTrace&, const RunTrace&) = default;
};

inline RunTrace run(const Hamiltonian& H, const ClampSpec& clamps, const AnnealSchedule& schedule,
                    std::uint64_t cycles, std::uint64_t seed, const EngineOptions& opts,
                    const std::vector<TerminalGroup>& groups, const TraceOptions& trace_opts = {}) {
  if (cycles == 0) throw std::invalid_argument("cycle budget must be positive");
  for (const auto& g : groups) {
    if (g.nodes.size() > 64) throw std::invalid_argument("group '" + g.name + "' wider than 64 bits");
    for (auto i : g.nodes) {
      if (i >= H.size()) throw std::out_of_range("group '" + g.name + "' references a missing node");
    }
  }
  Simulator sim(H, clamps, seed, opts);
  RunTrace trace;
  trace.cycles = cycles;
  for (const auto& g : groups) trace.group_names.push_back(g.name);
  trace.values.reserve(cycles * groups.size());
  for (std::uint64_t t = 0; t < cycles; ++t) {
    sim.step(schedule.w_at(t));
    for (const auto& g : groups) trace.values.push_back(decode_terminals(sim.outputs(), g.nodes));
    if (trace_opts.full_every != 0 && t % trace_opts.full_every == 0) {
      trace.snapshots.emplace_back(t, SpinVector(sim.outputs().begin(), sim.outputs().end()));
    }
  }
  return trace;
}

}  // namespace invlogic
