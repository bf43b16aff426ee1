#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "invlogic/catalog.hpp"
#include "invlogic/composer.hpp"
#include "invlogic/engine.hpp"
#include "invlogic/hamiltonian.hpp"

namespace invlogic {

// Predicate over the decoded values of every exported group, in the
// circuit's group order.
using Relation = std::function<bool(std::span<const std::uint64_t>)>;

struct Circuit {
  std::string name;
  ComposedCircuit net;
  std::optional<Relation> relation;  // absent when it cannot be derived

  const std::vector<std::string>& groups() const { return net.group_order; }

  std::size_t group_index(const std::string& g) const {
    const auto& order = net.group_order;
    auto it = std::find(order.begin(), order.end(), g);
    if (it == order.end()) throw std::out_of_range(name + " has no terminal group '" + g + "'");
    return static_cast<std::size_t>(it - order.begin());
  }

  std::vector<std::string> groups_with_role(GroupRole r) const {
    std::vector<std::string> out;
    for (const auto& g : net.group_order) {
      if (net.group_roles.at(g) == r) out.push_back(g);
    }
    return out;
  }
};

namespace detail {

inline std::uint64_t low_mask(std::size_t bits) {
  return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

// Relation as the projection of the circuit's full valid-state set onto its
// exported groups.  Auxiliary nodes do not take part.
inline std::optional<Relation> projected_relation(const ComposedCircuit& c) {
  if (c.size() > 24 || c.group_order.empty()) return std::nullopt;
  auto table = std::make_shared<std::set<std::vector<std::uint64_t>>>();
  for (const auto& s : c.valid_states()) {
    SpinVector m;
    for (int v : s) m.push_back(Spin::from_int(v));
    std::vector<std::uint64_t> row;
    for (const auto& g : c.group_order) row.push_back(decode_terminals(m, c.groups.at(g)));
    table->insert(std::move(row));
  }
  return Relation([table](std::span<const std::uint64_t> v) {
    return table->count(std::vector<std::uint64_t>(v.begin(), v.end())) != 0;
  });
}

}  // namespace detail

inline Circuit multiplier_circuit(int n) {
  Circuit c{"multiplier:" + std::to_string(n), build_multiplier(n), std::nullopt};
  const std::size_t ia = c.group_index("A"), ib = c.group_index("B"), ip = c.group_index("P");
  c.relation = [ia, ib, ip](std::span<const std::uint64_t> v) { return v[ia] * v[ib] == v[ip]; };
  return c;
}

inline Circuit adder_circuit(int n) {
  Circuit c{"rca:" + std::to_string(n), build_rca(n), std::nullopt};
  const std::size_t ia = c.group_index("A"), ib = c.group_index("B"), is = c.group_index("S"),
                    ic = c.group_index("Cout");
  const auto bits = static_cast<unsigned>(n);
  c.relation = [ia, ib, is, ic, bits](std::span<const std::uint64_t> v) {
    return v[ia] + v[ib] == v[is] + (v[ic] << bits);
  };
  return c;
}

inline Circuit gate_as_circuit(GateKind kind) {
  Circuit c{to_string(kind), gate_circuit(kind), std::nullopt};
  c.relation = detail::projected_relation(c.net);
  return c;
}

inline Circuit netlist_circuit(const Netlist& nl, std::string name) {
  Circuit c{std::move(name), compile(nl), std::nullopt};
  c.relation = detail::projected_relation(c.net);
  return c;
}

// "multiplier:N" or "rca:N"
inline Circuit parse_build(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("builder spec must look like multiplier:N or rca:N");
  const std::string kind = spec.substr(0, colon);
  int n = 0;
  try {
    std::size_t used = 0;
    n = std::stoi(spec.substr(colon + 1), &used);
    if (used != spec.size() - colon - 1) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw std::invalid_argument("bad width in builder spec '" + spec + "'");
  }
  if (n < 1 || n > 32) throw std::invalid_argument("builder width must be in [1, 32]");
  if (kind == "multiplier" || kind == "mult") return multiplier_circuit(n);
  if (kind == "rca" || kind == "adder") return adder_circuit(n);
  throw std::invalid_argument("unknown builder '" + kind + "'");
}

using GroupValues = std::vector<std::pair<std::string, std::uint64_t>>;

struct ExperimentConfig {
  AnnealSchedule schedule = AnnealSchedule::constant(0);
  std::uint64_t cycles = std::uint64_t{1} << 16;
  std::uint64_t seed = 1;
  int scale = 1;        // I0, folded into h and J
  int weight_bits = 0;  // declared precision of the scaled weights; 0 = minimal
  EngineOptions engine;
  std::uint64_t hold = 1024;  // shortest constant tail that counts as convergence
};

inline Hamiltonian prepared_hamiltonian(const Circuit& c, const ExperimentConfig& cfg) {
  if (cfg.scale < 1) throw std::invalid_argument("weight scale must be >= 1");
  Hamiltonian H = cfg.scale == 1 ? c.net.hamiltonian : c.net.hamiltonian.scaled(cfg.scale);
  if (cfg.weight_bits != 0) {
    if (H.minimal_weight_bits() > cfg.weight_bits) {
      throw std::invalid_argument(c.name + " scaled by " + std::to_string(cfg.scale) + " needs " +
                                  std::to_string(H.minimal_weight_bits()) + "-bit weights, " +
                                  std::to_string(cfg.weight_bits) + " declared");
    }
    H.set_weight_bits(cfg.weight_bits);
  }
  return H;
}

inline std::vector<std::pair<std::string, std::string>> describe(const ExperimentConfig& cfg,
                                                                 const Circuit& c) {
  const Hamiltonian H = prepared_hamiltonian(c, cfg);
  return {{"circuit", c.name},
          {"nodes", std::to_string(H.size())},
          {"schedule", cfg.schedule.to_string()},
          {"cycles", std::to_string(cfg.cycles)},
          {"seed", std::to_string(cfg.seed)},
          {"scale", std::to_string(cfg.scale)},
          {"weight_bits", std::to_string(H.weight_bits())},
          {"acc_bits", std::to_string(cfg.engine.resolved_acc_bits(H))},
          {"mode", to_string(cfg.engine.mode)},
          {"memoryless", cfg.engine.memoryless ? "1" : "0"},
          {"hold", std::to_string(cfg.hold)}};
}

struct RunStats {
  std::vector<std::string> watched;
  std::uint64_t cycles = 0;
  std::map<std::vector<std::uint64_t>, std::uint64_t> histogram;  // watched values -> cycles
  std::optional<double> valid_fraction;
  std::vector<std::uint64_t> mode_value;
  std::uint64_t mode_count = 0;
  std::uint64_t runner_up_count = 0;
  double runner_up_ratio = 0;  // mode / runner-up; infinity if one value only
  std::optional<std::uint64_t> convergence_cycle;
  std::uint64_t anneal_step = 0;  // start of the last schedule segment
  std::vector<std::uint64_t> final_values;  // every group, circuit order
  std::optional<bool> final_valid;
  double toggles = 0;  // watched bit flips per cycle
  std::string diagnostic;

  bool converged() const { return convergence_cycle.has_value(); }
  bool converged_valid() const { return converged() && final_valid.value_or(false); }

  // Convergence measured from the anneal step (negative if it came first).
  std::optional<long long> cycles_after_step() const {
    if (!convergence_cycle) return std::nullopt;
    return static_cast<long long>(*convergence_cycle) - static_cast<long long>(anneal_step);
  }
};

struct RunResult {
  RunStats stats;
  RunTrace trace;  // every group, every cycle
};

inline RunStats summarize(const Circuit& c, const RunTrace& trace, const std::vector<std::string>& watched,
                          std::uint64_t anneal_step, std::uint64_t hold) {
  RunStats st;
  st.watched = watched;
  st.cycles = trace.cycles;
  st.anneal_step = anneal_step;
  std::vector<std::size_t> wi;
  for (const auto& g : watched) wi.push_back(c.group_index(g));
  const std::size_t G = trace.group_count();

  std::uint64_t valid = 0, flips = 0;
  std::vector<std::uint64_t> key(wi.size()), prev;
  for (std::uint64_t t = 0; t < trace.cycles; ++t) {
    const std::span<const std::uint64_t> row(trace.values.data() + t * G, G);
    if (c.relation && (*c.relation)(row)) ++valid;
    for (std::size_t k = 0; k < wi.size(); ++k) key[k] = row[wi[k]];
    ++st.histogram[key];
    if (!prev.empty()) {
      for (std::size_t k = 0; k < key.size(); ++k) flips += static_cast<std::uint64_t>(std::popcount(key[k] ^ prev[k]));
    }
    prev = key;
  }
  if (c.relation) st.valid_fraction = double(valid) / double(trace.cycles);
  st.toggles = trace.cycles > 1 ? double(flips) / double(trace.cycles - 1) : 0.0;

  for (const auto& [k, n] : st.histogram) {
    if (n > st.mode_count) {
      st.runner_up_count = st.mode_count;
      st.mode_count = n;
      st.mode_value = k;
    } else if (n > st.runner_up_count) {
      st.runner_up_count = n;
    }
  }
  st.runner_up_ratio = st.runner_up_count == 0 ? std::numeric_limits<double>::infinity()
                                               : double(st.mode_count) / double(st.runner_up_count);

  const auto same = [&](std::uint64_t a, std::uint64_t b) {
    for (std::size_t i : wi) {
      if (trace.value(a, i) != trace.value(b, i)) return false;
    }
    return true;
  };
  std::uint64_t first = trace.cycles - 1;
  while (first > 0 && same(first - 1, trace.cycles - 1)) --first;
  if (trace.cycles - first >= hold) st.convergence_cycle = first;

  const std::span<const std::uint64_t> last(trace.values.data() + (trace.cycles - 1) * G, G);
  st.final_values.assign(last.begin(), last.end());
  if (c.relation) st.final_valid = (*c.relation)(last);
  return st;
}

inline RunResult simulate(const Circuit& c, const GroupValues& clamps, const std::vector<std::string>& watched,
                          const ExperimentConfig& cfg) {
  if (watched.empty()) throw std::invalid_argument("no terminal group to watch");
  ClampSpec spec;
  for (const auto& [g, v] : clamps) {
    const auto& nodes = c.net.group(g);
    if (nodes.size() < 64 && v > detail::low_mask(nodes.size())) {
      throw std::out_of_range("value " + std::to_string(v) + " does not fit the " +
                              std::to_string(nodes.size()) + "-bit group " + g);
    }
    spec.set_group(nodes, v);
  }
  const Hamiltonian H = prepared_hamiltonian(c, cfg);
  RunResult r;
  r.trace = run(H, spec, cfg.schedule, cfg.cycles, cfg.seed, cfg.engine, c.net.terminal_groups(), {0});
  r.stats = summarize(c, r.trace, watched, cfg.schedule.last_change(), cfg.hold);
  return r;
}

inline RunResult run_forward(const Circuit& c, std::uint64_t a, std::uint64_t b, const ExperimentConfig& cfg) {
  const auto outs = c.groups_with_role(GroupRole::output);
  return simulate(c, {{"A", a}, {"B", b}}, outs, cfg);
}

inline RunResult run_reverse(const Circuit& c, std::uint64_t p, const ExperimentConfig& cfg) {
  const auto ins = c.groups_with_role(GroupRole::input);
  const auto outs = c.groups_with_role(GroupRole::output);
  if (outs.size() != 1) throw std::invalid_argument(c.name + " must have exactly one output group");
  return simulate(c, {{outs.front(), p}}, ins, cfg);
}

// Any mixed clamp set; every unclamped group is watched.  When the relation
// can be enumerated, an unsatisfiable clamp set is reported as
// non-convergence.
inline RunResult run_partial(const Circuit& c, const GroupValues& clamps, const ExperimentConfig& cfg) {
  std::vector<std::string> watched;
  for (const auto& g : c.groups()) {
    if (std::none_of(clamps.begin(), clamps.end(), [&](const auto& kv) { return kv.first == g; })) {
      watched.push_back(g);
    }
  }
  RunResult r = simulate(c, clamps, watched, cfg);
  if (c.net.size() <= 24 && c.relation) {
    bool feasible = false;
    for (const auto& s : c.net.valid_states()) {
      SpinVector m;
      for (int v : s) m.push_back(Spin::from_int(v));
      feasible = std::all_of(clamps.begin(), clamps.end(), [&](const auto& kv) {
        return decode_terminals(m, c.net.group(kv.first)) == kv.second;
      });
      if (feasible) break;
    }
    if (!feasible) {
      r.stats.convergence_cycle.reset();
      r.stats.diagnostic = "clamp set admits no valid assignment";
    }
  }
  if (r.stats.converged() && r.stats.final_valid == false && r.stats.diagnostic.empty()) {
    r.stats.diagnostic = "terminals froze in an invalid state";
  }
  return r;
}

// Runs fn(i) for i in [0, count) on a pool of threads; results land in index
// order, so output never depends on scheduling.
template <typename T, typename F>
std::vector<T> parallel_map(std::size_t count, F fn, unsigned threads = 0) {
  std::vector<T> out(count);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

struct SweepRow {
  int w_rnd = 0;
  std::uint64_t seed = 0;
  double valid_fraction = 0;
  double toggles = 0;
  bool converged = false;
  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

// Fixed-noise runs over a range of w_rnd values.  Run k uses seed cfg.seed + k.
inline std::vector<SweepRow> sweep_wrnd(const Circuit& c, const GroupValues& clamps, const std::vector<int>& w_values,
                                        const ExperimentConfig& cfg, std::size_t seeds, unsigned threads = 0) {
  if (!c.relation) throw std::invalid_argument(c.name + ": no relation to score valid states against");
  std::vector<std::string> watched;
  for (const auto& g : c.groups()) {
    if (std::none_of(clamps.begin(), clamps.end(), [&](const auto& kv) { return kv.first == g; })) {
      watched.push_back(g);
    }
  }
  const std::size_t total = w_values.size() * seeds;
  return parallel_map<SweepRow>(
      total,
      [&](std::size_t k) {
        ExperimentConfig run_cfg = cfg;
        run_cfg.schedule = AnnealSchedule::constant(w_values[k / seeds]);
        run_cfg.seed = cfg.seed + k;
        const RunStats st = simulate(c, clamps, watched, run_cfg).stats;
        return SweepRow{w_values[k / seeds], run_cfg.seed, *st.valid_fraction, st.toggles, st.converged_valid()};
      },
      threads);
}

struct ConvergenceRow {
  std::uint64_t output = 0;
  double mean_cycles = 0;  // from reset, over successful runs
  std::uint64_t worst_cycles = 0;
  double mean_after_step = 0;
  long long worst_after_step = 0;
  double success_rate = 0;  // converged to a valid input pair
  std::size_t wrong = 0;    // converged to an invalid pair
  friend bool operator==(const ConvergenceRow&, const ConvergenceRow&) = default;
};

struct ConvergenceSummary {
  std::vector<ConvergenceRow> rows;
  std::size_t runs = 0;
  std::size_t successes = 0;
  std::size_t converged = 0;
  std::size_t wrong = 0;
  double mean_cycles = 0;
  std::uint64_t worst_cycles = 0;
  double mean_after_step = 0;
  long long worst_after_step = 0;
};

// Reverse-mode runs for every output value, `seeds` runs each; run k of
// output i uses seed cfg.seed + i * seeds + k.
inline ConvergenceSummary convergence_stats(const Circuit& c, const std::vector<std::uint64_t>& outputs,
                                            const ExperimentConfig& cfg, std::size_t seeds, unsigned threads = 0) {
  if (seeds == 0) throw std::invalid_argument("need at least one seed");
  if (!c.relation) throw std::invalid_argument(c.name + ": no relation to check converged values against");
  const auto stats = parallel_map<RunStats>(
      outputs.size() * seeds,
      [&](std::size_t k) {
        ExperimentConfig run_cfg = cfg;
        run_cfg.seed = cfg.seed + k;
        return run_reverse(c, outputs[k / seeds], run_cfg).stats;
      },
      threads);

  ConvergenceSummary sum;
  double total = 0, total_after = 0;
  bool any = false;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    ConvergenceRow row;
    row.output = outputs[i];
    std::size_t ok = 0;
    double cyc = 0, after = 0;
    for (std::size_t s = 0; s < seeds; ++s) {
      const RunStats& st = stats[i * seeds + s];
      ++sum.runs;
      if (st.converged()) ++sum.converged;
      if (!st.converged_valid()) {
        if (st.converged()) ++row.wrong;
        continue;
      }
      ++ok;
      const std::uint64_t t = *st.convergence_cycle;
      const long long ta = *st.cycles_after_step();
      cyc += double(t);
      after += double(ta);
      row.worst_cycles = std::max(row.worst_cycles, t);
      row.worst_after_step = ok == 1 ? ta : std::max(row.worst_after_step, ta);
      if (!any || ta > sum.worst_after_step) sum.worst_after_step = ta;
      any = true;
      sum.worst_cycles = std::max(sum.worst_cycles, t);
    }
    row.success_rate = double(ok) / double(seeds);
    if (ok) {
      row.mean_cycles = cyc / double(ok);
      row.mean_after_step = after / double(ok);
    }
    sum.successes += ok;
    sum.wrong += row.wrong;
    total += cyc;
    total_after += after;
    sum.rows.push_back(row);
  }
  if (sum.successes) {
    sum.mean_cycles = total / double(sum.successes);
    sum.mean_after_step = total_after / double(sum.successes);
  }
  return sum;
}

// Distinct products of two n-bit operands (0 included).
inline std::vector<std::uint64_t> factorable_outputs(int n) {
  std::set<std::uint64_t> s;
  const std::uint64_t top = std::uint64_t{1} << n;
  for (std::uint64_t a = 0; a < top; ++a) {
    for (std::uint64_t b = 0; b < top; ++b) s.insert(a * b);
  }
  return {s.begin(), s.end()};
}

// Products of two primes that each fit in n bits.
inline std::vector<std::uint64_t> prime_pair_outputs(int n) {
  std::vector<std::uint64_t> primes;
  for (std::uint64_t p = 2; p < (std::uint64_t{1} << n); ++p) {
    bool prime = true;
    for (std::uint64_t d = 2; d * d <= p; ++d) prime = prime && p % d != 0;
    if (prime) primes.push_back(p);
  }
  std::set<std::uint64_t> s;
  for (auto p : primes) {
    for (auto q : primes) s.insert(p * q);
  }
  return {s.begin(), s.end()};
}

// --- CSV ----------------------------------------------------------------

using ConfigLines = std::vector<std::pair<std::string, std::string>>;

inline void write_config_header(std::ostream& os, const ConfigLines& cfg) {
  for (const auto& [k, v] : cfg) os << "# " << k << '=' << v << '\n';
}

inline void write_histogram_csv(std::ostream& os, const RunStats& st, const ConfigLines& cfg = {}) {
  write_config_header(os, cfg);
  if (st.watched.size() == 1) {
    os << "value";
  } else {
    for (std::size_t i = 0; i < st.watched.size(); ++i) os << (i ? "," : "") << st.watched[i];
  }
  os << ",count\n";
  for (const auto& [k, n] : st.histogram) {
    for (auto v : k) os << v << ',';
    os << n << '\n';
  }
}

inline void write_trace_csv(std::ostream& os, const RunTrace& tr, const ConfigLines& cfg = {}) {
  write_config_header(os, cfg);
  os << "cycle";
  for (const auto& g : tr.group_names) os << ',' << g;
  os << '\n';
  const std::size_t G = tr.group_count();
  for (std::uint64_t t = 0; t < tr.cycles; ++t) {
    os << t;
    for (std::size_t g = 0; g < G; ++g) os << ',' << tr.values[t * G + g];
    os << '\n';
  }
}

inline std::string format_fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows, const ConfigLines& cfg = {}) {
  write_config_header(os, cfg);
  os << "w_rnd,seed,valid_fraction,toggles,converged\n";
  for (const auto& r : rows) {
    os << r.w_rnd << ',' << r.seed << ',' << format_fixed(r.valid_fraction) << ',' << format_fixed(r.toggles) << ','
       << (r.converged ? 1 : 0) << '\n';
  }
}

inline void write_convergence_csv(std::ostream& os, const ConvergenceSummary& s, const ConfigLines& cfg = {}) {
  write_config_header(os, cfg);
  os << "output,mean_cycles,worst_cycles,success_rate\n";
  for (const auto& r : s.rows) {
    os << r.output << ',' << format_fixed(r.mean_cycles, 2) << ',' << r.worst_cycles << ','
       << format_fixed(r.success_rate, 4) << '\n';
  }
}

}  // namespace invlogic
