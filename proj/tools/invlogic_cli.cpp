#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "invlogic/catalog.hpp"
#include "invlogic/composer.hpp"
#include "invlogic/engine.hpp"
#include "invlogic/experiments.hpp"
#include "invlogic/hamiltonian.hpp"
#include "invlogic/oracle.hpp"

using namespace invlogic;

namespace {

constexpr int kOk = 0;
constexpr int kLogicalFailure = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Source {
  std::string gate;
  std::string build;
  std::string netlist;

  void add(CLI::App* app) {
    auto* g = app->add_option("--gate", gate, "catalog gate (AND, NAND, OR, NOR, XOR_OR, XOR_NOR, HA, HA_ALT, FA)");
    auto* b = app->add_option("--build", build, "builder: multiplier:N or rca:N");
    auto* n = app->add_option("--netlist", netlist, "netlist JSON file");
    g->excludes(b)->excludes(n);
    b->excludes(n);
  }

  Circuit load() const {
    try {
      if (!gate.empty()) return gate_as_circuit(parse_gate_kind(gate));
      if (!build.empty()) return parse_build(build);
      if (!netlist.empty()) return netlist_circuit(load_netlist(netlist), netlist);
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
    throw UsageError("one of --gate, --build or --netlist is required");
  }
};

std::uint64_t parse_u64(const std::string& text, const std::string& field) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    if (text.rfind("0x", 0) == 0 || text.rfind("0X", 0) == 0) {
      v = std::stoull(text.substr(2), &used, 16);
      used += 2;
    } else {
      v = std::stoull(text, &used, 10);
    }
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || text[0] == '-') {
    throw UsageError(field + ": '" + text + "' is not an unsigned integer");
  }
  return v;
}

GroupValues parse_clamps(const std::vector<std::string>& items, const Circuit& c) {
  GroupValues out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--clamp: expected GROUP=decimal, got '" + item + "'");
    const std::string g = item.substr(0, eq);
    if (!c.net.has_group(g)) throw UsageError("--clamp: " + c.name + " has no terminal group '" + g + "'");
    const std::uint64_t v = parse_u64(item.substr(eq + 1), "--clamp " + g);
    const std::size_t width = c.net.group(g).size();
    if (width < 64 && v >> width) {
      throw UsageError("--clamp: " + std::to_string(v) + " does not fit the " + std::to_string(width) + "-bit group " + g);
    }
    out.emplace_back(g, v);
  }
  return out;
}

struct EngineFlags {
  std::string schedule;
  std::optional<int> wrnd;
  std::uint64_t cycles = 1 << 16;
  std::string seed;
  int acc_bits = 0;
  std::string mode = "sync";
  bool memoryless = false;
  int scale = 1;
  int weight_bits = 0;
  std::uint64_t hold = 1024;

  void add(CLI::App* app) {
    auto* s = app->add_option("--schedule", schedule, "anneal schedule, start:w_rnd comma list (e.g. 0:11,524288:5)");
    auto* w = app->add_option("--wrnd", wrnd, "constant noise weight");
    s->excludes(w);
    app->add_option("--cycles", cycles, "cycles to run")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "seed, decimal or 0x-hex (default: $INVLOGIC_SEED, else 1)");
    app->add_option("--acc-bits", acc_bits, "accumulator width (default weight_bits + 2)");
    app->add_option("--mode", mode, "update mode: sync, color or seq");
    app->add_flag("--memoryless", memoryless, "reset accumulators every cycle");
    app->add_option("--scale", scale, "integer I0 folded into h and J")->check(CLI::PositiveNumber);
    app->add_option("--weight-bits", weight_bits, "declared weight precision (checked after scaling)");
    app->add_option("--hold", hold, "shortest constant tail that counts as convergence");
  }

  ExperimentConfig config(bool need_schedule = true) const {
    ExperimentConfig cfg;
    try {
      if (!schedule.empty()) {
        cfg.schedule = AnnealSchedule::parse(schedule);
      } else if (wrnd) {
        cfg.schedule = AnnealSchedule::constant(*wrnd);
      } else if (need_schedule) {
        throw UsageError("one of --schedule or --wrnd is required");
      }
      cfg.engine.mode = parse_update_mode(mode);
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
    if (acc_bits != 0 && (acc_bits < 2 || acc_bits > 62)) throw UsageError("--acc-bits must be in [2, 62]");
    if (weight_bits < 0 || weight_bits > 30) throw UsageError("--weight-bits must be in [1, 30]");
    cfg.engine.acc_bits = acc_bits;
    cfg.engine.memoryless = memoryless;
    cfg.cycles = cycles;
    cfg.scale = scale;
    cfg.weight_bits = weight_bits;
    cfg.hold = hold;
    if (!seed.empty()) {
      cfg.seed = parse_u64(seed, "--seed");
    } else if (const char* env = std::getenv("INVLOGIC_SEED")) {
      cfg.seed = parse_u64(env, "INVLOGIC_SEED");
    }
    return cfg;
  }
};

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  return os;
}

std::string join(const std::vector<std::uint64_t>& v, const char* sep = ",") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + std::to_string(v[i]);
  return s;
}

ConfigLines header_for(const ExperimentConfig& cfg, const Circuit& c, const GroupValues& clamps) {
  ConfigLines lines = describe(cfg, c);
  for (const auto& [g, v] : clamps) lines.emplace_back("clamp", g + "=" + std::to_string(v));
  return lines;
}

int cmd_simulate(const Source& src, const EngineFlags& ef, const std::vector<std::string>& clamp_items,
                 const std::string& out, bool require) {
  const Circuit c = src.load();
  const GroupValues clamps = parse_clamps(clamp_items, c);
  const ExperimentConfig cfg = ef.config();
  RunResult r;
  try {
    r = run_partial(c, clamps, cfg);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const RunStats& st = r.stats;
  const ConfigLines header = header_for(cfg, c, clamps);
  for (const auto& [k, v] : header) std::cout << k << ": " << v << '\n';
  std::cout << "watched: ";
  for (std::size_t i = 0; i < st.watched.size(); ++i) std::cout << (i ? "," : "") << st.watched[i];
  std::cout << "\nmode_value: " << join(st.mode_value) << " (" << st.mode_count << " cycles, "
            << format_fixed(100.0 * double(st.mode_count) / double(st.cycles), 2) << "%)\n";
  if (st.valid_fraction) std::cout << "valid_fraction: " << format_fixed(*st.valid_fraction, 4) << '\n';
  std::cout << "final: ";
  for (std::size_t g = 0; g < c.groups().size(); ++g) {
    std::cout << (g ? " " : "") << c.groups()[g] << '=' << st.final_values[g];
  }
  std::cout << '\n';
  if (st.converged()) {
    std::cout << "converged: cycle " << *st.convergence_cycle << " (" << *st.cycles_after_step()
              << " after the last schedule change)" << (st.final_valid == false ? ", INVALID" : "") << '\n';
  } else {
    std::cout << "converged: no\n";
  }
  if (!st.diagnostic.empty()) std::cout << "diagnostic: " << st.diagnostic << '\n';
  if (!out.empty()) {
    auto tr = open_out(out + ".trace.csv");
    write_trace_csv(tr, r.trace, header);
    auto hist = open_out(out + ".hist.csv");
    write_histogram_csv(hist, st, header);
    std::cout << "wrote " << out << ".trace.csv and " << out << ".hist.csv\n";
  }
  if (require && !st.converged_valid()) return kLogicalFailure;
  return kOk;
}

int print_validation(const Validation& v) {
  std::cout << "ground energy: " << v.report.ground_energy << '\n';
  std::cout << "ground states: " << v.report.ground_states.size() << '\n';
  for (const auto& s : v.spurious) std::cout << "  + " << format_state(s) << " (ground, not valid)\n";
  for (const auto& s : v.missing) std::cout << "  - " << format_state(s) << " (valid, not ground)\n";
  std::cout << (v.ok ? "PASS" : "FAIL") << '\n';
  return v.ok ? kOk : kLogicalFailure;
}

int cmd_verify(const Source& src) {
  if (!src.gate.empty()) {
    GateSpec g;
    try {
      g = gate(src.gate);
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
    std::cout << to_string(g.kind) << ": " << g.size() << " nodes\n";
    return print_validation(validate(g));
  }
  const Circuit c = src.load();
  std::cout << c.name << ": " << c.net.size() << " nodes\n";
  try {
    return print_validation(validate(c.net));
  } catch (const BudgetExceeded& e) {
    std::cout << "refused: " << e.what() << '\n';
    return kLogicalFailure;
  }
}

int cmd_compose(const Source& src, const std::string& in, const std::string& out) {
  Circuit c;
  if (!src.build.empty()) {
    c = src.load();
  } else {
    try {
      c = netlist_circuit(load_netlist(in), in);
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
  }
  save_hamiltonian(c.net.hamiltonian, out);
  std::cout << c.net.size() << " nodes, weight_bits " << c.net.hamiltonian.weight_bits() << '\n';
  for (const auto& g : c.groups()) {
    std::cout << "  " << g << " (" << to_string(c.net.group_roles.at(g)) << "): nodes";
    for (auto i : c.net.group(g)) std::cout << ' ' << i;
    std::cout << '\n';
  }
  std::cout << "wrote " << out << '\n';
  return kOk;
}

std::vector<int> parse_w_range(const std::string& text) {
  std::vector<int> out;
  const auto colon = text.find(':');
  try {
    if (colon != std::string::npos) {
      const int lo = std::stoi(text.substr(0, colon)), hi = std::stoi(text.substr(colon + 1));
      if (lo < 0 || hi < lo) throw std::invalid_argument("range");
      for (int w = lo; w <= hi; ++w) out.push_back(w);
    } else {
      std::size_t pos = 0;
      while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const int w = std::stoi(text.substr(pos, comma - pos));
        if (w < 0) throw std::invalid_argument("negative");
        out.push_back(w);
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
    }
  } catch (const std::exception&) {
    throw UsageError("--w: expected LO:HI or a comma list of non-negative integers, got '" + text + "'");
  }
  return out;
}

int cmd_sweep(const Source& src, const EngineFlags& ef, const std::vector<std::string>& clamp_items,
              const std::string& w_text, std::size_t seeds, const std::string& out, unsigned threads) {
  const Circuit c = src.load();
  const GroupValues clamps = parse_clamps(clamp_items, c);
  const ExperimentConfig cfg = ef.config(false);
  const auto ws = parse_w_range(w_text);
  if (!c.relation) throw UsageError(c.name + ": cannot score valid states for this circuit");
  const auto rows = sweep_wrnd(c, clamps, ws, cfg, seeds, threads);
  ConfigLines header = header_for(cfg, c, clamps);
  header.emplace_back("w", w_text);
  header.emplace_back("seeds", std::to_string(seeds));
  if (out.empty()) {
    write_sweep_csv(std::cout, rows, header);
  } else {
    auto os = open_out(out);
    write_sweep_csv(os, rows, header);
    std::cout << "wrote " << rows.size() << " rows to " << out << '\n';
  }
  return kOk;
}

int cmd_convergence(const Source& src, const EngineFlags& ef, const std::string& which, std::size_t seeds,
                    const std::string& out, unsigned threads, double min_success) {
  const Circuit c = src.load();
  if (!c.net.has_group("A") || !c.net.has_group("B") || !c.net.has_group("P")) {
    throw UsageError("convergence needs a multiplier (--build multiplier:N)");
  }
  const int n = static_cast<int>(c.net.group("A").size());
  std::vector<std::uint64_t> outputs;
  if (which == "all") {
    outputs = factorable_outputs(n);
  } else if (which == "prime") {
    outputs = prime_pair_outputs(n);
  } else {
    std::size_t pos = 0;
    while (pos <= which.size()) {
      const auto comma = which.find(',', pos);
      outputs.push_back(parse_u64(which.substr(pos, comma - pos), "--outputs"));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  const ExperimentConfig cfg = ef.config();
  const auto sum = convergence_stats(c, outputs, cfg, seeds, threads);
  ConfigLines header = header_for(cfg, c, {});
  header.emplace_back("outputs", which);
  header.emplace_back("seeds", std::to_string(seeds));
  if (!out.empty()) {
    auto os = open_out(out);
    write_convergence_csv(os, sum, header);
  }
  const double rate = double(sum.successes) / double(sum.runs);
  std::cout << "outputs: " << outputs.size() << ", runs: " << sum.runs << '\n'
            << "converged to a valid pair: " << sum.successes << " (" << format_fixed(100.0 * rate, 1) << "%)\n"
            << "converged to an invalid pair: " << sum.wrong << '\n'
            << "mean cycles: " << format_fixed(sum.mean_cycles, 1) << " from reset, "
            << format_fixed(sum.mean_after_step, 1) << " after the step\n"
            << "worst cycles: " << sum.worst_cycles << " from reset, " << sum.worst_after_step << " after the step\n";
  if (!out.empty()) std::cout << "wrote " << out << '\n';
  return rate >= min_success ? kOk : kLogicalFailure;
}

int cmd_catalog(const std::string& out) {
  nlohmann::json j = nlohmann::json::object();
  for (GateKind k : kAllGateKinds) {
    const GateSpec g = gate(k);
    nlohmann::json entry = to_json(g.hamiltonian);
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : g.terminals) {
      terms.push_back({{"name", t.name},
                       {"role", t.role == TerminalRole::input    ? "input"
                                : t.role == TerminalRole::output ? "output"
                                                                 : "auxiliary"}});
    }
    entry["terminals"] = terms;
    j[to_string(k)] = entry;
  }
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    auto os = open_out(out);
    os << j.dump(2) << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Invertible logic on stochastic spiking Boltzmann machines"};
  app.require_subcommand(1);

  Source src;
  EngineFlags ef;
  std::vector<std::string> clamps;
  std::string out, w_text = "0:12", outputs = "all";
  bool require = false;
  std::size_t seeds = 1;
  unsigned threads = 0;
  double min_success = 0.0;

  auto* sim = app.add_subcommand("simulate", "run a circuit and write trace/histogram CSVs");
  src.add(sim);
  ef.add(sim);
  sim->add_option("--clamp", clamps, "GROUP=decimal, repeatable");
  sim->add_option("--out", out, "output prefix for <prefix>.trace.csv and <prefix>.hist.csv");
  sim->add_flag("--require-convergence", require, "exit 1 unless the free terminals converge to a valid state");

  auto* ver = app.add_subcommand("verify", "compare ground states with the truth table by enumeration");
  src.add(ver);

  auto* comp = app.add_subcommand("compose", "fuse a netlist into a Hamiltonian file");
  comp->add_option("--build", src.build, "builder: multiplier:N or rca:N instead of a netlist");
  std::vector<std::string> compose_paths;
  comp->add_option("paths", compose_paths, "NETLIST OUT, or just OUT with --build")->expected(1, 2)->required();

  auto* sw = app.add_subcommand("sweep", "fixed-noise runs over a range of w_rnd");
  src.add(sw);
  ef.add(sw);
  sw->add_option("--clamp", clamps, "GROUP=decimal, repeatable");
  sw->add_option("--w", w_text, "w_rnd values: LO:HI or comma list");
  sw->add_option("--seeds", seeds, "seeds per w_rnd")->check(CLI::PositiveNumber);
  sw->add_option("--out", out, "CSV path (default stdout)");
  sw->add_option("--threads", threads, "worker threads (default: all cores)");

  auto* conv = app.add_subcommand("convergence", "reverse-mode convergence statistics over many outputs");
  src.add(conv);
  ef.add(conv);
  conv->add_option("--outputs", outputs, "all, prime, or a comma list");
  conv->add_option("--seeds", seeds, "seeds per output")->check(CLI::PositiveNumber);
  conv->add_option("--out", out, "CSV path");
  conv->add_option("--threads", threads, "worker threads (default: all cores)");
  conv->add_option("--min-success", min_success, "exit 1 if the success fraction is lower");

  auto* cat = app.add_subcommand("catalog", "dump the gate catalog as JSON");
  cat->add_option("--out", out, "JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*sim) return cmd_simulate(src, ef, clamps, out, require);
    if (*ver) return cmd_verify(src);
    if (*comp) {
      if (src.build.empty() != (compose_paths.size() == 2)) {
        throw UsageError("compose takes NETLIST OUT, or --build SPEC OUT");
      }
      return cmd_compose(src, src.build.empty() ? compose_paths[0] : "", compose_paths.back());
    }
    if (*sw) return cmd_sweep(src, ef, clamps, w_text, seeds, out, threads);
    if (*conv) return cmd_convergence(src, ef, outputs, seeds, out, threads, min_success);
    if (*cat) return cmd_catalog(out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kLogicalFailure;
  }
  return kUsage;
}
