// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--strict] [--only N[,N...]] [--threads T]
//
// Exit status is 0 once every selected criterion has run, whatever the
// verdicts; --strict makes any FAIL exit 1.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "invlogic/catalog.hpp"
#include "invlogic/composer.hpp"
#include "invlogic/experiments.hpp"
#include "invlogic/oracle.hpp"
#include "invlogic/prng.hpp"

using namespace invlogic;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

unsigned g_threads = 0;

std::string pct(double x) { return format_fixed(100.0 * x, 1) + "%"; }

// --- 1: ground-state equivalence ------------------------------------------

Verdict ground_state_equivalence() {
  std::vector<std::string> bad;
  for (GateKind k : kAllGateKinds) {
    const GateSpec g = gate(k);
    const Validation v = validate(g);
    // Every invalid state strictly above the ground level.
    long long lowest_invalid = std::numeric_limits<long long>::max();
    const std::size_t n = g.size();
    for (std::uint64_t b = 0; b < (std::uint64_t{1} << n); ++b) {
      std::vector<int> m(n);
      for (std::size_t i = 0; i < n; ++i) m[i] = (b >> i) & 1u ? 1 : -1;
      if (!g.valid_states.count(m)) lowest_invalid = std::min(lowest_invalid, energy(g.hamiltonian, m));
    }
    if (!v.ok || lowest_invalid <= v.report.ground_energy) bad.push_back(to_string(k));
  }
  const auto rep = ground_states(gate(GateKind::AND).hamiltonian);
  bool and_ok = rep.ground_energy == -3 && rep.spectrum.at(-3) == 4;
  for (const auto& [e, count] : rep.spectrum) and_ok = and_ok && (e == -3 || e >= 1);
  std::string detail = std::to_string(kAllGateKinds.size() - bad.size()) + "/9 gates exact";
  if (!bad.empty()) {
    detail += ", failing:";
    for (const auto& b : bad) detail += " " + b;
  }
  detail += and_ok ? "; AND valid at -3, invalid >= +1" : "; AND spectrum wrong";
  return {bad.empty() && and_ok, detail};
}

// --- 2: node counts ---------------------------------------------------------

Verdict node_counts() {
  const std::vector<std::size_t> want{12, 27, 48, 75};
  std::vector<std::size_t> got;
  for (int n = 2; n <= 5; ++n) got.push_back(build_multiplier(n).size());
  const std::size_t rca = build_rca(32).size(), fa = gate(GateKind::FA).size();
  std::string detail = "multiplier n=2..5:";
  for (auto g : got) detail += " " + std::to_string(g);
  detail += "; rca(32) " + std::to_string(rca) + "; FA " + std::to_string(fa);
  return {got == want && rca == 128 && fa == 5, detail};
}

// --- 3: clamped AND distribution ---------------------------------------------

Verdict clamped_and() {
  const Circuit c = gate_as_circuit(GateKind::AND);
  ExperimentConfig cfg;
  cfg.schedule = AnnealSchedule::constant(5);
  cfg.cycles = std::uint64_t{1} << 18;
  cfg.seed = 1;
  const RunStats st = run_partial(c, {{"Y", 0}}, cfg).stats;
  const double valid = *st.valid_fraction;
  std::uint64_t valid_cycles = 0;
  for (const auto& [k, n] : st.histogram) {
    if ((k[0] & k[1]) == 0) valid_cycles += n;
  }
  bool shares_ok = true;
  std::string shares;
  for (const std::vector<std::uint64_t> ab : {std::vector<std::uint64_t>{0, 0}, {0, 1}, {1, 0}}) {
    const auto it = st.histogram.find(ab);
    const double share = it == st.histogram.end() ? 0.0 : double(it->second) / double(valid_cycles);
    shares_ok = shares_ok && std::abs(share - 1.0 / 3) <= 0.10;
    shares += " " + pct(share);
  }
  return {valid >= 0.95 && shares_ok, "valid " + pct(valid) + " (need >= 95%); shares of (0,0),(0,1),(1,0):" +
                                          shares + " (need 33% +- 10)"};
}

// --- 4, 5: forward multiplication --------------------------------------------

// 4-bit weights leave no room to scale the multiplier's fused h (|h| <= 4).
ExperimentConfig forward_config() {
  ExperimentConfig cfg;
  cfg.cycles = std::uint64_t{1} << 16;
  cfg.schedule = AnnealSchedule::step(5, cfg.cycles / 2, 3);
  cfg.weight_bits = 4;
  cfg.engine.mode = UpdateMode::synchronous;
  return cfg;
}

Verdict forward_multiplication() {
  const Circuit c = multiplier_circuit(4);
  const std::size_t seeds = 50;
  const auto stats = parallel_map<RunStats>(
      seeds,
      [&](std::size_t k) {
        ExperimentConfig cfg = forward_config();
        cfg.seed = 1 + k;
        return run_forward(c, 3, 6, cfg).stats;
      },
      g_threads);
  std::size_t ok = 0, wrong = 0;
  for (const auto& st : stats) {
    if (st.converged() && st.final_values[c.group_index("P")] == 18) {
      ++ok;
    } else if (st.converged()) {
      ++wrong;
    }
  }
  const double rate = double(ok) / double(seeds);
  return {rate >= 0.90, std::to_string(ok) + "/" + std::to_string(seeds) + " seeds held P=18 (" + pct(rate) +
                            ", need >= 90%); " + std::to_string(wrong) + " froze on a wrong product"};
}

Verdict mode_frequency() {
  const Circuit c = multiplier_circuit(4);
  const std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs{{3, 6}, {2, 7}, {5, 5}, {4, 3}, {7, 9}, {1, 11}};
  const auto stats = parallel_map<RunStats>(
      pairs.size(),
      [&](std::size_t k) {
        ExperimentConfig cfg = forward_config();
        cfg.schedule = AnnealSchedule::constant(5);
        cfg.seed = 1 + k;
        return run_forward(c, pairs[k].first, pairs[k].second, cfg).stats;
      },
      g_threads);
  bool pass = true;
  std::string detail;
  double worst_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& st = stats[k];
    const std::uint64_t want = pairs[k].first * pairs[k].second;
    const bool ok = st.mode_value.front() == want && st.runner_up_ratio >= 3.0;
    pass = pass && ok;
    worst_ratio = std::min(worst_ratio, st.runner_up_ratio);
    detail += (k ? ", " : "") + std::to_string(pairs[k].first) + "x" + std::to_string(pairs[k].second) + "->" +
              std::to_string(st.mode_value.front()) + " " + pct(double(st.mode_count) / double(st.cycles)) + "/" +
              pct(double(st.runner_up_count) / double(st.cycles));
  }
  return {pass, detail + "; worst mode/runner-up " + format_fixed(worst_ratio, 2) + " (need >= 3)"};
}

// --- 6, 7: factorization -------------------------------------------------------

// 5-bit weights: the multiplier scaled by 3 reaches |15|.  Synchronous
// updates oscillate on the factorizer; color classes with memoryless
// neurons do not.
ExperimentConfig factor_config(std::uint64_t cycles) {
  ExperimentConfig cfg;
  cfg.cycles = cycles;
  cfg.schedule = AnnealSchedule::step(11, cycles / 2, 5);
  cfg.scale = 3;
  cfg.weight_bits = 5;
  cfg.engine.mode = UpdateMode::colored;
  cfg.engine.acc_bits = 2;
  cfg.engine.memoryless = true;
  return cfg;
}

Verdict factorization() {
  const Circuit c = multiplier_circuit(4);
  const std::size_t seeds = 50;
  const auto stats = parallel_map<RunStats>(
      seeds,
      [&](std::size_t k) {
        ExperimentConfig cfg = factor_config(16384);
        cfg.seed = 1 + k;
        return run_reverse(c, 55, cfg).stats;
      },
      g_threads);
  std::size_t ok = 0, late = 0, wrong = 0;
  double after = 0;
  for (const auto& st : stats) {
    const auto& v = st.final_values;
    const bool factors = st.converged() && std::set<std::uint64_t>{v[0], v[1]} == std::set<std::uint64_t>{5, 11};
    if (factors && *st.cycles_after_step() <= 2048) {
      ++ok;
      after += double(std::max<long long>(0, *st.cycles_after_step()));
    } else if (factors) {
      ++late;
    } else if (st.converged()) {
      ++wrong;
    }
  }
  const double rate = double(ok) / double(seeds);
  return {rate >= 0.90, std::to_string(ok) + "/" + std::to_string(seeds) + " seeds reached {5,11} within 2048 cycles of the step (" +
                            pct(rate) + ", need >= 90%); mean " + format_fixed(ok ? after / double(ok) : 0.0, 0) +
                            " cycles after step; " + std::to_string(late) + " late, " + std::to_string(wrong) +
                            " froze on a wrong pair"};
}

Verdict exhaustive_factorizer() {
  const Circuit c = multiplier_circuit(5);
  const auto outputs = factorable_outputs(5);
  ExperimentConfig cfg = factor_config(std::uint64_t{1} << 16);
  cfg.seed = 1;
  const ConvergenceSummary sum = convergence_stats(c, outputs, cfg, 1, g_threads);
  const double correct_among_converged = sum.converged ? double(sum.successes) / double(sum.converged) : 0.0;
  const double converged_valid = double(sum.successes) / double(sum.runs);
  return {sum.wrong == 0 && converged_valid >= 0.95,
          std::to_string(sum.runs) + " outputs: " + std::to_string(sum.converged) + " converged, " +
              std::to_string(sum.successes) + " correct, " + std::to_string(sum.wrong) + " froze on A*B != C; correct among converged " +
              pct(correct_among_converged) + " (need 100%), converged correct " + pct(converged_valid) +
              " (need >= 95%); mean convergence " + format_fixed(sum.mean_cycles, 0) + " cycles, worst " +
              std::to_string(sum.worst_cycles)};
}

// --- 8: mixed clamps ---------------------------------------------------------------

Verdict mixed_clamps() {
  const Circuit mult = multiplier_circuit(4), rca = adder_circuit(4);
  const std::size_t seeds = 50;
  const auto results = parallel_map<std::pair<RunStats, RunStats>>(
      seeds,
      [&](std::size_t k) {
        ExperimentConfig mc = factor_config(16384);
        mc.seed = 1 + k;
        // RCA entries reach 2: scale 3 fits 4-bit weights.
        ExperimentConfig ac;
        ac.cycles = 8192;
        ac.schedule = AnnealSchedule::step(5, 4096, 3);
        ac.scale = 3;
        ac.weight_bits = 4;
        ac.engine.acc_bits = 5;
        ac.seed = 1 + k;
        return std::pair{run_partial(mult, {{"P", 18}, {"A", 3}}, mc).stats,
                         run_partial(rca, {{"S", 9}, {"A", 3}}, ac).stats};
      },
      g_threads);
  std::size_t div_ok = 0, sub_ok = 0;
  for (const auto& [m, a] : results) {
    if (m.converged() && m.final_values[mult.group_index("B")] == 6) ++div_ok;
    if (a.converged() && a.final_values[rca.group_index("B")] == 6 && a.final_values[rca.group_index("Cout")] == 0) {
      ++sub_ok;
    }
  }
  return {div_ok == seeds && sub_ok == seeds, "P=18,A=3 -> B=6 in " + std::to_string(div_ok) + "/" +
                                                  std::to_string(seeds) + " seeds; S=9,A=3 -> B=6 in " +
                                                  std::to_string(sub_ok) + "/" + std::to_string(seeds) + " seeds"};
}

// --- 9: PRNG -------------------------------------------------------------------------

Verdict prng_conformance() {
  XorShift128Plus g(1, 2);
  const std::uint64_t first = g.next();
  const bool traced = first == 0x800045u && g.state().s0 == 2 && g.state().s1 == 0x800043u;
  RngBank bank(64, 0x9E3779B97F4A7C15ULL);
  std::vector<std::uint64_t> ones(64, 0);
  const std::uint64_t words = std::uint64_t{1} << 20;
  for (std::uint64_t t = 0; t < words; ++t) {
    bank.advance();
    const std::uint64_t w = bank.word(0);
    for (int lane = 0; lane < 64; ++lane) ones[lane] += (w >> lane) & 1u;
  }
  double worst = 0;
  for (auto n : ones) worst = std::max(worst, std::abs(double(n) / double(words) - 0.5));
  char hex[32];
  std::snprintf(hex, sizeof hex, "0x%llx", static_cast<unsigned long long>(first));
  return {traced && worst < 0.002,
          std::string("seed (1,2) -> ") + hex + (traced ? " as traced" : " (want 0x800045)") + "; worst lane bias " +
              format_fixed(100.0 * worst, 3) + "% over 2^20 words (need < 0.2%)"};
}

// --- 10: determinism ---------------------------------------------------------------------

std::string render_artifacts() {
  std::ostringstream os;
  const Circuit m = multiplier_circuit(4);
  ExperimentConfig fc = forward_config();
  fc.seed = 77;
  const auto fwd = run_forward(m, 3, 6, fc);
  write_trace_csv(os, fwd.trace, describe(fc, m));
  write_histogram_csv(os, fwd.stats, describe(fc, m));
  ExperimentConfig rc = factor_config(16384);
  rc.seed = 78;
  const auto rev = run_reverse(m, 55, rc);
  write_trace_csv(os, rev.trace, describe(rc, m));
  write_histogram_csv(os, rev.stats, describe(rc, m));
  const Circuit a = gate_as_circuit(GateKind::AND);
  ExperimentConfig sc;
  sc.cycles = 8192;
  sc.seed = 79;
  write_sweep_csv(os, sweep_wrnd(a, {{"Y", 0}}, {0, 2, 4, 6, 8}, sc, 3, g_threads), describe(sc, a));
  ExperimentConfig cc = factor_config(8192);
  cc.seed = 80;
  write_convergence_csv(os, convergence_stats(multiplier_circuit(3), {6, 12, 15}, cc, 2, g_threads),
                        describe(cc, multiplier_circuit(3)));
  return os.str();
}

Verdict determinism() {
  const std::string a = render_artifacts(), b = render_artifacts();
  return {a == b, std::to_string(a.size()) + " bytes of trace, histogram, sweep and convergence CSV" +
                      (a == b ? " identical across reruns" : " differ between reruns")};
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--strict") {
      strict = true;
    } else if (arg == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoi(tok));
    } else if (arg == "--threads" && i + 1 < argc) {
      g_threads = static_cast<unsigned>(std::stoul(argv[++i]));
    } else {
      std::cerr << "usage: acceptance [--strict] [--only N[,N...]] [--threads T]\n";
      return 2;
    }
  }

  const std::vector<std::function<Verdict()>> criteria{
      ground_state_equivalence, node_counts,   clamped_and,  forward_multiplication, mode_frequency,
      factorization,            exhaustive_factorizer, mixed_clamps, prng_conformance,       determinism};

  int failures = 0, ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i]();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ++ran;
    if (!v.pass) ++failures;
    std::cout << "criterion " << id << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail << "  ["
              << format_fixed(secs, 1) << " s]" << std::endl;
  }
  std::cout << "summary: " << ran - failures << "/" << ran << " criteria pass" << std::endl;
  return strict && failures ? 1 : 0;
}
