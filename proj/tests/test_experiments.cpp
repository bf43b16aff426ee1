#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "invlogic/experiments.hpp"

using namespace invlogic;

namespace {

ExperimentConfig annealed(std::uint64_t cycles, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.schedule = AnnealSchedule::step(5, cycles / 2, 3);
  cfg.cycles = cycles;
  cfg.seed = seed;
  return cfg;
}

std::uint64_t histogram_total(const RunStats& st) {
  std::uint64_t n = 0;
  for (const auto& [k, c] : st.histogram) n += c;
  return n;
}

}  // namespace

TEST(Circuits, Builders) {
  EXPECT_EQ(parse_build("multiplier:3").net.size(), 27u);
  EXPECT_EQ(parse_build("rca:8").net.size(), 32u);
  EXPECT_THROW(parse_build("multiplier"), std::invalid_argument);
  EXPECT_THROW(parse_build("multiplier:0"), std::invalid_argument);
  EXPECT_THROW(parse_build("multiplier:3x"), std::invalid_argument);
  EXPECT_THROW(parse_build("divider:3"), std::invalid_argument);
  const auto m = multiplier_circuit(3);
  EXPECT_EQ(m.groups_with_role(GroupRole::input), (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(m.groups_with_role(GroupRole::output), (std::vector<std::string>{"P"}));
  EXPECT_THROW(m.group_index("Q"), std::out_of_range);
}

TEST(Circuits, RelationsMatchArithmetic) {
  const auto m = multiplier_circuit(4);
  const std::vector<std::uint64_t> good{3, 5, 15}, bad{3, 5, 16};
  EXPECT_TRUE((*m.relation)(good));
  EXPECT_FALSE((*m.relation)(bad));
  const auto r = adder_circuit(4);
  const std::vector<std::uint64_t> carry{9, 8, 1, 1}, nocarry{9, 8, 1, 0};
  EXPECT_TRUE((*r.relation)(carry));
  EXPECT_FALSE((*r.relation)(nocarry));
  const auto g = gate_as_circuit(GateKind::XOR_OR);
  ASSERT_TRUE(g.relation.has_value());
  const std::vector<std::uint64_t> x{1, 0, 1, 1}, y{1, 1, 1, 1};
  EXPECT_TRUE((*g.relation)(x));
  EXPECT_FALSE((*g.relation)(y));
}

TEST(Circuits, LargeNetlistHasNoProjectedRelation) {
  EXPECT_FALSE(netlist_circuit(multiplier_netlist(3), "m3").relation.has_value());
  EXPECT_TRUE(netlist_circuit(multiplier_netlist(2), "m2").relation.has_value());
}

TEST(Config, WeightBitsAreChecked) {
  const auto c = multiplier_circuit(4);  // fused |h| reaches 4
  ExperimentConfig cfg;
  cfg.weight_bits = 4;
  EXPECT_EQ(prepared_hamiltonian(c, cfg).weight_bits(), 4);
  cfg.scale = 2;
  EXPECT_THROW(prepared_hamiltonian(c, cfg), std::invalid_argument);
  cfg.weight_bits = 5;
  EXPECT_EQ(prepared_hamiltonian(c, cfg).h(0), 2 * c.net.hamiltonian.h(0));
  cfg.scale = 0;
  EXPECT_THROW(prepared_hamiltonian(c, cfg), std::invalid_argument);
}

TEST(Runs, HistogramCountsEveryCycle) {
  const auto c = multiplier_circuit(2);
  const auto r = run_forward(c, 2, 3, annealed(5000, 3));
  EXPECT_EQ(histogram_total(r.stats), 5000u);
  EXPECT_EQ(r.trace.cycles, 5000u);
  EXPECT_EQ(r.stats.watched, (std::vector<std::string>{"P"}));
  EXPECT_LE(r.stats.runner_up_count, r.stats.mode_count);
}

TEST(Runs, ForwardWithZeroOperandGivesZero) {
  const auto c = multiplier_circuit(3);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = run_forward(c, 0, 6, annealed(16384, seed));
    EXPECT_EQ(r.stats.mode_value, (std::vector<std::uint64_t>{0})) << seed;
  }
}

TEST(Runs, ReverseOfOneIsOneTimesOne) {
  const auto c = multiplier_circuit(2);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = run_reverse(c, 1, annealed(16384, seed));
    EXPECT_EQ(r.stats.mode_value, (std::vector<std::uint64_t>{1, 1})) << seed;
    ASSERT_TRUE(r.stats.converged()) << seed;
    EXPECT_EQ(r.stats.final_values, (std::vector<std::uint64_t>{1, 1, 1}));
  }
}

TEST(Runs, ReverseConvergesToADivisorPair) {
  const auto c = multiplier_circuit(3);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = run_reverse(c, 12, annealed(32768, seed));
    if (!r.stats.converged()) continue;
    const auto& v = r.stats.final_values;
    if (r.stats.final_valid.value()) EXPECT_EQ(v[0] * v[1], 12u);
    EXPECT_EQ(v[2], 12u);
  }
}

TEST(Runs, AndWithOutputHighForcesBothInputsHigh) {
  const auto c = gate_as_circuit(GateKind::AND);
  ExperimentConfig cfg;
  cfg.schedule = AnnealSchedule::constant(2);
  cfg.cycles = 8192;
  const auto r = run_partial(c, {{"Y", 1}}, cfg);
  EXPECT_EQ(r.stats.watched, (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(r.stats.mode_value, (std::vector<std::uint64_t>{1, 1}));
  EXPECT_GT(*r.stats.valid_fraction, 0.9);
}

TEST(Runs, InfeasibleClampsNeverConverge) {
  const auto c = gate_as_circuit(GateKind::AND);
  ExperimentConfig cfg;
  cfg.cycles = 4096;
  const auto r = run_partial(c, {{"A", 0}, {"Y", 1}}, cfg);
  EXPECT_FALSE(r.stats.converged());
  EXPECT_FALSE(r.stats.diagnostic.empty());
}

TEST(Runs, ClampValueMustFitItsGroup) {
  const auto c = multiplier_circuit(2);
  EXPECT_THROW(run_reverse(c, 16, annealed(64, 1)), std::out_of_range);
  EXPECT_THROW(simulate(c, {}, {}, annealed(64, 1)), std::invalid_argument);
}

TEST(Runs, NoiseFreeRunsIgnoreTheSeed) {
  const auto c = multiplier_circuit(3);
  ExperimentConfig cfg;
  cfg.cycles = 2048;
  cfg.seed = 1;
  const auto a = run_reverse(c, 6, cfg);
  cfg.seed = 99;
  const auto b = run_reverse(c, 6, cfg);
  EXPECT_EQ(a.trace, b.trace);
}

TEST(Runs, SameSeedSameTrace) {
  const auto c = multiplier_circuit(3);
  const auto a = run_reverse(c, 6, annealed(4096, 11));
  const auto b = run_reverse(c, 6, annealed(4096, 11));
  const auto d = run_reverse(c, 6, annealed(4096, 12));
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_NE(a.trace, d.trace);
}

TEST(Summary, ConvergenceNeedsAHeldTail) {
  const auto c = gate_as_circuit(GateKind::AND);
  RunTrace tr;
  tr.group_names = {"A", "B", "Y"};
  // A,B toggle for 10 cycles, then hold (1,1,1) for 20.
  for (std::uint64_t t = 0; t < 30; ++t) {
    const std::uint64_t v = t < 10 ? (t + 1) % 2 : 1;
    tr.values.insert(tr.values.end(), {v, v, v});
  }
  tr.cycles = 30;
  const auto st = summarize(c, tr, {"A", "B"}, 5, 20);
  ASSERT_TRUE(st.converged());
  EXPECT_EQ(*st.convergence_cycle, 10u);
  EXPECT_EQ(*st.cycles_after_step(), 5);
  EXPECT_TRUE(st.converged_valid());
  EXPECT_FALSE(summarize(c, tr, {"A", "B"}, 5, 21).converged());
  EXPECT_EQ(st.mode_value, (std::vector<std::uint64_t>{1, 1}));
  EXPECT_EQ(st.mode_count, 25u);
  EXPECT_EQ(st.runner_up_count, 5u);
  EXPECT_DOUBLE_EQ(st.runner_up_ratio, 5.0);
  EXPECT_DOUBLE_EQ(*st.valid_fraction, 1.0);
  EXPECT_DOUBLE_EQ(st.toggles, 2.0 * 10 / 29);
}

TEST(Sweep, ValidFractionPeaksAtModerateNoise) {
  // Reverse 3-bit multiplier: without noise it freezes in a local minimum,
  // with heavy noise (A,B) is close to uniform.
  const auto c = multiplier_circuit(3);
  ExperimentConfig cfg;
  cfg.cycles = 1 << 15;
  cfg.seed = 5;
  std::vector<int> ws(13);
  std::iota(ws.begin(), ws.end(), 0);
  const auto rows = sweep_wrnd(c, {{"P", 12}}, ws, cfg, 2, 4);
  ASSERT_EQ(rows.size(), 26u);
  std::vector<double> mean(ws.size(), 0);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k].w_rnd, ws[k / 2]);
    EXPECT_EQ(rows[k].seed, 5 + k);
    mean[k / 2] += rows[k].valid_fraction / 2;
  }
  const auto peak = std::max_element(mean.begin(), mean.end()) - mean.begin();
  EXPECT_GT(peak, 0);
  EXPECT_LT(peak, 12);
  EXPECT_GT(mean[peak], 2 * std::max(mean.front(), mean.back()));
  // 4 of the 64 (A,B) pairs multiply to 12.
  EXPECT_NEAR(mean.back(), 4.0 / 64, 0.03);
}

TEST(Sweep, LargeNoiseIsNearChance) {
  const auto c = gate_as_circuit(GateKind::AND);
  ExperimentConfig cfg;
  cfg.cycles = 1 << 16;
  const auto rows = sweep_wrnd(c, {{"Y", 0}}, {200}, cfg, 1, 1);
  // A and B become independent coin flips: 3 of 4 pairs are valid.
  EXPECT_NEAR(rows[0].valid_fraction, 0.75, 0.02);
  EXPECT_FALSE(rows[0].converged);
}

TEST(Sweep, ThreadCountDoesNotChangeRows) {
  const auto c = gate_as_circuit(GateKind::FA);
  ExperimentConfig cfg;
  cfg.cycles = 4096;
  cfg.seed = 3;
  EXPECT_EQ(sweep_wrnd(c, {{"S", 1}}, {1, 3, 5}, cfg, 3, 1), sweep_wrnd(c, {{"S", 1}}, {1, 3, 5}, cfg, 3, 8));
}

TEST(Convergence, SmallMultiplierStatistics) {
  const auto c = multiplier_circuit(2);
  const auto sum = convergence_stats(c, {1, 2, 6, 9}, annealed(8192, 1), 3, 4);
  ASSERT_EQ(sum.rows.size(), 4u);
  EXPECT_EQ(sum.runs, 12u);
  EXPECT_EQ(sum.successes + sum.wrong + (sum.runs - sum.converged), sum.runs);
  EXPECT_EQ(sum.rows[0].output, 1u);
  EXPECT_GT(sum.successes, 0u);
  for (const auto& r : sum.rows) {
    EXPECT_GE(r.success_rate, 0.0);
    EXPECT_LE(r.success_rate, 1.0);
    if (r.success_rate > 0) EXPECT_LE(r.mean_cycles, double(r.worst_cycles));
  }
  EXPECT_EQ(sum.rows, convergence_stats(c, {1, 2, 6, 9}, annealed(8192, 1), 3, 1).rows);
  EXPECT_THROW(convergence_stats(c, {1}, annealed(64, 1), 0), std::invalid_argument);
}

TEST(Outputs, FactorableAndPrimePairCounts) {
  const auto f = factorable_outputs(5);
  EXPECT_EQ(f.size(), 340u);
  EXPECT_EQ(f.front(), 0u);
  EXPECT_EQ(f.back(), 961u);
  const auto p = prime_pair_outputs(5);
  EXPECT_EQ(p.size(), 66u);
  EXPECT_EQ(p.front(), 4u);
  EXPECT_EQ(p.back(), 961u);
  EXPECT_EQ(factorable_outputs(2), (std::vector<std::uint64_t>{0, 1, 2, 3, 4, 6, 9}));
}

TEST(Csv, HistogramLayout) {
  const auto c = multiplier_circuit(2);
  const auto fwd = run_forward(c, 1, 2, annealed(2048, 1));
  std::ostringstream one;
  write_histogram_csv(one, fwd.stats, {{"circuit", c.name}});
  EXPECT_EQ(one.str().rfind("# circuit=multiplier:2\nvalue,count\n", 0), 0u);
  const auto rev = run_reverse(c, 2, annealed(2048, 1));
  std::ostringstream two;
  write_histogram_csv(two, rev.stats);
  EXPECT_EQ(two.str().rfind("A,B,count\n", 0), 0u);
}

TEST(Csv, RerunsAreByteIdentical) {
  const auto c = multiplier_circuit(3);
  const auto cfg = annealed(4096, 21);
  const auto render = [&] {
    const auto r = run_reverse(c, 6, cfg);
    std::ostringstream os;
    write_trace_csv(os, r.trace, describe(cfg, c));
    write_histogram_csv(os, r.stats, describe(cfg, c));
    write_sweep_csv(os, sweep_wrnd(c, {{"P", 6}}, {2, 4}, cfg, 2, 3));
    write_convergence_csv(os, convergence_stats(c, {4, 6}, cfg, 2, 3));
    return os.str();
  };
  EXPECT_EQ(render(), render());
}

TEST(Csv, FixedFormatting) {
  EXPECT_EQ(format_fixed(0.5), "0.500000");
  EXPECT_EQ(format_fixed(1.0 / 3, 2), "0.33");
}
