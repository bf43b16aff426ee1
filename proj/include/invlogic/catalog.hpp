#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <functional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "invlogic/hamiltonian.hpp"
#include "invlogic/spin.hpp"

namespace invlogic {

enum class GateKind { AND, NAND, OR, NOR, XOR_OR, XOR_NOR, HA, HA_ALT, FA };

inline constexpr std::array<GateKind, 9> kAllGateKinds = {
    GateKind::AND,     GateKind::NAND, GateKind::OR,     GateKind::NOR, GateKind::XOR_OR,
    GateKind::XOR_NOR, GateKind::HA,   GateKind::HA_ALT, GateKind::FA};

inline std::string to_string(GateKind k) {
  switch (k) {
    case GateKind::AND: return "AND";
    case GateKind::NAND: return "NAND";
    case GateKind::OR: return "OR";
    case GateKind::NOR: return "NOR";
    case GateKind::XOR_OR: return "XOR_OR";
    case GateKind::XOR_NOR: return "XOR_NOR";
    case GateKind::HA: return "HA";
    case GateKind::HA_ALT: return "HA_ALT";
    case GateKind::FA: return "FA";
  }
  return "?";
}

inline GateKind parse_gate_kind(const std::string& s) {
  for (GateKind k : kAllGateKinds) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown gate kind '" + s + "'");
}

enum class TerminalRole { input, output, auxiliary };

struct Terminal {
  std::string name;
  TerminalRole role;
  friend bool operator==(const Terminal&, const Terminal&) = default;
};

using StateSet = std::set<std::vector<int>>;  // spin vectors as +-1 ints

// A gate Hamiltonian with its terminal roles and the set of spin
// assignments that satisfy the gate's Boolean relation.  Terminal k is
// node k of the Hamiltonian.
struct GateSpec {
  GateKind kind;
  Hamiltonian hamiltonian;
  std::vector<Terminal> terminals;
  StateSet valid_states;

  std::size_t size() const { return terminals.size(); }

  std::size_t terminal_index(const std::string& name) const {
    for (std::size_t i = 0; i < terminals.size(); ++i) {
      if (terminals[i].name == name) return i;
    }
    throw std::out_of_range(to_string(kind) + " has no terminal '" + name + "'");
  }

  std::vector<std::size_t> nodes_with_role(TerminalRole r) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < terminals.size(); ++i) {
      if (terminals[i].role == r) out.push_back(i);
    }
    return out;
  }
};

namespace detail {

struct GateLogic {
  std::vector<Terminal> terminals;
  std::size_t n_inputs;
  // Maps input bits (LSB = first input) to the values of the remaining
  // terminals in order.
  std::function<std::vector<bool>(const std::vector<bool>&)> eval;
};

inline GateLogic logic_of(GateKind k) {
  using R = TerminalRole;
  const auto two = [](auto f) {
    return GateLogic{{{"A", R::input}, {"B", R::input}, {"Y", R::output}},
                     2,
                     [f](const std::vector<bool>& in) { return std::vector<bool>{f(in[0], in[1])}; }};
  };
  switch (k) {
    case GateKind::AND: return two([](bool a, bool b) { return a && b; });
    case GateKind::NAND: return two([](bool a, bool b) { return !(a && b); });
    case GateKind::OR: return two([](bool a, bool b) { return a || b; });
    case GateKind::NOR: return two([](bool a, bool b) { return !(a || b); });
    case GateKind::XOR_OR:
      return {{{"A", R::input}, {"B", R::input}, {"Y", R::output}, {"AUX", R::auxiliary}},
              2,
              [](const std::vector<bool>& in) {
                return std::vector<bool>{in[0] != in[1], in[0] || in[1]};
              }};
    case GateKind::XOR_NOR:
      return {{{"A", R::input}, {"B", R::input}, {"Y", R::output}, {"AUX", R::auxiliary}},
              2,
              [](const std::vector<bool>& in) {
                return std::vector<bool>{in[0] != in[1], !(in[0] || in[1])};
              }};
    case GateKind::HA:
      return {{{"A", R::input}, {"B", R::input}, {"S", R::output}, {"C", R::output}},
              2,
              [](const std::vector<bool>& in) {
                return std::vector<bool>{in[0] != in[1], in[0] && in[1]};
              }};
    case GateKind::HA_ALT:
      // Node order recovered by ground-state enumeration: carry precedes
      // sum, and the fifth node settles to NOR(A, B).
      return {{{"A", R::input},
               {"B", R::input},
               {"C", R::output},
               {"S", R::output},
               {"AUX", R::auxiliary}},
              2,
              [](const std::vector<bool>& in) {
                return std::vector<bool>{in[0] && in[1], in[0] != in[1], !(in[0] || in[1])};
              }};
    case GateKind::FA:
      return {{{"A", R::input},
               {"B", R::input},
               {"CIN", R::input},
               {"S", R::output},
               {"COUT", R::output}},
              3,
              [](const std::vector<bool>& in) {
                const int sum = int(in[0]) + int(in[1]) + int(in[2]);
                return std::vector<bool>{(sum & 1) != 0, sum >= 2};
              }};
  }
  throw std::invalid_argument("unknown gate kind");
}

inline std::vector<std::string> names_of(const std::vector<Terminal>& ts) {
  std::vector<std::string> out;
  for (const auto& t : ts) out.push_back(t.name);
  return out;
}

}  // namespace detail

// Valid spin assignments of a gate, by direct Boolean evaluation.
inline StateSet truth_table(GateKind kind) {
  const auto logic = detail::logic_of(kind);
  StateSet states;
  for (unsigned bits = 0; bits < (1u << logic.n_inputs); ++bits) {
    std::vector<bool> in;
    for (std::size_t k = 0; k < logic.n_inputs; ++k) in.push_back((bits >> k) & 1u);
    std::vector<int> row;
    for (bool b : in) row.push_back(b ? 1 : -1);
    for (bool b : logic.eval(in)) row.push_back(b ? 1 : -1);
    states.insert(row);
  }
  return states;
}

// Ising spin-flip gauge on node i: h_i and row/column i of J change sign,
// and coordinate i of every valid state flips.  Logically inverts node i.
inline GateSpec negate_node(const GateSpec& spec, std::size_t i) {
  if (i >= spec.size()) throw std::out_of_range("negate_node: node index out of range");
  GateSpec out = spec;
  Hamiltonian& H = out.hamiltonian;
  H.set_h(i, -H.h(i));
  for (std::size_t j = 0; j < H.size(); ++j) {
    if (j != i) H.set_coupling(i, j, -spec.hamiltonian.J(i, j));
  }
  StateSet flipped;
  for (auto s : spec.valid_states) {
    s[i] = -s[i];
    flipped.insert(std::move(s));
  }
  out.valid_states = std::move(flipped);
  return out;
}

namespace detail {

inline GateSpec make_spec(GateKind kind, std::vector<int> h, std::vector<std::vector<int>> J) {
  auto logic = logic_of(kind);
  Hamiltonian H(names_of(logic.terminals), std::move(h), std::move(J), 3);
  return GateSpec{kind, std::move(H), logic.terminals, truth_table(kind)};
}

}  // namespace detail

// Catalog gate Hamiltonians.  AND, XOR_OR, XOR_NOR, HA, HA_ALT and FA are
// the reference matrices; NAND, OR and NOR are spin-flip gauges of AND.
inline GateSpec gate(GateKind kind) {
  switch (kind) {
    case GateKind::AND:
      return detail::make_spec(kind, {+1, +1, -2}, {{0, -1, +2}, {-1, 0, +2}, {+2, +2, 0}});
    case GateKind::NAND: {
      // NOT Y
      GateSpec s = negate_node(gate(GateKind::AND), 2);
      s.kind = kind;
      return s;
    }
    case GateKind::NOR: {
      // AND(NOT A, NOT B)
      GateSpec s = negate_node(negate_node(gate(GateKind::AND), 0), 1);
      s.kind = kind;
      return s;
    }
    case GateKind::OR: {
      // NOT AND(NOT A, NOT B)
      GateSpec s = negate_node(gate(GateKind::NOR), 2);
      s.kind = kind;
      return s;
    }
    case GateKind::XOR_OR:
      return detail::make_spec(kind, {-1, -1, -1, +2},
                               {{0, -1, -1, +2}, {-1, 0, -1, +2}, {-1, -1, 0, +2}, {+2, +2, +2, 0}});
    case GateKind::XOR_NOR:
      return detail::make_spec(kind, {-1, -1, -1, -2},
                               {{0, -1, -1, -2}, {-1, 0, -1, -2}, {-1, -1, 0, -2}, {-2, -2, -2, 0}});
    case GateKind::HA:
      return detail::make_spec(kind, {+1, +1, -1, -2},
                               {{0, -1, +1, +2}, {-1, 0, +1, +2}, {+1, +1, 0, -2}, {+2, +2, -2, 0}});
    case GateKind::HA_ALT:
      // The reference matrix is asymmetric at (1,3)/(3,1) (+1 vs -1); the
      // symmetric -1 entry is the one whose ground states form a half adder.
      return detail::make_spec(kind, {0, 0, -2, -1, -2},
                               {{0, -2, +2, -1, -2},
                                {-2, 0, +2, -1, -2},
                                {+2, +2, 0, 0, 0},
                                {-1, -1, 0, 0, -2},
                                {-2, -2, 0, -2, 0}});
    case GateKind::FA:
      return detail::make_spec(kind, {0, 0, 0, 0, 0},
                               {{0, -1, -1, +1, +2},
                                {-1, 0, -1, +1, +2},
                                {-1, -1, 0, +1, +2},
                                {+1, +1, +1, 0, -2},
                                {+2, +2, +2, -2, 0}});
  }
  throw std::invalid_argument("unknown gate kind");
}

inline GateSpec gate(const std::string& kind) { return gate(parse_gate_kind(kind)); }

}  // namespace invlogic
