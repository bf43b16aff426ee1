#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "invlogic/catalog.hpp"
#include "invlogic/composer.hpp"
#include "invlogic/engine.hpp"
#include "invlogic/hamiltonian.hpp"

namespace invlogic {

inline constexpr std::size_t kEnumerationBudget = 24;  // free nodes

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// E(m) = -( sum_i h_i m_i + sum_{i<j} J_ij m_i m_j )
inline long long energy(const Hamiltonian& H, std::span<const int> m) {
  if (m.size() != H.size()) throw std::invalid_argument("spin vector length differs from network size");
  long long e = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    e += static_cast<long long>(H.h(i)) * m[i];
    for (std::size_t j = i + 1; j < m.size(); ++j) e += static_cast<long long>(H.J(i, j)) * m[i] * m[j];
  }
  return -e;
}

inline long long energy(const Hamiltonian& H, std::span<const Spin> m) {
  std::vector<int> v;
  v.reserve(m.size());
  for (Spin s : m) v.push_back(s.value());
  return energy(H, v);
}

struct EnergyReport {
  long long ground_energy = 0;
  StateSet ground_states;
  std::map<long long, std::uint64_t> spectrum;  // energy -> number of states
};

// Exhaustive minimum-energy search over every assignment of the free nodes
// (Gray-code order, incremental local fields).
inline EnergyReport ground_states(const Hamiltonian& H, const ClampSpec& clamps = {},
                                  std::size_t budget = kEnumerationBudget) {
  const std::size_t n = H.size();
  clamps.validate(n);
  std::vector<std::size_t> free;
  std::vector<int> m(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (auto c = clamps.get(i)) {
      m[i] = c->value();
    } else {
      free.push_back(i);
    }
  }
  if (free.size() > budget) {
    throw BudgetExceeded("enumeration over " + std::to_string(free.size()) +
                         " free nodes exceeds the budget of " + std::to_string(budget));
  }

  // field_i = h_i + sum_j J_ij m_j
  std::vector<long long> field(n);
  for (std::size_t i = 0; i < n; ++i) {
    long long f = H.h(i);
    for (std::size_t j = 0; j < n; ++j) f += static_cast<long long>(H.J(i, j)) * m[j];
    field[i] = f;
  }

  EnergyReport rep;
  long long e = energy(H, std::span<const int>(m));
  long long best = std::numeric_limits<long long>::max();
  std::vector<std::vector<int>> best_states;
  const std::uint64_t total = std::uint64_t{1} << free.size();
  for (std::uint64_t g = 0;; ++g) {
    ++rep.spectrum[e];
    if (e < best) {
      best = e;
      best_states.clear();
    }
    if (e == best) best_states.push_back(m);
    if (g + 1 == total) break;
    const std::size_t i = free[static_cast<std::size_t>(std::countr_zero(g + 1))];
    e += 2LL * m[i] * field[i];
    m[i] = -m[i];
    for (std::size_t j = 0; j < n; ++j) field[j] += 2LL * H.J(j, i) * m[i];
  }
  rep.ground_energy = best;
  rep.ground_states.insert(best_states.begin(), best_states.end());
  return rep;
}

struct Validation {
  bool ok = false;
  StateSet spurious;  // ground states that are not valid
  StateSet missing;   // valid states that are not ground states
  EnergyReport report;
};

inline Validation compare_ground_states(const Hamiltonian& H, const StateSet& valid) {
  Validation v;
  v.report = ground_states(H);
  for (const auto& s : v.report.ground_states) {
    if (!valid.count(s)) v.spurious.insert(s);
  }
  for (const auto& s : valid) {
    if (!v.report.ground_states.count(s)) v.missing.insert(s);
  }
  v.ok = v.spurious.empty() && v.missing.empty();
  return v;
}

inline Validation validate(const GateSpec& spec) {
  return compare_ground_states(spec.hamiltonian, spec.valid_states);
}

inline Validation validate(const ComposedCircuit& circuit) {
  if (circuit.size() > kEnumerationBudget) {
    throw BudgetExceeded("circuit of " + std::to_string(circuit.size()) +
                         " nodes exceeds the enumeration budget of " +
                         std::to_string(kEnumerationBudget));
  }
  return compare_ground_states(circuit.hamiltonian, circuit.valid_states());
}

inline std::string format_state(const std::vector<int>& s) {
  std::string out;
  for (int v : s) out += v > 0 ? '1' : '0';
  return out;
}

}  // namespace invlogic
