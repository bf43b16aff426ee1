#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "invlogic/spin.hpp"

namespace invlogic {

// 64-bit xorshift+ (shift triple 23/17/26, output s1 + y).
//
// Each call yields one 64-bit word; every bit of the word is used as the
// noise sign for a single neuron.  The all-zero state is a fixed point of
// the recurrence and is rejected at construction.
class XorShift128Plus {
 public:
  using result_type = std::uint64_t;

  struct State {
    std::uint64_t s0;
    std::uint64_t s1;
    friend bool operator==(const State&, const State&) = default;
  };

  XorShift128Plus(std::uint64_t s0, std::uint64_t s1) : state_{s0, s1} {
    if (s0 == 0 && s1 == 0) {
      throw std::invalid_argument("xorshift+ state must not be all zero");
    }
  }

  explicit XorShift128Plus(State s) : XorShift128Plus(s.s0, s.s1) {}

  result_type operator()() noexcept { return next(); }

  result_type next() noexcept {
    std::uint64_t x = state_.s0;
    const std::uint64_t y = state_.s1;
    state_.s0 = y;
    x ^= x << 23;
    state_.s1 = x ^ y ^ (x >> 17) ^ (y >> 26);
    return state_.s1 + y;
  }

  const State& state() const noexcept { return state_; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

 private:
  State state_;
};

// Bit `lane` of `word` as a bipolar spin: 1 -> +1, 0 -> -1.
inline Spin noise_spin(std::uint64_t word, int lane) {
  if (lane < 0 || lane > 63) {
    throw std::out_of_range("noise lane must be in [0, 63]");
  }
  return ((word >> lane) & 1u) ? Spin::up() : Spin::down();
}

inline std::uint64_t splitmix64(std::uint64_t& x) noexcept {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// One xorshift+ register per 64 neurons.  Node i reads lane i % 64 of
// generator i / 64; all generators advance once per cycle.
class RngBank {
 public:
  static constexpr std::size_t kLanes = 64;

  RngBank(std::size_t n_nodes, std::uint64_t seed) : n_nodes_(n_nodes) {
    if (n_nodes == 0) throw std::invalid_argument("RngBank needs at least one node");
    const std::size_t count = (n_nodes + kLanes - 1) / kLanes;
    gens_.reserve(count);
    words_.assign(count, 0);
    for (std::size_t g = 0; g < count; ++g) {
      // Scramble (seed, index) so banks never share lanes.
      std::uint64_t sm = seed ^ (0xD1B54A32D192ED03ull * (g + 1));
      std::uint64_t s0 = splitmix64(sm);
      std::uint64_t s1 = splitmix64(sm);
      if (s0 == 0 && s1 == 0) s1 = 1;
      gens_.emplace_back(s0, s1);
    }
  }

  std::size_t generator_count() const noexcept { return gens_.size(); }
  std::size_t node_count() const noexcept { return n_nodes_; }

  // Draw a fresh word from every generator.
  void advance() noexcept {
    for (std::size_t g = 0; g < gens_.size(); ++g) words_[g] = gens_[g].next();
  }

  Spin noise(std::size_t node) const {
    return noise_spin(words_[node / kLanes], static_cast<int>(node % kLanes));
  }

  std::uint64_t word(std::size_t g) const { return words_.at(g); }
  const XorShift128Plus& generator(std::size_t g) const { return gens_.at(g); }

 private:
  std::size_t n_nodes_;
  std::vector<XorShift128Plus> gens_;
  std::vector<std::uint64_t> words_;
};

}  // namespace invlogic
