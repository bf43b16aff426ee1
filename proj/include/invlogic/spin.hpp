#pragma once

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace invlogic {

// Bipolar node value.  Logic 0 <-> -1, logic 1 <-> +1.
class Spin {
 public:
  constexpr Spin() = default;

  static constexpr Spin up() { return Spin(1); }
  static constexpr Spin down() { return Spin(-1); }
  static constexpr Spin from_bool(bool b) { return b ? up() : down(); }

  static Spin from_int(int v) {
    if (v != 1 && v != -1) throw std::invalid_argument("spin must be -1 or +1");
    return Spin(static_cast<std::int8_t>(v));
  }

  constexpr int value() const { return v_; }
  constexpr bool bit() const { return v_ > 0; }
  constexpr Spin flipped() const { return Spin(static_cast<std::int8_t>(-v_)); }

  friend constexpr bool operator==(Spin, Spin) = default;

  friend std::ostream& operator<<(std::ostream& os, Spin s) {
    return os << (s.v_ > 0 ? "+1" : "-1");
  }

 private:
  constexpr explicit Spin(std::int8_t v) : v_(v) {}
  std::int8_t v_ = -1;
};

using SpinVector = std::vector<Spin>;

}  // namespace invlogic
