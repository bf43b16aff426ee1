#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace invlogic {

// Smallest two's-complement width that holds v.
inline int signed_bits_for(long long v) {
  int bits = 1;
  while (v < -(1LL << (bits - 1)) || v > (1LL << (bits - 1)) - 1) ++bits;
  return bits;
}

inline bool fits_signed(long long v, int bits) {
  return bits >= 1 && bits < 63 && v >= -(1LL << (bits - 1)) && v <= (1LL << (bits - 1)) - 1;
}

// Bias vector h and symmetric, zero-diagonal coupling matrix J over n
// labelled nodes.  Entries are integers representable in `weight_bits`
// signed bits.
class Hamiltonian {
 public:
  Hamiltonian() = default;

  Hamiltonian(std::vector<std::string> labels, std::vector<int> h,
              std::vector<std::vector<int>> J, int weight_bits)
      : labels_(std::move(labels)), h_(std::move(h)), weight_bits_(weight_bits) {
    const std::size_t n = h_.size();
    if (labels_.size() != n) throw std::invalid_argument("labels and h differ in length");
    if (J.size() != n) throw std::invalid_argument("J must have n rows");
    J_.assign(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (J[i].size() != n) {
        throw std::invalid_argument("J row " + std::to_string(i) + " must have n entries");
      }
      for (std::size_t j = 0; j < n; ++j) J_[i * n + j] = J[i][j];
    }
    validate();
  }

  // Zero network with default labels n0..n{n-1}.
  static Hamiltonian zeros(std::size_t n, int weight_bits = 1) {
    Hamiltonian H;
    H.h_.assign(n, 0);
    H.J_.assign(n * n, 0);
    H.weight_bits_ = weight_bits;
    for (std::size_t i = 0; i < n; ++i) H.labels_.push_back("n" + std::to_string(i));
    return H;
  }

  std::size_t size() const noexcept { return h_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<int>& h() const noexcept { return h_; }
  int h(std::size_t i) const { return h_[i]; }
  int J(std::size_t i, std::size_t j) const { return J_[i * size() + j]; }
  const int* J_row(std::size_t i) const { return J_.data() + i * size(); }
  int weight_bits() const noexcept { return weight_bits_; }

  std::vector<std::vector<int>> J_rows() const {
    std::vector<std::vector<int>> rows(size());
    for (std::size_t i = 0; i < size(); ++i) rows[i].assign(J_row(i), J_row(i) + size());
    return rows;
  }

  int max_abs_entry() const {
    int m = 0;
    for (int v : h_) m = std::max(m, std::abs(v));
    for (int v : J_) m = std::max(m, std::abs(v));
    return m;
  }

  // Largest |h_i| + sum_j |J_ij| over all nodes.
  long long max_input_magnitude() const {
    long long best = 0;
    for (std::size_t i = 0; i < size(); ++i) {
      long long s = std::abs(h_[i]);
      for (std::size_t j = 0; j < size(); ++j) s += std::abs(J(i, j));
      best = std::max(best, s);
    }
    return best;
  }

  int minimal_weight_bits() const { return std::max(1, signed_bits_for(max_abs_entry())); }

  std::size_t index_of(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw std::out_of_range("no node labelled '" + label + "'");
    return static_cast<std::size_t>(it - labels_.begin());
  }

  // Mutators keep symmetry by construction.
  void set_h(std::size_t i, int v) { h_.at(i) = v; }
  void set_coupling(std::size_t i, std::size_t j, int v) {
    if (i == j) throw std::invalid_argument("J diagonal must stay zero");
    J_.at(i * size() + j) = v;
    J_.at(j * size() + i) = v;
  }
  void set_weight_bits(int bits) { weight_bits_ = bits; }
  void set_label(std::size_t i, std::string s) { labels_.at(i) = std::move(s); }

  // Multiplies every entry by an integer factor (the inverse
  // pseudo-temperature folded into the weights).
  Hamiltonian scaled(int factor) const {
    if (factor < 1) throw std::invalid_argument("weight scale must be >= 1");
    Hamiltonian out = *this;
    for (int& v : out.h_) v *= factor;
    for (int& v : out.J_) v *= factor;
    out.weight_bits_ = out.minimal_weight_bits();
    return out;
  }

  void validate() const {
    const std::size_t n = size();
    if (n == 0) throw std::invalid_argument("Hamiltonian must have at least one node");
    if (weight_bits_ < 1 || weight_bits_ > 30) {
      throw std::invalid_argument("weight_bits must be in [1, 30]");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!fits_signed(h_[i], weight_bits_)) {
        throw std::invalid_argument("h[" + std::to_string(i) + "] does not fit in " +
                                    std::to_string(weight_bits_) + " signed bits");
      }
      if (J(i, i) != 0) {
        throw std::invalid_argument("J[" + std::to_string(i) + "][" + std::to_string(i) +
                                    "] must be zero");
      }
      for (std::size_t j = i + 1; j < n; ++j) {
        if (J(i, j) != J(j, i)) {
          throw std::invalid_argument("J is not symmetric at (" + std::to_string(i) + ", " +
                                      std::to_string(j) + ")");
        }
        if (!fits_signed(J(i, j), weight_bits_)) {
          throw std::invalid_argument("J[" + std::to_string(i) + "][" + std::to_string(j) +
                                      "] does not fit in " + std::to_string(weight_bits_) +
                                      " signed bits");
        }
      }
    }
  }

  friend bool operator==(const Hamiltonian&, const Hamiltonian&) = default;

 private:
  std::vector<std::string> labels_;
  std::vector<int> h_;
  std::vector<int> J_;  // row-major n x n
  int weight_bits_ = 1;
};

// --- JSON file format: {n, labels, weight_bits, h, J} ---------------------

inline nlohmann::json to_json(const Hamiltonian& H) {
  nlohmann::json j;
  j["n"] = H.size();
  j["labels"] = H.labels();
  j["weight_bits"] = H.weight_bits();
  j["h"] = H.h();
  j["J"] = H.J_rows();
  return j;
}

inline Hamiltonian hamiltonian_from_json(const nlohmann::json& j) {
  for (const char* key : {"n", "labels", "weight_bits", "h", "J"}) {
    if (!j.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
  }
  const auto n = j.at("n").get<std::size_t>();
  auto labels = j.at("labels").get<std::vector<std::string>>();
  auto h = j.at("h").get<std::vector<int>>();
  auto J = j.at("J").get<std::vector<std::vector<int>>>();
  if (h.size() != n) throw std::invalid_argument("field 'h' must have n entries");
  if (labels.size() != n) throw std::invalid_argument("field 'labels' must have n entries");
  return Hamiltonian(std::move(labels), std::move(h), std::move(J), j.at("weight_bits").get<int>());
}

inline Hamiltonian load_hamiltonian(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return hamiltonian_from_json(j);
}

inline void save_hamiltonian(const Hamiltonian& H, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json(H).dump(2) << '\n';
}

}  // namespace invlogic
