#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "invlogic/catalog.hpp"
#include "invlogic/engine.hpp"
#include "invlogic/hamiltonian.hpp"

namespace invlogic {

struct Binding {
  std::string terminal;
  std::string net;
};

struct Part {
  GateSpec gate;
  std::vector<Binding> bindings;
};

enum class GroupRole { input, output };

// Named multi-bit terminal of a circuit, least significant net first.
struct ExportedGroup {
  std::string name;
  GroupRole role = GroupRole::input;
  std::vector<std::string> nets;
};

struct Instance {
  GateKind kind;
  std::vector<Binding> bindings;
};

// Structural description: gate instances wired by net name.
struct Netlist {
  std::vector<Instance> instances;
  std::vector<ExportedGroup> exported;
};

// A fused circuit.  `parts` keeps, per gate instance, the node index of each
// of its terminals so the Boolean relation can be recomputed gate by gate.
struct ComposedCircuit {
  struct PlacedGate {
    GateKind kind;
    StateSet valid_states;
    std::vector<std::size_t> nodes;  // terminal k -> node index
  };

  Hamiltonian hamiltonian;
  std::map<std::string, std::size_t> net_map;
  std::vector<std::string> group_order;
  std::map<std::string, std::vector<std::size_t>> groups;
  std::map<std::string, GroupRole> group_roles;
  std::vector<PlacedGate> placed;

  std::size_t size() const { return hamiltonian.size(); }

  const std::vector<std::size_t>& group(const std::string& name) const {
    auto it = groups.find(name);
    if (it == groups.end()) throw std::out_of_range("circuit has no terminal group '" + name + "'");
    return it->second;
  }

  bool has_group(const std::string& name) const { return groups.count(name) != 0; }

  std::vector<TerminalGroup> terminal_groups() const {
    std::vector<TerminalGroup> out;
    for (const auto& name : group_order) out.push_back({name, groups.at(name)});
    return out;
  }

  // All node assignments in which every placed gate sees one of its valid
  // states.  Backtracking over nodes in index order.
  StateSet valid_states(std::size_t max_nodes = 24) const {
    const std::size_t n = size();
    if (n > max_nodes) throw std::length_error("circuit too large to enumerate its relation");
    // Gates become checkable once their highest-index node is assigned.
    std::vector<std::vector<std::size_t>> ready(n);
    for (std::size_t g = 0; g < placed.size(); ++g) {
      ready[*std::max_element(placed[g].nodes.begin(), placed[g].nodes.end())].push_back(g);
    }
    StateSet out;
    std::vector<int> m(n, -1);
    auto rec = [&](auto&& self, std::size_t i) -> void {
      if (i == n) {
        out.insert(m);
        return;
      }
      for (int v : {-1, +1}) {
        m[i] = v;
        bool ok = true;
        for (std::size_t g : ready[i]) {
          std::vector<int> local;
          for (std::size_t node : placed[g].nodes) local.push_back(m[node]);
          if (!placed[g].valid_states.count(local)) {
            ok = false;
            break;
          }
        }
        if (ok) self(self, i + 1);
      }
    };
    rec(rec, 0);
    return out;
  }
};

inline std::string to_string(GroupRole r) { return r == GroupRole::input ? "input" : "output"; }

// Sums gate Hamiltonians over shared nets.  Nets are numbered in order of
// first appearance (instances in order, terminals in gate order).
inline ComposedCircuit fuse(const std::vector<Part>& parts,
                            const std::vector<ExportedGroup>& exported = {}) {
  if (parts.empty()) throw std::invalid_argument("cannot fuse an empty part list");
  ComposedCircuit c;
  std::vector<std::string> net_names;
  // Resolve each part's terminal -> net, rejecting double bindings.
  std::vector<std::vector<std::size_t>> part_nodes;
  std::map<std::string, std::vector<std::pair<std::size_t, std::size_t>>> net_users;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& g = parts[p].gate;
    std::vector<std::string> bound(g.size());
    for (const auto& b : parts[p].bindings) {
      const std::size_t t = g.terminal_index(b.terminal);
      if (b.net.empty()) throw std::invalid_argument("empty net name on " + b.terminal);
      if (!bound[t].empty() && bound[t] != b.net) {
        throw std::invalid_argument("instance " + std::to_string(p) + " (" + to_string(g.kind) +
                                    "): terminal " + b.terminal + " bound to both '" + bound[t] +
                                    "' and '" + b.net + "'");
      }
      bound[t] = b.net;
    }
    std::vector<std::size_t> nodes;
    for (std::size_t t = 0; t < g.size(); ++t) {
      if (bound[t].empty()) {
        throw std::invalid_argument("instance " + std::to_string(p) + " (" + to_string(g.kind) +
                                    "): terminal " + g.terminals[t].name + " is unbound");
      }
      auto [it, inserted] = c.net_map.emplace(bound[t], net_names.size());
      if (inserted) net_names.push_back(bound[t]);
      nodes.push_back(it->second);
      net_users[bound[t]].emplace_back(p, t);
    }
    std::set<std::size_t> distinct(nodes.begin(), nodes.end());
    if (distinct.size() != nodes.size()) {
      throw std::invalid_argument("instance " + std::to_string(p) +
                                  " connects two of its own terminals to one net");
    }
    part_nodes.push_back(std::move(nodes));
  }
  // A net may be driven by at most one gate output.
  for (const auto& [net, users] : net_users) {
    std::size_t driven = 0;
    for (auto [p, t] : users) {
      if (parts[p].gate.terminals[t].role != TerminalRole::input) ++driven;
    }
    if (driven > 1) throw std::invalid_argument("net '" + net + "' joins more than one gate output");
  }

  const std::size_t n = net_names.size();
  std::vector<long long> h(n, 0);
  std::vector<std::vector<long long>> J(n, std::vector<long long>(n, 0));
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& G = parts[p].gate.hamiltonian;
    const auto& nodes = part_nodes[p];
    for (std::size_t a = 0; a < nodes.size(); ++a) {
      h[nodes[a]] += G.h(a);
      for (std::size_t b = 0; b < nodes.size(); ++b) J[nodes[a]][nodes[b]] += G.J(a, b);
    }
    c.placed.push_back({parts[p].gate.kind, parts[p].gate.valid_states, nodes});
  }
  long long widest = 0;
  for (std::size_t i = 0; i < n; ++i) {
    widest = std::max(widest, std::abs(h[i]));
    for (std::size_t j = 0; j < n; ++j) widest = std::max(widest, std::abs(J[i][j]));
  }
  std::vector<int> hi(h.begin(), h.end());
  std::vector<std::vector<int>> Ji(n);
  for (std::size_t i = 0; i < n; ++i) Ji[i].assign(J[i].begin(), J[i].end());
  c.hamiltonian = Hamiltonian(net_names, std::move(hi), std::move(Ji), signed_bits_for(widest));

  for (const auto& grp : exported) {
    if (c.groups.count(grp.name)) throw std::invalid_argument("duplicate group '" + grp.name + "'");
    if (grp.nets.empty()) throw std::invalid_argument("group '" + grp.name + "' has no nets");
    std::vector<std::size_t> nodes;
    for (const auto& net : grp.nets) {
      auto it = c.net_map.find(net);
      if (it == c.net_map.end()) {
        throw std::invalid_argument("exported group '" + grp.name + "' names dangling net '" + net +
                                    "'");
      }
      nodes.push_back(it->second);
    }
    c.group_order.push_back(grp.name);
    c.groups[grp.name] = std::move(nodes);
    c.group_roles[grp.name] = grp.role;
  }
  return c;
}

inline ComposedCircuit compile(const Netlist& netlist) {
  if (netlist.instances.empty()) throw std::invalid_argument("netlist has no instances");
  std::vector<Part> parts;
  parts.reserve(netlist.instances.size());
  for (const auto& inst : netlist.instances) parts.push_back({gate(inst.kind), inst.bindings});
  return fuse(parts, netlist.exported);
}

// Single catalog gate as a circuit, one group per terminal.
inline ComposedCircuit gate_circuit(GateKind kind) {
  const GateSpec g = gate(kind);
  Netlist nl;
  Instance inst{kind, {}};
  for (const auto& t : g.terminals) {
    inst.bindings.push_back({t.name, t.name});
    nl.exported.push_back({t.name, t.role == TerminalRole::input ? GroupRole::input : GroupRole::output,
                           {t.name}});
  }
  nl.instances.push_back(inst);
  return compile(nl);
}

// n x n unsigned array multiplier: n^2 AND partial products reduced by
// rows of ripple-carry adders (row 1 starts and ends with a half adder,
// later rows start with one).  3n^2 nodes.  Groups A, B (n bits), P (2n
// bits; 1 bit when n == 1).
inline Netlist multiplier_netlist(int n) {
  if (n < 1) throw std::invalid_argument("multiplier width must be >= 1");
  Netlist nl;
  const auto a = [](int i) { return "a" + std::to_string(i); };
  const auto b = [](int i) { return "b" + std::to_string(i); };
  const auto pp = [](int k, int j) { return "pp" + std::to_string(k) + "_" + std::to_string(j); };
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      nl.instances.push_back({GateKind::AND, {{"A", a(j)}, {"B", b(k)}, {"Y", pp(k, j)}}});
    }
  }
  std::vector<std::string> product{pp(0, 0)};
  std::vector<std::string> prev;
  for (int j = 0; j < n; ++j) prev.push_back(pp(0, j));
  std::string prev_top;  // carry out of the previous row
  for (int k = 1; k < n; ++k) {
    std::vector<std::string> cur;
    std::string carry;
    for (int j = 0; j < n; ++j) {
      const std::string x = pp(k, j);
      const std::string y = j + 1 < n ? prev[j + 1] : prev_top;
      const std::string s = "s" + std::to_string(k) + "_" + std::to_string(j);
      const std::string co = "c" + std::to_string(k) + "_" + std::to_string(j);
      std::vector<std::string> ins{x};
      if (!y.empty()) ins.push_back(y);
      if (!carry.empty()) ins.push_back(carry);
      if (ins.size() == 2) {
        nl.instances.push_back({GateKind::HA, {{"A", ins[0]}, {"B", ins[1]}, {"S", s}, {"C", co}}});
      } else {
        nl.instances.push_back(
            {GateKind::FA, {{"A", ins[0]}, {"B", ins[1]}, {"CIN", ins[2]}, {"S", s}, {"COUT", co}}});
      }
      cur.push_back(s);
      carry = co;
    }
    product.push_back(cur[0]);
    prev = std::move(cur);
    prev_top = carry;
  }
  if (n > 1) {
    for (int j = 1; j < n; ++j) product.push_back(prev[j]);
    product.push_back(prev_top);
  }
  ExportedGroup ga{"A", GroupRole::input, {}}, gb{"B", GroupRole::input, {}};
  for (int i = 0; i < n; ++i) {
    ga.nets.push_back(a(i));
    gb.nets.push_back(b(i));
  }
  nl.exported = {ga, gb, {"P", GroupRole::output, product}};
  return nl;
}

inline ComposedCircuit build_multiplier(int n) { return compile(multiplier_netlist(n)); }

// n-bit ripple-carry adder: HA at bit 0, FA above, carry chained.  4n nodes.
inline Netlist rca_netlist(int n) {
  if (n < 1) throw std::invalid_argument("adder width must be >= 1");
  Netlist nl;
  ExportedGroup ga{"A", GroupRole::input, {}}, gb{"B", GroupRole::input, {}},
      gs{"S", GroupRole::output, {}};
  std::string carry;
  for (int k = 0; k < n; ++k) {
    const auto id = std::to_string(k);
    const std::string co = "c" + id;
    if (k == 0) {
      nl.instances.push_back(
          {GateKind::HA, {{"A", "a" + id}, {"B", "b" + id}, {"S", "s" + id}, {"C", co}}});
    } else {
      nl.instances.push_back({GateKind::FA,
                              {{"A", "a" + id},
                               {"B", "b" + id},
                               {"CIN", carry},
                               {"S", "s" + id},
                               {"COUT", co}}});
    }
    ga.nets.push_back("a" + id);
    gb.nets.push_back("b" + id);
    gs.nets.push_back("s" + id);
    carry = co;
  }
  nl.exported = {ga, gb, gs, {"Cout", GroupRole::output, {carry}}};
  return nl;
}

inline ComposedCircuit build_rca(int n) { return compile(rca_netlist(n)); }

// --- netlist JSON -------------------------------------------------------
//
// {"instances": [{"kind": "AND", "terminals": {"A": "x", "B": "y", "Y": "z"}}, ...],
//  "exported":  [{"name": "P", "role": "output", "nets": ["z"]}, ...]}

inline nlohmann::json to_json(const Netlist& nl) {
  nlohmann::json j;
  j["instances"] = nlohmann::json::array();
  for (const auto& inst : nl.instances) {
    nlohmann::json t = nlohmann::json::object();
    for (const auto& b : inst.bindings) t[b.terminal] = b.net;
    j["instances"].push_back({{"kind", to_string(inst.kind)}, {"terminals", t}});
  }
  j["exported"] = nlohmann::json::array();
  for (const auto& g : nl.exported) {
    j["exported"].push_back({{"name", g.name}, {"role", to_string(g.role)}, {"nets", g.nets}});
  }
  return j;
}

inline Netlist netlist_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("instances")) {
    throw std::invalid_argument("netlist: missing 'instances' section");
  }
  Netlist nl;
  std::size_t idx = 0;
  for (const auto& inst : j.at("instances")) {
    const std::string where = "netlist: instances[" + std::to_string(idx++) + "]";
    if (!inst.contains("kind") || !inst.contains("terminals")) {
      throw std::invalid_argument(where + " needs 'kind' and 'terminals'");
    }
    Instance in{parse_gate_kind(inst.at("kind").get<std::string>()), {}};
    for (const auto& [term, net] : inst.at("terminals").items()) {
      if (!net.is_string()) throw std::invalid_argument(where + ": terminal " + term + " net must be a string");
      in.bindings.push_back({term, net.get<std::string>()});
    }
    nl.instances.push_back(std::move(in));
  }
  if (j.contains("exported")) {
    for (const auto& g : j.at("exported")) {
      ExportedGroup eg;
      eg.name = g.at("name").get<std::string>();
      const std::string role = g.value("role", "input");
      if (role == "input") {
        eg.role = GroupRole::input;
      } else if (role == "output") {
        eg.role = GroupRole::output;
      } else {
        throw std::invalid_argument("netlist: group '" + eg.name + "' has unknown role '" + role + "'");
      }
      eg.nets = g.at("nets").get<std::vector<std::string>>();
      nl.exported.push_back(std::move(eg));
    }
  }
  return nl;
}

inline Netlist load_netlist(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return netlist_from_json(j);
}

}  // namespace invlogic
