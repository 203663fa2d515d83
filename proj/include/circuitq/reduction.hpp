#pragma once

// Star-mesh network reduction: admittance between node pairs and voltage
// transfer functions between two-terminal elements.

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "circuitq/constants.hpp"
#include "circuitq/error.hpp"
#include "circuitq/netlist.hpp"
#include "circuitq/symbolic/expression.hpp"

namespace circuitq {

using symbolic::Expression;

inline Expression omega_symbol() { return Expression::symbol(symbolic::frequency_symbol_name()); }

/// Inductance (L, J), capacitance or resistance of an element as an expression.
inline Expression element_value_expression(const ReducedElement& e) {
  Expression v = e.value.is_symbol() ? Expression::symbol(e.value.name()) : Expression(e.value.number());
  if (e.value.energy_mode) {
    constexpr double k = PhysicalConstants::phi0 * PhysicalConstants::phi0 / PhysicalConstants::h;
    v = Expression(k) / v;
  }
  return v;
}

/// Admittance of one element: i C w, 1/(i L w) or 1/R.
inline Expression element_admittance(const ReducedElement& e) {
  const Expression i{symbolic::complex{0.0, 1.0}};
  const Expression v = element_value_expression(e);
  switch (e.kind) {
    case ComponentKind::Capacitor: return i * v * omega_symbol();
    case ComponentKind::Inductor:
    case ComponentKind::Junction: return Expression(1.0) / (i * v * omega_symbol());
    case ComponentKind::Resistor: return Expression(1.0) / v;
    default: throw CircuitError("not_an_element", "wires and grounds carry no admittance");
  }
}

/// Undirected graph with one merged admittance per node pair.
class AdmittanceGraph {
 public:
  using Edge = std::pair<int, int>;  // first < second

  static Edge key(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

  void add_node(int n) { nodes_.insert(n); }
  const std::set<int>& nodes() const { return nodes_; }
  const std::map<Edge, Expression>& edges() const { return edges_; }
  /// Source element ids that were merged into each edge (direct members only).
  const std::map<Edge, std::vector<std::size_t>>& provenance() const { return provenance_; }

  bool has_edge(int a, int b) const { return edges_.count(key(a, b)) != 0; }
  const Expression& edge(int a, int b) const {
    auto it = edges_.find(key(a, b));
    if (it == edges_.end()) throw CircuitError("no_edge", "no admittance between the given nodes");
    return it->second;
  }
  /// Edge admittance, or literal zero if absent.
  Expression edge_or_zero(int a, int b) const {
    auto it = edges_.find(key(a, b));
    return it == edges_.end() ? Expression(0.0) : it->second;
  }

  /// Adds y in parallel with any existing edge between a and b.
  void add_parallel(int a, int b, const Expression& y) {
    if (a == b) throw CircuitError("self_loop", "admittance edge with identical endpoints");
    add_node(a);
    add_node(b);
    auto [it, inserted] = edges_.emplace(key(a, b), y);
    if (!inserted) it->second = it->second + y;
  }
  void add_provenance(int a, int b, std::size_t element_id) { provenance_[key(a, b)].push_back(element_id); }

  std::vector<int> neighbors(int n) const {
    std::vector<int> out;
    for (const auto& [e, y] : edges_) {
      if (e.first == n) out.push_back(e.second);
      else if (e.second == n) out.push_back(e.first);
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  std::size_t degree(int n) const { return neighbors(n).size(); }

  void remove_node(int n) {
    for (auto it = edges_.begin(); it != edges_.end();) {
      if (it->first.first == n || it->first.second == n) it = edges_.erase(it);
      else ++it;
    }
    nodes_.erase(n);
  }

 private:
  std::set<int> nodes_;
  std::map<Edge, Expression> edges_;
  std::map<Edge, std::vector<std::size_t>> provenance_;
};

/// Merges parallel components into single edges. Junctions enter as their
/// linear inductance when `linearize_junctions`, otherwise they are left out.
inline AdmittanceGraph group_parallel(const ReducedCircuit& rc, bool linearize_junctions = true) {
  AdmittanceGraph g;
  for (int n = 0; n < rc.node_count; ++n) g.add_node(n);
  for (const auto& e : rc.elements) {
    if (e.kind == ComponentKind::Junction && !linearize_junctions) continue;
    g.add_parallel(e.node_minus, e.node_plus, element_admittance(e));
    g.add_provenance(e.node_minus, e.node_plus, e.id);
  }
  return g;
}

/// Removes `node`, connecting every neighbor pair (X, Y) with Y_X Y_Y / sum Y_M.
inline AdmittanceGraph star_mesh_eliminate(AdmittanceGraph g, int node) {
  if (!g.nodes().count(node)) throw CircuitError("unknown_node", "node not in graph");
  const std::vector<int> nb = g.neighbors(node);
  std::vector<Expression> ys;
  for (int m : nb) ys.push_back(g.edge(node, m));
  if (nb.size() >= 2) {
    const Expression total = Expression::add(ys);
    if (total.is_zero())
      throw AnalysisError("degenerate_star", "star admittances sum to zero at node " + std::to_string(node));
    for (std::size_t x = 0; x < nb.size(); ++x)
      for (std::size_t y = x + 1; y < nb.size(); ++y) g.add_parallel(nb[x], nb[y], ys[x] * ys[y] / total);
  }
  g.remove_node(node);
  return g;
}

/// Eliminates every node outside `keep`, least-connected first (ties by
/// lowest index), recomputing degrees after each step.
inline AdmittanceGraph reduce_to(AdmittanceGraph g, const std::set<int>& keep) {
  for (int k : keep)
    if (!g.nodes().count(k)) throw CircuitError("unknown_node", "kept node not in graph");
  while (g.nodes().size() > keep.size()) {
    int best = -1;
    std::size_t best_degree = 0;
    for (int n : g.nodes()) {
      if (keep.count(n)) continue;
      const std::size_t d = g.degree(n);
      if (best < 0 || d < best_degree) {
        best = n;
        best_degree = d;
      }
    }
    g = star_mesh_eliminate(std::move(g), best);
  }
  return g;
}

inline Expression admittance_between(const AdmittanceGraph& g, int a, int b) {
  if (a == b) throw CircuitError("same_node", "admittance needs two distinct nodes");
  const AdmittanceGraph r = reduce_to(g, {a, b});
  if (!r.has_edge(a, b)) throw CircuitError("disconnected", "nodes are not connected");
  return r.edge(a, b);
}

/// Admittance seen between canonical nodes a and b of the linearized circuit.
inline Expression admittance_between(const ReducedCircuit& rc, int a, int b) {
  return admittance_between(group_parallel(rc), a, b);
}

/// Admittance seen across an element (element included).
inline Expression admittance_across(const ReducedCircuit& rc, std::size_t element_id) {
  const auto& e = rc.element(element_id);
  return admittance_between(rc, e.node_minus, e.node_plus);
}

namespace detail {

/// Randomized identity test for a symbolic expression: true when |e| is
/// below rel * scale at three random bindings of omega and all parameters.
inline bool vanishes_identically(const Expression& e, const Expression& scale, double rel = 1e-12) {
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> dist(0.5, 2.0);
  std::set<std::string> names = e.symbols();
  for (const auto& s : scale.symbols()) names.insert(s);
  for (int trial = 0; trial < 3; ++trial) {
    std::map<std::string, symbolic::complex> values;
    for (const auto& n : names) values[n] = dist(rng);
    if (!(std::abs(e.evaluate(values)) <= rel * std::abs(scale.evaluate(values)))) return false;
  }
  return true;
}

}  // namespace detail

/// V_target / V_ref for a voltage impressed across `ref`; element voltages
/// are taken from node_minus to node_plus.
inline Expression transfer_function(const ReducedCircuit& rc, std::size_t ref, std::size_t target) {
  if (ref == target) return Expression(1.0);
  const auto& r = rc.element(ref);
  const auto& j = rc.element(target);
  const int rp = r.node_plus, rm = r.node_minus, jp = j.node_plus, jm = j.node_minus;

  // Same node pair: identical or reversed voltage.
  if (std::set<int>{rp, rm} == std::set<int>{jp, jm}) return Expression(jp == rp ? 1.0 : -1.0);

  const AdmittanceGraph g = reduce_to(group_parallel(rc), {rp, rm, jp, jm});

  if (rp == jp || rp == jm || rm == jp || rm == jm) {
    // Shared node c; ref spans (a, c), target spans (t, c).
    const int c = (rp == jp || rp == jm) ? rp : rm;
    const int a = (c == rp) ? rm : rp;
    const int t = (c == jp) ? jm : jp;
    const Expression y_series = g.edge_or_zero(a, t);
    if (y_series.is_zero()) return Expression(0.0);
    const Expression y_shunt = g.edge_or_zero(t, c);
    const Expression big_a = Expression(1.0) + y_shunt / y_series;
    // T for V(a)-V(c) -> V(t)-V(c); flip for each element pointing into c.
    const double sign = ((a == rp) ? 1.0 : -1.0) * ((t == jp) ? 1.0 : -1.0);
    return Expression(sign) / big_a;
  }

  const Expression ya = g.edge_or_zero(rp, jp);
  const Expression yb = g.edge_or_zero(rm, jp);
  const Expression yc = g.edge_or_zero(rp, jm);
  const Expression yd = g.edge_or_zero(rm, jm);
  const Expression yj = g.edge_or_zero(jp, jm);
  const Expression cross = ya * yd - yb * yc;
  if (cross.is_zero() || detail::vanishes_identically(cross, ya * yd + yb * yc))
    throw AnalysisError("bridge_singularity",
                        "transfer function between elements " + std::to_string(ref) + " and " +
                            std::to_string(target) +
                            " vanishes identically: the network is a balanced bridge, which makes the "
                            "two-port cascade exactly 0 and breaks the analysis. Break the circuit "
                            "symmetry slightly (e.g. perturb one component value).");
  const Expression a_tilde = (ya + yb) * (yc + yd) / cross;
  const Expression b_tilde = (ya + yb + yc + yd) / cross;
  return Expression(1.0) / (a_tilde + b_tilde * yj);
}

/// Chain (ABCD) matrix from the ref element's port to the target element's
/// port: V1 = A V2 + B I2, I1 = C V2 + D I2, with I2 leaving port 2.
/// Every element, including both port elements, is part of the network.
struct TwoPort {
  Expression A, B, C, D;
};

inline TwoPort two_port(const ReducedCircuit& rc, std::size_t ref, std::size_t target) {
  const auto& r = rc.element(ref);
  const auto& j = rc.element(target);
  const int rp = r.node_plus, rm = r.node_minus, jp = j.node_plus, jm = j.node_minus;
  if (std::set<int>{rp, rm} == std::set<int>{jp, jm})
    throw CircuitError("degenerate_two_port", "ports share both nodes");
  const std::set<int> keep{rp, rm, jp, jm};
  const AdmittanceGraph g = reduce_to(group_parallel(rc), keep);

  // Nodal matrix over the kept nodes with rm grounded. Node voltages are
  // x = M v with v = (V1, V2[, Vcm]), V1 = V(rp), V2 = V(jp) - V(jm); the
  // common-mode V(jm) is a free variable only when all four nodes differ.
  std::vector<int> nodes;
  for (int n : keep)
    if (n != rm) nodes.push_back(n);
  auto idx = [&](int n) { return static_cast<int>(std::find(nodes.begin(), nodes.end(), n) - nodes.begin()); };
  const int k = static_cast<int>(nodes.size());
  std::vector<std::vector<Expression>> y(k, std::vector<Expression>(k, Expression(0.0)));
  for (const auto& [e, adm] : g.edges()) {
    const int a = e.first, b = e.second;
    if (a != rm) y[idx(a)][idx(a)] = y[idx(a)][idx(a)] + adm;
    if (b != rm) y[idx(b)][idx(b)] = y[idx(b)][idx(b)] + adm;
    if (a != rm && b != rm) {
      y[idx(a)][idx(b)] = y[idx(a)][idx(b)] - adm;
      y[idx(b)][idx(a)] = y[idx(b)][idx(a)] - adm;
    }
  }
  const int nv = k == 3 ? 3 : 2;
  std::vector<std::vector<double>> m(k, std::vector<double>(nv, 0.0));
  m[idx(rp)][0] = 1.0;
  if (nv == 3) {
    m[idx(jp)][1] = 1.0;
    m[idx(jp)][2] = 1.0;
    m[idx(jm)][2] = 1.0;
  } else if (jm == rm) {
    m[idx(jp)][1] = 1.0;
  } else if (jp == rm) {
    m[idx(jm)][1] = -1.0;
  } else if (jm == rp) {
    m[idx(jp)][0] = 1.0;
    m[idx(jp)][1] = 1.0;
  } else {  // jp == rp
    m[idx(jm)][0] = 1.0;
    m[idx(jm)][1] = -1.0;
  }
  // Port admittance matrix Mt Y M, then the common mode (zero net current) eliminated.
  std::vector<std::vector<Expression>> p(nv, std::vector<Expression>(nv, Expression(0.0)));
  for (int a = 0; a < nv; ++a)
    for (int b = 0; b < nv; ++b) {
      std::vector<Expression> terms;
      for (int i = 0; i < k; ++i)
        for (int l = 0; l < k; ++l)
          if (m[i][a] != 0.0 && m[l][b] != 0.0 && !y[i][l].is_zero())
            terms.push_back(Expression(m[i][a] * m[l][b]) * y[i][l]);
      p[a][b] = Expression::add(std::move(terms));
    }
  Expression y11 = p[0][0], y12 = p[0][1], y21 = p[1][0], y22 = p[1][1];
  if (nv == 3) {
    if (p[2][2].is_zero()) throw AnalysisError("degenerate_two_port", "common-mode admittance vanishes");
    y11 = y11 - p[0][2] * p[2][0] / p[2][2];
    y12 = y12 - p[0][2] * p[2][1] / p[2][2];
    y21 = y21 - p[1][2] * p[2][0] / p[2][2];
    y22 = y22 - p[1][2] * p[2][1] / p[2][2];
  }
  if (y21.is_zero()) throw AnalysisError("degenerate_two_port", "ports are decoupled");
  const Expression det = y11 * y22 - y12 * y21;
  return TwoPort{-y22 / y21, Expression(-1.0) / y21, -det / y21, -y11 / y21};
}

}  // namespace circuitq
