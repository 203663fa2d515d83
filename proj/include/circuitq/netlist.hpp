#pragma once

// Lumped-element circuit descriptions: the netlist text format, structural
// validation, and wire/ground elimination.
//
// Grammar (one statement per line, `#` starts a comment):
//
//   J|L|C|R  node- node+  value [E] ["label"] [@ x1,y1 x2,y2]
//   W        a b                             [@ x1,y1 x2,y2]
//   G        a                               [@ x,y]
//
// `value` is either a symbol name ([A-Za-z_][A-Za-z0-9_]*) or a positive
// number with an optional SI prefix (f p n u m k M G T) and optional unit
// (H, F, Ohm, Hz). Junction values are inductances in H unless the `E` flag
// (or the Hz unit) marks them as Josephson energies in Hz.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "circuitq/constants.hpp"
#include "circuitq/error.hpp"

namespace circuitq {

enum class ComponentKind { Junction, Inductor, Capacitor, Resistor, Wire, Ground };

inline char kind_letter(ComponentKind k) {
  switch (k) {
    case ComponentKind::Junction: return 'J';
    case ComponentKind::Inductor: return 'L';
    case ComponentKind::Capacitor: return 'C';
    case ComponentKind::Resistor: return 'R';
    case ComponentKind::Wire: return 'W';
    case ComponentKind::Ground: return 'G';
  }
  return '?';
}

inline bool carries_value(ComponentKind k) {
  return k != ComponentKind::Wire && k != ComponentKind::Ground;
}

inline bool is_inductive(ComponentKind k) {
  return k == ComponentKind::Junction || k == ComponentKind::Inductor;
}

inline bool is_valid_symbol_name(std::string_view s) {
  if (s.empty()) return false;
  auto head = static_cast<unsigned char>(s.front());
  if (!(std::isalpha(head) || s.front() == '_')) return false;
  return std::all_of(s.begin() + 1, s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

/// A component value: a number in SI units or a named free parameter.
struct ValueSpec {
  std::variant<double, std::string> value = 0.0;
  /// Junction only: the value is a Josephson energy in Hz.
  bool energy_mode = false;

  static ValueSpec numeric(double v, bool energy = false) { return {v, energy}; }
  static ValueSpec symbol(std::string name, bool energy = false) {
    return {std::move(name), energy};
  }

  bool is_symbol() const { return std::holds_alternative<std::string>(value); }
  double number() const { return std::get<double>(value); }
  const std::string& name() const { return std::get<std::string>(value); }

  friend bool operator==(const ValueSpec&, const ValueSpec&) = default;
};

struct GridPoint {
  int x = 0;
  int y = 0;
  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

struct Component {
  ComponentKind kind = ComponentKind::Wire;
  std::string node_minus;
  /// Empty for Ground markers.
  std::string node_plus;
  std::optional<ValueSpec> value;
  std::optional<std::string> label;
  /// Schematic placement, ignored by analysis.
  std::vector<GridPoint> position;

  friend bool operator==(const Component&, const Component&) = default;
};

/// Parameter values keyed by symbol name.
using Bindings = std::map<std::string, double>;

/// Ordered component list plus the set of free parameters.
class Circuit {
 public:
  Circuit() = default;

  /// Validates per-component invariants and collects free parameters.
  explicit Circuit(std::vector<Component> components) : components_(std::move(components)) {
    validate();
  }

  const std::vector<Component>& components() const { return components_; }
  const std::set<std::string>& free_parameters() const { return free_parameters_; }
  PhysicalConstants constants() const { return {}; }

  friend bool operator==(const Circuit& a, const Circuit& b) {
    return a.components_ == b.components_;
  }

 private:
  void validate() {
    if (components_.empty()) throw CircuitError("no_components", "no components");
    bool has_capacitor = false;
    bool has_inductive = false;
    for (std::size_t i = 0; i < components_.size(); ++i) {
      const Component& c = components_[i];
      const std::string where = "component " + std::to_string(i) + " (" + kind_letter(c.kind) + ")";
      if (c.node_minus.empty()) throw CircuitError("invalid_component", where + ": missing node");
      if (c.kind == ComponentKind::Ground) {
        if (!c.node_plus.empty())
          throw CircuitError("invalid_component", where + ": ground takes one node");
      } else if (c.node_plus.empty()) {
        throw CircuitError("invalid_component", where + ": missing node");
      }
      if (carries_value(c.kind) != c.value.has_value())
        throw CircuitError("invalid_component", where + (carries_value(c.kind)
                                                             ? ": missing value"
                                                             : ": wire/ground carry no value"));
      if (!carries_value(c.kind)) continue;
      if (c.node_minus == c.node_plus)
        throw CircuitError("self_loop", where + ": both terminals on node " + c.node_minus);
      if (c.value->energy_mode && c.kind != ComponentKind::Junction)
        throw CircuitError("invalid_component", where + ": energy mode is junction-only");
      if (c.value->is_symbol()) {
        if (!is_valid_symbol_name(c.value->name()))
          throw CircuitError("invalid_component", where + ": bad symbol name");
        free_parameters_.insert(c.value->name());
      } else {
        const double v = c.value->number();
        if (!std::isfinite(v) || v <= 0.0)
          throw CircuitError("nonpositive_value", where + ": value must be positive and finite");
      }
      has_capacitor |= c.kind == ComponentKind::Capacitor;
      has_inductive |= is_inductive(c.kind);
    }
    if (!has_capacitor) throw CircuitError("no_capacitor", "circuit needs at least one capacitor");
    if (!has_inductive)
      throw CircuitError("no_inductive", "circuit needs at least one inductor or junction");
  }

  std::vector<Component> components_;
  std::set<std::string> free_parameters_;
};

namespace detail {

struct Token {
  std::string text;
  std::size_t column;  // 1-based
  bool quoted = false;
};

inline std::vector<Token> tokenize_line(std::string_view line, std::size_t line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (c == '#') break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '"') {
      const std::size_t end = line.find('"', i + 1);
      if (end == std::string_view::npos) throw ParseError(line_no, i + 1, "unterminated label");
      out.push_back({std::string(line.substr(i + 1, end - i - 1)), i + 1, true});
      i = end + 1;
      continue;
    }
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) && line[j] != '#' &&
           line[j] != '"')
      ++j;
    out.push_back({std::string(line.substr(i, j - i)), i + 1});
    i = j;
  }
  return out;
}

inline std::optional<double> si_prefix(char c) {
  switch (c) {
    case 'f': return 1e-15;
    case 'p': return 1e-12;
    case 'n': return 1e-9;
    case 'u': return 1e-6;
    case 'm': return 1e-3;
    case 'k': return 1e3;
    case 'M': return 1e6;
    case 'G': return 1e9;
    case 'T': return 1e12;
    default: return std::nullopt;
  }
}

struct ParsedNumber {
  double value;
  std::string unit;
};

inline std::optional<ParsedNumber> parse_number(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr == s.data()) return std::nullopt;
  std::string_view rest(ptr, static_cast<std::size_t>(s.data() + s.size() - ptr));
  static constexpr std::array<std::string_view, 4> units{"Ohm", "Hz", "H", "F"};
  auto is_unit = [&](std::string_view u) {
    return u.empty() || std::find(units.begin(), units.end(), u) != units.end();
  };
  if (is_unit(rest)) return ParsedNumber{v, std::string(rest)};
  if (auto scale = si_prefix(rest.front()); scale && is_unit(rest.substr(1)))
    return ParsedNumber{v * *scale, std::string(rest.substr(1))};
  return std::nullopt;
}

inline std::optional<GridPoint> parse_point(std::string_view s) {
  const auto comma = s.find(',');
  if (comma == std::string_view::npos) return std::nullopt;
  GridPoint p;
  auto a = std::from_chars(s.data(), s.data() + comma, p.x);
  auto b = std::from_chars(s.data() + comma + 1, s.data() + s.size(), p.y);
  if (a.ec != std::errc() || a.ptr != s.data() + comma || b.ec != std::errc() ||
      b.ptr != s.data() + s.size())
    return std::nullopt;
  return p;
}

inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

inline bool is_integer_token(std::string_view s) {
  if (s.empty()) return false;
  std::size_t start = (s.front() == '-') ? 1 : 0;
  if (start == s.size()) return false;
  return std::all_of(s.begin() + static_cast<std::ptrdiff_t>(start), s.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

}  // namespace detail

/// Natural ordering of node tokens: integers by value first, then other
/// tokens lexicographically.
inline bool node_token_less(const std::string& a, const std::string& b) {
  const bool ia = detail::is_integer_token(a);
  const bool ib = detail::is_integer_token(b);
  if (ia != ib) return ia;
  if (ia) {
    const bool na = a.front() == '-';
    const bool nb = b.front() == '-';
    if (na != nb) return na;
    std::string_view da = std::string_view(a).substr(na ? 1 : 0);
    std::string_view db = std::string_view(b).substr(nb ? 1 : 0);
    while (da.size() > 1 && da.front() == '0') da.remove_prefix(1);
    while (db.size() > 1 && db.front() == '0') db.remove_prefix(1);
    const bool less_mag = da.size() != db.size() ? da.size() < db.size() : da < db;
    const bool greater_mag = da.size() != db.size() ? da.size() > db.size() : da > db;
    if (less_mag || greater_mag) return na ? greater_mag : less_mag;
    return a < b;
  }
  return a < b;
}

/// Parses netlist text. Components keep file order.
inline Circuit parse_netlist(std::string_view text) {
  std::vector<Component> comps;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = eol + 1;
    ++line_no;
    auto toks = detail::tokenize_line(line, line_no);
    if (toks.empty()) {
      if (eol == text.size()) break;
      continue;
    }

    Component c;
    const auto& head = toks[0];
    if (head.quoted || head.text.size() != 1)
      throw ParseError(line_no, head.column, "unknown component kind '" + head.text + "'");
    switch (std::toupper(static_cast<unsigned char>(head.text[0]))) {
      case 'J': c.kind = ComponentKind::Junction; break;
      case 'L': c.kind = ComponentKind::Inductor; break;
      case 'C': c.kind = ComponentKind::Capacitor; break;
      case 'R': c.kind = ComponentKind::Resistor; break;
      case 'W': c.kind = ComponentKind::Wire; break;
      case 'G': c.kind = ComponentKind::Ground; break;
      default: throw ParseError(line_no, head.column, "unknown component kind '" + head.text + "'");
    }

    std::size_t i = 1;
    auto expect_node = [&](const char* what) -> std::string {
      if (i >= toks.size() || toks[i].quoted || toks[i].text == "@")
        throw ParseError(line_no, i < toks.size() ? toks[i].column : line.size() + 1,
                         std::string("expected ") + what);
      return toks[i++].text;
    };
    c.node_minus = expect_node("node");
    if (c.kind != ComponentKind::Ground) c.node_plus = expect_node("node");

    if (carries_value(c.kind)) {
      if (i >= toks.size() || toks[i].quoted || toks[i].text == "@")
        throw ParseError(line_no, i < toks.size() ? toks[i].column : line.size() + 1,
                         "expected value");
      const auto& vt = toks[i++];
      ValueSpec spec;
      bool energy_from_unit = false;
      std::string unit;
      if (is_valid_symbol_name(vt.text)) {
        spec = ValueSpec::symbol(vt.text);
      } else if (auto num = detail::parse_number(vt.text)) {
        if (!std::isfinite(num->value) || num->value <= 0.0)
          throw ParseError(line_no, vt.column, "value must be positive and finite");
        spec = ValueSpec::numeric(num->value);
        unit = num->unit;
        const char* expected = nullptr;
        switch (c.kind) {
          case ComponentKind::Inductor: expected = "H"; break;
          case ComponentKind::Capacitor: expected = "F"; break;
          case ComponentKind::Resistor: expected = "Ohm"; break;
          default: break;
        }
        if (c.kind == ComponentKind::Junction) {
          if (!unit.empty() && unit != "H" && unit != "Hz")
            throw ParseError(line_no, vt.column, "junction unit must be H or Hz");
          energy_from_unit = unit == "Hz";
        } else if (!unit.empty() && unit != expected) {
          throw ParseError(line_no, vt.column,
                           std::string("unit '") + unit + "' does not match component kind");
        }
      } else {
        throw ParseError(line_no, vt.column, "bad value '" + vt.text + "'");
      }
      if (i < toks.size() && !toks[i].quoted && toks[i].text == "E") {
        if (c.kind != ComponentKind::Junction)
          throw ParseError(line_no, toks[i].column, "E flag is only valid on junctions");
        if (unit == "H")
          throw ParseError(line_no, toks[i].column, "E flag conflicts with unit H");
        spec.energy_mode = true;
        ++i;
      }
      spec.energy_mode = spec.energy_mode || energy_from_unit;
      c.value = spec;
    }

    if (i < toks.size() && toks[i].quoted) c.label = toks[i++].text;

    if (i < toks.size() && !toks[i].quoted && toks[i].text == "@") {
      ++i;
      const std::size_t max_points = c.kind == ComponentKind::Ground ? 1 : 2;
      while (i < toks.size()) {
        auto p = toks[i].quoted ? std::nullopt : detail::parse_point(toks[i].text);
        if (!p) throw ParseError(line_no, toks[i].column, "bad position '" + toks[i].text + "'");
        if (c.position.size() == max_points)
          throw ParseError(line_no, toks[i].column, "too many positions");
        c.position.push_back(*p);
        ++i;
      }
      if (c.position.empty()) throw ParseError(line_no, line.size() + 1, "expected position");
    }
    if (i < toks.size())
      throw ParseError(line_no, toks[i].column, "unexpected token '" + toks[i].text + "'");

    if (carries_value(c.kind) && c.node_minus == c.node_plus)
      throw ParseError(line_no, head.column, "component connects node " + c.node_minus + " to itself");
    comps.push_back(std::move(c));
    if (eol == text.size()) break;
  }
  if (comps.empty()) throw CircuitError("no_components", "no components");
  return Circuit(std::move(comps));
}

inline std::string serialize_component(const Component& c) {
  std::string s(1, kind_letter(c.kind));
  s += ' ';
  s += c.node_minus;
  if (c.kind != ComponentKind::Ground) {
    s += ' ';
    s += c.node_plus;
  }
  if (c.value) {
    s += ' ';
    s += c.value->is_symbol() ? c.value->name() : detail::format_double(c.value->number());
    if (c.value->energy_mode) s += " E";
  }
  if (c.label) s += " \"" + *c.label + "\"";
  if (!c.position.empty()) {
    s += " @";
    for (const auto& p : c.position) s += ' ' + std::to_string(p.x) + ',' + std::to_string(p.y);
  }
  return s;
}

/// Canonical text: one line per component, shortest round-trip numbers.
inline std::string serialize_netlist(const Circuit& c) {
  std::string out;
  for (const auto& comp : c.components()) {
    out += serialize_component(comp);
    out += '\n';
  }
  return out;
}

/// A valued component after wire/ground elimination.
struct ReducedElement {
  /// Index of the component in the source Circuit.
  std::size_t id = 0;
  ComponentKind kind = ComponentKind::Capacitor;
  int node_minus = 0;
  int node_plus = 0;
  ValueSpec value;

  friend bool operator==(const ReducedElement&, const ReducedElement&) = default;
};

struct ReducedCircuit {
  std::vector<ReducedElement> elements;
  int node_count = 0;
  /// Original node token -> canonical node index.
  std::map<std::string, int> node_map;
  /// Original tokens merged through Ground markers.
  std::set<std::string> ground_candidates;
  std::set<std::string> free_parameters;

  const ReducedElement& element(std::size_t id) const {
    for (const auto& e : elements)
      if (e.id == id) return e;
    throw CircuitError("unknown_element", "no element with id " + std::to_string(id));
  }
  bool has_element(std::size_t id) const {
    return std::any_of(elements.begin(), elements.end(), [&](const auto& e) { return e.id == id; });
  }

  friend bool operator==(const ReducedCircuit&, const ReducedCircuit&) = default;
};

namespace detail {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace detail

/// Merges nodes joined by wires and all ground-marked nodes, then relabels
/// groups 0..n-1 ordered by their smallest original token.
inline ReducedCircuit reduce_nodes(const Circuit& c) {
  std::vector<std::string> tokens;
  for (const auto& comp : c.components()) {
    tokens.push_back(comp.node_minus);
    if (comp.kind != ComponentKind::Ground) tokens.push_back(comp.node_plus);
  }
  std::sort(tokens.begin(), tokens.end(), node_token_less);
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  auto index_of = [&](const std::string& t) {
    return static_cast<std::size_t>(
        std::lower_bound(tokens.begin(), tokens.end(), t, node_token_less) - tokens.begin());
  };

  ReducedCircuit rc;
  detail::UnionFind uf(tokens.size());
  std::optional<std::size_t> first_ground;
  for (const auto& comp : c.components()) {
    if (comp.kind == ComponentKind::Wire) uf.unite(index_of(comp.node_minus), index_of(comp.node_plus));
    if (comp.kind == ComponentKind::Ground) {
      const std::size_t g = index_of(comp.node_minus);
      rc.ground_candidates.insert(comp.node_minus);
      if (first_ground) uf.unite(*first_ground, g);
      first_ground = g;
    }
  }

  // Tokens are sorted, so the first token seen for each root is its smallest.
  std::map<std::size_t, int> root_label;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::size_t r = uf.find(i);
    auto it = root_label.find(r);
    if (it == root_label.end()) it = root_label.emplace(r, static_cast<int>(root_label.size())).first;
    rc.node_map[tokens[i]] = it->second;
  }
  rc.node_count = static_cast<int>(root_label.size());

  for (std::size_t id = 0; id < c.components().size(); ++id) {
    const auto& comp = c.components()[id];
    if (!carries_value(comp.kind)) continue;
    ReducedElement e{id, comp.kind, rc.node_map.at(comp.node_minus), rc.node_map.at(comp.node_plus),
                     *comp.value};
    if (e.node_minus == e.node_plus)
      throw CircuitError("shorted_component", std::string("component ") + std::to_string(id) + " (" +
                                                  kind_letter(comp.kind) + ") is shorted by wires");
    if (e.value.is_symbol()) rc.free_parameters.insert(e.value.name());
    rc.elements.push_back(std::move(e));
  }

  // Only nodes touched by valued components take part in the analysis; a
  // wire-only island would already be a dangling node below.
  std::vector<int> endpoint_count(static_cast<std::size_t>(rc.node_count), 0);
  detail::UnionFind connectivity(static_cast<std::size_t>(rc.node_count));
  for (const auto& e : rc.elements) {
    ++endpoint_count[static_cast<std::size_t>(e.node_minus)];
    ++endpoint_count[static_cast<std::size_t>(e.node_plus)];
    connectivity.unite(static_cast<std::size_t>(e.node_minus), static_cast<std::size_t>(e.node_plus));
  }
  for (int n = 0; n < rc.node_count; ++n) {
    if (endpoint_count[static_cast<std::size_t>(n)] < 2) {
      std::string names;
      for (const auto& [tok, idx] : rc.node_map)
        if (idx == n) names += (names.empty() ? "" : ",") + tok;
      throw CircuitError("dangling_node", "node {" + names + "} connects to fewer than two components");
    }
    if (connectivity.find(static_cast<std::size_t>(n)) != 0)
      throw CircuitError("disconnected", "circuit graph is disconnected");
  }
  return rc;
}

/// Circuit whose node tokens are the canonical indices of `rc`.
inline Circuit to_circuit(const ReducedCircuit& rc) {
  std::vector<Component> comps;
  for (const auto& e : rc.elements) {
    Component c;
    c.kind = e.kind;
    c.node_minus = std::to_string(e.node_minus);
    c.node_plus = std::to_string(e.node_plus);
    c.value = e.value;
    comps.push_back(std::move(c));
  }
  return Circuit(std::move(comps));
}

/// Numeric value of a component after binding: H for L/J (energy-mode
/// junctions converted), F for C, Ohm for R.
inline double element_value(const ReducedElement& e, const Bindings& b) {
  double v = 0.0;
  if (e.value.is_symbol()) {
    auto it = b.find(e.value.name());
    if (it == b.end())
      throw BindingError("unbound_symbol", "parameter '" + e.value.name() + "' is not bound");
    v = it->second;
  } else {
    v = e.value.number();
  }
  if (!std::isfinite(v) || v <= 0.0)
    throw BindingError("nonpositive_value", "component " + std::to_string(e.id) +
                                                " value must be positive and finite");
  return e.value.energy_mode ? josephson_inductance_from_energy(v) : v;
}

}  // namespace circuitq
