#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "circuitq/error.hpp"

namespace circuitq::symbolic {

using complex = std::complex<double>;

/// Name of the angular-frequency variable. Not a valid netlist symbol, so it
/// cannot collide with a circuit parameter.
inline const std::string& frequency_symbol_name() {
  static const std::string name = "ω";
  return name;
}

/// Immutable expression DAG over complex constants and named symbols.
///
/// Construction folds constants, flattens nested sums and products, and
/// drops literal zeros and ones. Nothing else is canonicalized.
class Expression {
 public:
  enum class Kind { Constant, Symbol, Add, Mul, Div, Neg, IntPow };

  struct Node {
    Kind kind = Kind::Constant;
    complex value{};
    std::string name;
    std::vector<Expression> args;
    int exponent = 0;
  };

  Expression() : Expression(complex{0.0, 0.0}) {}
  Expression(complex c) : node_(make(Node{Kind::Constant, c, {}, {}, 0})) {}
  Expression(double c) : Expression(complex{c, 0.0}) {}

  static Expression symbol(std::string name) {
    Node n;
    n.kind = Kind::Symbol;
    n.name = std::move(name);
    return Expression(make(std::move(n)));
  }
  static Expression frequency() { return symbol(frequency_symbol_name()); }

  Kind kind() const { return node_->kind; }
  const Node& node() const { return *node_; }
  const void* id() const { return node_.get(); }
  const std::vector<Expression>& args() const { return node_->args; }

  bool is_constant() const { return kind() == Kind::Constant; }
  complex constant_value() const { return node_->value; }
  bool is_zero() const { return is_constant() && node_->value == complex{}; }
  bool is_one() const { return is_constant() && node_->value == complex{1.0, 0.0}; }

  friend Expression operator+(const Expression& a, const Expression& b) { return add({a, b}); }
  friend Expression operator-(const Expression& a, const Expression& b) { return add({a, -b}); }
  friend Expression operator*(const Expression& a, const Expression& b) { return mul({a, b}); }
  friend Expression operator/(const Expression& a, const Expression& b) { return divide(a, b); }
  Expression operator-() const {
    if (is_constant()) return Expression(-node_->value);
    if (kind() == Kind::Neg) return args()[0];
    Node n;
    n.kind = Kind::Neg;
    n.args = {*this};
    return Expression(make(std::move(n)));
  }
  Expression& operator+=(const Expression& o) { return *this = *this + o; }
  Expression& operator-=(const Expression& o) { return *this = *this - o; }
  Expression& operator*=(const Expression& o) { return *this = *this * o; }

  Expression pow(int exponent) const {
    if (exponent == 0) return Expression(1.0);
    if (exponent == 1) return *this;
    if (is_constant()) {
      if (is_zero() && exponent < 0) throw AnalysisError("division_by_zero", "zero to a negative power");
      return Expression(std::pow(node_->value, exponent));
    }
    if (kind() == Kind::IntPow) return args()[0].pow(node_->exponent * exponent);
    Node n;
    n.kind = Kind::IntPow;
    n.args = {*this};
    n.exponent = exponent;
    return Expression(make(std::move(n)));
  }

  static Expression add(std::vector<Expression> terms) {
    std::vector<Expression> flat;
    complex folded{};
    for (auto& t : terms) {
      if (t.kind() == Kind::Add) {
        for (const auto& a : t.args()) {
          if (a.is_constant()) folded += a.constant_value();
          else flat.push_back(a);
        }
      } else if (t.is_constant()) {
        folded += t.constant_value();
      } else {
        flat.push_back(std::move(t));
      }
    }
    if (folded != complex{}) flat.insert(flat.begin(), Expression(folded));
    if (flat.empty()) return Expression(0.0);
    if (flat.size() == 1) return flat.front();
    Node n;
    n.kind = Kind::Add;
    n.args = std::move(flat);
    return Expression(make(std::move(n)));
  }

  static Expression mul(std::vector<Expression> factors) {
    std::vector<Expression> flat;
    complex folded{1.0, 0.0};
    for (auto& f : factors) {
      if (f.kind() == Kind::Mul) {
        for (const auto& a : f.args()) {
          if (a.is_constant()) folded *= a.constant_value();
          else flat.push_back(a);
        }
      } else if (f.is_constant()) {
        folded *= f.constant_value();
      } else {
        flat.push_back(std::move(f));
      }
    }
    if (folded == complex{}) return Expression(0.0);
    if (folded != complex{1.0, 0.0}) flat.insert(flat.begin(), Expression(folded));
    if (flat.empty()) return Expression(1.0);
    if (flat.size() == 1) return flat.front();
    Node n;
    n.kind = Kind::Mul;
    n.args = std::move(flat);
    return Expression(make(std::move(n)));
  }

  static Expression divide(const Expression& a, const Expression& b) {
    if (b.is_zero()) throw AnalysisError("division_by_zero", "division by literal zero");
    if (a.is_zero()) return Expression(0.0);
    if (b.is_one()) return a;
    if (a.is_constant() && b.is_constant()) return Expression(a.constant_value() / b.constant_value());
    Node n;
    n.kind = Kind::Div;
    n.args = {a, b};
    return Expression(make(std::move(n)));
  }

  /// Names of all symbols reachable from this expression.
  std::set<std::string> symbols() const {
    std::set<std::string> out;
    std::set<const void*> seen;
    collect_symbols(*this, out, seen);
    return out;
  }

  bool depends_on(const std::string& name) const { return symbols().count(name) > 0; }

  /// Number of distinct DAG nodes.
  std::size_t node_count() const {
    std::set<const void*> seen;
    count_nodes(*this, seen);
    return seen.size();
  }

  /// Evaluates with every symbol bound. Shared subexpressions are computed once.
  complex evaluate(const std::map<std::string, complex>& values) const {
    std::unordered_map<const void*, complex> memo;
    return eval(*this, values, memo);
  }

  std::string to_string() const {
    std::ostringstream os;
    print(os, *this);
    return os.str();
  }

 private:
  explicit Expression(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static std::shared_ptr<const Node> make(Node n) { return std::make_shared<const Node>(std::move(n)); }

  static void collect_symbols(const Expression& e, std::set<std::string>& out,
                              std::set<const void*>& seen) {
    if (!seen.insert(e.id()).second) return;
    if (e.kind() == Kind::Symbol) out.insert(e.node().name);
    for (const auto& a : e.args()) collect_symbols(a, out, seen);
  }

  static void count_nodes(const Expression& e, std::set<const void*>& seen) {
    if (!seen.insert(e.id()).second) return;
    for (const auto& a : e.args()) count_nodes(a, seen);
  }

  static complex eval(const Expression& e, const std::map<std::string, complex>& values,
                      std::unordered_map<const void*, complex>& memo) {
    if (e.is_constant()) return e.constant_value();
    if (auto it = memo.find(e.id()); it != memo.end()) return it->second;
    complex r{};
    const auto& a = e.args();
    switch (e.kind()) {
      case Kind::Constant: r = e.constant_value(); break;
      case Kind::Symbol: {
        auto it = values.find(e.node().name);
        if (it == values.end())
          throw BindingError("unbound_symbol", "symbol '" + e.node().name + "' is not bound");
        r = it->second;
        break;
      }
      case Kind::Add:
        for (const auto& t : a) r += eval(t, values, memo);
        break;
      case Kind::Mul:
        r = 1.0;
        for (const auto& t : a) r *= eval(t, values, memo);
        break;
      case Kind::Div: r = eval(a[0], values, memo) / eval(a[1], values, memo); break;
      case Kind::Neg: r = -eval(a[0], values, memo); break;
      case Kind::IntPow: r = std::pow(eval(a[0], values, memo), e.node().exponent); break;
    }
    memo.emplace(e.id(), r);
    return r;
  }

  static void print(std::ostream& os, const Expression& e) {
    const auto& a = e.args();
    switch (e.kind()) {
      case Kind::Constant: {
        const complex c = e.constant_value();
        if (c.imag() == 0.0) os << c.real();
        else if (c.real() == 0.0) os << c.imag() << "i";
        else os << "(" << c.real() << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag()) << "i)";
        break;
      }
      case Kind::Symbol: os << e.node().name; break;
      case Kind::Add:
        os << "(";
        for (std::size_t i = 0; i < a.size(); ++i) {
          if (i) os << " + ";
          print(os, a[i]);
        }
        os << ")";
        break;
      case Kind::Mul:
        for (std::size_t i = 0; i < a.size(); ++i) {
          if (i) os << "*";
          print(os, a[i]);
        }
        break;
      case Kind::Div:
        os << "(";
        print(os, a[0]);
        os << ")/(";
        print(os, a[1]);
        os << ")";
        break;
      case Kind::Neg:
        os << "-(";
        print(os, a[0]);
        os << ")";
        break;
      case Kind::IntPow:
        os << "(";
        print(os, a[0]);
        os << ")^" << e.node().exponent;
        break;
    }
  }

  std::shared_ptr<const Node> node_;
};

inline bool is_zero(const Expression& e) { return e.is_zero(); }

/// A set of expressions flattened into a straight-line program, evaluated
/// repeatedly for different symbol values. Immutable after construction, so
/// one instance may be evaluated from several threads.
class CompiledExpressions {
 public:
  CompiledExpressions() = default;

  explicit CompiledExpressions(const std::vector<Expression>& roots) {
    std::unordered_map<const void*, std::size_t> slot_of;
    std::map<std::string, std::size_t> symbol_slot;
    for (const auto& r : roots) outputs_.push_back(emit(r, slot_of, symbol_slot));
  }

  const std::vector<std::string>& symbols() const { return symbol_names_; }
  std::size_t instruction_count() const { return program_.size(); }

  /// `symbol_values[i]` binds `symbols()[i]`.
  std::vector<complex> evaluate(const std::vector<complex>& symbol_values) const {
    std::vector<complex> reg(program_.size());
    for (std::size_t i = 0; i < program_.size(); ++i) {
      const Instr& in = program_[i];
      switch (in.kind) {
        case Expression::Kind::Constant: reg[i] = in.value; break;
        case Expression::Kind::Symbol: reg[i] = symbol_values.at(in.symbol); break;
        case Expression::Kind::Add: {
          complex s{};
          for (auto k : in.operands) s += reg[k];
          reg[i] = s;
          break;
        }
        case Expression::Kind::Mul: {
          complex p{1.0, 0.0};
          for (auto k : in.operands) p *= reg[k];
          reg[i] = p;
          break;
        }
        case Expression::Kind::Div: reg[i] = reg[in.operands[0]] / reg[in.operands[1]]; break;
        case Expression::Kind::Neg: reg[i] = -reg[in.operands[0]]; break;
        case Expression::Kind::IntPow: reg[i] = std::pow(reg[in.operands[0]], in.exponent); break;
      }
    }
    std::vector<complex> out;
    out.reserve(outputs_.size());
    for (auto o : outputs_) out.push_back(reg[o]);
    return out;
  }

  /// Convenience overload binding by name.
  std::vector<complex> evaluate(const std::map<std::string, complex>& values) const {
    std::vector<complex> v;
    v.reserve(symbol_names_.size());
    for (const auto& name : symbol_names_) {
      auto it = values.find(name);
      if (it == values.end()) throw BindingError("unbound_symbol", "symbol '" + name + "' is not bound");
      v.push_back(it->second);
    }
    return evaluate(v);
  }

 private:
  struct Instr {
    Expression::Kind kind;
    complex value{};
    std::size_t symbol = 0;
    std::vector<std::size_t> operands;
    int exponent = 0;
  };

  std::size_t emit(const Expression& e, std::unordered_map<const void*, std::size_t>& slot_of,
                   std::map<std::string, std::size_t>& symbol_slot) {
    if (auto it = slot_of.find(e.id()); it != slot_of.end()) return it->second;
    Instr in{e.kind()};
    for (const auto& a : e.args()) in.operands.push_back(emit(a, slot_of, symbol_slot));
    if (e.is_constant()) in.value = e.constant_value();
    if (e.kind() == Expression::Kind::Symbol) {
      auto [it, inserted] = symbol_slot.emplace(e.node().name, symbol_names_.size());
      if (inserted) symbol_names_.push_back(e.node().name);
      in.symbol = it->second;
    }
    in.exponent = e.node().exponent;
    program_.push_back(std::move(in));
    slot_of.emplace(e.id(), program_.size() - 1);
    return program_.size() - 1;
  }

  std::vector<Instr> program_;
  std::vector<std::size_t> outputs_;
  std::vector<std::string> symbol_names_;
};

}  // namespace circuitq::symbolic
