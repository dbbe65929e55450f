#pragma once

#include <compare>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace herglotz {

enum class VariableKind { time, position, velocity, functional, parameter };

/// One symbol of the fixed alphabet: `t`, `x<i>`, `dx<i>`, `z`, `s`.
struct Variable {
    VariableKind kind = VariableKind::time;
    int index = 0; // 1-based for position/velocity, 0 otherwise

    static Variable time() { return {VariableKind::time, 0}; }
    static Variable position(int i) { return {VariableKind::position, i}; }
    static Variable velocity(int i) { return {VariableKind::velocity, i}; }
    static Variable functional() { return {VariableKind::functional, 0}; }
    static Variable parameter() { return {VariableKind::parameter, 0}; }

    /// Canonical variable for `name`, or nullopt when it is not in the alphabet.
    static std::optional<Variable> from_name(std::string_view name);

    std::string name() const;

    auto operator<=>(const Variable&) const = default;
};

/// Bindings name -> value. Looking up an unbound symbol throws EvaluationError.
class Environment {
public:
    Environment() = default;

    Environment& bind(Variable var, double value);
    Environment& bind(std::string_view name, double value);

    bool is_bound(Variable var) const;
    double lookup(Variable var) const;

    /// Bound symbols in canonical order (t, x1.., dx1.., z, s).
    std::vector<std::pair<Variable, double>> bindings() const;

private:
    const std::optional<double>* slot(Variable var) const;
    std::optional<double>* slot(Variable var);

    std::optional<double> time_, functional_, parameter_;
    std::vector<std::optional<double>> position_, velocity_;
};

enum class Op { constant, variable, neg, sin, cos, exp, log, sqrt, add, sub, mul, div, pow };

struct Node;

/// Immutable expression tree with shared subtrees.
class Expression {
public:
    /// The constant 0.
    Expression();
    Expression(double value);
    explicit Expression(Variable var);

    Op op() const;
    double value() const;          // constant nodes
    Variable variable() const;     // variable nodes
    Expression lhs() const; // operand of unary ops, left operand of binary ops
    Expression rhs() const;

    bool is_constant() const { return op() == Op::constant; }
    bool is_constant(double v) const { return is_constant() && value() == v; }

    const std::set<Variable>& free_variables() const;
    bool depends_on(Variable var) const { return free_variables().contains(var); }

private:
    explicit Expression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    friend Expression make_unary(Op, const Expression&);
    friend Expression make_binary(Op, const Expression&, const Expression&);

    std::shared_ptr<const Node> node_;
};

struct Node {
    Op op = Op::constant;
    double value = 0.0;
    Variable var;
    std::shared_ptr<const Node> a, b;
    std::set<Variable> free;
};

// Raw node constructors; no simplification. `make_unary` takes a unary Op
// (neg, sin, ...), `make_binary` a binary one (add, ..., pow).
Expression make_unary(Op op, const Expression& operand);
Expression make_binary(Op op, const Expression& lhs, const Expression& rhs);

// Smart constructors. They apply only light simplification
// (0*e -> 0, 1*e -> e, e+0 -> e, constant folding of finite results).
Expression operator+(const Expression& a, const Expression& b);
Expression operator-(const Expression& a, const Expression& b);
Expression operator*(const Expression& a, const Expression& b);
Expression operator/(const Expression& a, const Expression& b);
Expression operator-(const Expression& a);
Expression pow(const Expression& base, const Expression& exponent);
Expression sin(const Expression& e);
Expression cos(const Expression& e);
Expression exp(const Expression& e);
Expression log(const Expression& e);
Expression sqrt(const Expression& e);

Expression parse(std::string_view source);

double evaluate(const Expression& e, const Environment& env);

Expression differentiate(const Expression& e, Variable var);
Expression differentiate(const Expression& e, std::string_view var);

/// Replaces every occurrence of `var` by `value`.
Expression substitute(const Expression& e, Variable var, const Expression& value);

/// Printed form that re-parses to a semantically identical tree.
std::string to_string(const Expression& e);

/// Shortest decimal that round-trips to the same double; always uses '.'.
std::string format_number(double value);

} // namespace herglotz
