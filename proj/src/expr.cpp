#include "herglotz/expr.hpp"

#include "herglotz/errors.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

namespace herglotz {

namespace {

bool all_digits(std::string_view s)
{
    if (s.empty() || s.front() == '0')
        return false;
    for (char c : s)
        if (c < '0' || c > '9')
            return false;
    return true;
}

int parse_index(std::string_view digits)
{
    int value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || ptr != digits.data() + digits.size())
        return 0;
    return value;
}

} // namespace

// ---------------------------------------------------------------------------
// Variable

std::optional<Variable> Variable::from_name(std::string_view name)
{
    if (name == "t")
        return time();
    if (name == "z")
        return functional();
    if (name == "s")
        return parameter();
    if (name.starts_with("dx") && all_digits(name.substr(2))) {
        int i = parse_index(name.substr(2));
        if (i >= 1)
            return velocity(i);
        return std::nullopt;
    }
    if (name.starts_with("x") && all_digits(name.substr(1))) {
        int i = parse_index(name.substr(1));
        if (i >= 1)
            return position(i);
    }
    return std::nullopt;
}

std::string Variable::name() const
{
    switch (kind) {
    case VariableKind::time:
        return "t";
    case VariableKind::position:
        return "x" + std::to_string(index);
    case VariableKind::velocity:
        return "dx" + std::to_string(index);
    case VariableKind::functional:
        return "z";
    case VariableKind::parameter:
        return "s";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Environment

const std::optional<double>* Environment::slot(Variable var) const
{
    switch (var.kind) {
    case VariableKind::time:
        return &time_;
    case VariableKind::functional:
        return &functional_;
    case VariableKind::parameter:
        return &parameter_;
    case VariableKind::position:
        if (var.index >= 1 && static_cast<std::size_t>(var.index) <= position_.size())
            return &position_[var.index - 1];
        return nullptr;
    case VariableKind::velocity:
        if (var.index >= 1 && static_cast<std::size_t>(var.index) <= velocity_.size())
            return &velocity_[var.index - 1];
        return nullptr;
    }
    return nullptr;
}

std::optional<double>* Environment::slot(Variable var)
{
    return const_cast<std::optional<double>*>(std::as_const(*this).slot(var));
}

Environment& Environment::bind(Variable var, double value)
{
    if (var.kind == VariableKind::position || var.kind == VariableKind::velocity) {
        if (var.index < 1)
            throw EvaluationError("invalid variable index for " + var.name());
        auto& slots = var.kind == VariableKind::position ? position_ : velocity_;
        if (slots.size() < static_cast<std::size_t>(var.index))
            slots.resize(var.index);
    }
    *slot(var) = value;
    return *this;
}

Environment& Environment::bind(std::string_view name, double value)
{
    auto var = Variable::from_name(name);
    if (!var)
        throw EvaluationError("not a canonical variable name: '" + std::string(name) + "'");
    return bind(*var, value);
}

bool Environment::is_bound(Variable var) const
{
    const auto* s = slot(var);
    return s != nullptr && s->has_value();
}

double Environment::lookup(Variable var) const
{
    const auto* s = slot(var);
    if (s == nullptr || !s->has_value())
        throw EvaluationError("unbound variable '" + var.name() + "'");
    return **s;
}

std::vector<std::pair<Variable, double>> Environment::bindings() const
{
    std::vector<std::pair<Variable, double>> out;
    if (time_)
        out.emplace_back(Variable::time(), *time_);
    for (std::size_t i = 0; i < position_.size(); ++i)
        if (position_[i])
            out.emplace_back(Variable::position(static_cast<int>(i) + 1), *position_[i]);
    for (std::size_t i = 0; i < velocity_.size(); ++i)
        if (velocity_[i])
            out.emplace_back(Variable::velocity(static_cast<int>(i) + 1), *velocity_[i]);
    if (functional_)
        out.emplace_back(Variable::functional(), *functional_);
    if (parameter_)
        out.emplace_back(Variable::parameter(), *parameter_);
    return out;
}

// ---------------------------------------------------------------------------
// Expression nodes

namespace {

std::shared_ptr<const Node> constant_node(double value)
{
    auto n = std::make_shared<Node>();
    n->op = Op::constant;
    n->value = value;
    return n;
}

const std::shared_ptr<const Node>& zero_node()
{
    static const std::shared_ptr<const Node> zero = constant_node(0.0);
    return zero;
}

bool is_unary(Op op)
{
    switch (op) {
    case Op::neg:
    case Op::sin:
    case Op::cos:
    case Op::exp:
    case Op::log:
    case Op::sqrt:
        return true;
    default:
        return false;
    }
}

} // namespace

Expression::Expression() : node_(zero_node()) {}

Expression::Expression(double value) : node_(value == 0.0 ? zero_node() : constant_node(value)) {}

Expression::Expression(Variable var)
{
    auto n = std::make_shared<Node>();
    n->op = Op::variable;
    n->var = var;
    n->free.insert(var);
    node_ = std::move(n);
}

Op Expression::op() const { return node_->op; }
double Expression::value() const { return node_->value; }
Variable Expression::variable() const { return node_->var; }
Expression Expression::lhs() const { return Expression(node_->a); }
Expression Expression::rhs() const { return Expression(node_->b); }
const std::set<Variable>& Expression::free_variables() const { return node_->free; }

Expression make_unary(Op op, const Expression& a)
{
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = a.node_;
    n->free = a.free_variables();
    return Expression(std::shared_ptr<const Node>(std::move(n)));
}

Expression make_binary(Op op, const Expression& a, const Expression& b)
{
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = a.node_;
    n->b = b.node_;
    n->free = a.free_variables();
    n->free.insert(b.free_variables().begin(), b.free_variables().end());
    return Expression(std::shared_ptr<const Node>(std::move(n)));
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double apply(Op op, double x, double y)
{
    switch (op) {
    case Op::neg:
        return -x;
    case Op::sin:
        return std::sin(x);
    case Op::cos:
        return std::cos(x);
    case Op::exp:
        return std::exp(x);
    case Op::log:
        return std::log(x);
    case Op::sqrt:
        return std::sqrt(x);
    case Op::add:
        return x + y;
    case Op::sub:
        return x - y;
    case Op::mul:
        return x * y;
    case Op::div:
        return x / y;
    case Op::pow:
        return std::pow(x, y);
    default:
        return 0.0;
    }
}

/// Message for an argument outside the domain of `op`, or empty.
std::string domain_violation(Op op, double x, double y)
{
    switch (op) {
    case Op::log:
        if (!(x > 0.0))
            return "log of non-positive value";
        break;
    case Op::sqrt:
        if (x < 0.0)
            return "sqrt of negative value";
        break;
    case Op::div:
        if (y == 0.0)
            return "division by zero";
        break;
    case Op::pow:
        if (x == 0.0 && y < 0.0)
            return "zero raised to a negative power";
        if (x < 0.0 && std::trunc(y) != y)
            return "negative base raised to a non-integer power";
        break;
    default:
        break;
    }
    return {};
}

} // namespace

double evaluate(const Expression& e, const Environment& env)
{
    struct Evaluator {
        const Environment& env;

        double operator()(const Expression& e) const
        {
            switch (e.op()) {
            case Op::constant:
                return e.value();
            case Op::variable:
                return env.lookup(e.variable());
            default:
                break;
            }
            const double x = (*this)(e.lhs());
            const double y = is_unary(e.op()) ? 0.0 : (*this)(e.rhs());
            if (auto msg = domain_violation(e.op(), x, y); !msg.empty())
                throw EvaluationError("domain error: " + msg + " in '" + to_string(e) + "'");
            const double r = apply(e.op(), x, y);
            if (!std::isfinite(r))
                throw EvaluationError("domain error: non-finite result of '" + to_string(e) + "'");
            return r;
        }
    };
    return Evaluator{env}(e);
}

// ---------------------------------------------------------------------------
// Smart constructors

namespace {

Expression fold_or(Op op, const Expression& a, const Expression& b)
{
    const bool unary = is_unary(op);
    if (a.is_constant() && (unary || b.is_constant())) {
        const double x = a.value();
        const double y = unary ? 0.0 : b.value();
        if (domain_violation(op, x, y).empty()) {
            const double r = apply(op, x, y);
            if (std::isfinite(r))
                return Expression(r);
        }
    }
    return unary ? make_unary(op, a) : make_binary(op, a, b);
}

} // namespace

Expression operator+(const Expression& a, const Expression& b)
{
    if (a.is_constant(0.0))
        return b;
    if (b.is_constant(0.0))
        return a;
    return fold_or(Op::add, a, b);
}

Expression operator-(const Expression& a, const Expression& b)
{
    if (b.is_constant(0.0))
        return a;
    if (a.is_constant(0.0))
        return -b;
    return fold_or(Op::sub, a, b);
}

Expression operator*(const Expression& a, const Expression& b)
{
    if (a.is_constant(0.0) || b.is_constant(0.0))
        return Expression();
    if (a.is_constant(1.0))
        return b;
    if (b.is_constant(1.0))
        return a;
    return fold_or(Op::mul, a, b);
}

Expression operator/(const Expression& a, const Expression& b)
{
    if (b.is_constant(1.0))
        return a;
    if (a.is_constant(0.0) && !b.is_constant(0.0))
        return Expression();
    return fold_or(Op::div, a, b);
}

Expression operator-(const Expression& a)
{
    if (a.op() == Op::neg)
        return a.lhs();
    return fold_or(Op::neg, a, Expression());
}

Expression pow(const Expression& base, const Expression& exponent)
{
    if (exponent.is_constant(0.0))
        return Expression(1.0);
    if (exponent.is_constant(1.0))
        return base;
    return fold_or(Op::pow, base, exponent);
}

Expression sin(const Expression& e) { return fold_or(Op::sin, e, Expression()); }
Expression cos(const Expression& e) { return fold_or(Op::cos, e, Expression()); }
Expression exp(const Expression& e) { return fold_or(Op::exp, e, Expression()); }
Expression log(const Expression& e) { return fold_or(Op::log, e, Expression()); }
Expression sqrt(const Expression& e) { return fold_or(Op::sqrt, e, Expression()); }

// ---------------------------------------------------------------------------
// Differentiation

Expression differentiate(const Expression& e, Variable var)
{
    if (!e.depends_on(var))
        return Expression();

    const Expression f = e.lhs();
    switch (e.op()) {
    case Op::constant:
        return Expression();
    case Op::variable:
        return Expression(e.variable() == var ? 1.0 : 0.0);
    case Op::neg:
        return -differentiate(f, var);
    case Op::sin:
        return cos(f) * differentiate(f, var);
    case Op::cos:
        return -(sin(f) * differentiate(f, var));
    case Op::exp:
        return e * differentiate(f, var);
    case Op::log:
        return differentiate(f, var) / f;
    case Op::sqrt:
        return differentiate(f, var) / (Expression(2.0) * e);
    default:
        break;
    }

    const Expression g = e.rhs();
    const Expression df = differentiate(f, var);
    const Expression dg = differentiate(g, var);
    switch (e.op()) {
    case Op::add:
        return df + dg;
    case Op::sub:
        return df - dg;
    case Op::mul:
        return df * g + f * dg;
    case Op::div:
        return (df * g - f * dg) / pow(g, Expression(2.0));
    case Op::pow:
        if (!g.depends_on(var))
            return g * pow(f, g - Expression(1.0)) * df;
        return e * (dg * log(f) + g * df / f);
    default:
        break;
    }
    return Expression();
}

Expression differentiate(const Expression& e, std::string_view var)
{
    auto v = Variable::from_name(var);
    if (!v)
        throw EvaluationError("not a canonical variable name: '" + std::string(var) + "'");
    return differentiate(e, *v);
}

Expression substitute(const Expression& e, Variable var, const Expression& value)
{
    if (!e.depends_on(var))
        return e;
    switch (e.op()) {
    case Op::variable:
        return value;
    case Op::neg:
        return -substitute(e.lhs(), var, value);
    case Op::sin:
        return sin(substitute(e.lhs(), var, value));
    case Op::cos:
        return cos(substitute(e.lhs(), var, value));
    case Op::exp:
        return exp(substitute(e.lhs(), var, value));
    case Op::log:
        return log(substitute(e.lhs(), var, value));
    case Op::sqrt:
        return sqrt(substitute(e.lhs(), var, value));
    default:
        break;
    }
    const Expression a = substitute(e.lhs(), var, value);
    const Expression b = substitute(e.rhs(), var, value);
    switch (e.op()) {
    case Op::add:
        return a + b;
    case Op::sub:
        return a - b;
    case Op::mul:
        return a * b;
    case Op::div:
        return a / b;
    case Op::pow:
        return pow(a, b);
    default:
        return e;
    }
}

// ---------------------------------------------------------------------------
// Printing

std::string format_number(double value)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{})
        return "nan";
    return std::string(buf, ptr);
}

namespace {

// Binding strength of the printed form of a node.
int precedence(const Expression& e)
{
    switch (e.op()) {
    case Op::add:
    case Op::sub:
        return 1;
    case Op::mul:
    case Op::div:
        return 2;
    case Op::neg:
        return 3;
    case Op::pow:
        return 4;
    case Op::constant:
        return e.value() < 0.0 || std::signbit(e.value()) ? 3 : 5;
    default:
        return 5;
    }
}

const char* function_name(Op op)
{
    switch (op) {
    case Op::sin:
        return "sin";
    case Op::cos:
        return "cos";
    case Op::exp:
        return "exp";
    case Op::log:
        return "log";
    case Op::sqrt:
        return "sqrt";
    default:
        return "";
    }
}

std::string wrap(const Expression& e, bool parens)
{
    return parens ? "(" + to_string(e) + ")" : to_string(e);
}

} // namespace

std::string to_string(const Expression& e)
{
    switch (e.op()) {
    case Op::constant:
        return format_number(e.value());
    case Op::variable:
        return e.variable().name();
    case Op::neg:
        return "-" + wrap(e.lhs(), precedence(e.lhs()) < 3);
    case Op::sin:
    case Op::cos:
    case Op::exp:
    case Op::log:
    case Op::sqrt:
        return std::string(function_name(e.op())) + "(" + to_string(e.lhs()) + ")";
    case Op::add:
        return wrap(e.lhs(), false) + " + " + wrap(e.rhs(), precedence(e.rhs()) <= 1);
    case Op::sub:
        return wrap(e.lhs(), false) + " - " + wrap(e.rhs(), precedence(e.rhs()) <= 1);
    case Op::mul:
        return wrap(e.lhs(), precedence(e.lhs()) < 2) + "*" + wrap(e.rhs(), precedence(e.rhs()) <= 2);
    case Op::div:
        return wrap(e.lhs(), precedence(e.lhs()) < 2) + "/" + wrap(e.rhs(), precedence(e.rhs()) <= 2);
    case Op::pow:
        return wrap(e.lhs(), precedence(e.lhs()) < 5) + "^" + wrap(e.rhs(), precedence(e.rhs()) < 3);
    }
    return {};
}

} // namespace herglotz
