#include "herglotz/errors.hpp"
#include "herglotz/expr.hpp"

#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>

using namespace herglotz;

namespace {

Environment env_of(double t, double x1, double dx1, double z)
{
    Environment env;
    env.bind("t", t).bind("x1", x1).bind("dx1", dx1).bind("z", z);
    return env;
}

const Variable alphabet[] = {Variable::time(), Variable::position(1), Variable::velocity(1), Variable::functional()};

// Random trees built with the raw constructors, so printing sees every shape.
// Domains are kept safe by wrapping log/sqrt arguments in 1 + (.)^2.
Expression random_tree(std::mt19937_64& rng, int depth)
{
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 11);
    std::uniform_real_distribution<double> constant(-2.0, 2.0);
    switch (pick(rng)) {
    case 0:
        return Expression(std::round(constant(rng) * 4.0) / 4.0);
    case 1:
        return Expression(alphabet[std::uniform_int_distribution<int>(0, 3)(rng)]);
    case 2:
        return make_unary(Op::neg, random_tree(rng, depth - 1));
    case 3:
        return make_unary(Op::sin, random_tree(rng, depth - 1));
    case 4:
        return make_unary(Op::cos, random_tree(rng, depth - 1));
    case 5:
        return make_unary(Op::exp, make_unary(Op::sin, random_tree(rng, depth - 1)));
    case 6: {
        const Expression e = random_tree(rng, depth - 1);
        return make_unary(Op::log, make_binary(Op::add, 1.0, make_binary(Op::pow, e, 2.0)));
    }
    case 7: {
        const Expression e = random_tree(rng, depth - 1);
        return make_unary(Op::sqrt, make_binary(Op::add, 1.0, make_binary(Op::pow, e, 2.0)));
    }
    case 8:
        return make_binary(Op::add, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 9:
        return make_binary(Op::sub, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 10:
        return make_binary(Op::mul, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    default: {
        // Negative powers only of bases bounded away from zero.
        const double exponent = std::uniform_int_distribution<int>(-2, 3)(rng);
        const Expression base = random_tree(rng, depth - 1);
        if (exponent >= 0)
            return make_binary(Op::pow, base, exponent);
        return make_binary(Op::pow, make_binary(Op::add, 1.0, make_binary(Op::pow, base, 2.0)), exponent);
    }
    }
}

Environment random_env(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    return env_of(u(rng), u(rng), u(rng), u(rng));
}

} // namespace

TEST_CASE("parse builds the expected trees")
{
    const Expression e = parse("dx1^2/2 - z");
    REQUIRE(e.op() == Op::sub);
    CHECK(e.lhs().op() == Op::div);
    CHECK(e.lhs().lhs().op() == Op::pow);
    CHECK(e.lhs().lhs().lhs().variable() == Variable::velocity(1));
    CHECK(e.lhs().lhs().rhs().is_constant(2.0));
    CHECK(e.lhs().rhs().is_constant(2.0));
    CHECK(e.rhs().variable() == Variable::functional());

    const Expression x = parse("x1");
    CHECK(x.op() == Op::variable);
    CHECK(x.variable() == Variable::position(1));

    const Expression f = parse("sin(t)*x1 + 2");
    REQUIRE(f.op() == Op::add);
    CHECK(f.lhs().op() == Op::mul);
    CHECK(f.lhs().lhs().op() == Op::sin);
    CHECK(f.lhs().lhs().lhs().variable() == Variable::time());
    CHECK(f.lhs().rhs().variable() == Variable::position(1));
    CHECK(f.rhs().is_constant(2.0));
    CHECK(f.free_variables() == std::set<Variable>{Variable::time(), Variable::position(1)});
}

TEST_CASE("precedence and associativity")
{
    const Environment env;
    CHECK(evaluate(parse("2^3^2"), env) == 512.0);
    CHECK(evaluate(parse("2-3-4"), env) == -5.0);
    CHECK(evaluate(parse("8/4/2"), env) == 1.0);
    CHECK(evaluate(parse("-2^2"), env) == -4.0);
    CHECK(evaluate(parse("2^-1"), env) == 0.5);
    CHECK(evaluate(parse("--3"), env) == 3.0);
    CHECK(evaluate(parse(" 1 +\t2 * 3 "), env) == 7.0);
    CHECK(evaluate(parse("1.5e2 + .5"), env) == 150.5);
    CHECK(parse("-x1^2").op() == Op::neg);
}

TEST_CASE("parse errors carry byte offsets")
{
    CHECK_THROWS_AS(parse(""), ParseError);
    CHECK_THROWS_AS(parse("x1 +"), ParseError);
    CHECK_THROWS_AS(parse("(x1"), ParseError);
    CHECK_THROWS_AS(parse("sin x1"), ParseError);
    CHECK_THROWS_AS(parse("x1 x1"), ParseError);
    try {
        parse("1 + @");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 4);
    }
    try {
        parse("t + y");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 4);
        CHECK(std::string(e.what()).find("unknown identifier") != std::string::npos);
    }
    for (const char* bad : {"x0", "dx", "X1", "tan(t)", "x1_2", "Z"})
        CHECK_THROWS_AS(parse(bad), ParseError);
}

TEST_CASE("evaluate")
{
    CHECK(evaluate(parse("dx1^2/2 - z"), env_of(0, 0, 3, 1)) == 3.5);
    CHECK(evaluate(parse("exp(0)"), Environment{}) == 1.0);
    CHECK_THROWS_AS(evaluate(parse("x1/ (t - 1)"), env_of(1, 1, 0, 0)), EvaluationError);
    CHECK_THROWS_AS(evaluate(parse("log(x1)"), env_of(0, 0, 0, 0)), EvaluationError);
    CHECK_THROWS_AS(evaluate(parse("log(x1)"), env_of(0, -1, 0, 0)), EvaluationError);
    CHECK_THROWS_AS(evaluate(parse("sqrt(x1)"), env_of(0, -1, 0, 0)), EvaluationError);
    CHECK_THROWS_AS(evaluate(parse("x1^0.5"), env_of(0, -1, 0, 0)), EvaluationError);
    CHECK_THROWS_AS(evaluate(parse("exp(x1)"), env_of(0, 1000, 0, 0)), EvaluationError);
    CHECK(evaluate(parse("x1^3"), env_of(0, -2, 0, 0)) == -8.0);

    try {
        evaluate(parse("1 + x1/(t - 1)"), env_of(1, 1, 0, 0));
        FAIL("expected a domain error");
    } catch (const EvaluationError& e) {
        CHECK(std::string(e.what()).find("x1/(t - 1)") != std::string::npos);
    }
}

TEST_CASE("unbound variables are errors")
{
    Environment env;
    env.bind("x1", 1.0);
    CHECK_THROWS_AS(evaluate(parse("x1 + z"), env), EvaluationError);
    CHECK_THROWS_AS(evaluate(parse("x2"), env), EvaluationError);
    CHECK_THROWS_AS(env.bind("q", 1.0), EvaluationError);
    CHECK(env.is_bound(Variable::position(1)));
    CHECK_FALSE(env.is_bound(Variable::position(2)));
}

TEST_CASE("differentiate")
{
    const Expression d = differentiate(parse("dx1^2/2 - z"), "dx1");
    for (double v : {-2.0, 0.0, 0.3, 5.0})
        CHECK(evaluate(d, env_of(0, 0, v, 0)) == doctest::Approx(v).epsilon(1e-15));
    CHECK(d.free_variables() == std::set<Variable>{Variable::velocity(1)});

    const Expression dz = differentiate(parse("dx1^2/2 - 0.5*z"), "z");
    REQUIRE(dz.is_constant());
    CHECK(dz.value() == -0.5);

    const Expression e = parse("sin(x1)*t");
    const double exact = evaluate(differentiate(e, "x1"), env_of(2, 0, 0, 0));
    const double h = 1e-6;
    const double fd = (evaluate(e, env_of(2, h, 0, 0)) - evaluate(e, env_of(2, -h, 0, 0))) / (2 * h);
    CHECK(exact == 2.0);
    CHECK(std::abs(exact - fd) <= 1e-8);

    CHECK(differentiate(parse("t*x1"), "z").is_constant(0.0));
    CHECK(differentiate(parse("x1^t"), "t").depends_on(Variable::position(1)));
}

TEST_CASE("smart constructors simplify lightly")
{
    const Expression x(Variable::position(1));
    CHECK(to_string(x + 0.0) == "x1");
    CHECK(to_string(0.0 * x) == "0");
    CHECK(to_string(1.0 * x) == "x1");
    CHECK(to_string(x / 1.0) == "x1");
    CHECK(to_string(-(-x)) == "x1");
    CHECK(to_string(pow(x, 1.0)) == "x1");
    CHECK(to_string(Expression(2.0) * 3.0) == "6");
    // Folding is skipped when the result would be out of domain.
    CHECK_FALSE(log(Expression(0.0)).is_constant());
    CHECK_FALSE((Expression(1.0) / 0.0).is_constant());
    CHECK(to_string(x - x) == "x1 - x1");
}

TEST_CASE("derivatives agree with central differences on random expressions")
{
    std::mt19937_64 rng(7);
    int compared = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const Expression e = random_tree(rng, 4);
        const Environment base = random_env(rng);
        for (const Variable var : alphabet) {
            const double x0 = base.lookup(var);
            const double h = 1e-6;
            double exact, plus, minus, centre;
            try {
                exact = evaluate(differentiate(e, var), base);
                plus = evaluate(e, Environment(base).bind(var, x0 + h));
                minus = evaluate(e, Environment(base).bind(var, x0 - h));
                centre = evaluate(e, base);
            } catch (const EvaluationError&) {
                continue;
            }
            if (std::abs(centre) > 1e4)
                continue;
            const double fd = (plus - minus) / (2 * h);
            INFO("e = " << to_string(e) << ", var = " << var.name());
            CHECK(std::abs(exact - fd) <= 1e-6 * std::max({1.0, std::abs(exact), std::abs(centre)}));
            ++compared;
        }
    }
    CHECK(compared > 1000);
}

TEST_CASE("differentiation stays within the alphabet of the expression")
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const Expression e = random_tree(rng, 4);
        for (const Variable var : alphabet) {
            const Expression d = differentiate(e, var);
            for (const Variable used : d.free_variables())
                CHECK(e.depends_on(used));
            if (!e.depends_on(var))
                CHECK(d.is_constant(0.0));
        }
    }
}

TEST_CASE("printing round-trips through the parser")
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        const Expression e = random_tree(rng, 5);
        const std::string printed = to_string(e);
        const Expression reparsed = parse(printed);
        INFO("printed: " << printed);
        CHECK(to_string(reparsed) == printed);
        std::mt19937_64 env_rng(trial);
        for (int k = 0; k < 100; ++k) {
            const Environment env = random_env(env_rng);
            double want, got;
            try {
                want = evaluate(e, env);
            } catch (const EvaluationError&) {
                CHECK_THROWS_AS(evaluate(reparsed, env), EvaluationError);
                continue;
            }
            got = evaluate(reparsed, env);
            CHECK(std::abs(want - got) <= 1e-12 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST_CASE("evaluation is deterministic")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const Expression e = random_tree(rng, 5);
        const Environment env = random_env(rng);
        try {
            const double first = evaluate(e, env);
            const double second = evaluate(e, env);
            CHECK(std::bit_cast<std::uint64_t>(first) == std::bit_cast<std::uint64_t>(second));
        } catch (const EvaluationError&) {
        }
    }
}

TEST_CASE("substitute")
{
    const Expression e = parse("x1^2 + s");
    const Expression shifted = substitute(e, Variable::position(1), parse("x1 + s"));
    CHECK(evaluate(shifted, Environment{}.bind("x1", 1.0).bind("s", 2.0)) == 11.0);
}

TEST_CASE("number formatting round-trips")
{
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(-3.0) == "-3");
    CHECK(format_number(1e300) == "1e+300");
    for (double v : {1.0 / 3.0, M_PI, 6.02214076e23, -1.2345678901234567e-300}) {
        const std::string s = format_number(v);
        CHECK(std::stod(s) == v);
        CHECK(s.size() <= 24);
    }
    CHECK(Variable::from_name("dx12") == Variable::velocity(12));
    CHECK_FALSE(Variable::from_name("x01").has_value());
}
