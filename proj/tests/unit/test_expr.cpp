#include "cyclofeed/error.hpp"
#include "cyclofeed/expr.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace cyclofeed;

TEST_CASE("parse builds the expected tree") {
    const auto e = parse_expression("a1 - a2*x1*x4");
    REQUIRE(e.op() == Op::Sub);
    CHECK(e.lhs().op() == Op::Param);
    CHECK(e.lhs().name() == "a1");
    const auto& prod = e.rhs();
    REQUIRE(prod.op() == Op::Mul);
    CHECK(prod.rhs().op() == Op::State);
    CHECK(prod.rhs().index() == 4);
    REQUIRE(prod.lhs().op() == Op::Mul);
    CHECK(prod.lhs().lhs().name() == "a2");
    CHECK(prod.lhs().rhs().index() == 1);

    const auto leaf = parse_expression("x2");
    CHECK(leaf.op() == Op::State);
    CHECK(leaf.index() == 2);

    const auto f = parse_expression("sin(2*t)*x3");
    REQUIRE(f.op() == Op::Mul);
    REQUIRE(f.lhs().op() == Op::Sin);
    CHECK(f.lhs().arg().op() == Op::Mul);
    CHECK(f.lhs().arg().rhs().op() == Op::Time);
    CHECK(f.rhs().index() == 3);
}

TEST_CASE("precedence and associativity") {
    CHECK(evaluate(parse_expression("2 - 3 - 4"), 0, {}, {}) == -5);
    CHECK(evaluate(parse_expression("8 / 4 / 2"), 0, {}, {}) == 1);
    CHECK(evaluate(parse_expression("-2^2"), 0, {}, {}) == -4);
    CHECK(evaluate(parse_expression("2*3^2"), 0, {}, {}) == 18);
    CHECK(evaluate(parse_expression("2^-1"), 0, {}, {}) == 0.5);
    CHECK(evaluate(parse_expression("1e-3*1000 + .5"), 0, {}, {}) == 1.5);
    CHECK(evaluate(parse_expression("pi"), 0, {}, {}) == std::numbers::pi);
}

TEST_CASE("parse errors carry a column") {
    try {
        parse_expression("x1 + * x2");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.column() == 6);
    }
    CHECK_THROWS_AS(parse_expression("x1 + "), ParseError);
    CHECK_THROWS_AS(parse_expression("sin x1"), ParseError);
    CHECK_THROWS_AS(parse_expression("x0"), ParseError);
    CHECK_THROWS_AS(parse_expression("x1^x2"), ParseError);
    CHECK_THROWS_AS(parse_expression("(x1"), ParseError);
    CHECK_THROWS_AS(parse_expression("x1 $ 2"), ParseError);
}

TEST_CASE("evaluation") {
    const std::vector<double> x{1, 7, 0, 0.5};
    CHECK(evaluate(parse_expression("a1 - a2*x1*x4"), 0, x, {{"a1", 1}, {"a2", 2}}) == 0);
    CHECK(evaluate(parse_expression("x2"), 0, x, {}) == 7);
    CHECK_THROWS_AS(evaluate(parse_expression("x1/x3"), 0, x, {}), EvalError);
    CHECK_THROWS_AS(evaluate(parse_expression("exp(1000)"), 0, x, {}), EvalError);
    CHECK_THROWS_AS(evaluate(parse_expression("a9"), 0, x, {}), BindError);
    CHECK_THROWS_AS(evaluate(parse_expression("x5"), 0, x, {}), BindError);
    CHECK(evaluate(parse_expression("sin(t)*cos(t)"), 0.3, x, {}) == doctest::Approx(std::sin(0.3) * std::cos(0.3)));
}

TEST_CASE("unparse round-trips") {
    for (const char* s : {"a1 - a2*x1*x4", "x1 - (x2 - x3)", "-(a*b)", "(x1 + x2)*(x3 - x4)/x2", "x1/(x2*x3)",
                          "-x1^2", "(-x1)^2", "exp(-t)*x1^-2", "0.1 + 1e-12*x1", "x1*(x2 + 3)^3"}) {
        CAPTURE(s);
        const auto e = parse_expression(s);
        CHECK(parse_expression(unparse(e)) == e);
    }
    CHECK(unparse(parse_expression("x1-(x2-x3)")) == "x1 - (x2 - x3)");
}

TEST_CASE("symbolic derivatives") {
    CHECK(unparse(differentiate(parse_expression("a1 - a2*x1*x4"), Variable::state(4))) == "-a2*x1");
    CHECK(differentiate(parse_expression("x1"), Variable::state(2)).is_constant(0.0));
    CHECK(unparse(differentiate(parse_expression("x1^3"), Variable::state(1))) == "3*x1^2");
}

TEST_CASE("derivatives agree with central differences") {
    const ParamTable p{{"a", 1.3}, {"b", -0.7}};
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.3, 2.0);
    for (const char* s : {"a*x1*x2 - b*x3^2", "sin(x1)*exp(-x2) + cos(t*x3)", "x1/(x2 + x3^2)", "(x1 - x2)^-2 + a",
                          "exp(b*x2)*x3/x1 - t^2*x2"}) {
        const auto e = parse_expression(s);
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<double> x{u(rng), u(rng) + 3.0, u(rng)};
            const double t = u(rng);
            for (int j = 1; j <= 3; ++j) {
                const double h = 1e-6 * std::max(1.0, std::abs(x[static_cast<size_t>(j - 1)]));
                auto xp = x, xm = x;
                xp[static_cast<size_t>(j - 1)] += h;
                xm[static_cast<size_t>(j - 1)] -= h;
                const double fd = (evaluate(e, t, xp, p) - evaluate(e, t, xm, p)) / (2 * h);
                const double sym = evaluate(differentiate(e, Variable::state(j)), t, x, p);
                CAPTURE(s);
                CAPTURE(j);
                CHECK(std::abs(sym - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
            }
            const double h = 1e-6;
            const double fdt = (evaluate(e, t + h, x, p) - evaluate(e, t - h, x, p)) / (2 * h);
            CHECK(std::abs(evaluate(differentiate(e, Variable::time()), t, x, p) - fdt) <=
                  1e-6 * std::max(1.0, std::abs(fdt)));
        }
    }
}

TEST_CASE("substitution and metadata") {
    const auto e = parse_expression("a*x1 + x3*sin(x2)");
    CHECK(max_state_index(e) == 3);
    CHECK(state_indices(e) == std::vector<int>{1, 2, 3});
    CHECK(param_names(e) == std::vector<std::string>{"a"});
    const std::vector<Expression> subs{parse_expression("-x1"), Expression::state(2), parse_expression("2*x3")};
    const auto s = substitute_states(e, subs);
    const std::vector<double> x{0.4, 1.1, -0.6};
    const std::vector<double> mapped{-0.4, 1.1, -1.2};
    CHECK(evaluate(s, 0, x, {{"a", 2}}) == doctest::Approx(evaluate(e, 0, mapped, {{"a", 2}})));
}

TEST_CASE("programs fold constant subtrees") {
    CHECK(Program(parse_expression("2*a + 1"), {{"a", 3}}, 0).is_constant());
    CHECK_FALSE(Program(parse_expression("2*t"), {}, 0).is_constant());
}
