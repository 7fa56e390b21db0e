#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include <fmt/format.h>

#include "conefield/error.hpp"
#include "conefield/expr.hpp"

using namespace conefield;

namespace {

double eval(std::string_view text, std::size_t dim = 3, Vec x = {0.5, -1.25, 2.0}, Vec v = {1.0, 3.0, -0.5}) {
    return parse_expr(text, dim).evaluate(x, v);
}

// Random expression generator that tracks the value it denotes, so the
// parser and evaluator are checked against independent arithmetic.
struct Gen {
    std::mt19937_64 rng;
    Vec x{}, v{};
    std::size_t dim = 3;

    int pick(int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }
    std::string ws() { return pick(3) == 0 ? " " : ""; }

    std::pair<std::string, double> number(int depth) {
        switch (depth <= 0 ? pick(3) : pick(10)) {
            case 0: {
                const double c = static_cast<double>(pick(2000)) / 100.0;
                return {fmt::format("{}", c), c};
            }
            case 1: {
                const int i = pick(static_cast<int>(dim));
                return {fmt::format("x{}", i + 1), x[i]};
            }
            case 2: {
                const int i = pick(static_cast<int>(dim));
                return {fmt::format("v{}", i + 1), v[i]};
            }
            case 3: {
                auto [a, va] = number(depth - 1);
                return {"-(" + a + ")", -va};
            }
            case 4: {
                auto [a, va] = number(depth - 1);
                auto [b, vb] = number(depth - 1);
                return {"(" + a + ws() + "+" + ws() + b + ")", va + vb};
            }
            case 5: {
                auto [a, va] = number(depth - 1);
                auto [b, vb] = number(depth - 1);
                return {"(" + a + ws() + "-" + ws() + b + ")", va - vb};
            }
            case 6: {
                auto [a, va] = number(depth - 1);
                auto [b, vb] = number(depth - 1);
                return {"(" + a + "*" + b + ")", va * vb};
            }
            case 7: {
                auto [a, va] = number(depth - 1);
                auto [b, vb] = number(depth - 1);
                return {"(" + a + "/(abs(" + b + ")+1))", va / (std::fabs(vb) + 1.0)};
            }
            case 8: {
                auto [a, va] = number(depth - 1);
                const int k = pick(4);
                return {"(" + a + ")^" + std::to_string(k), std::pow(va, k)};
            }
            default: {
                auto [a, va] = number(depth - 1);
                auto [b, vb] = number(depth - 1);
                if (pick(2)) return {"min(" + a + "," + ws() + b + ")", std::min(va, vb)};
                return {"max(" + a + ", " + b + ")", std::max(va, vb)};
            }
        }
    }

    std::pair<std::string, bool> condition(int depth) {
        switch (depth <= 0 ? 0 : pick(4)) {
            case 0: {
                auto [a, va] = number(2);
                auto [b, vb] = number(2);
                switch (pick(4)) {
                    case 0: return {a + " >= " + b, va >= vb};
                    case 1: return {a + " <= " + b, va <= vb};
                    case 2: return {a + " > " + b, va > vb};
                    default: return {a + " < " + b, va < vb};
                }
            }
            case 1: {
                auto [a, va] = condition(depth - 1);
                return {"!(" + a + ")", !va};
            }
            case 2: {
                auto [a, va] = condition(depth - 1);
                auto [b, vb] = condition(depth - 1);
                return {"(" + a + ") && (" + b + ")", va && vb};
            }
            default: {
                auto [a, va] = condition(depth - 1);
                auto [b, vb] = condition(depth - 1);
                return {"(" + a + ")||(" + b + ")", va || vb};
            }
        }
    }
};

bool near(double a, double b) { return std::fabs(a - b) <= 1e-9 * std::max(1.0, std::fabs(b)); }

}  // namespace

TEST_CASE("cone examples parse") {
    auto q = parse_expr("v1 >= 0 && v2 >= 0", 2);
    CHECK(q.is_boolean());
    CHECK(q.root().op == Op::And);
    CHECK(q.root().args.size() == 2);
    CHECK(q.root().args[0].op == Op::Ge);

    auto e2 = parse_expr("v2 >= 0 && v1*v2 >= x3^2*v1^2 + v3^2", 3);
    REQUIRE(e2.root().op == Op::And);
    const auto& rhs = e2.root().args[1];
    CHECK(rhs.op == Op::Ge);
    CHECK(rhs.args[0].op == Op::Mul);
    CHECK(rhs.args[1].op == Op::Add);
    CHECK(rhs.args[1].args[0].op == Op::Mul);
    CHECK(rhs.args[1].args[0].args[0].op == Op::Pow);
    CHECK(rhs.args[1].args[0].args[0].index == 2);
    CHECK(e2.uses_tangent());
    CHECK(e2.to_string() == "((v2 >= 0) && ((v1 * v2) >= (((x3)^2 * (v1)^2) + (v3)^2)))");
}

TEST_CASE("precedence and associativity") {
    CHECK(eval("1 + 2 * 3") == 7.0);
    CHECK(eval("(1 + 2) * 3") == 9.0);
    CHECK(eval("8 / 4 / 2") == 1.0);
    CHECK(eval("10 - 4 - 3") == 3.0);
    CHECK(eval("2^3^2") == 512.0);
    CHECK(eval("-2^2") == -4.0);
    CHECK(eval("(-2)^2") == 4.0);
    CHECK(eval("--3") == 3.0);
    CHECK(eval("1 + 1 >= 2") == 1.0);
    CHECK(eval("!1 > 2") == 1.0);
    CHECK(eval("1 > 2 || 3 > 2 && 0 > 1") == 0.0);
    CHECK(eval("(1 > 2 || 3 > 2) && 2 > 1") == 1.0);
    CHECK(eval("x1 * 2 + v2") == doctest::Approx(4.0));
    CHECK(eval("abs(-x2) + min(1, 2, -3) + max(v3, 0)") == doctest::Approx(1.25 - 3.0));
    CHECK(eval("1.5e1 + 0.5") == 15.5);
    CHECK_THROWS_AS(parse_expr(".5", 1), ParseError);
    CHECK(eval("x1^0") == 1.0);
}

TEST_CASE("parse errors carry offsets and expected tokens") {
    try {
        parse_expr("v1 >= abs(", 2);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 9);
        CHECK_FALSE(e.expected().empty());
    }
    CHECK_THROWS_AS(parse_expr("", 2), ParseError);
    CHECK_THROWS_AS(parse_expr("1 +", 2), ParseError);
    CHECK_THROWS_AS(parse_expr("(1", 2), ParseError);
    CHECK_THROWS_AS(parse_expr("1 2", 2), ParseError);
    CHECK_THROWS_AS(parse_expr("x1 ^ 1.5", 2), ParseError);
    CHECK_THROWS_AS(parse_expr("x1 ^ -1", 2), ParseError);
    CHECK_THROWS_AS(parse_expr("1 & 2", 2), ParseError);
    try {
        parse_expr("x1 + $", 2);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 5);
    }
}

TEST_CASE("type errors") {
    CHECK_THROWS_AS(parse_expr("(v1 >= 0) + 1", 2), ParseError);
    CHECK_THROWS_AS(parse_expr("v1 && v2 >= 0", 2), ParseError);
    CHECK_THROWS_AS(parse_expr("!v1", 2), ParseError);
    CHECK_THROWS_AS(parse_expr("abs(v1 >= 0)", 2), ParseError);
    CHECK_THROWS_AS(parse_expr("1 < 2 < 3", 2), ParseError);
}

TEST_CASE("arity errors") {
    CHECK_THROWS_AS(parse_expr("x3 >= 0", 2), ArityError);
    CHECK_THROWS_AS(parse_expr("v0 >= 0", 2), ArityError);
    CHECK_THROWS_AS(parse_expr("y1 >= 0", 2), ArityError);
    CHECK_THROWS_AS(parse_expr("sin(x1)", 2), ArityError);
    CHECK_THROWS_AS(parse_expr("abs(x1, x2)", 2), ArityError);
    CHECK_THROWS_AS(parse_expr("min(x1)", 2), ArityError);
    CHECK_NOTHROW(parse_expr("x4 + v4", 4));
}

TEST_CASE("division by zero is an evaluation error") {
    auto e = parse_expr("v1 / x1 >= 0", 2);
    CHECK_THROWS_AS(e.evaluate(Vec{0.0, 0.0}, Vec{1.0, 0.0}), EvalError);
    CHECK(e.holds(Vec{1.0, 0.0}, Vec{1.0, 0.0}));
}

TEST_CASE("deep nesting uses the heap stack path") {
    std::string text = "x1";
    for (int i = 0; i < 200; ++i) text = "(1 + " + text + ")";
    CHECK(eval(text) == doctest::Approx(200.5));
}

TEST_CASE("random expressions: evaluation matches the generator and printing round-trips") {
    Gen gen;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        gen.rng.seed(seed);
        for (std::size_t i = 0; i < 3; ++i) {
            gen.x[i] = static_cast<double>(gen.pick(400)) / 100.0 - 2.0;
            gen.v[i] = static_cast<double>(gen.pick(400)) / 100.0 - 2.0;
        }
        auto [text, value] = gen.number(4);
        auto expr = parse_expr(text, 3);
        CHECK_MESSAGE(near(expr.evaluate(gen.x, gen.v), value), text);
        auto again = parse_expr(expr.to_string(), 3);
        CHECK_MESSAGE(again.root() == expr.root(), text);
        CHECK(again.to_string() == expr.to_string());

        auto [ctext, truth] = gen.condition(3);
        auto cexpr = parse_expr(ctext, 3);
        CHECK(cexpr.is_boolean());
        CHECK_MESSAGE(cexpr.holds(gen.x, gen.v) == truth, ctext);
        CHECK(parse_expr(cexpr.to_string(), 3).root() == cexpr.root());
    }
}

TEST_CASE("pretty-printing keeps exact literals") {
    auto e = parse_expr("0.1 + 1e-300 * x1", 1);
    auto again = parse_expr(e.to_string(), 1);
    CHECK(again.root() == e.root());
    CHECK(again.root().args[0].value == 0.1);
}
