#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "twistorlab/dual.hpp"
#include "twistorlab/expr.hpp"

using twistorlab::Dual;
using namespace twistorlab::expr;

namespace {

double eval_at(const Expr& e, double a, double b, double c, double d) {
    return e.eval<double>({a, b, c, d});
}

double eval_str(const std::string& s, std::array<double, 4> x) {
    return parse_expression(s).eval<double>(x);
}

}  // namespace

TEST_CASE("literals and coordinates evaluate directly") {
    CHECK(eval_str("42", {0, 0, 0, 0}) == 42.0);
    CHECK(eval_str("3.25", {0, 0, 0, 0}) == 3.25);
    CHECK(eval_str("1e-3", {0, 0, 0, 0}) == 1e-3);
    CHECK(eval_str("2.5E2", {0, 0, 0, 0}) == 250.0);
    CHECK(eval_str("x1", {7, 0, 0, 0}) == 7.0);
    CHECK(eval_str("x4", {0, 0, 0, -2}) == -2.0);
}

TEST_CASE("arithmetic follows the usual precedence") {
    CHECK(eval_str("1+2*3", {0, 0, 0, 0}) == 7.0);
    CHECK(eval_str("(1+2)*3", {0, 0, 0, 0}) == 9.0);
    CHECK(eval_str("2-3-4", {0, 0, 0, 0}) == -5.0);
    CHECK(eval_str("12/3/2", {0, 0, 0, 0}) == 2.0);
    CHECK(eval_str("2*x1^2", {3, 0, 0, 0}) == 18.0);
    CHECK(eval_str("-x1^2", {2, 0, 0, 0}) == -4.0);
    CHECK(eval_str("2^3", {0, 0, 0, 0}) == 8.0);
}

TEST_CASE("leading minus negates the first term only") {
    CHECK(eval_str("-2+5", {0, 0, 0, 0}) == 3.0);
    CHECK(eval_str("-x1*x2+1", {2, 3, 0, 0}) == -5.0);
}

TEST_CASE("functions match the C library") {
    const std::array<double, 4> x{0.3, 1.7, 0.0, 0.0};
    CHECK(eval_str("sin(x1)", x) == std::sin(0.3));
    CHECK(eval_str("cos(x1)", x) == std::cos(0.3));
    CHECK(eval_str("exp(x1)", x) == std::exp(0.3));
    CHECK(eval_str("log(x2)", x) == std::log(1.7));
    CHECK(eval_str("sqrt(x2)", x) == std::sqrt(1.7));
    CHECK(eval_str("sin(cos(x1))", x) == std::sin(std::cos(0.3)));
}

TEST_CASE("whitespace is insignificant") {
    CHECK(eval_str("  1 +  2 * x1 ", {5, 0, 0, 0}) == 11.0);
    CHECK(eval_str("sqrt ( x1 ) ^ 2", {4, 0, 0, 0}) == 4.0);
}

TEST_CASE("integer exponent applies to the factor") {
    CHECK(eval_str("x1^0", {9, 0, 0, 0}) == 1.0);
    CHECK(eval_str("x1^5", {2, 0, 0, 0}) == 32.0);
    CHECK(eval_str("(x1+x2)^3", {1, 1, 0, 0}) == 8.0);
}

TEST_CASE("malformed input raises with a position") {
    CHECK_THROWS_AS(parse_expression(""), ParseError);
    CHECK_THROWS_AS(parse_expression("x5"), ParseError);
    CHECK_THROWS_AS(parse_expression("1+"), ParseError);
    CHECK_THROWS_AS(parse_expression("(1+2"), ParseError);
    CHECK_THROWS_AS(parse_expression("foo(1)"), ParseError);
    CHECK_THROWS_AS(parse_expression("1 2"), ParseError);
    CHECK_THROWS_AS(parse_expression("x1^-2"), ParseError);
    CHECK_THROWS_AS(parse_expression("x1^x2"), ParseError);
    CHECK_THROWS_AS(parse_expression("sin x1"), ParseError);
    CHECK_THROWS_AS(parse_expression("1..2"), ParseError);

    try {
        parse_expression("1+*2");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.position() == 2);
    }
}

TEST_CASE("unparse of a parse evaluates identically") {
    const std::array<std::string, 6> sources{
        "1+2*3",
        "-x1^2 + sin(x2)*cos(x3)",
        "exp(x1*x2) / (1 + x3^2)",
        "sqrt(1 + x1^2 + x2^2)",
        "x1*x2*x3*x4 - 0.5",
        "log(2 + sin(x4))"};
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(0.1, 1.5);
    for (const std::string& src : sources) {
        Expr e = parse_expression(src);
        Expr round = parse_expression(e.unparse());
        for (int k = 0; k < 10; ++k) {
            std::array<double, 4> x{uni(rng), uni(rng), uni(rng), uni(rng)};
            CHECK(e.eval<double>(x) == round.eval<double>(x));
        }
    }
}

TEST_CASE("same_tree distinguishes structure, not value") {
    CHECK(parse_expression("x1+x2").same_tree(parse_expression("x1 + x2")));
    CHECK_FALSE(parse_expression("x1+x2").same_tree(parse_expression("x2+x1")));
    CHECK_FALSE(parse_expression("2").same_tree(parse_expression("1+1")));
    CHECK(parse_expression("sin(x3)^2").same_tree(parse_expression("sin( x3 )^2")));
}

TEST_CASE("rename_coords permutes evaluation arguments") {
    Expr e = parse_expression("x1 + 10*x3 + 100*x4");
    // swap the roles of x3 and x4
    Expr swapped = e.rename_coords({0, 1, 3, 2});
    CHECK(eval_at(e, 1, 0, 2, 3) == 321.0);
    CHECK(eval_at(swapped, 1, 0, 2, 3) == 231.0);
}

TEST_CASE("dual evaluation produces exact derivatives") {
    Expr e = parse_expression("sin(x1)*exp(x2) + x1^3/(1+x4^2)");
    auto f = [](double a, double b, double d) {
        return std::sin(a) * std::exp(b) + a * a * a / (1 + d * d);
    };
    const double a = 0.7, b = -0.4, d = 0.9;
    std::array<Dual<double>, 4> x{Dual<double>{a, 1}, Dual<double>{b, 0}, Dual<double>{0, 0},
                                  Dual<double>{d, 0}};
    Dual<double> r = e.eval<Dual<double>>(x);
    CHECK(r.a == Catch::Approx(f(a, b, d)).epsilon(1e-14));
    const double h = 1e-6;
    double fd = (f(a + h, b, d) - f(a - h, b, d)) / (2 * h);
    CHECK(r.b == Catch::Approx(fd).margin(1e-8));
}

TEST_CASE("expression builders compose with operators") {
    Expr e = Expr::coord(0) * Expr::coord(1) + Expr::number(2.0);
    CHECK(eval_at(e, 3, 4, 0, 0) == 14.0);
    Expr p = Expr::pow(Expr::coord(2), 3);
    CHECK(eval_at(p, 0, 0, 2, 0) == 8.0);
    Expr c = Expr::call(Func::Exp, Expr::number(0.0));
    CHECK(eval_at(c, 0, 0, 0, 0) == 1.0);
}
