#include <doctest.h>

#include "beltrami/calculus.hpp"
#include "beltrami/error.hpp"
#include "beltrami/exprfield.hpp"
#include "beltrami/field.hpp"
#include "beltrami/random.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace beltrami;

namespace {

double value_at(const std::string& src, const Vec3& p) { return expr::parse(src).evaluate(p); }

} // namespace

TEST_CASE("expression grammar and precedence")
{
    const Vec3 p(2.0, 3.0, 0.5);
    CHECK(value_at("1+2*3", p) == 7.0);
    CHECK(value_at("2^3^2", p) == 512.0);
    CHECK(value_at("-x^2", p) == -4.0);
    CHECK(value_at("(x+y)*z", p) == 2.5);
    CHECK(value_at("x/y/z", p) == doctest::Approx(2.0 / 3.0 / 0.5));
    CHECK(value_at("sqrt(y*3)", p) == 3.0);
    CHECK(value_at("exp(0)+cos(pi)", p) == 0.0);
    CHECK(value_at("1e-3*2", p) == 2e-3);
    CHECK(value_at("x - -y", p) == 5.0);
}

TEST_CASE("syntax errors report offsets")
{
    try {
        parse_field("x+*y, 0, 0", Domain::torus_2pi());
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 2);
        CHECK(std::string(e.what()).find("offset 2") != std::string::npos);
    }
    try {
        parse_field("0, sin(q), 0", Domain::torus_2pi());
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 7);
    }
    CHECK_THROWS_AS(parse_field("x, y", Domain::torus_2pi()), ParseError);
    CHECK_THROWS_AS(parse_field("x, y, (z", Domain::torus_2pi()), ParseError);
    CHECK_THROWS_AS(parse_field("x^y, 0, 0", Domain::torus_2pi()), ParseError);
}

TEST_CASE("expression ABC matches the catalog")
{
    const Domain t = Domain::torus_2pi();
    const BeltramiField e = make_expression_field(parse_field("sin(z)-cos(y), cos(z), -sin(y)", t), "e");
    const BeltramiField c = catalog_lookup("abc:1,0,-1");
    for (const auto& p : t.sample_uniform(100, 3)) {
        CHECK((e.eval(p) - c.eval(p)).norm() < 1e-12);
        CHECK((e.jacobian(p) - c.jacobian(p)).norm() < 1e-12);
    }
    CHECK_FALSE(e.lambda().has_value());
    CHECK(e.lambda_at(Vec3(0.1, 0.2, 0.3)) == doctest::Approx(1.0));
}

TEST_CASE("line-per-component files")
{
    const auto path = std::filesystem::temp_directory_path() / "beltrami_test_field.txt";
    {
        std::ofstream f(path);
        f << "sin(z) - cos(y)\ncos(z)\n-sin(y)\n";
    }
    const BeltramiField e = catalog_lookup("expr:" + path.string());
    CHECK((e.eval(Vec3(0, 0, 0)) - Vec3(-1, 1, 0)).norm() < 1e-15);
    std::filesystem::remove(path);
}

TEST_CASE("zero field parses but analyzers reject it")
{
    const BeltramiField z = make_expression_field(parse_field("0,0,0", Domain::torus_2pi()), "zero");
    CHECK(z.is_zero());
    CHECK_THROWS_AS(beltrami_residual(z, Vec3(1, 1, 1), FdScheme::for_domain(z.domain())), ZeroFieldError);
}

TEST_CASE("symbolic derivatives")
{
    using expr::parse;
    CHECK(parse("sin(z)").derivative(2).str() == parse("cos(z)").str());
    const expr::Expr d = parse("sin(z)-cos(y)").derivative(1);
    CHECK(d.str() == parse("sin(y)").str());
    const expr::Expr e = parse("exp(x*y)").derivative(0);
    CHECK(e.str() == parse("y*exp(x*y)").str());

    auto rng = RandomStream::derive(4, "test.derivative");
    for (int i = 0; i < 10; ++i) {
        const Vec3 p(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        const double h = 1e-5;
        const double fd = (parse("exp(x*y)").evaluate(p + Vec3(h, 0, 0)) -
                           parse("exp(x*y)").evaluate(p - Vec3(h, 0, 0))) / (2 * h);
        CHECK(std::abs(e.evaluate(p) - fd) < 1e-7);
    }
    // derivative table entries against central differences
    for (const char* src : {"x^3", "sqrt(1+x*x)", "x/(2+y)", "cos(x*z)", "-x", "2^3*x"}) {
        const expr::Expr f = parse(src);
        const Vec3 p(0.3, 0.4, 0.5);
        const double h = 1e-5;
        const double fd = (f.evaluate(p + Vec3(h, 0, 0)) - f.evaluate(p - Vec3(h, 0, 0))) / (2 * h);
        CHECK(std::abs(f.derivative(0).evaluate(p) - fd) < 1e-8);
    }
}

TEST_CASE("printed trees re-parse to the same function")
{
    for (const char* src : {"-sin(y)+x^2.5", "1/(x-3)*exp(-z)", "(-2)*x", "x^(-1)"}) {
        const expr::Expr f = expr::parse(src);
        const expr::Expr g = expr::parse(f.str());
        CHECK(g.str() == f.str());
        const Vec3 p(1.3, 0.2, 0.7);
        CHECK(g.evaluate(p) == f.evaluate(p));
    }
}

TEST_CASE("divergence and curl")
{
    const Domain t = Domain::torus_2pi();
    const auto abc = parse_field("sin(z)-cos(y), cos(z), -sin(y)", t);
    const DivCurl dc = divergence_and_curl(*abc);
    double v = -1.0;
    CHECK(dc.divergence.constant_value(v));
    CHECK(v == 0.0);

    const auto s = parse_field("sin(z),0,0", t);
    const DivCurl sc = divergence_and_curl(*s);
    const Vec3 p(0.1, 0.2, 0.3);
    CHECK(sc.divergence.evaluate(p) == 0.0);
    CHECK(sc.curl[0].evaluate(p) == 0.0);
    CHECK(sc.curl[1].evaluate(p) == doctest::Approx(std::cos(0.3)));
    CHECK(sc.curl[2].evaluate(p) == 0.0);

    const DivCurl cc = divergence_and_curl(*parse_field("1,2,3", t));
    CHECK(cc.divergence.is_constant());
    for (const auto& c : cc.curl) {
        double x = 1.0;
        CHECK(c.constant_value(x));
        CHECK(x == 0.0);
    }
}

TEST_CASE("higher partials are exact")
{
    const auto f = parse_field("x^2*sin(y), exp(z), 0", Domain::torus_2pi());
    const auto d = f->derivative(0, MultiIndex{{2, 1, 0}});
    REQUIRE(d);
    const Vec3 p(0.3, 0.9, 0.1);
    CHECK(d->evaluate(p) == doctest::Approx(2.0 * std::cos(0.9)));
    CHECK(f->derivative(1, MultiIndex{{0, 0, 6}})->evaluate(p) == doctest::Approx(std::exp(0.1)));
    CHECK_FALSE(f->derivative(1, MultiIndex{{0, 0, 7}}).has_value());
}

TEST_CASE("expression tangency on the ball")
{
    const Domain b = Domain::ball(1.0);
    CHECK(make_expression_field(parse_field("-y, x, 0", b), "rot").tangent_to_boundary());
    CHECK_FALSE(make_expression_field(parse_field("0, 0, 1", b), "up").tangent_to_boundary());
}
