#include <doctest.h>

#include "beltrami/calculus.hpp"
#include "beltrami/error.hpp"
#include "beltrami/exprfield.hpp"
#include "beltrami/field.hpp"
#include "beltrami/random.hpp"

#include <cmath>
#include <numbers>

using namespace beltrami;

namespace {
constexpr double pi = std::numbers::pi;

BeltramiField expr_field(const std::string& src, const Domain& d = Domain::torus_2pi())
{
    return make_expression_field(parse_field(src, d), src);
}
} // namespace

TEST_CASE("finite-difference partials")
{
    const FdScheme s;
    CHECK(fd_partial([](const Point3& p) { return std::cos(p[2]); }, MultiIndex{{0, 0, 1}}, Vec3(0, 0, pi / 2), s) ==
          doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(std::abs(fd_partial([](const Point3& p) { return std::sin(p[2]) - std::cos(p[1]); }, MultiIndex{{0, 1, 0}},
                              Vec3(0, 0, pi / 2), s)) < 1e-8);
    CHECK(fd_partial([](const Point3& p) { return std::cos(p[1]); }, MultiIndex{{0, 2, 0}}, Vec3(0, 0, 0), s) ==
          doctest::Approx(-1.0).epsilon(1e-5));
    // mixed third partial of a polynomial is exact up to rounding
    const FdScheme coarse{1e-2, 2};
    CHECK(fd_partial([](const Point3& p) { return p[0] * p[0] * p[1] + p[2]; }, MultiIndex{{2, 1, 0}},
                     Vec3(0.3, 0.1, 0.2), coarse) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(fd_partial([](const Point3& p) { return p[0]; }, MultiIndex{{0, 0, 0}}, Vec3(0.5, 0, 0), s) == 0.5);
}

TEST_CASE("scheme validation")
{
    CHECK_THROWS_AS((FdScheme{0.0, 2}.validate()), ParameterError);
    CHECK_THROWS_AS((FdScheme{1e-3, -1}.validate()), ParameterError);
    CHECK_THROWS_AS(fd_partial([](const Point3&) { return 0.0; }, MultiIndex{{7, 0, 0}}, Vec3::Zero(), FdScheme{}),
                    ParameterError);
}

TEST_CASE("stencils respect the domain")
{
    const Domain b = Domain::ball(1.0);
    auto f = [](const Point3& p) { return p[2] * p[2]; };
    CHECK_THROWS_AS(fd_partial(f, MultiIndex{{0, 0, 1}}, Vec3(0, 0, 1.0 - 1e-5), FdScheme{}, &b), StencilOutOfDomain);
    CHECK(fd_partial(f, MultiIndex{{0, 0, 1}}, Vec3(0, 0, 0.5), FdScheme{}, &b) == doctest::Approx(1.0));
    // torus stencils wrap: derivative of the periodic coordinate function sin
    const Domain t = Domain::torus_2pi();
    CHECK(fd_partial([](const Point3& p) { return std::sin(p[0]); }, MultiIndex{{1, 0, 0}}, Vec3(0, 0, 0), FdScheme{},
                     &t) == doctest::Approx(1.0).epsilon(1e-9));
    // the Jacobian shrinks its step near the sphere
    const Mat3 J = fd_jacobian([](const Point3& p) { return Vec3(p[2] * p[2], 0, 0); }, Vec3(0, 0, 1.0 - 1e-5),
                               FdScheme::for_domain(b), b);
    CHECK(J(0, 2) == doctest::Approx(2.0 * (1.0 - 1e-5)).epsilon(1e-6));
}

TEST_CASE("Beltrami residual")
{
    const BeltramiField abc = catalog_lookup("abc:1,0,-1");
    const FdScheme s = FdScheme::for_domain(abc.domain());
    for (const auto& p : abc.domain().sample_uniform(100, 1))
        CHECK(beltrami_residual(abc, p, s) < 1e-6);

    const BeltramiField sph = catalog_lookup("spheromak:1,1");
    const FdScheme sb = FdScheme::for_domain(sph.domain());
    for (const auto& p : sph.domain().sample_uniform(200, 1))
        if (p.norm() < 0.9)
            CHECK(beltrami_residual(sph, p, sb) < 1e-6);

    const BeltramiField bad = expr_field("sin(z),0,0");
    CHECK(beltrami_residual(bad, Vec3(0.3, 0.2, 0.0), s) >= 0.3);
}

TEST_CASE("collinearity residual")
{
    for (const char* name : {"abc:1,1,1", "abc:1,0,-1", "spheromak:1,1"}) {
        const BeltramiField f = catalog_lookup(name);
        const FdScheme s = FdScheme::for_domain(f.domain());
        for (const auto& p : f.domain().sample_uniform(50, 2))
            CHECK(collinearity_residual(f, p, s) < 1e-6);
    }
    // X = (y,0,0) has curl (0,0,-1), so X x curl X = (0,y,0)
    const BeltramiField shear = expr_field("y,0,0", Domain::torus(Vec3(4, 4, 4)));
    const FdScheme s = FdScheme::for_domain(shear.domain());
    const double y = 0.5;
    const double expected = y / (y * y + shear.scale() * shear.scale());
    CHECK(collinearity_residual(shear, Vec3(0, y, 0), s) == doctest::Approx(expected).epsilon(1e-6));
    const BeltramiField abc = catalog_lookup("abc:1,0,-1");
    CHECK(collinearity_residual(abc, Vec3(0, 0, pi / 2), s) < 1e-15);
}
