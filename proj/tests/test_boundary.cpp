#include <doctest.h>

#include "beltrami/boundary.hpp"
#include "beltrami/error.hpp"
#include "beltrami/exprfield.hpp"
#include "beltrami/field.hpp"
#include "beltrami/parallel.hpp"

#include <cmath>
#include <numbers>

using namespace beltrami;

namespace {
constexpr double pi = std::numbers::pi;
constexpr double j1_prime_at_root = -0.21723362821122175;
} // namespace

TEST_CASE("restriction of the spheromak")
{
    const BeltramiField f = catalog_lookup("spheromak:1,1");
    const SurfaceField sf = restrict_to_boundary(f);
    double worst = 0.0;
    for (int i = 0; i < 64; ++i)
        for (int k = 0; k < 128; k += 7) {
            const double t = (i + 0.5) * pi / 64, p = 2 * pi * k / 128;
            const Vec2 a = sf.components(t, p);
            worst = std::max(worst, std::abs(a[0] + j1_prime_at_root * std::sin(t)));
            worst = std::max(worst, std::abs(a[1]));
        }
    CHECK(worst < 1e-8);

    const SurfaceField s3 = restrict_to_boundary(scale_field(f, 3.0));
    CHECK((s3.components(1.0, 2.0) - 3.0 * sf.components(1.0, 2.0)).norm() < 1e-14);
}

TEST_CASE("non-tangent fields are rejected")
{
    const Domain b = Domain::ball(1.0);
    const BeltramiField up = make_expression_field(parse_field("0,0,1", b), "up");
    CHECK_THROWS_AS(restrict_to_boundary(up), NotTangentError);
    CHECK_THROWS_AS(restrict_to_boundary(catalog_lookup("abc:1,1,1")), IncompatibleDomain);
}

TEST_CASE("closedness residual")
{
    const SurfaceField sph = restrict_to_boundary(catalog_lookup("spheromak:1,1"));
    CHECK(closedness_residual(sph) < 1e-8);

    const SurfaceField exact(1.0, [](double t, double) { return Vec2(std::sin(t), 0.0); });
    CHECK(closedness_residual(exact) < 1e-10);

    // d(R sin^2 t dphi) = 2 R sin t cos t dt ^ dphi, normalized by R^2 scale
    const double R = 2.0;
    const SurfaceField swirl(R, [](double t, double) { return Vec2(0.0, std::sin(t)); }, 1.0);
    CHECK(closedness_residual(swirl) == doctest::Approx(1.0 / R).epsilon(1e-3));
    CHECK_THROWS_AS(recover_potential(swirl), NotClosedError);
}

TEST_CASE("potential recovery")
{
    const SurfaceField sf = restrict_to_boundary(catalog_lookup("spheromak:1,1"));
    const SphereCoords base{pi / 2, 0.0};
    const PotentialGrid pg = recover_potential(sf, base);
    CHECK(pg.path_defect < 1e-8);
    CHECK(std::abs(potential_at(sf, base, base)) == 0.0);
    double worst = 0.0;
    for (int i = 0; i < pg.grid.n_theta; ++i)
        for (int k = 0; k < pg.grid.n_phi; ++k) {
            const double expected = -j1_prime_at_root * (std::cos(base.theta) - std::cos(pg.grid.theta(i)));
            worst = std::max(worst, std::abs(pg.at(i, k) - expected));
        }
    CHECK(worst < 1e-10);
    const CosineFit fit = fit_cosine(sf, pg);
    CHECK(fit.max_residual < 1e-6);
    CHECK(fit.coefficient == doctest::Approx(j1_prime_at_root).epsilon(1e-10));
    CHECK(gradient_consistency_defect(sf, pg) < 1e-6);
    CHECK(pg.grid.theta(0) == 0.05);
    CHECK(pg.grid.theta(pg.grid.n_theta - 1) == doctest::Approx(pi - 0.05));
}

TEST_CASE("boundary zero census")
{
    const BeltramiField f = catalog_lookup("spheromak:1,1");
    const BoundaryCensus c = boundary_zero_census(SurfaceField(f));
    REQUIRE(c.count() == 2);
    CHECK(c.bound_satisfied);
    CHECK(c.zero_fraction < 1e-3);
    bool north = false, south = false;
    for (const auto& z : c.zeros) {
        north = north || (z.cartesian - Vec3(0, 0, 1)).norm() < 1e-10;
        south = south || (z.cartesian - Vec3(0, 0, -1)).norm() < 1e-10;
    }
    CHECK(north);
    CHECK(south);

    const BoundaryCensus s = boundary_zero_census(SurfaceField(scale_field(f, 0.5)));
    CHECK(s.count() == 2);
}

TEST_CASE("boundary field lines run between the poles")
{
    const BeltramiField f = catalog_lookup("spheromak:1,1");
    const SurfaceField sf(f);
    const BoundaryCensus c = boundary_zero_census(sf);
    auto pole_of = [&](int idx) { return c.zeros[static_cast<std::size_t>(idx)].cartesian[2]; };

    const BoundaryTrace t = trace_boundary_line(sf, c, {pi / 2, 0.0}, 60.0);
    REQUIRE(t.forward_limit >= 0);
    REQUIRE(t.backward_limit >= 0);
    // B points along -z at the equator: forward to the south pole
    CHECK(pole_of(t.forward_limit) == doctest::Approx(-1.0));
    CHECK(pole_of(t.backward_limit) == doctest::Approx(1.0));
    CHECK(t.potential_increasing);
    CHECK(t.min_potential_increment > 0.0);
    CHECK(t.min_return_distance > 0.05);

    const BoundaryTrace p = trace_boundary_line(sf, c, {0.0, 0.0}, 60.0);
    CHECK(p.constant);
}

TEST_CASE("analysis is independent of the thread count")
{
    const BeltramiField f = catalog_lookup("spheromak:1,1");
    BoundaryOptions opts;
    opts.traces = 6;
    opts.seed = 3;
    set_thread_count(1);
    const BoundaryReport a = analyze_boundary(f, opts);
    set_thread_count(4);
    const BoundaryReport b = analyze_boundary(f, opts);
    set_thread_count(0);
    REQUIRE(a.traces.size() == b.traces.size());
    for (std::size_t i = 0; i < a.traces.size(); ++i) {
        CHECK(a.traces[i].start.theta == b.traces[i].start.theta);
        CHECK(a.traces[i].forward_gap == b.traces[i].forward_gap);
    }
    CHECK(a.potential.values == b.potential.values);
}
