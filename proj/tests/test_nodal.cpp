#include <doctest.h>

#include "beltrami/error.hpp"
#include "beltrami/exprfield.hpp"
#include "beltrami/field.hpp"
#include "beltrami/nodal.hpp"

#include <cmath>
#include <numbers>

using namespace beltrami;

namespace {
constexpr double pi = std::numbers::pi;

double circle_distance(const Domain& d, const Point3& p)
{
    const double a = d.displacement(p, Point3(p[0], 0.0, pi / 2)).norm();
    const double b = d.displacement(p, Point3(p[0], pi, 1.5 * pi)).norm();
    return std::min(a, b);
}

BeltramiField expr_field(const std::string& src, const Domain& d = Domain::torus_2pi())
{
    return make_expression_field(parse_field(src, d), src);
}
} // namespace

TEST_CASE("degenerate ABC zeros lie on two circles")
{
    const BeltramiField f = catalog_lookup("abc:1,0,-1");
    const ZeroSet zs = find_zeros(f, 48);
    REQUIRE_FALSE(zs.records.empty());
    CHECK(zs.cluster_count == 2);
    for (const auto& r : zs.records) {
        CHECK(circle_distance(f.domain(), r.location) < 1e-8);
        CHECK(r.residual < 1e-12 * f.scale());
    }
}

TEST_CASE("isolated ABC zeros match the brute-force oracle")
{
    // 200^3 grid minima of |X|^2 refined by Newton (independent script):
    // all eight zeros sit at odd multiples of pi/4
    const double q = pi / 4;
    const std::vector<Point3> oracle = {
        {q, 7 * q, 5 * q},     {q, 5 * q, 3 * q}, {3 * q, q, 5 * q}, {3 * q, 3 * q, 3 * q},
        {5 * q, q, 7 * q},     {5 * q, 3 * q, q}, {7 * q, 5 * q, q}, {7 * q, 7 * q, 7 * q},
    };
    const BeltramiField f = catalog_lookup("abc:1,1,1");
    const ZeroSet zs = find_zeros(f, 64);
    CHECK(zs.records.size() == oracle.size());
    CHECK(zs.cluster_count == 8);
    for (const auto& p : oracle) {
        double best = 1e9;
        for (const auto& r : zs.records)
            best = std::min(best, f.domain().distance(p, r.location));
        CHECK(best < 1e-9);
    }
    for (const auto& r : zs.records) {
        const RankData d = rank_identities_at_zero(f, r.location, MultiIndex{});
        CHECK(d.rank >= 2);
        CHECK(d.symmetry_defect < 1e-8 * d.norm);
        CHECK(d.trace < 1e-8 * d.norm);
    }
}

TEST_CASE("spheromak has no interior zeros")
{
    const BeltramiField f = catalog_lookup("spheromak:1,1");
    const ZeroSet zs = find_zeros(f, 48);
    for (const auto& r : zs.records)
        CHECK(r.location.norm() >= 1.0 - 1e-3);
}

TEST_CASE("zero sets are invariant under scaling")
{
    const BeltramiField f = catalog_lookup("abc:1,1,1");
    const ZeroSet a = find_zeros(f, 32);
    const ZeroSet b = find_zeros(scale_field(f, -3.0), 32);
    REQUIRE(a.records.size() == b.records.size());
    for (const auto& r : a.records) {
        double best = 1e9;
        for (const auto& s : b.records)
            best = std::min(best, f.domain().distance(r.location, s.location));
        CHECK(best < 1e-10);
    }
}

TEST_CASE("order of a zero")
{
    const BeltramiField abc = catalog_lookup("abc:1,0,-1");
    const OrderResult o = zero_order(abc, Vec3(0, 0, pi / 2));
    CHECK(o.order == 1);
    CHECK(o.beta.order() == 0);
    CHECK_FALSE(o.used_finite_differences);

    const BeltramiField sq = expr_field("x^2,0,0");
    const OrderResult o2 = zero_order(sq, Vec3(0, 0, 0));
    CHECK(o2.order == 2);
    CHECK(o2.beta == MultiIndex{{1, 0, 0}});

    const BeltramiField sph = catalog_lookup("spheromak:1,1");
    CHECK(zero_order(sph, Vec3(0, 0, 1)).order == 1);

    CHECK_THROWS_AS(zero_order(abc, Vec3(1, 1, 1)), ParameterError);
    const BeltramiField flat = expr_field("x^7,0,0", Domain::torus(Vec3(10, 10, 10)));
    CHECK_THROWS_AS(zero_order(flat, Vec3(0, 0, 0)), OrderUndetermined);
}

TEST_CASE("rank identities at zeros")
{
    const BeltramiField f = catalog_lookup("abc:1,0,-1");
    const RankData d = rank_identities_at_zero(f, Vec3(0, 0, pi / 2), MultiIndex{});
    Mat3 expected;
    expected << 0, 0, 0, 0, 0, -1, 0, -1, 0;
    CHECK((d.matrix - expected).norm() < 1e-14);
    CHECK(d.rank == 2);
    CHECK(d.symmetry_defect < 1e-14);
    CHECK(d.trace < 1e-14);

    const RankData e = rank_identities_at_zero(f, Vec3(0, pi, 1.5 * pi), MultiIndex{});
    CHECK(e.rank == 2);
    CHECK(e.symmetry_defect < 1e-8);
    CHECK(e.trace < 1e-8);

    const BeltramiField sph = catalog_lookup("spheromak:1,1");
    CHECK_THROWS_AS(rank_identities_at_zero(sph, Vec3(0, 0, 1), MultiIndex{}), InteriorOnlyError);
}

TEST_CASE("annotated zero records")
{
    const BeltramiField f = catalog_lookup("abc:1,0,-1");
    ZeroSet zs = find_zeros(f, 32);
    annotate_zeros(f, zs);
    for (const auto& r : zs.records) {
        REQUIRE(r.order);
        CHECK(*r.order == 1);
        REQUIRE(r.rank_data);
        CHECK(r.rank_data->rank == 2);
    }
}

TEST_CASE("box counting")
{
    const Domain t = Domain::torus_2pi();
    std::vector<Point3> circles;
    for (int i = 0; i < 5000; ++i) {
        const double x = 2 * pi * i / 5000.0;
        circles.emplace_back(x, 0.0, pi / 2);
        circles.emplace_back(x, pi, 1.5 * pi);
    }
    const double slope = box_counting_dimension(t, circles).slope;
    CHECK(slope >= 0.9);
    CHECK(slope <= 1.1);

    const double point = box_counting_dimension(t, {Point3(1, 2, 3)}).slope;
    CHECK(std::abs(point) <= 0.1);

    CHECK_THROWS_AS(box_counting_dimension(t, {}), EmptySetError);
    CHECK_THROWS_AS(box_counting_dimension(t, {Point3(1, 1, 1), Point3(4, 4, 4)}), InsufficientData);

    const BeltramiField f = catalog_lookup("abc:1,0,-1");
    ZeroSet zs = find_zeros(f, 48);
    densify_zero_curves(f, zs);
    const BoxCountResult bc = box_counting_dimension(zs);
    CHECK(bc.slope >= 0.85);
    CHECK(bc.slope <= 1.15);
    CHECK(zs.cluster_count == 2);
    for (const auto& r : zs.records)
        CHECK(circle_distance(f.domain(), r.location) < 1e-8);
}

TEST_CASE("clustering wraps around the torus")
{
    const Domain t = Domain::torus_2pi();
    const auto [labels, count] = cluster_points(t, {Point3(0.01, 1, 1), Point3(2 * pi - 0.01, 1, 1), Point3(3, 3, 3)}, 0.1);
    CHECK(count == 2);
    CHECK(labels[0] == labels[1]);
    CHECK(labels[0] != labels[2]);
}

TEST_CASE("nodal domains")
{
    const BeltramiField f = catalog_lookup("abc:1,0,-1");
    CHECK(count_nodal_domains(f, 64).domains == 1);
    CHECK(count_nodal_domains(f, 96).domains == 1);
    CHECK(count_nodal_domains(catalog_lookup("spheromak:1,1"), 48).domains == 1);
    CHECK(count_nodal_domains(expr_field("sin(z),0,0"), 64).domains == 2);
    CHECK_THROWS_AS(count_nodal_domains(f, 32, 10.0), DegenerateFieldError);
    CHECK_THROWS_AS(count_nodal_domains(f, 16), ParameterError);
}
