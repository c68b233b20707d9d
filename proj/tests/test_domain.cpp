#include <doctest.h>

#include "beltrami/domain.hpp"
#include "beltrami/error.hpp"
#include "beltrami/parallel.hpp"
#include "beltrami/random.hpp"

#include <cmath>
#include <numbers>

using namespace beltrami;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("torus wrap reduces into the fundamental cell")
{
    const Domain t = Domain::torus_2pi();
    CHECK((t.wrap(Vec3(0, 0, 0)) - Vec3(0, 0, 0)).norm() == 0.0);
    CHECK((t.wrap(Vec3(2 * pi + 0.1, 0, 0)) - Vec3(0.1, 0, 0)).norm() < 1e-14);
    CHECK((t.wrap(Vec3(-0.1, 4 * pi, pi)) - Vec3(2 * pi - 0.1, 0, pi)).norm() < 1e-14);
    const Point3 w = t.wrap(Vec3(-1e-300, 0, 0));
    CHECK(w[0] >= 0.0);
    CHECK(w[0] < 2 * pi);
}

TEST_CASE("wrap is a torus-only operation")
{
    CHECK_THROWS_AS(Domain::ball(1.0).wrap(Vec3(0, 0, 0)), UnsupportedOperation);
    CHECK_THROWS_AS(Domain::ball(1.0).periods(), UnsupportedOperation);
    CHECK_THROWS_AS(Domain::torus_2pi().radius(), UnsupportedOperation);
}

TEST_CASE("distance uses the minimum image on the torus and chords in the ball")
{
    const Domain t = Domain::torus_2pi();
    CHECK(t.distance(Vec3(0, 0, 0), Vec3(2 * pi - 0.1, 0, 0)) == doctest::Approx(0.1).epsilon(1e-13));
    CHECK(t.distance(Vec3(0, 0, 0), Vec3(pi, pi, pi)) == doctest::Approx(pi * std::sqrt(3.0)));
    const Domain b = Domain::ball(1.0);
    CHECK(b.distance(Vec3(0, 0, 0), Vec3(0, 0, 0.5)) == doctest::Approx(0.5));
    CHECK_THROWS_AS(b.distance(Vec3(0, 0, 0), Vec3(0, 0, 1.5)), DomainError);
}

TEST_CASE("invalid geometry parameters are rejected")
{
    CHECK_THROWS_AS(Domain::ball(0.0), ParameterError);
    CHECK_THROWS_AS(Domain::ball(-1.0), ParameterError);
    CHECK_THROWS_AS(Domain::torus(Vec3(1, 0, 1)), ParameterError);
}

TEST_CASE("membership")
{
    const Domain b = Domain::ball(2.0);
    CHECK(b.contains(Vec3(0, 0, 2.0)));
    CHECK_FALSE(b.contains(Vec3(0, 0, 2.0 + 1e-6)));
    CHECK(b.boundary_components() == 1);
    CHECK(Domain::torus_2pi().boundary_components() == 0);
}

TEST_CASE("uniform sampling on the torus has the right means")
{
    const Domain t = Domain::torus_2pi();
    CHECK(t.sample_uniform(0, 1).empty());
    const std::size_t n = 100000;
    const auto pts = t.sample_uniform(n, 42);
    REQUIRE(pts.size() == n);
    Vec3 mean = Vec3::Zero();
    for (const auto& p : pts) {
        CHECK(t.contains(p));
        mean += p;
    }
    mean /= static_cast<double>(n);
    const double sigma = 2 * pi / std::sqrt(12.0);
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(mean[i] - pi) < 3 * sigma / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("uniform sampling in the ball follows the volume ratio")
{
    const Domain b = Domain::ball(1.0);
    const std::size_t n = 100000;
    const auto pts = b.sample_uniform(n, 42);
    std::size_t inner = 0;
    for (const auto& p : pts) {
        CHECK(p.norm() <= 1.0);
        if (p.norm() <= 0.5)
            ++inner;
    }
    const double frac = static_cast<double>(inner) / static_cast<double>(n);
    CHECK(std::abs(frac - 0.125) < 3 * std::sqrt(0.125 * 0.875 / static_cast<double>(n)));
}

TEST_CASE("sampling is deterministic in seed and label")
{
    const Domain t = Domain::torus_2pi();
    CHECK(t.sample_uniform(10, 3) == t.sample_uniform(10, 3));
    CHECK(t.sample_uniform(10, 3) != t.sample_uniform(10, 4));
    CHECK(t.sample_uniform(10, 3, "a") != t.sample_uniform(10, 3, "b"));
}

TEST_CASE("random substreams")
{
    auto a = RandomStream::derive(1, "x", 0);
    auto b = RandomStream::derive(1, "x", 0);
    auto c = RandomStream::derive(1, "x", 1);
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u != c.uniform());
    double sum = 0, sq = 0;
    auto s = RandomStream::derive(9, "normal");
    for (int i = 0; i < 20000; ++i) {
        const double v = s.normal();
        sum += v;
        sq += v * v;
    }
    CHECK(std::abs(sum / 20000) < 0.03);
    CHECK(std::abs(sq / 20000 - 1.0) < 0.05);
}

TEST_CASE("parallel_for visits each index once and rethrows")
{
    set_thread_count(4);
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits)
        CHECK(h == 1);
    CHECK_THROWS_AS(parallel_for(10,
                                 [](std::size_t i) {
                                     if (i == 7)
                                         throw DomainError("test");
                                 }),
                    DomainError);
    set_thread_count(0);
}

TEST_CASE("descriptor")
{
    CHECK(Domain::ball(1.0).describe() == "ball3(1)");
    CHECK(Domain::torus_2pi() == Domain::torus(Vec3::Constant(2 * pi)));
}
