#include "beltrami/domain.hpp"

#include "beltrami/error.hpp"
#include "beltrami/random.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace beltrami {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

Domain Domain::torus(const Vec3& periods)
{
    for (int i = 0; i < 3; ++i)
        if (!(periods[i] > 0.0) || !std::isfinite(periods[i]))
            throw ParameterError("domains::torus: periods must be positive and finite");
    return Domain(DomainKind::Torus3, periods, 0.0);
}

Domain Domain::torus_2pi() { return torus(Vec3::Constant(two_pi)); }

Domain Domain::ball(double radius)
{
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw ParameterError("domains::ball: radius must be positive and finite");
    return Domain(DomainKind::Ball3, Vec3::Zero(), radius);
}

const Vec3& Domain::periods() const
{
    if (!is_torus())
        throw UnsupportedOperation("domains::periods: ball has no periods");
    return periods_;
}

double Domain::radius() const
{
    if (!is_ball())
        throw UnsupportedOperation("domains::radius: torus has no radius");
    return radius_;
}

double Domain::length_scale() const
{
    return is_torus() ? periods_.maxCoeff() / two_pi : radius_;
}

double Domain::extent() const { return is_torus() ? periods_.maxCoeff() : 2.0 * radius_; }

Vec3 Domain::lower_corner() const
{
    return is_torus() ? Vec3::Zero() : Vec3::Constant(-radius_);
}

double Domain::membership_tolerance() const { return 1e-12 * (is_ball() ? radius_ : 1.0); }

bool Domain::contains(const Point3& p) const
{
    if (!p.allFinite())
        return false;
    if (is_torus())
        return true;
    return p.norm() <= radius_ + membership_tolerance();
}

Point3 Domain::wrap(const Vec3& raw) const
{
    if (!is_torus())
        throw UnsupportedOperation("domains::wrap: wrap is defined on the torus only");
    Point3 out;
    for (int i = 0; i < 3; ++i) {
        const double L = periods_[i];
        double v = std::fmod(raw[i], L);
        if (v < 0.0)
            v += L;
        // fmod of a tiny negative number can round up to exactly L
        if (v >= L)
            v = 0.0;
        out[i] = v;
    }
    return out;
}

Vec3 Domain::displacement(const Point3& p, const Point3& q) const
{
    Vec3 d = q - p;
    if (is_torus()) {
        for (int i = 0; i < 3; ++i) {
            const double L = periods_[i];
            d[i] -= L * std::round(d[i] / L);
        }
    }
    return d;
}

double Domain::distance(const Point3& p, const Point3& q) const
{
    if (is_ball() && (!contains(p) || !contains(q)))
        throw DomainError("domains::distance: point outside the ball");
    if (is_torus()) {
        const Point3 a = wrap(p);
        const Point3 b = wrap(q);
        double s = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double delta = std::abs(a[i] - b[i]);
            const double m = std::min(delta, periods_[i] - delta);
            s += m * m;
        }
        return std::sqrt(s);
    }
    return (q - p).norm();
}

std::vector<Point3> Domain::sample_uniform(std::size_t n, std::uint64_t seed) const
{
    return sample_uniform(n, seed, "domain.sample_uniform");
}

std::vector<Point3> Domain::sample_uniform(std::size_t n, std::uint64_t seed, const std::string& label) const
{
    std::vector<Point3> out;
    out.reserve(n);
    auto rng = RandomStream::derive(seed, label);
    while (out.size() < n) {
        if (is_torus()) {
            out.emplace_back(rng.uniform() * periods_[0], rng.uniform() * periods_[1],
                             rng.uniform() * periods_[2]);
        } else {
            const Vec3 p(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
            if (p.squaredNorm() <= 1.0)
                out.push_back(radius_ * p);
        }
    }
    return out;
}

std::string Domain::describe() const
{
    std::ostringstream os;
    os.precision(17);
    if (is_torus())
        os << "torus3(" << periods_[0] << "," << periods_[1] << "," << periods_[2] << ")";
    else
        os << "ball3(" << radius_ << ")";
    return os.str();
}

bool operator==(const Domain& a, const Domain& b)
{
    if (a.kind_ != b.kind_)
        return false;
    return a.is_torus() ? a.periods_ == b.periods_ : a.radius_ == b.radius_;
}

} // namespace beltrami
