#pragma once

#include "beltrami/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace beltrami {

enum class DomainKind { Torus3, Ball3 };

/// Flat model geometry: the 3-torus R^3 / (periods) or the Euclidean solid
/// ball of a given radius centred at the origin. Immutable.
class Domain {
public:
    static Domain torus(const Vec3& periods);
    static Domain torus_2pi();
    static Domain ball(double radius);

    DomainKind kind() const { return kind_; }
    bool is_torus() const { return kind_ == DomainKind::Torus3; }
    bool is_ball() const { return kind_ == DomainKind::Ball3; }

    /// Torus only.
    const Vec3& periods() const;
    /// Ball only.
    double radius() const;
    /// Number of boundary components: 0 (torus) or 1 (ball).
    int boundary_components() const { return is_ball() ? 1 : 0; }

    /// Characteristic length: period / 2pi (largest axis) on the torus,
    /// the radius on the ball.
    double length_scale() const;
    /// Side of the axis-aligned bounding cube.
    double extent() const;
    /// Lower corner of the bounding cube (0 on the torus, -R on the ball).
    Vec3 lower_corner() const;

    double membership_tolerance() const;
    bool contains(const Point3& p) const;

    /// Reduces each coordinate into [0, period). Torus only.
    Point3 wrap(const Vec3& raw) const;
    /// Minimum-image displacement q - p on the torus, plain difference on the ball.
    Vec3 displacement(const Point3& p, const Point3& q) const;
    double distance(const Point3& p, const Point3& q) const;

    /// n points i.i.d. uniform with respect to volume, deterministic in seed.
    std::vector<Point3> sample_uniform(std::size_t n, std::uint64_t seed) const;
    /// Same sampling law, stream selected by purpose label.
    std::vector<Point3> sample_uniform(std::size_t n, std::uint64_t seed, const std::string& label) const;

    std::string describe() const;

    friend bool operator==(const Domain& a, const Domain& b);

private:
    Domain(DomainKind kind, const Vec3& periods, double radius)
        : kind_(kind), periods_(periods), radius_(radius) {}

    DomainKind kind_;
    Vec3 periods_;
    double radius_;
};

} // namespace beltrami
