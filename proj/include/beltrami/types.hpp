#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>

namespace beltrami {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;

/// Point of a model domain. Torus points are kept in the canonical cell,
/// ball points in Cartesian coordinates.
using Point3 = Vec3;

/// Multi-index over (x, y, z) for partial derivatives.
struct MultiIndex {
    std::array<int, 3> n{0, 0, 0};

    constexpr int order() const { return n[0] + n[1] + n[2]; }
    constexpr int operator[](int i) const { return n[static_cast<std::size_t>(i)]; }

    constexpr MultiIndex plus(int axis) const
    {
        MultiIndex r = *this;
        ++r.n[static_cast<std::size_t>(axis)];
        return r;
    }

    friend constexpr bool operator==(const MultiIndex&, const MultiIndex&) = default;
    friend constexpr auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
};

/// curl from a Jacobian J(i, j) = d_j X^i.
inline Vec3 curl_of(const Mat3& J)
{
    return {J(2, 1) - J(1, 2), J(0, 2) - J(2, 0), J(1, 0) - J(0, 1)};
}

} // namespace beltrami
