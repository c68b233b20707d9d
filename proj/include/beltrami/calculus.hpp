#pragma once

#include "beltrami/domain.hpp"
#include "beltrami/field.hpp"
#include "beltrami/types.hpp"

#include <functional>
#include <optional>

namespace beltrami {

/// Central differences with Richardson extrapolation over steps h, h/2, ...
struct FdScheme {
    double base_step = 1e-3;
    int extrapolation_levels = 2;

    /// Default scheme for a domain: step 1e-3 times the domain length scale.
    static FdScheme for_domain(const Domain& domain);
    void validate() const;
};

using ScalarFunction = std::function<double(const Point3&)>;
using VectorFunction = std::function<Vec3(const Point3&)>;

/// Estimate of d^alpha f(p), |alpha| <= 6. On the torus stencil nodes are
/// wrapped; on the ball every node must stay inside the domain or
/// StencilOutOfDomain is thrown. With no domain the stencil is unrestricted.
double fd_partial(const ScalarFunction& f, const MultiIndex& alpha, const Point3& p, const FdScheme& scheme,
                  const Domain* domain = nullptr);

/// Jacobian J(i, j) = d_j X^i by first-order central differences with
/// extrapolation. Near the ball boundary the step halves until the stencil
/// fits, failing below 1e-8 R.
Mat3 fd_jacobian(const VectorFunction& f, const Point3& p, const FdScheme& scheme, const Domain& domain);

/// (|curl_FD X - lambda X| + |div_FD X|) / (|X| + scale).
double beltrami_residual(const BeltramiField& field, const Point3& p, const FdScheme& scheme);

/// |X x curl_FD X| / (|X|^2 + scale^2).
double collinearity_residual(const BeltramiField& field, const Point3& p, const FdScheme& scheme);

} // namespace beltrami
