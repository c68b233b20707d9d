#include "beltrami/calculus.hpp"

#include "beltrami/error.hpp"

#include <cmath>
#include <vector>

namespace beltrami {

namespace {

// Weights of the n-th central difference: nodes at (n/2 - k) h, weight
// (-1)^k C(n, k), divided by h^n.
std::vector<std::pair<double, double>> central_stencil(int n)
{
    std::vector<std::pair<double, double>> nodes;
    double binom = 1.0;
    for (int k = 0; k <= n; ++k) {
        const double offset = 0.5 * n - k;
        nodes.emplace_back(offset, (k % 2 == 0 ? 1.0 : -1.0) * binom);
        binom = binom * (n - k) / (k + 1);
    }
    return nodes;
}

Point3 place(const Point3& p, const Vec3& offset, const Domain* domain)
{
    Point3 q = p + offset;
    if (domain && domain->is_torus())
        return domain->wrap(q);
    return q;
}

void check_inside(const Point3& p, const MultiIndex& alpha, const Domain* domain, double h)
{
    if (!domain || !domain->is_ball())
        return;
    Vec3 reach;
    for (int i = 0; i < 3; ++i)
        reach[i] = 0.5 * alpha[i] * h;
    // farthest stencil node from the centre lies at a corner of the stencil box
    double worst = 0.0;
    for (int corner = 0; corner < 8; ++corner) {
        Vec3 q = p;
        for (int i = 0; i < 3; ++i)
            q[i] += ((corner >> i) & 1 ? 1.0 : -1.0) * reach[i];
        worst = std::max(worst, q.norm());
    }
    if (worst > domain->radius() + domain->membership_tolerance())
        throw StencilOutOfDomain("calculus::fd_partial: stencil leaves the ball");
}

double raw_partial(const ScalarFunction& f, const MultiIndex& alpha, const Point3& p, double h,
                   const Domain* domain)
{
    const auto sx = central_stencil(alpha[0]);
    const auto sy = central_stencil(alpha[1]);
    const auto sz = central_stencil(alpha[2]);
    double sum = 0.0;
    for (const auto& [ox, wx] : sx)
        for (const auto& [oy, wy] : sy)
            for (const auto& [oz, wz] : sz)
                sum += wx * wy * wz * f(place(p, Vec3(ox * h, oy * h, oz * h), domain));
    return sum / std::pow(h, alpha.order());
}

/// Richardson tableau over h, h/2, h/4, ... for an even-power error series.
template <class T, class Estimate>
T richardson(Estimate estimate, double h, int levels)
{
    std::vector<T> row;
    row.reserve(static_cast<std::size_t>(levels));
    for (int k = 0; k < levels; ++k)
        row.push_back(estimate(h / std::pow(2.0, k)));
    for (int m = 1; m < levels; ++m) {
        const double factor = std::pow(4.0, m);
        for (int k = levels - 1; k >= m; --k)
            row[static_cast<std::size_t>(k)] =
                (factor * row[static_cast<std::size_t>(k)] - row[static_cast<std::size_t>(k - 1)]) / (factor - 1.0);
    }
    return row.back();
}

} // namespace

FdScheme FdScheme::for_domain(const Domain& domain)
{
    return FdScheme{1e-3 * domain.length_scale(), 2};
}

void FdScheme::validate() const
{
    if (!(base_step > 0.0) || !std::isfinite(base_step))
        throw ParameterError("calculus::FdScheme: base_step must be positive");
    if (extrapolation_levels < 1)
        throw ParameterError("calculus::FdScheme: extrapolation_levels must be >= 1");
}

double fd_partial(const ScalarFunction& f, const MultiIndex& alpha, const Point3& p, const FdScheme& scheme,
                  const Domain* domain)
{
    scheme.validate();
    if (alpha.order() > 6 || alpha[0] < 0 || alpha[1] < 0 || alpha[2] < 0)
        throw ParameterError("calculus::fd_partial: multi-index order must be in 0..6");
    if (alpha.order() == 0)
        return f(place(p, Vec3::Zero(), domain));
    check_inside(p, alpha, domain, scheme.base_step);
    return richardson<double>([&](double h) { return raw_partial(f, alpha, p, h, domain); }, scheme.base_step,
                              scheme.extrapolation_levels);
}

Mat3 fd_jacobian(const VectorFunction& f, const Point3& p, const FdScheme& scheme, const Domain& domain)
{
    scheme.validate();
    double h = scheme.base_step;
    if (domain.is_ball()) {
        const double R = domain.radius();
        const double floor = 1e-8 * R;
        auto fits = [&](double step) {
            for (int i = 0; i < 3; ++i)
                for (double s : {-1.0, 1.0}) {
                    Point3 q = p;
                    q[i] += s * step;
                    if (q.norm() > R + domain.membership_tolerance())
                        return false;
                }
            return true;
        };
        while (!fits(h)) {
            h *= 0.5;
            if (h < floor)
                throw StencilOutOfDomain("calculus::fd_jacobian: stencil step below 1e-8 R near the boundary");
        }
    }
    auto estimate = [&](double step) {
        Mat3 J;
        for (int j = 0; j < 3; ++j) {
            Vec3 e = Vec3::Zero();
            e[j] = step;
            J.col(j) = (f(place(p, e, &domain)) - f(place(p, -e, &domain))) / (2.0 * step);
        }
        return J;
    };
    return richardson<Mat3>(estimate, h, scheme.extrapolation_levels);
}

double beltrami_residual(const BeltramiField& field, const Point3& p, const FdScheme& scheme)
{
    field.require_nonzero("calculus::beltrami_residual");
    const Mat3 J = fd_jacobian([&](const Point3& q) { return field.eval(q); }, p, scheme, field.domain());
    const Vec3 X = field.eval(p);
    const double lambda = field.lambda() ? *field.lambda() : [&] {
        const double n2 = X.squaredNorm();
        return n2 > 1e-24 * field.scale() * field.scale() ? curl_of(J).dot(X) / n2 : 0.0;
    }();
    const double mismatch = (curl_of(J) - lambda * X).norm() + std::abs(J.trace());
    return mismatch / (X.norm() + field.scale());
}

double collinearity_residual(const BeltramiField& field, const Point3& p, const FdScheme& scheme)
{
    field.require_nonzero("calculus::collinearity_residual");
    const Mat3 J = fd_jacobian([&](const Point3& q) { return field.eval(q); }, p, scheme, field.domain());
    const Vec3 X = field.eval(p);
    const double s = field.scale();
    return X.cross(curl_of(J)).norm() / (X.squaredNorm() + s * s);
}

} // namespace beltrami
