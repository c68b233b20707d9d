#include "beltrami/boundary.hpp"

#include "beltrami/error.hpp"
#include "beltrami/nodal.hpp"
#include "beltrami/parallel.hpp"
#include "beltrami/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace beltrami {

namespace {

constexpr double pi = std::numbers::pi;

struct GaussRule {
    std::array<double, 32> nodes{};
    std::array<double, 32> weights{};
};

// Legendre roots by Newton iteration from the Chebyshev guess.
const GaussRule& gauss32()
{
    static const GaussRule rule = [] {
        GaussRule r;
        constexpr int n = 32;
        for (int i = 0; i < n; ++i) {
            double x = std::cos(pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16)
                    break;
            }
            r.nodes[static_cast<std::size_t>(i)] = x;
            r.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        return r;
    }();
    return rule;
}

template <class F>
double integrate_arc(double a, double b, F&& f)
{
    if (a == b)
        return 0.0;
    const GaussRule& g = gauss32();
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < 32; ++i)
        s += g.weights[i] * f(mid + half * g.nodes[i]);
    return half * s;
}

Vec3 e_theta(SphereCoords c)
{
    return {std::cos(c.theta) * std::cos(c.phi), std::cos(c.theta) * std::sin(c.phi), -std::sin(c.theta)};
}

Vec3 e_phi(SphereCoords c) { return {-std::sin(c.phi), std::cos(c.phi), 0.0}; }

double probe_scale(double radius, const SurfaceField::Components& comps)
{
    (void)radius;
    double s = 0.0;
    for (int i = 0; i < 64; ++i)
        for (int k = 0; k < 128; ++k)
            s = std::max(s, comps((i + 0.5) * pi / 64, 2.0 * pi * k / 128).norm());
    return s;
}

/// Newton on the sphere in a tangent-plane chart around the current iterate.
std::optional<Point3> sphere_newton(const BeltramiField& field, Point3 p, double tol)
{
    const double R = field.domain().radius();
    p *= R / p.norm();
    auto tangent_basis = [](const Vec3& n) {
        const Vec3 ref = std::abs(n[0]) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
        const Vec3 e1 = n.cross(ref).normalized();
        return std::pair<Vec3, Vec3>{e1, n.cross(e1)};
    };
    auto tangential = [&](const Point3& q, const Vec3& e1, const Vec3& e2) {
        const Vec3 X = field.eval(q);
        return Vec2(X.dot(e1), X.dot(e2));
    };
    for (int iter = 0; iter < 60; ++iter) {
        const Vec3 n = p / R;
        const auto [e1, e2] = tangent_basis(n);
        const Vec2 r = tangential(p, e1, e2);
        if (r.norm() <= tol)
            return p;
        const Mat3 J = field.jacobian(p);
        Eigen::Matrix2d M;
        M << (J * e1).dot(e1), (J * e2).dot(e1), (J * e1).dot(e2), (J * e2).dot(e2);
        Eigen::JacobiSVD<Eigen::Matrix2d> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Vec2 s = svd.singularValues();
        if (s[0] == 0.0)
            return std::nullopt;
        Vec2 inv(1.0 / s[0], s[1] > 1e-10 * s[0] ? 1.0 / s[1] : 0.0);
        const Vec2 step = -(svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose() * r);
        double alpha = 1.0;
        bool moved = false;
        while (alpha > 1e-6) {
            Point3 q = p + alpha * (step[0] * e1 + step[1] * e2);
            q *= R / q.norm();
            const auto [f1, f2] = tangent_basis(q / R);
            if (tangential(q, f1, f2).norm() < r.norm()) {
                p = q;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!moved)
            break;
    }
    const Vec3 n = p / R;
    const auto [e1, e2] = tangent_basis(n);
    if (tangential(p, e1, e2).norm() <= tol)
        return p;
    return std::nullopt;
}

} // namespace

Point3 sphere_point(double radius, SphereCoords c)
{
    return radius * Vec3(std::sin(c.theta) * std::cos(c.phi), std::sin(c.theta) * std::sin(c.phi), std::cos(c.theta));
}

SphereCoords sphere_coords(const Point3& p)
{
    const double r = p.norm();
    SphereCoords c;
    c.theta = std::acos(std::clamp(p[2] / r, -1.0, 1.0));
    c.phi = std::atan2(p[1], p[0]);
    if (c.phi < 0.0)
        c.phi += 2.0 * pi;
    return c;
}

SurfaceField::SurfaceField(double radius, Components components, std::optional<double> scale)
    : radius_(radius), components_(std::move(components))
{
    if (!(radius > 0.0))
        throw ParameterError("boundary::SurfaceField: radius must be positive");
    scale_ = scale.value_or(probe_scale(radius, components_));
}

SurfaceField::SurfaceField(const BeltramiField& ambient)
    : radius_(ambient.domain().radius()), scale_(ambient.scale()), ambient_(ambient)
{
    const double R = radius_;
    components_ = [field = ambient, R](double theta, double phi) {
        const SphereCoords c{theta, phi};
        const Vec3 X = field.eval(sphere_point(R, c));
        return Vec2(X.dot(e_theta(c)), X.dot(e_phi(c)));
    };
}

SurfaceField restrict_to_boundary(const BeltramiField& field)
{
    if (!field.domain().is_ball())
        throw IncompatibleDomain("boundary::restrict_to_boundary: field must live on the ball");
    field.require_nonzero("boundary::restrict_to_boundary");
    const double defect = boundary_radial_defect(field, 64, 128);
    if (defect > 1e-8)
        throw NotTangentError("boundary::restrict_to_boundary: radial component " + std::to_string(defect) +
                              " of scale on the probe grid; field is not tangent to the boundary");
    return SurfaceField(field);
}

double SurfaceGrid::theta(int i) const
{
    return theta_min + (pi - 2.0 * theta_min) * i / (n_theta - 1);
}

double SurfaceGrid::phi(int k) const { return 2.0 * pi * k / n_phi; }

double closedness_residual(const SurfaceField& sf, const SurfaceGrid& grid)
{
    const double R = sf.radius();
    auto w_theta = [&](double t, double p) { return R * sf.components(t, p)[0]; };
    auto w_phi = [&](double t, double p) { return R * std::sin(t) * sf.components(t, p)[1]; };
    // central difference with one Richardson level
    auto derivative = [](auto&& g, double h) {
        const double d1 = (g(h) - g(-h)) / (2.0 * h);
        const double d2 = (g(0.5 * h) - g(-0.5 * h)) / h;
        return (4.0 * d2 - d1) / 3.0;
    };
    constexpr double h = 1e-3;
    double worst = 0.0;
    for (int i = 0; i < grid.n_theta; ++i) {
        const double t = grid.theta(i);
        for (int k = 0; k < grid.n_phi; ++k) {
            const double p = grid.phi(k);
            const double dt_wphi = derivative([&](double d) { return w_phi(t + d, p); }, h);
            const double dp_wtheta = derivative([&](double d) { return w_theta(t, p + d); }, h);
            worst = std::max(worst, std::abs(dt_wphi - dp_wtheta));
        }
    }
    return worst / (R * R * sf.scale());
}

double potential_at(const SurfaceField& sf, SphereCoords base, SphereCoords target, bool meridian_first)
{
    const double R = sf.radius();
    auto w_theta = [&](double t, double p) { return R * sf.components(t, p)[0]; };
    auto w_phi = [&](double t, double p) { return R * std::sin(t) * sf.components(t, p)[1]; };
    if (meridian_first) {
        return integrate_arc(base.theta, target.theta, [&](double t) { return w_theta(t, base.phi); }) +
               integrate_arc(base.phi, target.phi, [&](double p) { return w_phi(target.theta, p); });
    }
    return integrate_arc(base.phi, target.phi, [&](double p) { return w_phi(base.theta, p); }) +
           integrate_arc(base.theta, target.theta, [&](double t) { return w_theta(t, target.phi); });
}

PotentialGrid recover_potential(const SurfaceField& sf, SphereCoords base, const SurfaceGrid& grid)
{
    PotentialGrid pg;
    pg.grid = grid;
    pg.base = base;
    const std::size_t n = static_cast<std::size_t>(grid.n_theta) * grid.n_phi;
    pg.values.assign(n, 0.0);
    std::vector<double> defect(n, 0.0);
    parallel_for(n, [&](std::size_t idx) {
        const int i = static_cast<int>(idx / grid.n_phi);
        const int k = static_cast<int>(idx % grid.n_phi);
        const SphereCoords target{grid.theta(i), grid.phi(k)};
        const double a = potential_at(sf, base, target, true);
        const double b = potential_at(sf, base, target, false);
        pg.values[idx] = a;
        defect[idx] = std::abs(a - b);
    });
    pg.path_defect = *std::max_element(defect.begin(), defect.end());
    if (pg.path_defect > 1e-5 * sf.scale() * sf.radius())
        throw NotClosedError("boundary::recover_potential: path defect " + std::to_string(pg.path_defect) +
                             " exceeds 1e-5 scale R; the restricted 1-form is not closed");
    return pg;
}

double gradient_consistency_defect(const SurfaceField& sf, const PotentialGrid& pg)
{
    const SurfaceGrid& g = pg.grid;
    const double R = sf.radius();
    const double dt = (pi - 2.0 * g.theta_min) / (g.n_theta - 1);
    const double dp = 2.0 * pi / g.n_phi;
    auto d4 = [](double fm2, double fm1, double fp1, double fp2, double h) {
        return (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
    };
    double worst = 0.0;
    for (int i = 2; i + 2 < g.n_theta; ++i) {
        const double t = g.theta(i);
        for (int k = 0; k < g.n_phi; ++k) {
            auto wrap = [&](int kk) { return (kk % g.n_phi + g.n_phi) % g.n_phi; };
            const double ft = d4(pg.at(i - 2, k), pg.at(i - 1, k), pg.at(i + 1, k), pg.at(i + 2, k), dt);
            const double fp = d4(pg.at(i, wrap(k - 2)), pg.at(i, wrap(k - 1)), pg.at(i, wrap(k + 1)),
                                 pg.at(i, wrap(k + 2)), dp);
            const Vec2 a = sf.components(t, g.phi(k));
            worst = std::max(worst, std::abs(ft / R - a[0]));
            worst = std::max(worst, std::abs(fp / (R * std::sin(t)) - a[1]));
        }
    }
    return worst / sf.scale();
}

CosineFit fit_cosine(const SurfaceField& sf, const PotentialGrid& pg)
{
    const SurfaceGrid& g = pg.grid;
    Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
    Vec2 b = Vec2::Zero();
    for (int i = 0; i < g.n_theta; ++i) {
        const double c = std::cos(g.theta(i));
        for (int k = 0; k < g.n_phi; ++k) {
            const Vec2 row(1.0, c);
            A += row * row.transpose();
            b += row * pg.at(i, k);
        }
    }
    const Vec2 coef = A.ldlt().solve(b);
    CosineFit fit;
    fit.offset = coef[0];
    fit.coefficient = coef[1];
    double worst = 0.0;
    for (int i = 0; i < g.n_theta; ++i)
        for (int k = 0; k < g.n_phi; ++k)
            worst = std::max(worst, std::abs(pg.at(i, k) - coef[0] - coef[1] * std::cos(g.theta(i))));
    fit.max_residual = worst / (sf.scale() * sf.radius());
    return fit;
}

BoundaryCensus boundary_zero_census(const SurfaceField& sf, int n_theta, int n_phi, double refine_tol)
{
    if (!sf.ambient())
        throw ParameterError("boundary::boundary_zero_census: needs the ambient field");
    const BeltramiField& field = *sf.ambient();
    const double R = sf.radius();
    const double tol = refine_tol * sf.scale();

    std::vector<double> mag(static_cast<std::size_t>(n_theta) * n_phi);
    auto theta_of = [&](int i) { return (i + 0.5) * pi / n_theta; };
    auto phi_of = [&](int k) { return 2.0 * pi * k / n_phi; };
    std::size_t small = 0;
    for (int i = 0; i < n_theta; ++i)
        for (int k = 0; k < n_phi; ++k) {
            const double m = sf.components(theta_of(i), phi_of(k)).norm();
            mag[static_cast<std::size_t>(i * n_phi + k)] = m;
            if (m < 1e-6 * sf.scale())
                ++small;
        }

    // poles first, then local minima of |a| over the probe grid
    std::vector<Point3> seeds{Point3(0, 0, R), Point3(0, 0, -R)};
    for (int i = 0; i < n_theta; ++i)
        for (int k = 0; k < n_phi; ++k) {
            const double m = mag[static_cast<std::size_t>(i * n_phi + k)];
            bool minimum = true;
            for (int di = -1; di <= 1 && minimum; ++di)
                for (int dk = -1; dk <= 1; ++dk) {
                    const int ii = i + di;
                    if ((di == 0 && dk == 0) || ii < 0 || ii >= n_theta)
                        continue;
                    const int kk = ((k + dk) % n_phi + n_phi) % n_phi;
                    if (mag[static_cast<std::size_t>(ii * n_phi + kk)] < m) {
                        minimum = false;
                        break;
                    }
                }
            if (minimum)
                seeds.push_back(sphere_point(R, {theta_of(i), phi_of(k)}));
        }

    std::vector<std::optional<Point3>> refined(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t s) { refined[s] = sphere_newton(field, seeds[s], tol); });

    std::vector<Point3> found;
    for (const auto& r : refined)
        if (r)
            found.push_back(*r);

    BoundaryCensus census;
    census.boundary_components = 1;
    census.zero_fraction = static_cast<double>(small) / static_cast<double>(mag.size());
    if (!found.empty()) {
        const double eps = 2.0 * R * pi / n_theta;
        const auto [label, count] = cluster_points(field.domain(), found, eps);
        // representative: smallest residual per cluster
        std::vector<int> best(static_cast<std::size_t>(count), -1);
        for (std::size_t i = 0; i < found.size(); ++i) {
            int& b = best[static_cast<std::size_t>(label[i])];
            if (b < 0 || field.eval(found[i]).norm() < field.eval(found[static_cast<std::size_t>(b)]).norm())
                b = static_cast<int>(i);
        }
        for (int b : best) {
            const Point3& p = found[static_cast<std::size_t>(b)];
            census.zeros.push_back({sphere_coords(p), p, field.eval(p).norm()});
        }
    }
    census.bound_satisfied = static_cast<int>(census.count()) >= 2 * census.boundary_components;
    return census;
}

BoundaryTrace trace_boundary_line(const SurfaceField& sf, const BoundaryCensus& census, SphereCoords start,
                                  double horizon, SphereCoords potential_base)
{
    if (!sf.ambient())
        throw ParameterError("boundary::trace_boundary_line: needs the ambient field");
    const BeltramiField& field = *sf.ambient();
    const double R = sf.radius();
    const Point3 p0 = sphere_point(R, start);

    auto nearest = [&](const Point3& q) {
        int idx = -1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < census.zeros.size(); ++i) {
            const double d = (census.zeros[i].cartesian - q).norm();
            if (d < best) {
                best = d;
                idx = static_cast<int>(i);
            }
        }
        return std::pair<int, double>{idx, best};
    };

    BoundaryTrace out;
    out.start = start;
    out.horizon = horizon;
    IntegrationOptions opts;
    opts.project_to_sphere = true;
    opts.zero_speed_tol = 1e-8;

    if (field.eval(p0).norm() < opts.zero_speed_tol * field.scale()) {
        out.constant = true;
        const auto [idx, gap] = nearest(p0);
        out.forward_limit = out.backward_limit = gap < 1e-3 * R ? idx : -1;
        out.forward_gap = out.backward_gap = gap;
        out.potential_increasing = true;
        return out;
    }

    const double assign_tol = 1e-3 * R;
    Trajectory fwd, bwd;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const double T = horizon * (attempt == 0 ? 1.0 : 2.0);
        fwd = integrate(field, p0, T, 1e-10, opts);
        bwd = integrate(field, p0, -T, 1e-10, opts);
        out.horizon = T;
        const auto f = nearest(fwd.end());
        const auto b = nearest(bwd.end());
        out.forward_gap = f.second;
        out.backward_gap = b.second;
        out.forward_limit = f.second < assign_tol ? f.first : -1;
        out.backward_limit = b.second < assign_tol ? b.first : -1;
        if (out.forward_limit >= 0 && out.backward_limit >= 0)
            break;
    }

    // potential along the whole line, in increasing time
    std::vector<Point3> pts;
    for (std::size_t i = 0; i < bwd.size(); ++i)
        pts.push_back(bwd.points[i]);
    for (std::size_t i = 1; i < fwd.size(); ++i)
        pts.push_back(fwd.points[i]);
    const double active = 1e-6 * sf.scale();
    double min_inc = std::numeric_limits<double>::infinity();
    double prev_f = potential_at(sf, potential_base, sphere_coords(pts[0]));
    bool prev_active = field.eval(pts[0]).norm() > active;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double f = potential_at(sf, potential_base, sphere_coords(pts[i]));
        const bool is_active = field.eval(pts[i]).norm() > active;
        if (is_active && prev_active)
            min_inc = std::min(min_inc, f - prev_f);
        prev_f = f;
        prev_active = is_active;
    }
    out.min_potential_increment = std::isfinite(min_inc) ? min_inc : 0.0;
    out.potential_increasing = std::isfinite(min_inc) && min_inc > 0.0;

    const double T = out.horizon;
    out.min_return_distance =
        std::min(min_return_distance(fwd, 1.0, T).first, min_return_distance(bwd, 1.0, T).first);
    return out;
}

BoundaryReport analyze_boundary(const BeltramiField& field, const BoundaryOptions& options)
{
    BoundaryReport rep;
    const SurfaceField sf = restrict_to_boundary(field);
    rep.tangency_defect = boundary_radial_defect(field, 64, 128);
    rep.closedness = closedness_residual(sf, options.grid);
    rep.potential = recover_potential(sf, {pi / 2.0, 0.0}, options.grid);
    rep.gradient_defect = gradient_consistency_defect(sf, rep.potential);
    rep.cosine_fit = fit_cosine(sf, rep.potential);
    rep.census = boundary_zero_census(sf);

    // uniform starts on the sphere, kept away from the census zeros
    auto rng = RandomStream::derive(options.seed, "boundary.traces");
    std::vector<SphereCoords> starts;
    while (starts.size() < options.traces) {
        const Vec3 g(rng.normal(), rng.normal(), rng.normal());
        const Point3 p = field.domain().radius() * g.normalized();
        if (field.eval(p).norm() > 1e-3 * field.scale())
            starts.push_back(sphere_coords(p));
    }
    rep.traces.resize(starts.size());
    parallel_for(starts.size(), [&](std::size_t i) {
        rep.traces[i] = trace_boundary_line(sf, rep.census, starts[i], options.horizon);
    });
    return rep;
}

} // namespace beltrami
