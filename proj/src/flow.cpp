#include "beltrami/flow.hpp"

#include "beltrami/error.hpp"
#include "beltrami/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace beltrami {

namespace {

// Dormand-Prince 5(4) tableau with Hairer's dense-output coefficients.
namespace dp {
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
} // namespace dp

struct DenseStep {
    std::array<Vec3, 5> r;
    double t0;
    double h;

    Vec3 at(double t) const
    {
        const double s = (t - t0) / h;
        const double s1 = 1.0 - s;
        return r[0] + s * (r[1] + s1 * (r[2] + s * (r[3] + s1 * r[4])));
    }
};

Vec3 hermite(const Vec3& a, const Vec3& va, const Vec3& b, const Vec3& vb, double dt, double s)
{
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * a + h10 * dt * va + h01 * b + h11 * dt * vb;
}

struct SegmentMin {
    double distance;
    double s;
};

// Minimum of |H(s) - target| over s in [s_lo, s_hi].
SegmentMin segment_min(const Vec3& a, const Vec3& va, const Vec3& b, const Vec3& vb, double dt,
                       const Vec3& target, double s_lo, double s_hi)
{
    auto dist = [&](double s) { return (hermite(a, va, b, vb, dt, s) - target).norm(); };
    constexpr int probes = 8;
    double best_s = s_lo;
    double best = dist(s_lo);
    for (int k = 1; k <= probes; ++k) {
        const double s = s_lo + (s_hi - s_lo) * k / probes;
        const double d = dist(s);
        if (d < best) {
            best = d;
            best_s = s;
        }
    }
    double lo = std::max(s_lo, best_s - (s_hi - s_lo) / probes);
    double hi = std::min(s_hi, best_s + (s_hi - s_lo) / probes);
    constexpr double g = 0.6180339887498949;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = dist(x1), f2 = dist(x2);
    for (int it = 0; it < 40; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = dist(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = dist(x2);
        }
    }
    const double s = 0.5 * (lo + hi);
    const double d = dist(s);
    if (d < best)
        return {d, s};
    return {best, best_s};
}

Point3 canonical(const Domain& domain, const Point3& p)
{
    return domain.is_torus() ? domain.wrap(p) : p;
}

} // namespace

std::string to_string(OrbitType t)
{
    switch (t) {
    case OrbitType::Constant: return "Constant";
    case OrbitType::Periodic: return "Periodic";
    case OrbitType::NonPeriodic: return "NonPeriodic";
    case OrbitType::Indeterminate: return "Indeterminate";
    }
    return "Indeterminate";
}

OrbitType orbit_type_from_string(const std::string& s)
{
    if (s == "Constant") return OrbitType::Constant;
    if (s == "Periodic") return OrbitType::Periodic;
    if (s == "NonPeriodic") return OrbitType::NonPeriodic;
    if (s == "Indeterminate") return OrbitType::Indeterminate;
    throw ParameterError("flow::classify: unknown orbit type '" + s + "'");
}

Trajectory integrate(const BeltramiField& field, const Point3& p0, double t_end, double tol,
                     const IntegrationOptions& options)
{
    const Domain& domain = field.domain();
    if (!domain.contains(p0))
        throw DomainError("flow::integrate: start point outside the domain");
    if (!(tol > 0.0))
        throw ParameterError("flow::integrate: tolerance must be positive");
    if (!std::isfinite(t_end))
        throw ParameterError("flow::integrate: t_end must be finite");

    Trajectory traj;
    traj.field_name = field.name();
    traj.domain = domain;
    traj.start = canonical(domain, p0);
    traj.t_end = t_end;

    const double R = domain.is_ball() ? domain.radius() : 0.0;
    const double atol = tol * domain.length_scale();
    const double dir = t_end >= 0.0 ? 1.0 : -1.0;
    const double span = std::abs(t_end);

    auto push = [&](double t, const Point3& lifted) {
        Point3 q = lifted;
        if (domain.is_ball()) {
            const double r = q.norm();
            if (options.project_to_sphere && r > 0.0)
                q *= R / r;
            else if (r > R)
                q *= R / r;
        }
        traj.times.push_back(t);
        traj.lifted.push_back(q);
        traj.points.push_back(canonical(domain, q));
        traj.velocities.push_back(field.eval(q));
    };

    Point3 y = p0;
    if (options.project_to_sphere && domain.is_ball() && y.norm() > 0.0)
        y *= R / y.norm();

    Vec3 k1 = field.eval(y);
    push(0.0, y);
    if (k1.norm() < options.zero_speed_tol * field.scale() || field.is_zero() || span == 0.0) {
        traj.constant = k1.norm() < options.zero_speed_tol * field.scale() || field.is_zero();
        if (span > 0.0) {
            if (options.output_step > 0.0) {
                const auto n_out = static_cast<std::size_t>(std::floor(span / options.output_step + 1e-9));
                for (std::size_t k = 1; k <= n_out; ++k)
                    push(dir * k * options.output_step, y);
            }
            if (traj.times.back() != t_end)
                push(t_end, y);
        }
        if (traj.constant)
            traj.classification.type = OrbitType::Constant;
        if (dir < 0.0) {
            std::reverse(traj.times.begin(), traj.times.end());
            std::reverse(traj.points.begin(), traj.points.end());
            std::reverse(traj.lifted.begin(), traj.lifted.end());
            std::reverse(traj.velocities.begin(), traj.velocities.end());
        }
        return traj;
    }

    double t = 0.0;
    double h = dir * std::min(span, 0.05 * domain.length_scale() / std::max(k1.norm(), 1e-300));
    h = dir * std::max(std::abs(h), 1e-6 * span);
    std::size_t next_out = 1;
    const double out_step = options.output_step;

    while (dir * (t_end - t) > 0.0) {
        if (traj.stats.steps + traj.stats.rejected > options.max_steps)
            throw StiffnessError("flow::integrate: step budget exhausted");
        if (dir * (t + h - t_end) > 0.0)
            h = t_end - t;

        const Vec3 k2 = field.eval(y + h * (dp::a21 * k1));
        const Vec3 k3 = field.eval(y + h * (dp::a31 * k1 + dp::a32 * k2));
        const Vec3 k4 = field.eval(y + h * (dp::a41 * k1 + dp::a42 * k2 + dp::a43 * k3));
        const Vec3 k5 = field.eval(y + h * (dp::a51 * k1 + dp::a52 * k2 + dp::a53 * k3 + dp::a54 * k4));
        const Vec3 k6 =
            field.eval(y + h * (dp::a61 * k1 + dp::a62 * k2 + dp::a63 * k3 + dp::a64 * k4 + dp::a65 * k5));
        const Vec3 y_new =
            y + h * (dp::a71 * k1 + dp::a73 * k3 + dp::a74 * k4 + dp::a75 * k5 + dp::a76 * k6);
        const Vec3 k7 = field.eval(y_new);
        const Vec3 err = h * (dp::e1 * k1 + dp::e3 * k3 + dp::e4 * k4 + dp::e5 * k5 + dp::e6 * k6 + dp::e7 * k7);

        double en = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double sc = atol + tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
            en = std::max(en, std::abs(err[i]) / sc);
        }
        if (!std::isfinite(en))
            en = 1e10;

        if (en <= 1.0) {
            DenseStep dense;
            dense.t0 = t;
            dense.h = h;
            dense.r[0] = y;
            dense.r[1] = y_new - y;
            dense.r[2] = h * k1 - dense.r[1];
            dense.r[3] = dense.r[1] - h * k7 - dense.r[2];
            dense.r[4] = h * (dp::d1 * k1 + dp::d3 * k3 + dp::d4 * k4 + dp::d5 * k5 + dp::d6 * k6 + dp::d7 * k7);

            const double t_new = t + h;
            if (out_step > 0.0) {
                for (;;) {
                    const double t_out = dir * static_cast<double>(next_out) * out_step;
                    if (dir * (t_out - t_new) > 0.0 || dir * (t_out - t_end) >= 0.0)
                        break;
                    push(t_out, dense.at(t_out));
                    ++next_out;
                }
            }

            ++traj.stats.steps;
            traj.stats.max_error = std::max(traj.stats.max_error, en);
            t = t_new;
            y = y_new;
            k1 = k7;

            if (domain.is_ball()) {
                const double r = y.norm();
                if (r > R * (1.0 + 1e-6))
                    throw EscapeError("flow::integrate: trajectory left the ball (|p| = " + std::to_string(r) + ")");
                if (options.project_to_sphere ? r > 0.0 : r > R * (1.0 + 1e-12)) {
                    y *= R / r;
                    k1 = field.eval(y);
                }
            }
        } else {
            ++traj.stats.rejected;
        }

        const double fac = en > 0.0 ? 0.9 * std::pow(en, -0.2) : 5.0;
        h *= std::clamp(fac, 0.2, en <= 1.0 ? 5.0 : 1.0);
        if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t)))
            throw StiffnessError("flow::integrate: step size underflow at t = " + std::to_string(t));
    }
    push(t_end, y);

    if (dir < 0.0) {
        std::reverse(traj.times.begin(), traj.times.end());
        std::reverse(traj.points.begin(), traj.points.end());
        std::reverse(traj.lifted.begin(), traj.lifted.end());
        std::reverse(traj.velocities.begin(), traj.velocities.end());
    }
    return traj;
}

std::pair<double, double> min_return_distance(const Trajectory& traj, double t_lo, double t_hi)
{
    const Domain& domain = traj.domain;
    double best = std::numeric_limits<double>::infinity();
    double best_t = 0.0;
    if (traj.constant) {
        return {0.0, t_lo};
    }
    for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
        const double ta = traj.times[k];
        const double tb = traj.times[k + 1];
        const double dt = tb - ta;
        if (dt <= 0.0)
            continue;
        const double abs_lo = std::min(std::abs(ta), std::abs(tb));
        const double abs_hi = std::max(std::abs(ta), std::abs(tb));
        if (abs_hi < t_lo || abs_lo > t_hi)
            continue;

        const Vec3& a = traj.lifted[k];
        const Vec3& b = traj.lifted[k + 1];
        const Vec3& va = traj.velocities[k];
        const Vec3& vb = traj.velocities[k + 1];
        const Vec3 target = a + domain.displacement(a, traj.start);
        const double bound = (b - a).norm() + 0.25 * dt * (va.norm() + vb.norm());
        const double da = (a - target).norm();
        const double db = (b - target).norm();
        if (std::min(da, db) - bound > best)
            continue;

        // parameter range of the segment inside the window
        double s_lo = 0.0, s_hi = 1.0;
        auto s_of = [&](double abs_t) {
            const double t = ta >= 0.0 && tb > 0.0 ? abs_t : -abs_t;
            return (t - ta) / dt;
        };
        if (abs_lo < t_lo || abs_hi > t_hi) {
            const double s1 = s_of(std::max(abs_lo, t_lo));
            const double s2 = s_of(std::min(abs_hi, t_hi));
            s_lo = std::clamp(std::min(s1, s2), 0.0, 1.0);
            s_hi = std::clamp(std::max(s1, s2), 0.0, 1.0);
        }
        const SegmentMin m = segment_min(a, va, b, vb, dt, target, s_lo, s_hi);
        if (m.distance < best) {
            best = m.distance;
            best_t = std::abs(ta + m.s * dt);
        }
    }
    return {best, best_t};
}

Classification classify(const Trajectory& traj, double return_eps, double min_period)
{
    Classification out;
    if (traj.constant) {
        out.type = OrbitType::Constant;
        return out;
    }
    const double horizon = std::abs(traj.t_end);
    if (horizon < 2.0 * min_period || traj.size() < 2) {
        out.type = OrbitType::Indeterminate;
        return out;
    }

    // samples ordered by increasing |t|
    std::vector<std::size_t> order(traj.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = traj.t_end >= 0.0 ? i : order.size() - 1 - i;

    const Domain& domain = traj.domain;
    auto dist = [&](std::size_t i) { return domain.displacement(traj.start, traj.points[i]).norm(); };

    // Each visit is a maximal run of samples within return_eps; its time is
    // the refined minimum over the segments touching the run.
    std::vector<double> visit_times;
    std::size_t i = 0;
    while (i < order.size()) {
        const std::size_t idx = order[i];
        if (std::abs(traj.times[idx]) < min_period || dist(idx) >= return_eps) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < order.size() && dist(order[j + 1]) < return_eps)
            ++j;
        const double lo = std::abs(traj.times[order[i > 0 ? i - 1 : i]]);
        const double hi = std::abs(traj.times[order[j + 1 < order.size() ? j + 1 : j]]);
        const auto [d, t] = min_return_distance(traj, std::max(lo, min_period), hi);
        (void)d;
        visit_times.push_back(t);
        i = j + 1;
    }

    if (visit_times.size() >= 2) {
        const double t1 = visit_times[0];
        const double t2 = visit_times[1];
        const double period = t2 - t1;
        const double m = std::round(t1 / period);
        if (period > 0.0 && m >= 1.0 && std::abs(t1 / m - period) <= 0.01 * period) {
            out.type = OrbitType::Periodic;
            out.period = period;
            return out;
        }
        out.type = OrbitType::NonPeriodic;
        return out;
    }
    if (visit_times.size() == 1 && horizon < 2.02 * visit_times[0]) {
        out.type = OrbitType::Indeterminate;
        return out;
    }
    out.type = OrbitType::NonPeriodic;
    return out;
}

RecurrenceReport recurrence_experiment(const BeltramiField& field, std::size_t n, double horizon, double eps,
                                       std::uint64_t seed, double tol)
{
    if (n < 1)
        throw ParameterError("flow::recurrence_experiment: n must be >= 1");
    if (!(horizon > 0.0) || !(eps > 0.0))
        throw ParameterError("flow::recurrence_experiment: horizon and radius must be positive");
    field.require_nonzero("flow::recurrence_experiment");

    RecurrenceReport report;
    report.n = n;
    report.horizon = horizon;
    report.radius = eps;
    report.seed = seed;
    report.tol = tol;
    const auto starts = field.domain().sample_uniform(n, seed, "flow.recurrence");
    report.records.resize(n);

    IntegrationOptions opts;
    opts.output_step = 0.05;
    parallel_for(n, [&](std::size_t i) {
        RecurrenceRecord rec;
        rec.start = starts[i];
        try {
            const Trajectory fwd = integrate(field, starts[i], horizon, tol, opts);
            if (fwd.constant) {
                rec.constant = true;
            } else {
                const Trajectory bwd = integrate(field, starts[i], -horizon, tol, opts);
                std::tie(rec.forward_distance, rec.forward_time) =
                    min_return_distance(fwd, 0.25 * horizon, horizon);
                std::tie(rec.backward_distance, rec.backward_time) =
                    min_return_distance(bwd, 0.25 * horizon, horizon);
            }
        } catch (const Error& e) {
            rec.error = e.what();
            rec.forward_distance = rec.backward_distance = std::numeric_limits<double>::infinity();
        }
        report.records[i] = rec;
    });

    std::size_t fwd = 0, bwd = 0;
    for (const auto& r : report.records) {
        if (!r.error.empty())
            continue;
        if (r.forward_distance < eps)
            ++fwd;
        if (r.backward_distance < eps)
            ++bwd;
    }
    report.recurrent_fraction_forward = static_cast<double>(fwd) / static_cast<double>(n);
    report.recurrent_fraction_backward = static_cast<double>(bwd) / static_cast<double>(n);
    return report;
}

double volume_preservation_check(const BeltramiField& field, const Point3& p, double horizon, double h,
                                 double tol)
{
    if (!(h > 0.0))
        throw ParameterError("flow::volume_preservation_check: step must be positive");
    if (horizon == 0.0)
        return 0.0;
    IntegrationOptions opts;
    opts.output_step = 0.0;
    Mat3 J;
    for (int k = 0; k < 3; ++k) {
        Vec3 e = Vec3::Zero();
        e[k] = h;
        const Trajectory plus = integrate(field, p + e, horizon, tol, opts);
        const Trajectory minus = integrate(field, p - e, horizon, tol, opts);
        J.col(k) = (plus.lifted_end() - minus.lifted_end()) / (2.0 * h);
    }
    return std::abs(J.determinant() - 1.0);
}

double time_reversal_defect(const BeltramiField& field, const Point3& p, double horizon, double tol)
{
    IntegrationOptions opts;
    opts.output_step = 0.0;
    const Trajectory fwd = integrate(field, p, horizon, tol, opts);
    const Trajectory back = integrate(field, fwd.lifted_end(), -horizon, tol, opts);
    return field.domain().displacement(back.lifted_end(), p).norm();
}

} // namespace beltrami
