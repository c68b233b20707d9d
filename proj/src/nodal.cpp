#include "beltrami/nodal.hpp"

#include "beltrami/calculus.hpp"
#include "beltrami/error.hpp"
#include "beltrami/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace beltrami {

namespace {

/// Uniform cell grid over the domain's bounding box.
struct CellGrid {
    Domain domain;
    int n;
    Vec3 lo;
    Vec3 h;

    CellGrid(const Domain& d, int res) : domain(d), n(res), lo(d.lower_corner())
    {
        if (d.is_torus())
            h = d.periods() / res;
        else
            h = Vec3::Constant(2.0 * d.radius() / res);
    }

    std::size_t count() const { return static_cast<std::size_t>(n) * n * n; }
    std::size_t index(int i, int j, int k) const
    {
        return (static_cast<std::size_t>(i) * n + j) * n + k;
    }
    std::array<int, 3> ijk(std::size_t idx) const
    {
        const int k = static_cast<int>(idx % n);
        const int j = static_cast<int>((idx / n) % n);
        const int i = static_cast<int>(idx / (static_cast<std::size_t>(n) * n));
        return {i, j, k};
    }
    Point3 center(std::size_t idx) const
    {
        const auto c = ijk(idx);
        return lo + Vec3((c[0] + 0.5) * h[0], (c[1] + 0.5) * h[1], (c[2] + 0.5) * h[2]);
    }
    double diagonal() const { return h.norm(); }
    double edge() const { return h.maxCoeff(); }
};

/// Bucketed point index for radius queries up to the bucket size.
class PointIndex {
public:
    PointIndex(const Domain& domain, double bucket) : domain_(domain), lo_(domain.lower_corner())
    {
        for (int i = 0; i < 3; ++i) {
            if (domain.is_torus()) {
                nb_[i] = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(domain.periods()[i] / bucket)));
                size_[i] = domain.periods()[i] / static_cast<double>(nb_[i]);
            } else {
                size_[i] = bucket;
                nb_[i] = static_cast<std::int64_t>(std::ceil(2.0 * domain.radius() * 1.5 / bucket)) + 4;
            }
        }
    }

    void insert(const Point3& p, std::size_t id) { buckets_[key(cell(p))].push_back({p, id}); }

    template <class F>
    void for_each_near(const Point3& p, double radius, F&& f) const
    {
        const auto c = cell(p);
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy)
                for (std::int64_t dz = -1; dz <= 1; ++dz) {
                    auto it = buckets_.find(key({c[0] + dx, c[1] + dy, c[2] + dz}));
                    if (it == buckets_.end())
                        continue;
                    for (const auto& [q, id] : it->second)
                        if (domain_.displacement(p, q).norm() <= radius)
                            f(id);
                }
    }

private:
    std::array<std::int64_t, 3> cell(const Point3& p) const
    {
        std::array<std::int64_t, 3> c{};
        for (int i = 0; i < 3; ++i)
            c[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(std::floor((p[i] - lo_[i]) / size_[i]));
        return c;
    }

    std::uint64_t key(std::array<std::int64_t, 3> c) const
    {
        std::uint64_t k = 0;
        for (int i = 0; i < 3; ++i) {
            std::int64_t v = c[static_cast<std::size_t>(i)];
            if (domain_.is_torus()) {
                v %= nb_[i];
                if (v < 0)
                    v += nb_[i];
            } else {
                v += 1 << 20;
            }
            k = (k << 21) | (static_cast<std::uint64_t>(v) & ((1u << 21) - 1));
        }
        return k;
    }

    Domain domain_;
    Vec3 lo_;
    Vec3 size_;
    std::array<std::int64_t, 3> nb_{};
    std::unordered_map<std::uint64_t, std::vector<std::pair<Point3, std::size_t>>> buckets_;
};

Mat3 pseudo_inverse(const Mat3& J)
{
    Eigen::JacobiSVD<Mat3> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec3 s = svd.singularValues();
    Vec3 inv = Vec3::Zero();
    for (int i = 0; i < 3; ++i)
        if (s[i] > 1e-10 * s[0])
            inv[i] = 1.0 / s[i];
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// Damped Gauss-Newton with pseudoinverse steps and halving line search.
std::optional<Point3> newton_refine(const BeltramiField& field, Point3 p, double tol, int max_iter = 60)
{
    const Domain& domain = field.domain();
    const double far = domain.is_ball() ? 1.5 * domain.radius() : std::numeric_limits<double>::infinity();
    Vec3 X = field.eval(p);
    double r = X.norm();
    for (int iter = 0; iter < max_iter && r > tol; ++iter) {
        const Mat3 J = field.jacobian(p);
        if (J.norm() == 0.0)
            return std::nullopt;
        const Vec3 step = -pseudo_inverse(J) * X;
        double alpha = 1.0;
        bool moved = false;
        while (alpha > 1e-6) {
            const Point3 q = p + alpha * step;
            const Vec3 Xq = field.eval(q);
            if (Xq.norm() < r) {
                p = q;
                X = Xq;
                r = Xq.norm();
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!moved || p.norm() > far)
            return std::nullopt;
    }
    if (r > tol)
        return std::nullopt;
    if (domain.is_torus())
        p = domain.wrap(p);
    else if (p.norm() > domain.radius()) {
        if (p.norm() > domain.radius() * (1.0 + 1e-9))
            return std::nullopt;
        p *= domain.radius() / p.norm();
        if (field.eval(p).norm() > tol)
            return std::nullopt;
    }
    return p;
}

bool is_interior(const Domain& domain, const Point3& p)
{
    return domain.is_torus() || p.norm() < domain.radius() * (1.0 - 1e-9);
}

ZeroRecord make_record(const BeltramiField& field, const Point3& p)
{
    ZeroRecord rec;
    rec.location = p;
    rec.residual = field.eval(p).norm();
    rec.interior = is_interior(field.domain(), p);
    return rec;
}

// All multi-indices of total order m, x-major.
std::vector<MultiIndex> multi_indices(int m)
{
    std::vector<MultiIndex> out;
    for (int a = m; a >= 0; --a)
        for (int b = m - a; b >= 0; --b)
            out.push_back(MultiIndex{{a, b, m - a - b}});
    return out;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

struct BoxTable {
    std::vector<std::pair<double, std::size_t>> counts;
    std::optional<double> slope;
};

BoxTable box_table(const Domain& domain, const std::vector<Point3>& points, int k_min, int k_max)
{
    BoxTable out;
    const double L = domain.extent();
    const Vec3 lo = domain.lower_corner();
    std::vector<double> xs, ys;
    for (int k = k_min; k <= k_max; ++k) {
        const std::int64_t nb = std::int64_t{1} << k;
        const double size = L / static_cast<double>(nb);
        std::unordered_set<std::uint64_t> boxes;
        for (const Point3& p : points) {
            std::uint64_t key = 0;
            for (int i = 0; i < 3; ++i) {
                auto b = static_cast<std::int64_t>(std::floor((p[i] - lo[i]) / size));
                b = std::clamp<std::int64_t>(b, 0, nb - 1);
                key = (key << 21) | static_cast<std::uint64_t>(b);
            }
            boxes.insert(key);
        }
        out.counts.emplace_back(size, boxes.size());
        // a scale where every point sits in its own box carries no information
        const bool usable = points.size() == 1 || boxes.size() < points.size();
        if (usable) {
            xs.push_back(std::log(1.0 / size));
            ys.push_back(std::log(static_cast<double>(boxes.size())));
        }
    }
    if (xs.size() >= 3)
        out.slope = least_squares_slope(xs, ys);
    return out;
}

} // namespace

std::vector<Point3> ZeroSet::locations() const
{
    std::vector<Point3> out;
    out.reserve(records.size());
    for (const auto& r : records)
        out.push_back(r.location);
    return out;
}

std::vector<Point3> ZeroSet::cluster_points(int cluster) const
{
    std::vector<Point3> out;
    for (std::size_t i = 0; i < records.size(); ++i)
        if (cluster_of[i] == cluster)
            out.push_back(records[i].location);
    return out;
}

std::pair<std::vector<int>, int> cluster_points(const Domain& domain, const std::vector<Point3>& points, double eps)
{
    const std::size_t n = points.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    };
    PointIndex index(domain, eps);
    for (std::size_t i = 0; i < n; ++i) {
        index.for_each_near(points[i], eps, [&](std::size_t j) {
            const std::size_t a = find(i), b = find(j);
            if (a != b)
                parent[std::max(a, b)] = std::min(a, b);
        });
        index.insert(points[i], i);
    }
    // label clusters in order of first appearance
    std::vector<int> label(n, -1);
    std::unordered_map<std::size_t, int> root_label;
    int count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = find(i);
        auto [it, inserted] = root_label.emplace(r, count);
        if (inserted)
            ++count;
        label[i] = it->second;
    }
    return {label, count};
}

ZeroSet zero_set_from_points(const Domain& domain, const std::vector<Point3>& points, double eps)
{
    ZeroSet zs;
    zs.domain = domain;
    zs.cell_size = eps / 2.0;
    for (const Point3& p : points) {
        ZeroRecord r;
        r.location = p;
        r.interior = is_interior(domain, p);
        zs.records.push_back(r);
    }
    std::tie(zs.cluster_of, zs.cluster_count) = cluster_points(domain, points, eps);
    return zs;
}

ZeroSet find_zeros(const BeltramiField& field, int grid_res, double refine_tol)
{
    if (grid_res < 8)
        throw ParameterError("nodal::find_zeros: grid_res must be >= 8");
    field.require_nonzero("nodal::find_zeros");
    const Domain& domain = field.domain();
    const CellGrid grid(domain, grid_res);
    const double tol = refine_tol * field.scale();
    const double half_diag = 0.5 * grid.diagonal();

    std::vector<double> speed(grid.count(), std::numeric_limits<double>::infinity());
    std::vector<double> slope(grid.count(), 0.0);
    parallel_for(grid.count(), [&](std::size_t idx) {
        const Point3 c = grid.center(idx);
        if (domain.is_ball() && c.norm() > domain.radius() + half_diag)
            return;
        speed[idx] = field.eval(c).norm();
        slope[idx] = field.jacobian(c).norm();
    });
    const double lipschitz = *std::max_element(slope.begin(), slope.end());
    const double threshold = 1.1 * lipschitz * half_diag;

    std::vector<std::size_t> seeds;
    for (std::size_t idx = 0; idx < grid.count(); ++idx)
        if (speed[idx] <= threshold)
            seeds.push_back(idx);

    std::vector<std::optional<Point3>> refined(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t s) { refined[s] = newton_refine(field, grid.center(seeds[s]), tol); });

    ZeroSet zs;
    zs.domain = domain;
    zs.cell_size = grid.edge();
    const double dedup = 1e-6 * domain.length_scale();
    PointIndex index(domain, std::max(dedup, 1e-300));
    std::vector<Point3> kept;
    for (const auto& r : refined) {
        if (!r)
            continue;
        bool duplicate = false;
        index.for_each_near(*r, dedup, [&](std::size_t) { duplicate = true; });
        if (duplicate)
            continue;
        index.insert(*r, kept.size());
        kept.push_back(*r);
        zs.records.push_back(make_record(field, *r));
    }
    std::tie(zs.cluster_of, zs.cluster_count) = cluster_points(domain, kept, 2.0 * zs.cell_size);
    return zs;
}

void densify_zero_curves(const BeltramiField& field, ZeroSet& zs, double step, double refine_tol)
{
    const Domain& domain = field.domain();
    const double ds = step > 0.0 ? step : domain.extent() / 1024.0;
    const double tol = refine_tol * field.scale();
    const std::size_t max_steps = static_cast<std::size_t>(64.0 * domain.extent() / ds);

    std::vector<Point3> traced;
    PointIndex index(domain, 2.0 * ds);

    auto null_direction = [&](const Point3& p) -> std::optional<Vec3> {
        Eigen::JacobiSVD<Mat3> svd(field.jacobian(p), Eigen::ComputeFullV);
        const Vec3 s = svd.singularValues();
        if (s[0] == 0.0 || s[1] <= 1e-6 * s[0] || s[2] >= 1e-6 * s[0])
            return std::nullopt;
        return Vec3(svd.matrixV().col(2));
    };

    const std::size_t n_seeds = zs.records.size();
    for (std::size_t sidx = 0; sidx < n_seeds; ++sidx) {
        const Point3 seed = zs.records[sidx].location;
        if (!is_interior(domain, seed))
            continue;
        bool covered = false;
        index.for_each_near(seed, 2.0 * ds, [&](std::size_t) { covered = true; });
        if (covered)
            continue;
        const auto v0 = null_direction(seed);
        if (!v0)
            continue;

        const std::size_t seed_id = traced.size();
        traced.push_back(seed);
        index.insert(seed, seed_id);

        for (double sense : {1.0, -1.0}) {
            Vec3 v = sense * *v0;
            Point3 q = seed;
            std::vector<std::size_t> recent{seed_id};
            for (std::size_t it = 0; it < max_steps; ++it) {
                const auto next = newton_refine(field, q + ds * v, tol);
                if (!next || !is_interior(domain, *next))
                    break;
                const double moved = domain.displacement(q, *next).norm();
                if (moved < 0.2 * ds || moved > 3.0 * ds)
                    break;
                auto w = null_direction(*next);
                if (!w)
                    break;
                if (w->dot(v) < 0.0)
                    *w = -*w;
                bool closed = false;
                index.for_each_near(*next, 0.6 * ds, [&](std::size_t id) {
                    if (std::find(recent.begin(), recent.end(), id) == recent.end())
                        closed = true;
                });
                if (closed)
                    break;
                const std::size_t id = traced.size();
                traced.push_back(*next);
                index.insert(*next, id);
                recent.push_back(id);
                if (recent.size() > 4)
                    recent.erase(recent.begin());
                q = *next;
                v = *w;
            }
        }
    }

    for (const Point3& p : traced)
        zs.records.push_back(make_record(field, p));
    std::tie(zs.cluster_of, zs.cluster_count) = cluster_points(domain, zs.locations(), 2.0 * zs.cell_size);
}

OrderResult zero_order(const BeltramiField& field, const Point3& p, int max_order, double derivative_tol)
{
    if (max_order < 1)
        throw ParameterError("nodal::zero_order: max_order must be >= 1");
    field.require_nonzero("nodal::zero_order");
    if (field.eval(p).norm() > 1e-8 * field.scale())
        throw ParameterError("nodal::zero_order: point is not a zero of the field");
    const double L = field.domain().length_scale();
    const Domain& domain = field.domain();

    OrderResult out;
    for (int m = 1; m <= max_order; ++m) {
        const double threshold = derivative_tol * field.scale() / std::pow(L, m);
        FdScheme scheme{L * std::pow(2.2e-16, 1.0 / (m + 4)), 2};
        for (const MultiIndex& alpha : multi_indices(m)) {
            for (int j = 0; j < 3; ++j) {
                double value = 0.0;
                if (auto exact = field.partial(j, alpha, p)) {
                    value = *exact;
                } else {
                    if (!out.used_finite_differences)
                        out.warnings.push_back("order " + std::to_string(m) +
                                               " partials not available symbolically; using finite differences");
                    out.used_finite_differences = true;
                    value = fd_partial([&](const Point3& q) { return field.eval(q)[j]; }, alpha, p, scheme, &domain);
                }
                if (std::abs(value) > threshold) {
                    out.order = m;
                    out.alpha = alpha;
                    out.component = j;
                    out.beta = alpha;
                    for (int axis = 0; axis < 3; ++axis)
                        if (alpha[axis] > 0) {
                            --out.beta.n[static_cast<std::size_t>(axis)];
                            break;
                        }
                    return out;
                }
            }
        }
    }
    throw OrderUndetermined("nodal::zero_order: all partials up to order " + std::to_string(max_order) +
                            " vanish; the zero may have infinite order");
}

RankData rank_identities_at_zero(const BeltramiField& field, const Point3& p, const MultiIndex& beta)
{
    const Domain& domain = field.domain();
    if (!is_interior(domain, p))
        throw InteriorOnlyError("nodal::rank_identities_at_zero: point lies on the boundary");

    RankData rd;
    if (beta.order() == 0) {
        rd.matrix = field.jacobian(p);
    } else {
        const double L = domain.length_scale();
        const int m = beta.order() + 1;
        FdScheme scheme{L * std::pow(2.2e-16, 1.0 / (m + 4)), 2};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const MultiIndex alpha = beta.plus(j);
                if (auto v = field.partial(i, alpha, p))
                    rd.matrix(i, j) = *v;
                else
                    rd.matrix(i, j) =
                        fd_partial([&](const Point3& q) { return field.eval(q)[i]; }, alpha, p, scheme, &domain);
            }
    }
    Eigen::JacobiSVD<Mat3> svd(rd.matrix);
    rd.singular_values = svd.singularValues();
    rd.norm = rd.singular_values[0];
    rd.rank = 0;
    for (int i = 0; i < 3; ++i)
        if (rd.singular_values[i] > 1e-6 * rd.norm)
            ++rd.rank;
    rd.symmetry_defect = (rd.matrix - rd.matrix.transpose()).cwiseAbs().maxCoeff();
    rd.trace = std::abs(rd.matrix.trace());
    return rd;
}

void annotate_zeros(const BeltramiField& field, ZeroSet& zs, int max_order)
{
    parallel_for(zs.records.size(), [&](std::size_t i) {
        ZeroRecord& rec = zs.records[i];
        try {
            const OrderResult o = zero_order(field, rec.location, max_order);
            rec.order = o.order;
            rec.beta = o.beta;
        } catch (const OrderUndetermined&) {
            rec.order.reset();
            return;
        }
        if (rec.interior)
            rec.rank_data = rank_identities_at_zero(field, rec.location, rec.beta);
    });
}

BoxCountResult box_counting_dimension(const Domain& domain, const std::vector<Point3>& points, int k_min, int k_max)
{
    if (points.empty())
        throw EmptySetError("nodal::box_counting_dimension: empty point set");
    if (k_min < 0 || k_max < k_min || k_max > 20)
        throw ParameterError("nodal::box_counting_dimension: invalid scale ladder");
    const BoxTable t = box_table(domain, points, k_min, k_max);
    if (!t.slope)
        throw InsufficientData("nodal::box_counting_dimension: fewer than 3 usable scales");
    BoxCountResult out;
    out.counts = t.counts;
    out.slope = *t.slope;
    return out;
}

BoxCountResult box_counting_dimension(const ZeroSet& zs, int k_min, int k_max)
{
    BoxCountResult out = box_counting_dimension(zs.domain, zs.locations(), k_min, k_max);
    for (int c = 0; c < zs.cluster_count; ++c)
        out.cluster_slopes.push_back(box_table(zs.domain, zs.cluster_points(c), k_min, k_max).slope);
    return out;
}

NodalResult count_nodal_domains(const BeltramiField& field, int grid_res, std::optional<double> zero_margin)
{
    if (grid_res < 32)
        throw ParameterError("nodal::count_nodal_domains: grid_res must be >= 32");
    field.require_nonzero("nodal::count_nodal_domains");
    const Domain& domain = field.domain();
    const CellGrid grid(domain, grid_res);
    const double margin = zero_margin.value_or(1.5 * grid.diagonal());
    const ZeroSet zs = find_zeros(field, grid_res);

    NodalResult out;
    out.zero_margin = margin;
    out.zero_points = zs.records.size();

    const int n = grid.n;
    std::vector<char> active(grid.count(), 1);
    if (domain.is_ball())
        for (std::size_t idx = 0; idx < grid.count(); ++idx)
            active[idx] = grid.center(idx).norm() < domain.radius();
    std::vector<char> excluded(grid.count(), 0);

    const bool torus = domain.is_torus();
    for (const ZeroRecord& rec : zs.records) {
        const Point3& z = rec.location;
        std::array<int, 3> base{}, reach{};
        for (int a = 0; a < 3; ++a) {
            base[static_cast<std::size_t>(a)] = static_cast<int>(std::floor((z[a] - grid.lo[a]) / grid.h[a]));
            reach[static_cast<std::size_t>(a)] = static_cast<int>(std::ceil(margin / grid.h[a])) + 1;
        }
        for (int di = -reach[0]; di <= reach[0]; ++di)
            for (int dj = -reach[1]; dj <= reach[1]; ++dj)
                for (int dk = -reach[2]; dk <= reach[2]; ++dk) {
                    std::array<int, 3> c{base[0] + di, base[1] + dj, base[2] + dk};
                    bool valid = true;
                    double d2 = 0.0;
                    for (int a = 0; a < 3; ++a) {
                        int& ci = c[static_cast<std::size_t>(a)];
                        // offset of the zero from the cell centre along this axis
                        double delta = z[a] - (grid.lo[a] + (ci + 0.5) * grid.h[a]);
                        if (torus) {
                            ci = ((ci % n) + n) % n;
                        } else if (ci < 0 || ci >= n) {
                            valid = false;
                            break;
                        }
                        const double gap = std::max(0.0, std::abs(delta) - 0.5 * grid.h[a]);
                        d2 += gap * gap;
                    }
                    if (valid && d2 <= margin * margin)
                        excluded[grid.index(c[0], c[1], c[2])] = 1;
                }
    }

    std::vector<int> label(grid.count(), -1);
    std::deque<std::size_t> queue;
    for (std::size_t idx = 0; idx < grid.count(); ++idx) {
        if (!active[idx])
            continue;
        ++out.active_cells;
        if (excluded[idx]) {
            ++out.excluded_cells;
            continue;
        }
        if (label[idx] >= 0)
            continue;
        const int id = out.domains++;
        label[idx] = id;
        queue.push_back(idx);
        while (!queue.empty()) {
            const std::size_t cur = queue.front();
            queue.pop_front();
            const auto c = grid.ijk(cur);
            for (int a = 0; a < 3; ++a)
                for (int s : {-1, 1}) {
                    std::array<int, 3> nb = c;
                    int& v = nb[static_cast<std::size_t>(a)];
                    v += s;
                    if (torus)
                        v = (v + n) % n;
                    else if (v < 0 || v >= n)
                        continue;
                    const std::size_t nidx = grid.index(nb[0], nb[1], nb[2]);
                    if (active[nidx] && !excluded[nidx] && label[nidx] < 0) {
                        label[nidx] = id;
                        queue.push_back(nidx);
                    }
                }
        }
    }
    if (out.active_cells == out.excluded_cells)
        throw DegenerateFieldError("nodal::count_nodal_domains: every cell is within the zero margin");
    return out;
}

} // namespace beltrami
