#pragma once

#include "beltrami/field.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace beltrami {

/// Jacobian M(i, j) = d_j h^i of the derived field h^i = d^beta X^i at a zero.
struct RankData {
    Mat3 matrix = Mat3::Zero();
    Vec3 singular_values = Vec3::Zero();
    /// Number of singular values above 1e-6 sigma_max.
    int rank = 0;
    double symmetry_defect = 0.0;
    double trace = 0.0;
    /// Spectral norm (sigma_max).
    double norm = 0.0;
};

struct ZeroRecord {
    Point3 location = Point3::Zero();
    double residual = 0.0;
    /// Empty when not determined up to max_order.
    std::optional<int> order;
    MultiIndex beta;
    std::optional<RankData> rank_data;
    bool interior = true;
};

struct ZeroSet {
    Domain domain = Domain::torus_2pi();
    std::vector<ZeroRecord> records;
    /// cluster index of each record
    std::vector<int> cluster_of;
    int cluster_count = 0;
    /// Largest grid cell edge used for seeding and clustering.
    double cell_size = 0.0;

    std::vector<Point3> locations() const;
    std::vector<Point3> cluster_points(int cluster) const;
};

/// Groups points by epsilon-graph connectivity (torus-aware). Returns the
/// cluster index of each point and the cluster count.
std::pair<std::vector<int>, int> cluster_points(const Domain& domain, const std::vector<Point3>& points, double eps);

/// Builds a ZeroSet from raw points (clustered at eps), e.g. synthetic clouds.
ZeroSet zero_set_from_points(const Domain& domain, const std::vector<Point3>& points, double eps);

/// Seeds from grid cells where |X| at the centre is within the Lipschitz
/// bound of a zero, refines by damped Gauss-Newton with pseudoinverse steps
/// to |X| < refine_tol * scale, deduplicates and clusters at 2 cell sizes.
ZeroSet find_zeros(const BeltramiField& field, int grid_res, double refine_tol = 1e-12);

/// Adds points along rank-2 zero curves by predictor-corrector continuation
/// along the null direction of DX. step <= 0 picks extent / 1024.
void densify_zero_curves(const BeltramiField& field, ZeroSet& zs, double step = 0.0,
                         double refine_tol = 1e-12);

struct OrderResult {
    int order = 0;
    /// Witness with |beta| = order - 1 and grad(d^beta X^component) != 0.
    MultiIndex beta;
    MultiIndex alpha;
    int component = 0;
    bool used_finite_differences = false;
    std::vector<std::string> warnings;
};

/// Smallest m <= max_order with some |alpha| = m, some component j and
/// |d^alpha X^j(p)| above derivative_tol * scale / L^m.
OrderResult zero_order(const BeltramiField& field, const Point3& p, int max_order = 6,
                       double derivative_tol = 1e-6);

RankData rank_identities_at_zero(const BeltramiField& field, const Point3& p, const MultiIndex& beta);

/// Fills order, beta and (at interior zeros) rank data for every record.
/// Records whose order is not determined up to max_order keep an empty order.
void annotate_zeros(const BeltramiField& field, ZeroSet& zs, int max_order = 6);

struct BoxCountResult {
    /// (box size, occupied boxes), box size decreasing
    std::vector<std::pair<double, std::size_t>> counts;
    double slope = 0.0;
    /// Slope per cluster; empty where the cluster has too little data.
    std::vector<std::optional<double>> cluster_slopes;
};

/// Occupied-box counts at sizes extent / 2^k for k in [k_min, k_max] and the
/// least-squares slope of log N against log(1/size).
BoxCountResult box_counting_dimension(const ZeroSet& zs, int k_min = 2, int k_max = 7);

/// Box counts and slope for a raw point cloud (no clusters).
BoxCountResult box_counting_dimension(const Domain& domain, const std::vector<Point3>& points, int k_min = 2,
                                      int k_max = 7);

struct NodalResult {
    int domains = 0;
    std::size_t active_cells = 0;
    std::size_t excluded_cells = 0;
    std::size_t zero_points = 0;
    double zero_margin = 0.0;
};

/// Connected components (6-connectivity, periodic on the torus, interior
/// cells on the ball) of grid cells farther than zero_margin from every
/// refined zero. Default margin: 1.5 cell diagonals.
NodalResult count_nodal_domains(const BeltramiField& field, int grid_res,
                                std::optional<double> zero_margin = std::nullopt);

} // namespace beltrami
