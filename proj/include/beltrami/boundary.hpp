#pragma once

#include "beltrami/field.hpp"
#include "beltrami/flow.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace beltrami {

struct SphereCoords {
    double theta = 0.0;
    double phi = 0.0;
};

/// Point R (sin t cos p, sin t sin p, cos t).
Point3 sphere_point(double radius, SphereCoords c);
SphereCoords sphere_coords(const Point3& p);

/// Tangent field on the sphere of radius R in the orthonormal frame
/// (e_theta, e_phi). Either the restriction of an ambient ball field or a
/// directly given pair of component functions.
class SurfaceField {
public:
    using Components = std::function<Vec2(double theta, double phi)>;

    /// Scale defaults to the max |a| over a 64 x 128 probe grid.
    SurfaceField(double radius, Components components, std::optional<double> scale = std::nullopt);
    explicit SurfaceField(const BeltramiField& ambient);

    double radius() const { return radius_; }
    double scale() const { return scale_; }
    Vec2 components(double theta, double phi) const { return components_(theta, phi); }
    const std::optional<BeltramiField>& ambient() const { return ambient_; }

private:
    double radius_;
    Components components_;
    double scale_ = 0.0;
    std::optional<BeltramiField> ambient_;
};

/// Fails with NotTangentError if the radial part on the probe grid exceeds
/// 1e-8 of the field scale.
SurfaceField restrict_to_boundary(const BeltramiField& field);

struct SurfaceGrid {
    int n_theta = 64;
    int n_phi = 128;
    /// Polar caps theta < theta_min and theta > pi - theta_min are excluded.
    double theta_min = 0.05;

    double theta(int i) const;
    double phi(int k) const;
};

/// Max over the grid of |d_theta w_phi - d_phi w_theta| / (R^2 scale) for
/// w_theta = R a_theta, w_phi = R sin(theta) a_phi.
double closedness_residual(const SurfaceField& sf, const SurfaceGrid& grid = {});

/// Line integral of the dual 1-form from base to target: along the meridian
/// first, then the parallel (or the reverse order). 32-node Gauss-Legendre
/// per arc.
double potential_at(const SurfaceField& sf, SphereCoords base, SphereCoords target, bool meridian_first = true);

struct PotentialGrid {
    SurfaceGrid grid;
    SphereCoords base;
    /// f(theta_i, phi_k) at index i * n_phi + k, meridian-first path.
    std::vector<double> values;
    /// max |meridian-first - parallel-first|
    double path_defect = 0.0;

    double at(int i, int k) const { return values[static_cast<std::size_t>(i * grid.n_phi + k)]; }
};

/// f with f(base) = 0. Throws NotClosedError if the path defect exceeds
/// 1e-5 scale R.
PotentialGrid recover_potential(const SurfaceField& sf, SphereCoords base = {1.5707963267948966, 0.0},
                                const SurfaceGrid& grid = {});

/// Max deviation of the 4th-order grid gradient of f from (a_theta, a_phi),
/// relative to the field scale.
double gradient_consistency_defect(const SurfaceField& sf, const PotentialGrid& pg);

struct CosineFit {
    double offset = 0.0;
    double coefficient = 0.0;
    /// max |f - offset - coefficient cos(theta)| / (scale R)
    double max_residual = 0.0;
};

CosineFit fit_cosine(const SurfaceField& sf, const PotentialGrid& pg);

struct BoundaryZero {
    SphereCoords coords;
    Point3 cartesian;
    double residual = 0.0;
};

struct BoundaryCensus {
    std::vector<BoundaryZero> zeros;
    int boundary_components = 1;
    bool bound_satisfied = false; // #K >= 2N
    /// Fraction of probe-grid points where |a| < 1e-6 scale.
    double zero_fraction = 0.0;
    std::size_t count() const { return zeros.size(); }
};

/// Two-variable Newton in tangent-plane charts from low-|a| probe points
/// and both poles; zeros clustered at two probe cells.
BoundaryCensus boundary_zero_census(const SurfaceField& sf, int n_theta = 64, int n_phi = 128,
                                    double refine_tol = 1e-12);

struct BoundaryTrace {
    SphereCoords start;
    bool constant = false;
    /// Index into the census zeros, -1 when unresolved.
    int forward_limit = -1;
    int backward_limit = -1;
    double forward_gap = 0.0;
    double backward_gap = 0.0;
    double horizon = 0.0;
    bool potential_increasing = false;
    double min_potential_increment = 0.0;
    /// min distance back to the start over |t| in [1, T]
    double min_return_distance = 0.0;
};

/// Integrates the ambient field along the sphere (radial renormalisation
/// each step) to +-T, doubling T once if a limit is not within 1e-3 R of a
/// census zero, and checks that f increases along the line.
BoundaryTrace trace_boundary_line(const SurfaceField& sf, const BoundaryCensus& census, SphereCoords start,
                                  double horizon, SphereCoords potential_base = {1.5707963267948966, 0.0});

struct BoundaryOptions {
    SurfaceGrid grid;
    std::size_t traces = 20;
    double horizon = 60.0;
    std::uint64_t seed = 0;
};

struct BoundaryReport {
    double tangency_defect = 0.0;
    double closedness = 0.0;
    PotentialGrid potential;
    double gradient_defect = 0.0;
    CosineFit cosine_fit;
    BoundaryCensus census;
    std::vector<BoundaryTrace> traces;
};

BoundaryReport analyze_boundary(const BeltramiField& field, const BoundaryOptions& options = {});

} // namespace beltrami
