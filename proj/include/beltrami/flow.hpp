#pragma once

#include "beltrami/field.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace beltrami {

enum class OrbitType { Constant, Periodic, NonPeriodic, Indeterminate };

std::string to_string(OrbitType t);
OrbitType orbit_type_from_string(const std::string& s);

struct Classification {
    OrbitType type = OrbitType::Indeterminate;
    /// Period estimate when type is Periodic.
    double period = 0.0;
};

struct IntegratorStats {
    std::size_t steps = 0;
    std::size_t rejected = 0;
    /// Largest accepted local error estimate, in tolerance units (<= 1).
    double max_error = 0.0;
};

struct IntegrationOptions {
    /// Spacing of dense-output samples; 0 keeps only the two endpoints.
    double output_step = 0.05;
    /// |X(p0)| below this times the field scale yields a constant orbit.
    double zero_speed_tol = 1e-10;
    /// Renormalise to the sphere of radius R after every step (boundary lines).
    bool project_to_sphere = false;
    std::size_t max_steps = 20'000'000;
};

/// Field line sampled at dense-output times. Samples are stored in
/// increasing time; for backward integration the start is the last sample.
struct Trajectory {
    std::string field_name;
    Domain domain = Domain::torus_2pi();
    Point3 start;
    double t_end = 0.0;
    std::vector<double> times;
    /// Canonical points (wrapped on the torus).
    std::vector<Point3> points;
    /// Continuous lift of the path in R^3 (equals `points` on the ball).
    std::vector<Point3> lifted;
    /// X at each sample, for cubic Hermite interpolation between samples.
    std::vector<Vec3> velocities;
    IntegratorStats stats;
    bool constant = false;
    Classification classification;

    std::size_t size() const { return times.size(); }
    /// Lifted end point at t_end.
    const Point3& lifted_end() const { return t_end >= 0.0 ? lifted.back() : lifted.front(); }
    const Point3& end() const { return t_end >= 0.0 ? points.back() : points.front(); }
};

/// Adaptive Dormand-Prince 5(4) integration of p' = X(p) from p0 to t_end.
/// `tol` is the relative error per step; absolute tolerance is tol times the
/// domain length scale.
Trajectory integrate(const BeltramiField& field, const Point3& p0, double t_end, double tol,
                     const IntegrationOptions& options = {});

/// Finite-horizon orbit type: Periodic needs two consecutive returns within
/// return_eps of the start after min_period whose periods agree to 1%.
Classification classify(const Trajectory& traj, double return_eps, double min_period);

/// Minimum distance back to the start over |t| in [t_lo, t_hi], searched
/// over cubic Hermite interpolants between samples. Returns (distance, |t|).
std::pair<double, double> min_return_distance(const Trajectory& traj, double t_lo, double t_hi);

struct RecurrenceRecord {
    Point3 start;
    double forward_distance = 0.0;
    double forward_time = 0.0;
    double backward_distance = 0.0;
    double backward_time = 0.0;
    bool constant = false;
    /// Non-empty when an integration failed; the point then counts as
    /// non-recurrent in both directions.
    std::string error;

    friend bool operator==(const RecurrenceRecord&, const RecurrenceRecord&) = default;
};

struct RecurrenceReport {
    std::size_t n = 0;
    double horizon = 0.0;
    double radius = 0.0;
    std::uint64_t seed = 0;
    double tol = 0.0;
    std::vector<RecurrenceRecord> records;
    double recurrent_fraction_forward = 0.0;
    double recurrent_fraction_backward = 0.0;

    friend bool operator==(const RecurrenceReport&, const RecurrenceReport&) = default;
};

/// For n uniform points, integrate to +-T and record the closest return to
/// the start over |t| in [T/4, T]; recurrent iff that distance is < eps.
RecurrenceReport recurrence_experiment(const BeltramiField& field, std::size_t n, double horizon, double eps,
                                       std::uint64_t seed, double tol = 1e-9);

/// |det D phi_T (p) - 1| from central differences of six neighbouring
/// trajectories at offsets +-h along each axis.
double volume_preservation_check(const BeltramiField& field, const Point3& p, double horizon, double h,
                                 double tol = 1e-12);

/// Distance between p and the result of integrating to +T and back to -T.
double time_reversal_defect(const BeltramiField& field, const Point3& p, double horizon, double tol = 1e-11);

} // namespace beltrami
