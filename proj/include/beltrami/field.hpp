#pragma once

#include "beltrami/domain.hpp"
#include "beltrami/types.hpp"

#include <memory>
#include <optional>
#include <string>

namespace beltrami {

/// Evaluable analytic vector field in Cartesian components.
class FieldModel {
public:
    virtual ~FieldModel() = default;

    virtual Vec3 value(const Point3& p) const = 0;
    /// J(i, j) = d_j X^i.
    virtual Mat3 jacobian(const Point3& p) const = 0;
    /// Exact partial derivative d^alpha X^component when the model can
    /// supply one (closed form or symbolic); nullopt otherwise.
    virtual std::optional<double> partial(int component, const MultiIndex& alpha, const Point3& p) const;
};

struct AbcParams {
    double A = 1.0;
    double B = 1.0;
    double C = 1.0;
};

/// A field together with its domain, curl eigenvalue and normalization
/// scale. Copies share the underlying model.
class BeltramiField {
public:
    BeltramiField(std::string name, Domain domain, std::shared_ptr<const FieldModel> model,
                  std::optional<double> lambda, bool tangent_to_boundary);

    const std::string& name() const { return name_; }
    const Domain& domain() const { return domain_; }
    /// Constant eigenvalue; empty for user expressions.
    std::optional<double> lambda() const { return lambda_; }
    /// Constant lambda if present, else <curl X, X> / <X, X> (0 where X = 0).
    double lambda_at(const Point3& p) const;
    bool tangent_to_boundary() const { return tangent_; }
    /// Max |X| over a fixed reference sample of the domain.
    double scale() const { return scale_; }
    bool is_zero() const { return scale_ == 0.0; }

    Vec3 eval(const Point3& p) const { return factor_ * model_->value(p); }
    Mat3 jacobian(const Point3& p) const { return factor_ * model_->jacobian(p); }
    Vec3 curl(const Point3& p) const { return curl_of(jacobian(p)); }
    double divergence(const Point3& p) const { return jacobian(p).trace(); }
    std::optional<double> partial(int component, const MultiIndex& alpha, const Point3& p) const;

    /// Multiplies value, Jacobian and curl by c; lambda unchanged.
    BeltramiField scaled(double c) const;

    /// Throws ZeroFieldError naming `operation` if the field vanishes identically.
    void require_nonzero(const char* operation) const;

private:
    std::string name_;
    Domain domain_;
    std::shared_ptr<const FieldModel> model_;
    std::optional<double> lambda_;
    bool tangent_;
    double factor_ = 1.0;
    double scale_ = 0.0;
};

/// X = (A sin z + C cos y, B sin x + A cos z, C sin y + B cos x), lambda = 1.
BeltramiField abc_field(const AbcParams& params, const Domain& domain = Domain::torus_2pi());

/// Lowest tangent curl eigenfield of the ball of radius R; lambda R is the
/// first positive root of j1. Requires the domain radius to equal R.
BeltramiField spheromak_field(double radius, double amplitude);
BeltramiField spheromak_field(double radius, double amplitude, const Domain& domain);

BeltramiField scale_field(const BeltramiField& field, double c);

/// "abc:A,B,C", "spheromak:R,B0" or "expr:<path>". Expression fields live on
/// `expr_domain` (default: 2pi torus).
BeltramiField catalog_lookup(const std::string& spec,
                             const std::optional<Domain>& expr_domain = std::nullopt);

/// Ambient radial component max over a (theta, phi) probe grid of the ball
/// boundary, relative to the field scale. 0 on the torus.
double boundary_radial_defect(const BeltramiField& field, int n_theta = 64, int n_phi = 128);

} // namespace beltrami
