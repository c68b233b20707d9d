#include "beltrami/field.hpp"

#include "beltrami/bessel.hpp"
#include "beltrami/error.hpp"
#include "beltrami/exprfield.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

namespace beltrami {

std::optional<double> FieldModel::partial(int, const MultiIndex&, const Point3&) const
{
    return std::nullopt;
}

namespace {

constexpr double half_pi = 0.5 * std::numbers::pi;

// k-th derivative of sin / cos by phase shift
double dsin(double t, int k) { return std::sin(t + k * half_pi); }
double dcos(double t, int k) { return std::cos(t + k * half_pi); }

class AbcModel final : public FieldModel {
public:
    explicit AbcModel(const AbcParams& p) : p_(p) {}

    Vec3 value(const Point3& q) const override
    {
        const double x = q[0], y = q[1], z = q[2];
        return {p_.A * std::sin(z) + p_.C * std::cos(y), p_.B * std::sin(x) + p_.A * std::cos(z),
                p_.C * std::sin(y) + p_.B * std::cos(x)};
    }

    Mat3 jacobian(const Point3& q) const override
    {
        const double x = q[0], y = q[1], z = q[2];
        Mat3 J = Mat3::Zero();
        J(0, 1) = -p_.C * std::sin(y);
        J(0, 2) = p_.A * std::cos(z);
        J(1, 0) = p_.B * std::cos(x);
        J(1, 2) = -p_.A * std::sin(z);
        J(2, 0) = -p_.B * std::sin(x);
        J(2, 1) = p_.C * std::cos(y);
        return J;
    }

    // Each component is a sum of two single-variable terms
    // X^i = a_i sin(q[s_i]) + b_i cos(q[c_i]).
    std::optional<double> partial(int component, const MultiIndex& alpha, const Point3& q) const override
    {
        static constexpr int sin_axis[3] = {2, 0, 1};
        static constexpr int cos_axis[3] = {1, 2, 0};
        const double sin_coef[3] = {p_.A, p_.B, p_.C};
        const double cos_coef[3] = {p_.C, p_.A, p_.B};
        const int m = alpha.order();
        double v = 0.0;
        const int sa = sin_axis[component];
        const int ca = cos_axis[component];
        if (alpha[sa] == m)
            v += sin_coef[component] * dsin(q[sa], m);
        if (alpha[ca] == m)
            v += cos_coef[component] * dcos(q[ca], m);
        return v;
    }

private:
    AbcParams p_;
};

// In Cartesian form, with s = lambda r, a = j1(s)/s, g = j2(s)/s^2,
// h = j3(s)/s^3 and w = (-y, x, 0):
//   B = B0 [ lambda^2 g z p + (2a - s^2 g) e_z + lambda a w ].
class SpheromakModel final : public FieldModel {
public:
    SpheromakModel(double radius, double amplitude)
        : amplitude_(amplitude), lambda_(bessel::j1_first_root() / radius) {}

    double lambda() const { return lambda_; }

    Vec3 value(const Point3& p) const override
    {
        const double l2 = lambda_ * lambda_;
        const double s = lambda_ * p.norm();
        const double a = bessel::reduced(1, s);
        const double g = bessel::reduced(2, s);
        const double b = 2.0 * a - s * s * g;
        Vec3 B = l2 * g * p[2] * p;
        B[2] += b;
        B[0] += -lambda_ * a * p[1];
        B[1] += lambda_ * a * p[0];
        return amplitude_ * B;
    }

    Mat3 jacobian(const Point3& p) const override
    {
        const double l = lambda_;
        const double l2 = l * l;
        const double s = l * p.norm();
        const double a = bessel::reduced(1, s);
        const double g = bessel::reduced(2, s);
        const double h = bessel::reduced(3, s);
        const Vec3 w(-p[1], p[0], 0.0);

        // gradients of the radial profiles
        const Vec3 grad_g = -h * l2 * p;
        const Vec3 grad_a = -g * l2 * p;
        const Vec3 grad_b = (-4.0 * g + s * s * h) * l2 * p;

        Mat3 J = Mat3::Zero();
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                double v = l2 * (grad_g[j] * p[2] * p[i] + g * ((j == 2 ? p[i] : 0.0) + (i == j ? p[2] : 0.0)));
                if (i == 2)
                    v += grad_b[j];
                v += l * grad_a[j] * w[i];
                J(i, j) = v;
            }
        }
        J(0, 1) += -l * a;
        J(1, 0) += l * a;
        return amplitude_ * J;
    }

private:
    double amplitude_;
    double lambda_;
};

double parse_number(const std::string& token, const std::string& spec)
{
    double v = 0.0;
    std::size_t b = token.find_first_not_of(" \t");
    std::size_t e = token.find_last_not_of(" \t");
    if (b == std::string::npos)
        throw CatalogError("fields::catalog_lookup: empty parameter in '" + spec + "'");
    const char* first = token.data() + b;
    const char* last = token.data() + e + 1;
    if (*first == '+')
        ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v))
        throw CatalogError("fields::catalog_lookup: malformed number '" + token + "' in '" + spec + "'");
    return v;
}

std::vector<double> parse_params(const std::string& body, std::size_t arity, const std::string& spec)
{
    std::vector<double> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = body.find(',', start);
        out.push_back(parse_number(body.substr(start, comma - start), spec));
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    if (out.size() != arity)
        throw CatalogError("fields::catalog_lookup: '" + spec + "' needs " + std::to_string(arity) +
                           " parameters, got " + std::to_string(out.size()) +
                           "; valid formats: abc:A,B,C | spheromak:R,B0 | expr:<file>");
    return out;
}

std::string format_number(double v)
{
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

BeltramiField::BeltramiField(std::string name, Domain domain, std::shared_ptr<const FieldModel> model,
                             std::optional<double> lambda, bool tangent_to_boundary)
    : name_(std::move(name)), domain_(std::move(domain)), model_(std::move(model)), lambda_(lambda),
      tangent_(tangent_to_boundary)
{
    // Reference scale from a fixed sample, independent of any user seed.
    double s = 0.0;
    for (const Point3& p : domain_.sample_uniform(1000, 0, "field.scale"))
        s = std::max(s, model_->value(p).norm());
    scale_ = s;
}

double BeltramiField::lambda_at(const Point3& p) const
{
    if (lambda_)
        return *lambda_;
    const Vec3 X = eval(p);
    const double n2 = X.squaredNorm();
    if (n2 <= 1e-24 * scale_ * scale_)
        return 0.0;
    return curl(p).dot(X) / n2;
}

std::optional<double> BeltramiField::partial(int component, const MultiIndex& alpha, const Point3& p) const
{
    if (alpha.order() == 0)
        return eval(p)[component];
    if (auto v = model_->partial(component, alpha, p))
        return factor_ * *v;
    if (alpha.order() == 1) {
        const int axis = alpha[0] == 1 ? 0 : (alpha[1] == 1 ? 1 : 2);
        return jacobian(p)(component, axis);
    }
    return std::nullopt;
}

BeltramiField BeltramiField::scaled(double c) const
{
    if (c == 0.0 || !std::isfinite(c))
        throw ParameterError("fields::scale_field: factor must be a nonzero finite number");
    BeltramiField out = *this;
    out.factor_ *= c;
    out.scale_ *= std::abs(c);
    if (c != 1.0)
        out.name_ = format_number(c) + "*" + name_;
    return out;
}

void BeltramiField::require_nonzero(const char* operation) const
{
    if (is_zero())
        throw ZeroFieldError(std::string(operation) + ": field '" + name_ + "' is the zero vector field");
}

BeltramiField abc_field(const AbcParams& params, const Domain& domain)
{
    if (params.A == 0.0 && params.B == 0.0 && params.C == 0.0)
        throw ParameterError("fields::abc_field: A, B, C must not all be zero");
    const double two_pi = 2.0 * std::numbers::pi;
    if (!domain.is_torus() || (domain.periods() - Vec3::Constant(two_pi)).cwiseAbs().maxCoeff() > 1e-12)
        throw IncompatibleDomain("fields::abc_field: ABC fields require the 2pi-periodic torus");
    const std::string name = "abc:" + format_number(params.A) + "," + format_number(params.B) + "," +
                             format_number(params.C);
    return BeltramiField(name, domain, std::make_shared<AbcModel>(params), 1.0, false);
}

BeltramiField spheromak_field(double radius, double amplitude)
{
    if (!(radius > 0.0))
        throw ParameterError("fields::spheromak_field: radius must be positive");
    return spheromak_field(radius, amplitude, Domain::ball(radius));
}

BeltramiField spheromak_field(double radius, double amplitude, const Domain& domain)
{
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw ParameterError("fields::spheromak_field: radius must be positive");
    if (amplitude == 0.0 || !std::isfinite(amplitude))
        throw ParameterError("fields::spheromak_field: amplitude must be nonzero");
    if (!domain.is_ball() || std::abs(domain.radius() - radius) > 1e-12 * radius)
        throw IncompatibleDomain("fields::spheromak_field: domain must be the ball of radius R");
    auto model = std::make_shared<SpheromakModel>(radius, amplitude);
    const double lambda = model->lambda();
    return BeltramiField("spheromak:" + format_number(radius) + "," + format_number(amplitude), domain,
                         std::move(model), lambda, true);
}

BeltramiField scale_field(const BeltramiField& field, double c) { return field.scaled(c); }

BeltramiField catalog_lookup(const std::string& spec, const std::optional<Domain>& expr_domain)
{
    const std::size_t colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string body = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
    try {
        if (kind == "abc") {
            const auto v = parse_params(body, 3, spec);
            return abc_field({v[0], v[1], v[2]});
        }
        if (kind == "spheromak") {
            const auto v = parse_params(body, 2, spec);
            return spheromak_field(v[0], v[1]);
        }
    } catch (const ParameterError& e) {
        throw CatalogError(std::string("fields::catalog_lookup: ") + e.what());
    }
    if (kind == "expr") {
        if (body.empty())
            throw CatalogError("fields::catalog_lookup: expr: needs a file path");
        return load_expression_field(body, expr_domain.value_or(Domain::torus_2pi()));
    }
    throw CatalogError("fields::catalog_lookup: unknown field '" + spec +
                       "'; valid formats: abc:A,B,C | spheromak:R,B0 | expr:<file>");
}

double boundary_radial_defect(const BeltramiField& field, int n_theta, int n_phi)
{
    if (!field.domain().is_ball())
        return 0.0;
    if (field.is_zero())
        return 0.0;
    const double R = field.domain().radius();
    double worst = 0.0;
    for (int i = 0; i < n_theta; ++i) {
        const double theta = (i + 0.5) * std::numbers::pi / n_theta;
        for (int k = 0; k < n_phi; ++k) {
            const double phi = 2.0 * std::numbers::pi * k / n_phi;
            const Vec3 n(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
            worst = std::max(worst, std::abs(field.eval(R * n).dot(n)));
        }
    }
    return worst / field.scale();
}

} // namespace beltrami
