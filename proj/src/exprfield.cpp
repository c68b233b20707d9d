#include "beltrami/exprfield.hpp"

#include "beltrami/error.hpp"

#include <fstream>
#include <sstream>

namespace beltrami {

namespace {

class ExprFieldModel final : public FieldModel {
public:
    explicit ExprFieldModel(std::shared_ptr<const ExprField> f) : field_(std::move(f)) {}

    Vec3 value(const Point3& p) const override { return field_->eval(p); }
    Mat3 jacobian(const Point3& p) const override { return field_->jacobian(p); }

    std::optional<double> partial(int component, const MultiIndex& alpha, const Point3& p) const override
    {
        auto d = field_->derivative(component, alpha);
        if (!d)
            return std::nullopt;
        return d->evaluate(p);
    }

private:
    std::shared_ptr<const ExprField> field_;
};

struct Piece {
    std::string text;
    std::size_t offset;
};

// Splits on commas at parenthesis depth 0, or on newlines when the source
// has no top-level comma.
std::vector<Piece> split_components(const std::string& source)
{
    std::vector<Piece> pieces;
    int depth = 0;
    std::size_t start = 0;
    bool any_comma = false;
    for (std::size_t i = 0; i < source.size(); ++i) {
        const char c = source[i];
        if (c == '(')
            ++depth;
        else if (c == ')')
            --depth;
        else if (c == ',' && depth == 0) {
            pieces.push_back({source.substr(start, i - start), start});
            start = i + 1;
            any_comma = true;
        }
    }
    if (any_comma) {
        pieces.push_back({source.substr(start), start});
        return pieces;
    }
    pieces.clear();
    std::size_t line_start = 0;
    for (std::size_t i = 0; i <= source.size(); ++i) {
        if (i == source.size() || source[i] == '\n') {
            std::string line = source.substr(line_start, i - line_start);
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                pieces.push_back({line, line_start});
            line_start = i + 1;
        }
    }
    return pieces;
}

} // namespace

ExprField::ExprField(std::array<expr::Expr, 3> components, Domain domain)
    : components_(std::move(components)), domain_(std::move(domain))
{
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            first_[static_cast<std::size_t>(3 * i + j)] = components_[static_cast<std::size_t>(i)].derivative(j);
}

Vec3 ExprField::eval(const Point3& p) const
{
    return {components_[0].evaluate(p), components_[1].evaluate(p), components_[2].evaluate(p)};
}

Mat3 ExprField::jacobian(const Point3& p) const
{
    Mat3 J;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            J(i, j) = first_[static_cast<std::size_t>(3 * i + j)].evaluate(p);
    return J;
}

std::optional<expr::Expr> ExprField::derivative(int component, const MultiIndex& alpha) const
{
    if (component < 0 || component > 2)
        throw ParameterError("exprfield::derivative: component must be 0, 1 or 2");
    if (alpha.order() > max_symbolic_order)
        return std::nullopt;
    if (alpha.order() == 0)
        return components_[static_cast<std::size_t>(component)];

    std::lock_guard lock(cache_mutex_);
    const auto key = std::make_pair(component, alpha);
    if (auto it = cache_.find(key); it != cache_.end())
        return it->second;

    // differentiate along x first, then y, then z; each prefix is cached
    expr::Expr e = components_[static_cast<std::size_t>(component)];
    MultiIndex done;
    for (int axis = 0; axis < 3; ++axis) {
        for (int k = 0; k < alpha[axis]; ++k) {
            done = done.plus(axis);
            const auto prefix = std::make_pair(component, done);
            if (auto it = cache_.find(prefix); it != cache_.end()) {
                e = it->second;
            } else {
                e = e.derivative(axis);
                cache_.emplace(prefix, e);
            }
        }
    }
    return e;
}

std::string ExprField::str() const
{
    return components_[0].str() + ", " + components_[1].str() + ", " + components_[2].str();
}

std::shared_ptr<const ExprField> parse_field(const std::string& source, const Domain& domain)
{
    auto pieces = split_components(source);
    if (pieces.size() != 3)
        throw ParseError("exprfield::parse_field: expected three components, got " +
                             std::to_string(pieces.size()),
                         source.size());
    std::array<expr::Expr, 3> comps;
    for (std::size_t i = 0; i < 3; ++i)
        comps[i] = expr::parse(pieces[i].text, pieces[i].offset);
    return std::make_shared<const ExprField>(std::move(comps), domain);
}

DivCurl divergence_and_curl(const ExprField& field)
{
    const auto& c = field.components();
    DivCurl out;
    out.divergence = expr::add(expr::add(c[0].derivative(0), c[1].derivative(1)), c[2].derivative(2));
    out.curl[0] = expr::sub(c[2].derivative(1), c[1].derivative(2));
    out.curl[1] = expr::sub(c[0].derivative(2), c[2].derivative(0));
    out.curl[2] = expr::sub(c[1].derivative(0), c[0].derivative(1));
    return out;
}

BeltramiField make_expression_field(std::shared_ptr<const ExprField> field, std::string name)
{
    const Domain domain = field->domain();
    auto model = std::make_shared<ExprFieldModel>(std::move(field));
    BeltramiField probe(name, domain, model, std::nullopt, false);
    bool tangent = false;
    if (domain.is_ball() && !probe.is_zero())
        tangent = boundary_radial_defect(probe) <= 1e-8;
    return BeltramiField(std::move(name), domain, std::move(model), std::nullopt, tangent);
}

BeltramiField load_expression_field(const std::string& path, const Domain& domain)
{
    std::ifstream in(path);
    if (!in)
        throw CatalogError("fields::catalog_lookup: cannot read expression file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return make_expression_field(parse_field(ss.str(), domain), "expr:" + path);
}

} // namespace beltrami
