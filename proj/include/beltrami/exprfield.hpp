#pragma once

#include "beltrami/domain.hpp"
#include "beltrami/expr.hpp"
#include "beltrami/field.hpp"

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

namespace beltrami {

/// User-supplied closed-form vector field with exact symbolic partials.
class ExprField {
public:
    /// Highest total order for which symbolic partials are built.
    static constexpr int max_symbolic_order = 6;

    ExprField(std::array<expr::Expr, 3> components, Domain domain);

    const std::array<expr::Expr, 3>& components() const { return components_; }
    const Domain& domain() const { return domain_; }

    Vec3 eval(const Point3& p) const;
    Mat3 jacobian(const Point3& p) const;

    /// d^alpha of a component; nullopt above max_symbolic_order. Cached.
    std::optional<expr::Expr> derivative(int component, const MultiIndex& alpha) const;

    /// "c0, c1, c2" in re-parseable form.
    std::string str() const;

private:
    std::array<expr::Expr, 3> components_;
    Domain domain_;
    std::array<expr::Expr, 9> first_; // d_j X^i at index 3 i + j

    mutable std::mutex cache_mutex_;
    mutable std::map<std::pair<int, MultiIndex>, expr::Expr> cache_;
};

/// Three comma-separated expressions on one line, or one per line.
std::shared_ptr<const ExprField> parse_field(const std::string& source, const Domain& domain);

struct DivCurl {
    expr::Expr divergence;
    std::array<expr::Expr, 3> curl;
};

DivCurl divergence_and_curl(const ExprField& field);

/// Wraps an expression field for the analyzers. Lambda is estimated pointwise.
BeltramiField make_expression_field(std::shared_ptr<const ExprField> field, std::string name);

/// Reads an expression file and builds the field ("expr:<path>" syntax).
BeltramiField load_expression_field(const std::string& path, const Domain& domain);

} // namespace beltrami
