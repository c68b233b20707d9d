#pragma once

#include "beltrami/types.hpp"

#include <memory>
#include <string>
#include <string_view>

namespace beltrami::expr {

enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Sqrt };

struct Node;

/// Immutable expression tree over x, y, z. Cheap to copy (shared nodes).
/// Construction through the free functions below folds constants and
/// applies the 0/1 identities, nothing more.
class Expr {
public:
    Expr();
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

    Op op() const;
    double evaluate(const Vec3& p) const;
    /// Exact derivative with respect to variable 0, 1, 2 (x, y, z).
    Expr derivative(int var) const;
    /// Fully parenthesised form that re-parses to an equivalent tree.
    std::string str() const;

    bool is_constant() const;
    /// Value if the tree is a literal constant.
    bool constant_value(double& out) const;
    bool depends_on_variables() const;
    std::size_t size() const;

    const Node& node() const { return *node_; }

private:
    std::shared_ptr<const Node> node_;
};

struct Node {
    Op op;
    double value = 0.0; // Const
    int var = 0;        // Var
    Expr lhs;           // unary operand or left side
    Expr rhs;
};

Expr constant(double v);
Expr variable(int index);
Expr neg(Expr a);
Expr add(Expr a, Expr b);
Expr sub(Expr a, Expr b);
Expr mul(Expr a, Expr b);
Expr div(Expr a, Expr b);
/// Exponent must not depend on x, y, z.
Expr pow(Expr base, Expr exponent);
Expr apply(Op function, Expr a);

/// Parses one scalar expression. Precedence: ^ (right assoc) > unary minus
/// > * / > + -, binary operators left associative. Functions sin, cos, exp,
/// sqrt; named constant pi. Errors carry `offset_base` + local offset.
Expr parse(std::string_view source, std::size_t offset_base = 0);

} // namespace beltrami::expr
