#include "beltrami/expr.hpp"

#include "beltrami/error.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace beltrami::expr {

namespace {

Expr make(Op op, Expr lhs, Expr rhs = Expr(nullptr))
{
    return Expr(std::make_shared<Node>(Node{op, 0.0, 0, std::move(lhs), std::move(rhs)}));
}

bool is_value(const Expr& e, double v)
{
    double c = 0.0;
    return e.constant_value(c) && c == v;
}

double apply_function(Op f, double v)
{
    switch (f) {
    case Op::Sin: return std::sin(v);
    case Op::Cos: return std::cos(v);
    case Op::Exp: return std::exp(v);
    case Op::Sqrt: return std::sqrt(v);
    default: throw ParameterError("exprfield::apply: not a function");
    }
}

const char* function_name(Op f)
{
    switch (f) {
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Sqrt: return "sqrt";
    default: return "?";
    }
}

void print(const Node& n, std::ostream& os)
{
    switch (n.op) {
    case Op::Const:
        if (n.value < 0.0)
            os << "(" << n.value << ")";
        else
            os << n.value;
        return;
    case Op::Var:
        os << "xyz"[n.var];
        return;
    case Op::Neg:
        os << "(-";
        print(n.lhs.node(), os);
        os << ")";
        return;
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Sqrt:
        os << function_name(n.op) << "(";
        print(n.lhs.node(), os);
        os << ")";
        return;
    default:
        break;
    }
    const char* sym = n.op == Op::Add   ? " + "
                      : n.op == Op::Sub ? " - "
                      : n.op == Op::Mul ? "*"
                      : n.op == Op::Div ? "/"
                                        : "^";
    os << "(";
    print(n.lhs.node(), os);
    os << sym;
    print(n.rhs.node(), os);
    os << ")";
}

// Recursive-descent parser over the raw character stream.
class Parser {
public:
    Parser(std::string_view src, std::size_t base) : src_(src), base_(base) {}

    Expr run()
    {
        Expr e = parse_sum();
        skip_space();
        if (pos_ != src_.size())
            fail("unexpected '" + std::string(1, src_[pos_]) + "', expected operator or end of input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { fail_at(pos_, msg); }

    [[noreturn]] void fail_at(std::size_t pos, const std::string& msg) const
    {
        const std::size_t at = base_ + pos;
        throw ParseError("exprfield::parse_field: syntax error at offset " + std::to_string(at) + ": " + msg, at);
    }

    void skip_space()
    {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
    }

    bool accept(char c)
    {
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr parse_sum()
    {
        Expr e = parse_product();
        for (;;) {
            if (accept('+'))
                e = add(e, parse_product());
            else if (accept('-'))
                e = sub(e, parse_product());
            else
                return e;
        }
    }

    Expr parse_product()
    {
        Expr e = parse_unary();
        for (;;) {
            if (accept('*'))
                e = mul(e, parse_unary());
            else if (accept('/'))
                e = div(e, parse_unary());
            else
                return e;
        }
    }

    Expr parse_unary()
    {
        if (accept('-'))
            return neg(parse_unary());
        if (accept('+'))
            return parse_unary();
        return parse_power();
    }

    Expr parse_power()
    {
        Expr base = parse_primary();
        skip_space();
        if (accept('^')) {
            skip_space();
            const std::size_t at = pos_;
            Expr exponent = parse_unary();
            if (exponent.depends_on_variables())
                fail_at(at, "exponent must not depend on x, y, z");
            return pow(base, exponent);
        }
        return base;
    }

    Expr parse_primary()
    {
        skip_space();
        if (pos_ >= src_.size())
            fail("unexpected end of input, expected number, variable, function or '('");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = parse_sum();
            if (!accept(')'))
                fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            const std::string_view id = src_.substr(start, pos_ - start);
            if (id == "x") return variable(0);
            if (id == "y") return variable(1);
            if (id == "z") return variable(2);
            if (id == "pi") return constant(std::numbers::pi);
            Op f;
            if (id == "sin") f = Op::Sin;
            else if (id == "cos") f = Op::Cos;
            else if (id == "exp") f = Op::Exp;
            else if (id == "sqrt") f = Op::Sqrt;
            else
                throw ParseError("exprfield::parse_field: unknown identifier '" + std::string(id) +
                                     "' at offset " + std::to_string(base_ + start),
                                 base_ + start);
            if (!accept('('))
                fail("expected '(' after function name");
            Expr arg = parse_sum();
            if (!accept(')'))
                fail("expected ')'");
            return apply(f, arg);
        }
        fail("unexpected '" + std::string(1, c) + "', expected number, variable, function or '('");
    }

    Expr parse_number()
    {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
            ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t q = pos_ + 1;
            if (q < src_.size() && (src_[q] == '+' || src_[q] == '-'))
                ++q;
            if (q < src_.size() && std::isdigit(static_cast<unsigned char>(src_[q]))) {
                pos_ = q;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
            }
        }
        double v = 0.0;
        const char* first = src_.data() + start;
        const char* last = src_.data() + pos_;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last)
            fail_at(start, "malformed number");
        return constant(v);
    }

    std::string_view src_;
    std::size_t base_;
    std::size_t pos_ = 0;
};

} // namespace

Expr::Expr() : Expr(constant(0.0)) {}

Op Expr::op() const { return node_->op; }

double Expr::evaluate(const Vec3& p) const
{
    const Node& n = *node_;
    switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var: return p[n.var];
    case Op::Neg: return -n.lhs.evaluate(p);
    case Op::Add: return n.lhs.evaluate(p) + n.rhs.evaluate(p);
    case Op::Sub: return n.lhs.evaluate(p) - n.rhs.evaluate(p);
    case Op::Mul: return n.lhs.evaluate(p) * n.rhs.evaluate(p);
    case Op::Div: return n.lhs.evaluate(p) / n.rhs.evaluate(p);
    case Op::Pow: return std::pow(n.lhs.evaluate(p), n.rhs.evaluate(p));
    default: return apply_function(n.op, n.lhs.evaluate(p));
    }
}

Expr Expr::derivative(int var) const
{
    const Node& n = *node_;
    switch (n.op) {
    case Op::Const: return constant(0.0);
    case Op::Var: return constant(n.var == var ? 1.0 : 0.0);
    case Op::Neg: return neg(n.lhs.derivative(var));
    case Op::Add: return add(n.lhs.derivative(var), n.rhs.derivative(var));
    case Op::Sub: return sub(n.lhs.derivative(var), n.rhs.derivative(var));
    case Op::Mul:
        return add(mul(n.lhs.derivative(var), n.rhs), mul(n.lhs, n.rhs.derivative(var)));
    case Op::Div:
        return div(sub(mul(n.lhs.derivative(var), n.rhs), mul(n.lhs, n.rhs.derivative(var))),
                   mul(n.rhs, n.rhs));
    case Op::Pow: {
        // exponent is variable-free by construction
        const Expr one_less = sub(n.rhs, constant(1.0));
        return mul(n.lhs.derivative(var), mul(n.rhs, pow(n.lhs, one_less)));
    }
    case Op::Sin: return mul(n.lhs.derivative(var), apply(Op::Cos, n.lhs));
    case Op::Cos: return mul(n.lhs.derivative(var), neg(apply(Op::Sin, n.lhs)));
    case Op::Exp: return mul(n.lhs.derivative(var), *this);
    case Op::Sqrt: return div(n.lhs.derivative(var), mul(constant(2.0), *this));
    }
    return constant(0.0);
}

std::string Expr::str() const
{
    std::ostringstream os;
    os.precision(17);
    print(*node_, os);
    return os.str();
}

bool Expr::is_constant() const { return node_->op == Op::Const; }

bool Expr::constant_value(double& out) const
{
    if (node_->op != Op::Const)
        return false;
    out = node_->value;
    return true;
}

bool Expr::depends_on_variables() const
{
    const Node& n = *node_;
    switch (n.op) {
    case Op::Const: return false;
    case Op::Var: return true;
    case Op::Neg:
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Sqrt: return n.lhs.depends_on_variables();
    default: return n.lhs.depends_on_variables() || n.rhs.depends_on_variables();
    }
}

std::size_t Expr::size() const
{
    const Node& n = *node_;
    switch (n.op) {
    case Op::Const:
    case Op::Var: return 1;
    case Op::Neg:
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Sqrt: return 1 + n.lhs.size();
    default: return 1 + n.lhs.size() + n.rhs.size();
    }
}

Expr constant(double v)
{
    auto n = std::make_shared<Node>(Node{Op::Const, v, 0, Expr(nullptr), Expr(nullptr)});
    return Expr(std::move(n));
}

Expr variable(int index)
{
    if (index < 0 || index > 2)
        throw ParameterError("exprfield::variable: index must be 0, 1 or 2");
    auto n = std::make_shared<Node>(Node{Op::Var, 0.0, index, Expr(nullptr), Expr(nullptr)});
    return Expr(std::move(n));
}

Expr neg(Expr a)
{
    double c = 0.0;
    if (a.constant_value(c))
        return constant(-c);
    if (a.op() == Op::Neg)
        return a.node().lhs;
    return make(Op::Neg, std::move(a));
}

Expr add(Expr a, Expr b)
{
    double ca = 0.0, cb = 0.0;
    if (a.constant_value(ca) && b.constant_value(cb))
        return constant(ca + cb);
    if (is_value(a, 0.0))
        return b;
    if (is_value(b, 0.0))
        return a;
    return make(Op::Add, std::move(a), std::move(b));
}

Expr sub(Expr a, Expr b)
{
    double ca = 0.0, cb = 0.0;
    if (a.constant_value(ca) && b.constant_value(cb))
        return constant(ca - cb);
    if (is_value(b, 0.0))
        return a;
    if (is_value(a, 0.0))
        return neg(std::move(b));
    return make(Op::Sub, std::move(a), std::move(b));
}

Expr mul(Expr a, Expr b)
{
    double ca = 0.0, cb = 0.0;
    if (a.constant_value(ca) && b.constant_value(cb))
        return constant(ca * cb);
    if (is_value(a, 0.0) || is_value(b, 0.0))
        return constant(0.0);
    if (is_value(a, 1.0))
        return b;
    if (is_value(b, 1.0))
        return a;
    if (is_value(a, -1.0))
        return neg(std::move(b));
    if (is_value(b, -1.0))
        return neg(std::move(a));
    return make(Op::Mul, std::move(a), std::move(b));
}

Expr div(Expr a, Expr b)
{
    double ca = 0.0, cb = 0.0;
    if (a.constant_value(ca) && b.constant_value(cb) && cb != 0.0)
        return constant(ca / cb);
    if (is_value(a, 0.0) && !is_value(b, 0.0))
        return constant(0.0);
    if (is_value(b, 1.0))
        return a;
    return make(Op::Div, std::move(a), std::move(b));
}

Expr pow(Expr base, Expr exponent)
{
    if (exponent.depends_on_variables())
        throw ParameterError("exprfield::pow: exponent must not depend on x, y, z");
    double cb = 0.0, ce = 0.0;
    const bool e_const = exponent.constant_value(ce);
    if (base.constant_value(cb) && e_const)
        return constant(std::pow(cb, ce));
    if (e_const && ce == 1.0)
        return base;
    if (e_const && ce == 0.0)
        return constant(1.0);
    return make(Op::Pow, std::move(base), std::move(exponent));
}

Expr apply(Op function, Expr a)
{
    double c = 0.0;
    if (a.constant_value(c))
        return constant(apply_function(function, c));
    return make(function, std::move(a));
}

Expr parse(std::string_view source, std::size_t offset_base)
{
    return Parser(source, offset_base).run();
}

} // namespace beltrami::expr
