#pragma once

// Scalar expressions in the variables u, v.
//
// Grammar (whitespace insignificant):
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := atom ('^' signed-number)?
//   atom   := number | 'u' | 'v' | 'pi' | func '(' expr ')' | '(' expr ')' | '-' factor
//   func   := sqrt | sin | cos | exp | bump
// Exponents must be integers or half-integers. `abs` is rejected.

#include <memory>
#include <string>
#include <string_view>

#include "smlab/jet.hpp"

namespace smlab {

class Expr {
public:
    enum class Op { Constant, VarU, VarV, Neg, Sqrt, Sin, Cos, Exp, Bump, Add, Sub, Mul, Div, Pow };

    struct Node {
        Op op;
        double value = 0.0;        // Constant
        int twice_exponent = 0;    // Pow: exponent * 2
        std::shared_ptr<const Node> lhs;
        std::shared_ptr<const Node> rhs;
    };

    Expr() : Expr(constant(0.0)) {}

    static Expr constant(double c);
    static Expr var_u();
    static Expr var_v();
    static Expr unary(Op op, Expr arg);
    static Expr binary(Op op, Expr lhs, Expr rhs);
    static Expr power(Expr base, int twice_exponent);

    Op op() const { return node_->op; }
    const Node& node() const { return *node_; }

    friend Expr operator+(Expr a, Expr b) { return binary(Op::Add, std::move(a), std::move(b)); }
    friend Expr operator-(Expr a, Expr b) { return binary(Op::Sub, std::move(a), std::move(b)); }
    friend Expr operator*(Expr a, Expr b) { return binary(Op::Mul, std::move(a), std::move(b)); }
    friend Expr operator/(Expr a, Expr b) { return binary(Op::Div, std::move(a), std::move(b)); }

private:
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

Expr parse(std::string_view text);

/// Canonical, fully parenthesised text; parse(to_string(e)) reproduces e.
std::string to_string(const Expr& e);

/// Exact truncated Taylor expansion of `e` at `point`.
Jet2 eval_jet(const Expr& e, const Vec2& point, int order);

/// Plain floating-point evaluation.
double eval_value(const Expr& e, double u, double v);

/// Smooth partition function: 1 on |t| <= 1/4, 0 on |t| >= 3/4.
double bump(double t);
Jet2 bump(const Jet2& t);

}  // namespace smlab
