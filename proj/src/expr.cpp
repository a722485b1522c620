#include "smlab/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

namespace smlab {

namespace {

using Node = Expr::Node;
using Op = Expr::Op;

bool is_unary(Op op) {
    return op == Op::Neg || op == Op::Sqrt || op == Op::Sin || op == Op::Cos || op == Op::Exp || op == Op::Bump;
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expr parse_all() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) fail({"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"});
        return e;
    }

private:
    Expr parse_expr() {
        Expr lhs = parse_term();
        for (;;) {
            skip_ws();
            if (accept('+')) {
                lhs = lhs + parse_term();
            } else if (accept('-')) {
                lhs = lhs - parse_term();
            } else {
                return lhs;
            }
        }
    }

    Expr parse_term() {
        Expr lhs = parse_factor();
        for (;;) {
            skip_ws();
            if (accept('*')) {
                lhs = lhs * parse_factor();
            } else if (accept('/')) {
                lhs = lhs / parse_factor();
            } else {
                return lhs;
            }
        }
    }

    Expr parse_factor() {
        Expr base = parse_atom();
        skip_ws();
        if (!accept('^')) return base;
        skip_ws();
        const std::size_t start = pos_;
        double sign = 1.0;
        if (accept('-')) {
            sign = -1.0;
        } else {
            accept('+');
        }
        skip_ws();
        if (pos_ >= text_.size() || !(std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
            fail({"signed number"});
        }
        const double exponent = sign * parse_number();
        const double twice = 2.0 * exponent;
        if (std::abs(twice - std::round(twice)) > 1e-12 || std::abs(twice) > 1e6) {
            throw Error(ErrorKind::RejectedConstruct, "expr",
                        "exponent at offset " + std::to_string(start) + " is not an integer or half-integer");
        }
        return Expr::power(std::move(base), static_cast<int>(std::lround(twice)));
    }

    Expr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) fail(atom_starts());
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expr inner = parse_expr();
            skip_ws();
            if (!accept(')')) fail({"')'"});
            return inner;
        }
        if (c == '-') {
            ++pos_;
            return Expr::unary(Op::Neg, parse_factor());
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return Expr::constant(parse_number());
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            const std::string_view word = text_.substr(start, pos_ - start);
            if (word == "u") return Expr::var_u();
            if (word == "v") return Expr::var_v();
            if (word == "pi") return Expr::constant(std::numbers::pi);
            if (word == "abs") {
                throw Error(ErrorKind::RejectedConstruct, "expr",
                            "abs at offset " + std::to_string(start) + " is not smooth and is not supported");
            }
            Op op;
            if (word == "sqrt") {
                op = Op::Sqrt;
            } else if (word == "sin") {
                op = Op::Sin;
            } else if (word == "cos") {
                op = Op::Cos;
            } else if (word == "exp") {
                op = Op::Exp;
            } else if (word == "bump") {
                op = Op::Bump;
            } else {
                pos_ = start;
                fail(atom_starts());
            }
            skip_ws();
            if (!accept('(')) fail({"'('"});
            Expr arg = parse_expr();
            skip_ws();
            if (!accept(')')) fail({"')'"});
            return Expr::unary(op, std::move(arg));
        }
        fail(atom_starts());
    }

    double parse_number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
            ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
            if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
                pos_ = look;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            }
        }
        double value = 0.0;
        const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
        if (res.ec != std::errc() || res.ptr != text_.data() + pos_) {
            pos_ = start;
            fail({"number"});
        }
        if (!std::isfinite(value)) {
            pos_ = start;
            fail({"finite number"});
        }
        return value;
    }

    static std::vector<std::string> atom_starts() {
        return {"number", "'u'", "'v'", "'pi'", "function", "'('", "'-'"};
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(std::vector<std::string> expected) const {
        std::string msg = "parse error at offset " + std::to_string(pos_) + ": expected ";
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) msg += ", ";
            msg += expected[i];
        }
        throw ParseError(pos_, std::move(expected), msg);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

std::string format_number(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void print(const Node& n, std::string& out) {
    switch (n.op) {
        case Op::Constant:
            if (n.value < 0) {
                out += "(-" + format_number(-n.value) + ")";
            } else {
                out += format_number(n.value);
            }
            return;
        case Op::VarU: out += "u"; return;
        case Op::VarV: out += "v"; return;
        case Op::Neg:
            out += "(-";
            print(*n.lhs, out);
            out += ")";
            return;
        case Op::Sqrt:
        case Op::Sin:
        case Op::Cos:
        case Op::Exp:
        case Op::Bump: {
            static constexpr const char* names[] = {"sqrt", "sin", "cos", "exp", "bump"};
            out += names[static_cast<int>(n.op) - static_cast<int>(Op::Sqrt)];
            out += "(";
            print(*n.lhs, out);
            out += ")";
            return;
        }
        case Op::Pow:
            out += "(";
            print(*n.lhs, out);
            out += "^";
            out += format_number(n.twice_exponent / 2.0);
            out += ")";
            return;
        default: {
            const char sym = n.op == Op::Add ? '+' : n.op == Op::Sub ? '-' : n.op == Op::Mul ? '*' : '/';
            out += "(";
            print(*n.lhs, out);
            out += ' ';
            out += sym;
            out += ' ';
            print(*n.rhs, out);
            out += ")";
        }
    }
}

double smooth_step(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

Jet2 smooth_step(const Jet2& x) {
    if (!(x.value() > 0.0)) return Jet2(x.order(), x.base());
    return exp(-1.0 / x);
}

double value_rec(const Node& n, double u, double v);

Jet2 jet_rec(const Node& n, const Vec2& p, int order) {
    switch (n.op) {
        case Op::Constant: return Jet2::constant(n.value, order, p);
        case Op::VarU: return Jet2::variable(0, order, p);
        case Op::VarV: return Jet2::variable(1, order, p);
        case Op::Neg: return -jet_rec(*n.lhs, p, order);
        case Op::Sqrt: return sqrt(jet_rec(*n.lhs, p, order));
        case Op::Sin: return sin(jet_rec(*n.lhs, p, order));
        case Op::Cos: return cos(jet_rec(*n.lhs, p, order));
        case Op::Exp: return exp(jet_rec(*n.lhs, p, order));
        case Op::Bump: {
            // Flat regions do not need the argument's jet, which may be singular there.
            const double t0 = value_rec(*n.lhs, p[0], p[1]);
            const double at = std::abs(t0);
            if (at <= 0.25) return Jet2::constant(1.0, order, p);
            if (at >= 0.75) return Jet2(order, p);
            return bump(jet_rec(*n.lhs, p, order));
        }
        case Op::Add: return jet_rec(*n.lhs, p, order) + jet_rec(*n.rhs, p, order);
        case Op::Sub: return jet_rec(*n.lhs, p, order) - jet_rec(*n.rhs, p, order);
        case Op::Mul: return jet_rec(*n.lhs, p, order) * jet_rec(*n.rhs, p, order);
        case Op::Div: return jet_rec(*n.lhs, p, order) / jet_rec(*n.rhs, p, order);
        case Op::Pow: {
            const Jet2 base = jet_rec(*n.lhs, p, order);
            if (n.twice_exponent % 2 == 0) return pow(base, n.twice_exponent / 2);
            return pow_half(base, n.twice_exponent);
        }
    }
    return Jet2(order, p);
}

double value_rec(const Node& n, double u, double v) {
    switch (n.op) {
        case Op::Constant: return n.value;
        case Op::VarU: return u;
        case Op::VarV: return v;
        case Op::Neg: return -value_rec(*n.lhs, u, v);
        case Op::Sqrt: {
            const double x = value_rec(*n.lhs, u, v);
            if (x < 0.0) throw Error(ErrorKind::DomainError, "expr", "square root of a negative value");
            return std::sqrt(x);
        }
        case Op::Sin: return std::sin(value_rec(*n.lhs, u, v));
        case Op::Cos: return std::cos(value_rec(*n.lhs, u, v));
        case Op::Exp: return std::exp(value_rec(*n.lhs, u, v));
        case Op::Bump: return bump(value_rec(*n.lhs, u, v));
        case Op::Add: return value_rec(*n.lhs, u, v) + value_rec(*n.rhs, u, v);
        case Op::Sub: return value_rec(*n.lhs, u, v) - value_rec(*n.rhs, u, v);
        case Op::Mul: return value_rec(*n.lhs, u, v) * value_rec(*n.rhs, u, v);
        case Op::Div: {
            const double den = value_rec(*n.rhs, u, v);
            if (den == 0.0) throw Error(ErrorKind::DomainError, "expr", "division by zero");
            return value_rec(*n.lhs, u, v) / den;
        }
        case Op::Pow: {
            const double base = value_rec(*n.lhs, u, v);
            if (n.twice_exponent % 2 == 0) {
                const int k = n.twice_exponent / 2;
                if (k < 0 && base == 0.0) throw Error(ErrorKind::DomainError, "expr", "zero to a negative power");
                double r = 1.0;
                for (int i = 0; i < std::abs(k); ++i) r *= base;
                return k < 0 ? 1.0 / r : r;
            }
            if (base < 0.0) throw Error(ErrorKind::DomainError, "expr", "half-integer power of a negative value");
            if (n.twice_exponent < 0 && base == 0.0) {
                throw Error(ErrorKind::DomainError, "expr", "zero to a negative power");
            }
            const double s = std::sqrt(base);
            double r = 1.0;
            for (int i = 0; i < std::abs(n.twice_exponent); ++i) r *= s;
            return n.twice_exponent < 0 ? 1.0 / r : r;
        }
    }
    return 0.0;
}

}  // namespace

Expr Expr::constant(double c) {
    if (!std::isfinite(c)) throw Error(ErrorKind::NonFinite, "expr", "non-finite constant");
    auto n = std::make_shared<Node>();
    n->op = Op::Constant;
    n->value = c;
    return Expr(std::move(n));
}

Expr Expr::var_u() {
    auto n = std::make_shared<Node>();
    n->op = Op::VarU;
    return Expr(std::move(n));
}

Expr Expr::var_v() {
    auto n = std::make_shared<Node>();
    n->op = Op::VarV;
    return Expr(std::move(n));
}

Expr Expr::unary(Op op, Expr arg) {
    if (!is_unary(op)) throw Error(ErrorKind::RejectedConstruct, "expr", "not a unary operator");
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(arg.node_);
    return Expr(std::move(n));
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
    if (op != Op::Add && op != Op::Sub && op != Op::Mul && op != Op::Div) {
        throw Error(ErrorKind::RejectedConstruct, "expr", "not a binary operator");
    }
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(lhs.node_);
    n->rhs = std::move(rhs.node_);
    return Expr(std::move(n));
}

Expr Expr::power(Expr base, int twice_exponent) {
    auto n = std::make_shared<Node>();
    n->op = Op::Pow;
    n->twice_exponent = twice_exponent;
    n->lhs = std::move(base.node_);
    return Expr(std::move(n));
}

Expr parse(std::string_view text) { return Parser(text).parse_all(); }

std::string to_string(const Expr& e) {
    std::string out;
    print(e.node(), out);
    return out;
}

Jet2 eval_jet(const Expr& e, const Vec2& point, int order) {
    try {
        return jet_rec(e.node(), point, order);
    } catch (const Error& err) {
        if (err.kind() == ErrorKind::DivisionByDegenerate || err.kind() == ErrorKind::NegativeRadicand ||
            err.kind() == ErrorKind::NonFinite) {
            throw Error(ErrorKind::DomainError, "expr",
                        std::string(err.what()) + " at (" + std::to_string(point[0]) + ", " +
                            std::to_string(point[1]) + ")");
        }
        throw;
    }
}

double eval_value(const Expr& e, double u, double v) { return value_rec(e.node(), u, v); }

double bump(double t) {
    const double a = std::abs(t);
    if (a <= 0.25) return 1.0;
    if (a >= 0.75) return 0.0;
    const double s_in = smooth_step(0.75 - a);
    const double s_out = smooth_step(a - 0.25);
    return s_in / (s_in + s_out);
}

Jet2 bump(const Jet2& t) {
    const double t0 = t.value();
    const double a0 = std::abs(t0);
    if (a0 <= 0.25) return Jet2::constant(1.0, t.order(), t.base());
    if (a0 >= 0.75) return Jet2(t.order(), t.base());
    const Jet2 abs_t = t0 > 0 ? t : -t;
    const Jet2 s_in = smooth_step(0.75 - abs_t);
    const Jet2 s_out = smooth_step(abs_t - 0.25);
    return s_in / (s_in + s_out);
}

}  // namespace smlab
