#pragma once

// Truncated bivariate Taylor jets.
//
// A Jet<Scalar> of order n at base point (u0, v0) stores the coefficients
// c_ij of the expansion sum c_ij du^i dv^j, i + j <= n, where du = u - u0 and
// dv = v - v0. Coefficients are laid out graded-lexicographically: degree d
// occupies the slots d(d+1)/2 .. d(d+1)/2 + d, ordered by increasing power of v.

#include <array>
#include <cmath>
#include <string>

#include <Eigen/Core>

#include "smlab/error.hpp"

namespace smlab {

template <typename Scalar>
class Jet {
public:
    using Point = Eigen::Matrix<Scalar, 2, 1>;

    static constexpr int kMaxOrder = 6;
    static constexpr int kMaxSize = (kMaxOrder + 1) * (kMaxOrder + 2) / 2;

    static constexpr int size_for(int order) { return (order + 1) * (order + 2) / 2; }
    static constexpr int index(int i, int j) {
        const int d = i + j;
        return d * (d + 1) / 2 + j;
    }

    Jet() : Jet(0, Point::Zero()) {}

    Jet(int order, const Point& base) : order_(order), base_(base) {
        if (order < 0 || order > kMaxOrder) {
            throw Error(ErrorKind::OrderMismatch, "jet",
                        "jet order " + std::to_string(order) + " outside [0, 6]");
        }
        coeffs_.fill(Scalar(0));
    }

    /// Builds a jet from graded-lex coefficients; the count must match the order.
    template <typename Range>
    static Jet from_coefficients(int order, const Point& base, const Range& coeffs) {
        Jet out(order, base);
        int k = 0;
        for (const auto& c : coeffs) {
            if (k >= out.size()) {
                throw Error(ErrorKind::OrderMismatch, "jet", "too many coefficients for jet order");
            }
            out.coeffs_[k++] = Scalar(c);
        }
        if (k != out.size()) {
            throw Error(ErrorKind::OrderMismatch, "jet", "coefficient count does not match jet order");
        }
        out.check_finite();
        return out;
    }

    static Jet constant(Scalar c, int order, const Point& base) {
        Jet out(order, base);
        out.coeffs_[0] = c;
        out.check_finite();
        return out;
    }

    /// The coordinate function u (or v) expanded at `base`.
    static Jet variable(int axis, int order, const Point& base) {
        Jet out(order, base);
        out.coeffs_[0] = base[axis];
        if (order >= 1) out.coeffs_[axis == 0 ? 1 : 2] = Scalar(1);
        return out;
    }

    int order() const { return order_; }
    int size() const { return size_for(order_); }
    const Point& base() const { return base_; }

    Scalar value() const { return coeffs_[0]; }
    Scalar coeff(int i, int j) const { return (i + j <= order_) ? coeffs_[index(i, j)] : Scalar(0); }
    Scalar& coeff_ref(int i, int j) { return coeffs_[index(i, j)]; }
    const Scalar* data() const { return coeffs_.data(); }

    /// Partial derivative d^{i+j} / du^i dv^j at the base point.
    Scalar derivative(int i, int j) const { return coeff(i, j) * factorial(i) * factorial(j); }

    void check_finite() const {
        for (int k = 0; k < size(); ++k) {
            if (!std::isfinite(static_cast<double>(coeffs_[k]))) {
                throw Error(ErrorKind::NonFinite, "jet", "non-finite jet coefficient");
            }
        }
    }

    /// Evaluates the truncated polynomial at the offset (du, dv).
    Scalar evaluate(Scalar du, Scalar dv) const {
        Scalar total(0);
        for (int d = order_; d >= 0; --d) {
            Scalar layer(0);
            Scalar vp(1);
            for (int j = 0; j <= d; ++j) {
                layer += coeffs_[index(d - j, j)] * ipow_scalar(du, d - j) * vp;
                vp *= dv;
            }
            total += layer;
        }
        return total;
    }

    /// Drops every coefficient above `order`.
    Jet truncated(int order) const {
        Jet out(order, base_);
        const int n = std::min(order, order_);
        for (int k = 0; k < size_for(n); ++k) out.coeffs_[k] = coeffs_[k];
        return out;
    }

    /// Partial derivative as a jet; the result has order one less.
    Jet diff(int axis) const {
        if (order_ == 0) {
            throw Error(ErrorKind::OrderMismatch, "jet", "cannot differentiate an order-0 jet");
        }
        Jet out(order_ - 1, base_);
        for (int d = 0; d < order_; ++d) {
            for (int j = 0; j <= d; ++j) {
                const int i = d - j;
                if (axis == 0) {
                    out.coeffs_[index(i, j)] = Scalar(i + 1) * coeffs_[index(i + 1, j)];
                } else {
                    out.coeffs_[index(i, j)] = Scalar(j + 1) * coeffs_[index(i, j + 1)];
                }
            }
        }
        return out;
    }

    /// Antiderivative in u vanishing at du = 0, truncated to the same order.
    Jet integrate_u() const {
        Jet out(order_, base_);
        for (int d = 0; d < order_; ++d) {
            for (int j = 0; j <= d; ++j) {
                const int i = d - j;
                out.coeffs_[index(i + 1, j)] = coeffs_[index(i, j)] / Scalar(i + 1);
            }
        }
        return out;
    }

    Jet with_base(const Point& base) const {
        Jet out = *this;
        out.base_ = base;
        return out;
    }

    Jet operator-() const {
        Jet out(order_, base_);
        for (int k = 0; k < size(); ++k) out.coeffs_[k] = -coeffs_[k];
        return out;
    }

    Jet& operator+=(const Jet& b) {
        require_compatible(b);
        for (int k = 0; k < size(); ++k) coeffs_[k] += b.coeffs_[k];
        return *this;
    }
    Jet& operator-=(const Jet& b) {
        require_compatible(b);
        for (int k = 0; k < size(); ++k) coeffs_[k] -= b.coeffs_[k];
        return *this;
    }
    Jet& operator+=(Scalar c) {
        coeffs_[0] += c;
        return *this;
    }
    Jet& operator-=(Scalar c) {
        coeffs_[0] -= c;
        return *this;
    }
    Jet& operator*=(Scalar c) {
        for (int k = 0; k < size(); ++k) coeffs_[k] *= c;
        return *this;
    }
    Jet& operator/=(Scalar c) {
        for (int k = 0; k < size(); ++k) coeffs_[k] /= c;
        return *this;
    }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator+(Jet a, Scalar c) { return a += c; }
    friend Jet operator+(Scalar c, Jet a) { return a += c; }
    friend Jet operator-(Jet a, Scalar c) { return a -= c; }
    friend Jet operator-(Scalar c, const Jet& a) { return (-a) += c; }
    friend Jet operator*(Jet a, Scalar c) { return a *= c; }
    friend Jet operator*(Scalar c, Jet a) { return a *= c; }
    friend Jet operator/(Jet a, Scalar c) { return a /= c; }

    friend Jet operator*(const Jet& a, const Jet& b) {
        a.require_compatible(b);
        Jet out(a.order_, a.base_);
        const int n = a.order_;
        for (int d1 = 0; d1 <= n; ++d1) {
            for (int j1 = 0; j1 <= d1; ++j1) {
                const Scalar ca = a.coeffs_[index(d1 - j1, j1)];
                if (ca == Scalar(0)) continue;
                for (int d2 = 0; d1 + d2 <= n; ++d2) {
                    for (int j2 = 0; j2 <= d2; ++j2) {
                        out.coeffs_[index(d1 - j1 + d2 - j2, j1 + j2)] += ca * b.coeffs_[index(d2 - j2, j2)];
                    }
                }
            }
        }
        return out;
    }

    friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
    friend Jet operator/(Scalar c, const Jet& b) { return reciprocal(b) * c; }

    /// Composes a univariate function with this jet given f^(k)(value()), k = 0..order.
    template <typename Derivs>
    Jet apply(const Derivs& derivs) const {
        Jet h = *this;
        h.coeffs_[0] = Scalar(0);
        Jet out = constant(derivs[order_] / factorial(order_), order_, base_);
        for (int k = order_ - 1; k >= 0; --k) {
            out = out * h;
            out.coeffs_[0] += derivs[k] / factorial(k);
        }
        out.check_finite();
        return out;
    }

    friend Jet reciprocal(const Jet& a) {
        const Scalar x = a.value();
        if (x == Scalar(0)) {
            throw Error(ErrorKind::DivisionByDegenerate, "jet", "division by a jet with zero constant term");
        }
        std::array<Scalar, kMaxOrder + 1> d{};
        Scalar inv = Scalar(1) / x;
        Scalar term = inv;
        for (int k = 0; k <= a.order_; ++k) {
            d[k] = term;
            term *= -Scalar(k + 1) * inv;
        }
        return a.apply(d);
    }

    friend Jet sqrt(const Jet& a) {
        const Scalar x = a.value();
        if (!(x > Scalar(0))) {
            throw Error(ErrorKind::NegativeRadicand, "jet", "square root of a jet with non-positive constant term");
        }
        return real_pow(a, Scalar(0.5));
    }

    friend Jet exp(const Jet& a) {
        std::array<Scalar, kMaxOrder + 1> d{};
        d.fill(std::exp(a.value()));
        return a.apply(d);
    }

    friend Jet sin(const Jet& a) {
        std::array<Scalar, kMaxOrder + 1> d{};
        const Scalar s = std::sin(a.value()), c = std::cos(a.value());
        const Scalar cycle[4] = {s, c, -s, -c};
        for (int k = 0; k <= a.order_; ++k) d[k] = cycle[k % 4];
        return a.apply(d);
    }

    friend Jet cos(const Jet& a) {
        std::array<Scalar, kMaxOrder + 1> d{};
        const Scalar s = std::sin(a.value()), c = std::cos(a.value());
        const Scalar cycle[4] = {c, -s, -c, s};
        for (int k = 0; k <= a.order_; ++k) d[k] = cycle[k % 4];
        return a.apply(d);
    }

    /// Integer power by repeated squaring; negative exponents go through reciprocal.
    friend Jet pow(const Jet& a, int n) {
        if (n < 0) return reciprocal(pow(a, -n));
        Jet result = constant(Scalar(1), a.order_, a.base_);
        Jet base = a;
        while (n > 0) {
            if (n & 1) result = result * base;
            n >>= 1;
            if (n > 0) base = base * base;
        }
        return result;
    }

    /// a^(k/2) for odd k, as an integer power of sqrt(a).
    friend Jet pow_half(const Jet& a, int twice_exponent) { return pow(sqrt(a), twice_exponent); }

private:
    static Scalar factorial(int k) {
        static constexpr double table[] = {1, 1, 2, 6, 24, 120, 720, 5040};
        return Scalar(table[k]);
    }

    static Scalar ipow_scalar(Scalar x, int k) {
        Scalar r(1);
        for (int i = 0; i < k; ++i) r *= x;
        return r;
    }

    friend Jet real_pow(const Jet& a, Scalar p) {
        std::array<Scalar, kMaxOrder + 1> d{};
        const Scalar x = a.value();
        Scalar coef(1);
        for (int k = 0; k <= a.order_; ++k) {
            d[k] = coef * std::pow(x, p - Scalar(k));
            coef *= (p - Scalar(k));
        }
        return a.apply(d);
    }

    void require_compatible(const Jet& b) const {
        if (order_ != b.order_) {
            throw Error(ErrorKind::OrderMismatch, "jet", "jet operands have different orders");
        }
        if (base_ != b.base_) {
            throw Error(ErrorKind::BasePointMismatch, "jet", "jet operands have different base points");
        }
    }

    int order_;
    Point base_;
    std::array<Scalar, kMaxSize> coeffs_;
};

using Jet2 = Jet<double>;
using Vec2 = Eigen::Vector2d;

/// Jet of outer(x, y) composed with x = inner_x(u, v), y = inner_y(u, v).
/// The inner constant terms must equal the base point of `outer`.
template <typename Scalar>
Jet<Scalar> compose(const Jet<Scalar>& outer, const Jet<Scalar>& inner_x, const Jet<Scalar>& inner_y) {
    using J = Jet<Scalar>;
    if (inner_x.order() != inner_y.order()) {
        throw Error(ErrorKind::OrderMismatch, "jet", "inner jets have different orders");
    }
    if (inner_x.base() != inner_y.base()) {
        throw Error(ErrorKind::BasePointMismatch, "jet", "inner jets have different base points");
    }
    const auto close = [](Scalar a, Scalar b) {
        return std::abs(a - b) <= Scalar(1e-12) * (Scalar(1) + std::abs(b));
    };
    if (!close(inner_x.value(), outer.base()[0]) || !close(inner_y.value(), outer.base()[1])) {
        throw Error(ErrorKind::BasePointMismatch, "jet",
                    "inner jet values do not match the base point of the outer jet");
    }
    const int n = inner_x.order();
    const int m = std::min(n, outer.order());
    J dx = inner_x;
    dx.coeff_ref(0, 0) = Scalar(0);
    J dy = inner_y;
    dy.coeff_ref(0, 0) = Scalar(0);

    std::array<J, J::kMaxOrder + 1> px, py;
    px[0] = J::constant(Scalar(1), n, inner_x.base());
    py[0] = px[0];
    for (int k = 1; k <= m; ++k) {
        px[k] = px[k - 1] * dx;
        py[k] = py[k - 1] * dy;
    }
    J out(n, inner_x.base());
    for (int d = 0; d <= m; ++d) {
        for (int j = 0; j <= d; ++j) {
            const Scalar c = outer.coeff(d - j, j);
            if (c != Scalar(0)) out += (px[d - j] * py[j]) * c;
        }
    }
    return out;
}

}  // namespace smlab
