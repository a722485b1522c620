#pragma once

// Independent reference implementations used by the tests.

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "smlab/jet.hpp"

namespace oracle {

/// Dense bivariate polynomial, c[i][j] multiplies du^i dv^j, truncated at total degree n.
struct Poly {
    int n;
    std::vector<std::vector<double>> c;

    explicit Poly(int order) : n(order), c(order + 1, std::vector<double>(order + 1, 0.0)) {}

    double& at(int i, int j) { return c[i][j]; }
    double get(int i, int j) const { return (i + j <= n) ? c[i][j] : 0.0; }

    Poly operator+(const Poly& o) const {
        Poly r(n);
        for (int i = 0; i <= n; ++i)
            for (int j = 0; i + j <= n; ++j) r.c[i][j] = c[i][j] + o.c[i][j];
        return r;
    }
    Poly operator-(const Poly& o) const {
        Poly r(n);
        for (int i = 0; i <= n; ++i)
            for (int j = 0; i + j <= n; ++j) r.c[i][j] = c[i][j] - o.c[i][j];
        return r;
    }
    Poly operator*(const Poly& o) const {
        Poly r(n);
        for (int i = 0; i <= n; ++i)
            for (int j = 0; i + j <= n; ++j)
                for (int k = 0; i + k <= n; ++k)
                    for (int l = 0; i + j + k + l <= n; ++l) r.c[i + k][j + l] += c[i][j] * o.c[k][l];
        return r;
    }
    Poly scaled(double s) const {
        Poly r = *this;
        for (auto& row : r.c)
            for (double& x : row) x *= s;
        return r;
    }
};

inline Poly random_poly(std::mt19937_64& rng, int order, int degree, double c0_min = -1.0) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Poly p(order);
    for (int i = 0; i <= degree; ++i)
        for (int j = 0; i + j <= degree && i + j <= order; ++j) p.c[i][j] = d(rng);
    if (c0_min > -1.0) p.c[0][0] = c0_min + std::abs(p.c[0][0]);
    return p;
}

inline smlab::Jet2 to_jet(const Poly& p, const smlab::Vec2& base = smlab::Vec2::Zero()) {
    smlab::Jet2 j(p.n, base);
    for (int i = 0; i <= p.n; ++i)
        for (int k = 0; i + k <= p.n; ++k) j.coeff_ref(i, k) = p.c[i][k];
    return j;
}

inline double max_diff(const smlab::Jet2& j, const Poly& p) {
    double worst = 0.0;
    for (int i = 0; i <= p.n; ++i)
        for (int k = 0; i + k <= p.n; ++k)
            worst = std::max(worst, std::abs(j.coeff(i, k) - p.c[i][k]) / (1.0 + std::abs(p.c[i][k])));
    return worst;
}

/// Central difference of a scalar function along one axis.
template <typename F>
double central_diff(F f, double u, double v, int axis, double h = 1e-5) {
    if (axis == 0) return (f(u + h, v) - f(u - h, v)) / (2 * h);
    return (f(u, v + h) - f(u, v - h)) / (2 * h);
}

}  // namespace oracle
