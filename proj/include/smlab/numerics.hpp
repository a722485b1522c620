#pragma once

// Richardson extrapolation and Gauss-Legendre rules.

#include <functional>
#include <vector>

namespace smlab {

struct Extrapolation {
    double value = 0.0;
    double error = 0.0;           // |last - previous| on the tableau diagonal
    std::vector<double> samples;  // f(h_k)
};

/// Extrapolates f(h) -> f(0) from h_k = h0 2^-k, k < levels, assuming
/// f(h) = f(0) + c1 h^p + c2 h^(p+q) + ... with p = first_power, q = power_step.
/// Throws ExtrapolationDiverged when error > rel_tol * max(1, |value|).
Extrapolation richardson(const std::function<double(double)>& f, double h0, int levels, int first_power = 1,
                         int power_step = 1, double rel_tol = 1e-4, const char* module = "numerics");

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule (cached).
const GaussRule& gauss_legendre(int n);

/// Integral of f over [a, b] with the n-point rule.
double gauss_integrate(const std::function<double(double)>& f, double a, double b, int n);

/// Root of f in [a, b] given a sign change, by the Illinois variant of regula falsi.
double bracketed_root(const std::function<double(double)>& f, double a, double b, double fa, double fb,
                      double xtol, int max_iter = 200);

}  // namespace smlab
