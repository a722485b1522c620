#include "smlab/numerics.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "smlab/error.hpp"

namespace smlab {

Extrapolation richardson(const std::function<double(double)>& f, double h0, int levels, int first_power,
                         int power_step, double rel_tol, const char* module) {
    Extrapolation out;
    std::vector<std::vector<double>> T(levels);
    double h = h0;
    for (int k = 0; k < levels; ++k, h *= 0.5) {
        const double fk = f(h);
        if (!std::isfinite(fk)) throw Error(ErrorKind::NonFinite, module, "non-finite sample in extrapolation");
        out.samples.push_back(fk);
        T[k].push_back(fk);
        for (int j = 1; j <= k; ++j) {
            const double factor = std::ldexp(1.0, first_power + (j - 1) * power_step) - 1.0;
            T[k].push_back(T[k][j - 1] + (T[k][j - 1] - T[k - 1][j - 1]) / factor);
        }
    }
    const int n = levels - 1;
    out.value = T[n][n];
    out.error = n > 0 ? std::abs(T[n][n] - T[n - 1][n - 1]) : std::abs(out.value);
    if (out.error > rel_tol * std::max(1.0, std::abs(out.value))) {
        throw Error(ErrorKind::ExtrapolationDiverged, module,
                    "extrapolants differ by " + std::to_string(out.error));
    }
    return out;
}

const GaussRule& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        r.nodes[n - 1 - i] = x;
        r.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return cache.emplace(n, std::move(r)).first->second;
}

double gauss_integrate(const std::function<double(double)>& f, double a, double b, int n) {
    const GaussRule& g = gauss_legendre(n);
    const double c = 0.5 * (a + b), r = 0.5 * (b - a);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += g.weights[i] * f(c + r * g.nodes[i]);
    return sum * r;
}

double bracketed_root(const std::function<double(double)>& f, double a, double b, double fa, double fb,
                      double xtol, int max_iter) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0) == (fb > 0)) throw Error(ErrorKind::NoConvergence, "numerics", "root is not bracketed");
    int side = 0;
    for (int it = 0; it < max_iter; ++it) {
        const double c = (a * fb - b * fa) / (fb - fa);
        if (!(c > std::min(a, b) && c < std::max(a, b))) return c;  // no representable progress
        const double fc = f(c);
        if (fc == 0.0 || std::abs(b - a) < xtol) return c;
        if ((fc > 0) == (fb > 0)) {
            b = c;
            fb = fc;
            if (side == -1) fa *= 0.5;
            side = -1;
        } else {
            a = c;
            fa = fc;
            if (side == 1) fb *= 0.5;
            side = 1;
        }
        if (std::abs(b - a) < xtol) return (a * fb - b * fa) / (fb - fa);
    }
    throw Error(ErrorKind::NoConvergence, "numerics", "root finding did not converge");
}

}  // namespace smlab
