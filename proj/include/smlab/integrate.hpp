#pragma once

// Quadrature of K dA, K d-hat-A and kappa_s d-tau, and the three
// Gauss-Bonnet checks built from them.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smlab/config.hpp"
#include "smlab/kossowski.hpp"
#include "smlab/metric.hpp"

namespace smlab {

/// Each tile is integrated on its 2 x 2 and 4 x 4 subdivisions; the finer value is kept and the
/// difference is the error. Curve segments compare one rule with its two halves.
struct Quadrature {
    double value = 0.0;
    double error = 0.0;
};

struct IntegrateOptions {
    int depth = 8;         // tiles per side of the parameter rectangle
    int gauss_order = 8;   // nodes per direction inside a tile
    int workers = 0;       // 0: hardware concurrency
    int grid = 64;         // cross-cap and curve search grid
    double near_curve = 1e-3;     // distance to lambda = 0 (times the domain scale) below which K lambda is extrapolated
    double richardson_h0 = 1e-2;  // times the domain scale
    int max_split = 4;            // tile subdivisions allowed when the singular set is tangent to both axes
    KossowskiOptions kossowski;
};

/// Integral of K over the rectangle against the unsigned area element.
/// Tiles are split along lambda = 0; tiles touching a cross cap are split into triangles with Duffy coordinates.
Quadrature integrate_K_dA(const MetricField& m, const IntegrateOptions& opt = {});

/// Integral of K lambda du dv; lambda required.
Quadrature integrate_K_dhatA(const MetricField& m, const IntegrateOptions& opt = {});

/// Integral of kappa_s against the metric arclength of the curve.
/// Segments next to an A3 point are refined geometrically toward it.
Quadrature integrate_kappa_s(const MetricField& m, const SingularCurve& c, const IntegrateOptions& opt = {});

/// K lambda at p, extrapolated along grad(lambda) when p is close to the singular set.
double k_lambda_robust(const MetricField& m, const Vec2& p, const IntegrateOptions& opt = {});

enum class A3Sign { Positive, Negative, Ambiguous };
std::string_view to_string(A3Sign s);

struct A3SignReport {
    Vec2 point;
    double share = 0.0;  // fraction of the metric angle around p lying in M+
    A3Sign sign = A3Sign::Ambiguous;
};

/// Measures the angle swept by the radius vector of a small circle about p in the metric at each circle point,
/// and the part of it spent where lambda > 0. Shares above 3/4 at every radius give Positive, below 1/4 Negative.
A3SignReport a3_sign(const MetricField& m, const Vec2& p, const std::vector<double>& radii = {1e-2, 3e-3},
                     int panels = 4096);

enum class GBKind { GB1, Euler, WhitneyGB };
std::string_view to_string(GBKind k);
/// "gb1", "euler", "whitney"; throws ConfigError otherwise.
GBKind parse_gb_kind(std::string_view s);

struct GBReport {
    GBKind kind = GBKind::GB1;
    std::optional<Quadrature> K_dA;
    std::optional<Quadrature> kappa_s_dtau;
    std::optional<Quadrature> K_dhatA;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
    double error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    int curves = 0;
    int cross_caps = 0;
    std::optional<int> S_plus, S_minus;
    std::vector<A3SignReport> a3;
    bool ambiguous = false;
};

/// Euler: lhs = (1/2 pi) integral of K d-hat-A against chi(M+) - chi(M-) + #S+ - #S-.
/// GB1 and WhitneyGB compare against 2 pi chi. Pass when residual <= max(abs_tol, 10 error).
GBReport gb_report(const MetricField& m, GBKind kind, const Topology& topo, const std::vector<SingularCurve>& curves,
                   double abs_tol, const IntegrateOptions& opt = {});

/// Traces the singular set on the search grid first.
GBReport gb_report(const MetricField& m, GBKind kind, const Topology& topo, double abs_tol,
                   const IntegrateOptions& opt = {});

std::string to_json(const GBReport& r);

}  // namespace smlab
