#pragma once

// Intrinsic cross caps of Whitney metrics: detection, the staged chart
// pipeline and the invariants alpha02, alpha11, alpha20.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "smlab/metric.hpp"

namespace smlab {

struct CrossCapCandidate {
    Vec2 point;
    double hess = 0.0;  // det Hess(EG - F^2) at the point
};

/// Newton iteration on grad(EG - F^2) from the local minima of a grid x grid sample.
std::vector<CrossCapCandidate> detect_cross_caps(const MetricField& m, int grid = 64);

/// det Hess(EG - F^2) at p.
double discriminant_hessian(const MetricField& m, const Vec2& p);

struct Alpha02 {
    double alpha02 = 0.0;
    double delta = 0.0;  // the 3x3 determinant
    double alpha = 0.0;  // E G_vv / 2 - F_v^2
    double hess = 0.0;
    double E = 0.0;
};

/// Rotation about p taking the null direction to d/dv. Throws NotCrossCap.
Chart adjusted_chart(const MetricField& m, const Vec2& p);
Alpha02 cross_cap_alpha02(const MetricField& m, const Vec2& p);

/// u = c1 xi + c11 xi^2 + c12 xi eta + c22 eta^2, v = eta, for a metric adjusted at the origin.
struct AdaptedStage {
    Chart chart = Chart::identity();
    double c1 = 0, c11 = 0, c12 = 0, c22 = 0;
    double residual = 0.0;  // max of |E - 1|, |dE|, |dF|, |dG| at the origin
};
AdaptedStage adapted_stage(const MetricField& adjusted);

/// Adjusted rotation followed by the adapted quadratic change.
Chart build_adapted_chart(const MetricField& m, const Vec2& p);

struct LevelAdjustment {
    Chart first = Chart::identity();   // v = k eta
    Chart second = Chart::identity();  // v = eta + c xi
    double scale = 1.0;
    double shear = 0.0;
    double first_residual = 0.0;   // |G_vv - 2 alpha02^2|
    double second_residual = 0.0;  // the second-level determinant
};
/// For a metric adapted at the origin.
LevelAdjustment level_adjust(const MetricField& adapted, double alpha02);

/// Cubic change u = xi + c30 xi^3 + c21 xi^2 eta + c12 xi eta^2 + c03 eta^3 reaching the West expansion.
struct WestStage {
    Chart chart = Chart::identity();
    double c30 = 0, c21 = 0, c12 = 0, c03 = 0;
    double residual = 0.0;  // worst second-order coefficient of E, F, G against the West expansion
};
WestStage west_chart(const MetricField& second_level, double alpha20, double alpha11, double alpha02);

/// Second derivatives at the origin of the West expansion: {E_uu, E_uv, E_vv, F_uu, F_uv, F_vv, G_uu, G_uv, G_vv}.
std::array<double, 9> west_second_derivatives(double alpha20, double alpha11, double alpha02);

/// alpha02 (alpha20 cos^2 - alpha02 sin^2) / (cos^2 + (alpha11 cos + alpha02 sin)^2)^2.
double ray_limit_formula(double alpha20, double alpha11, double alpha02, double theta);

struct RayLimit {
    double theta = 0.0;
    double value = 0.0;
    double error = 0.0;
    double formula = 0.0;
};
/// Richardson limit of r^2 K(r cos theta, r sin theta) in a second-level chart.
RayLimit curvature_ray_limit(const MetricField& second_level, double theta, double h0 = 1e-2, int levels = 6,
                             double rel_tol = 1e-4);

struct WhitneyOptions {
    bool oriented = true;
    bool west = true;
    int rays = 16;
    double richardson_h0 = 1e-2;  // multiplied by the domain scale
    int richardson_levels = 6;
    double richardson_tol = 1e-4;
};

struct ChartStage {
    std::string name;
    Eigen::Matrix2d jacobian;  // at the origin
    std::vector<double> constants;
};

struct CrossCapReport {
    Vec2 location;
    double hess = 0.0;
    double delta = 0.0;
    double alpha = 0.0;
    double E = 0.0;
    double alpha02 = 0.0;
    double alpha11 = 0.0;
    bool alpha11_signed = true;
    double alpha20 = 0.0;
    double residual_hess = 0.0;  // |Hess - 4 E Delta|
    double residual_a1_2 = 0.0;  // |G_uu - 2 (1 + alpha11^2)|
    double residual_FE2 = 0.0;   // |F_uu - E_uv / 2 - alpha11 alpha20|
    std::optional<double> residual_west;
    std::vector<ChartStage> stack;
    std::vector<RayLimit> rays;
};

CrossCapReport cross_cap_invariants(const MetricField& m, const Vec2& p, const WhitneyOptions& opt = {});

/// The metric in second-level coordinates at p (cross cap at the origin).
MetricField second_level_metric(const MetricField& m, const Vec2& p);

std::string to_json(const CrossCapReport& r);

}  // namespace smlab
