#pragma once

// Singular curves of Kossowski metrics: tracing, A2/A3 classification,
// singular curvature and product curvature.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smlab/metric.hpp"

namespace smlab {

enum class PointClass { A2, A3, Other };
std::string_view to_string(PointClass c);

struct KossowskiOptions {
    int jet_order = 4;
    double max_step = 0.0;     // 0: domain scale / 100
    double min_step = 1e-9;
    double max_turn = 0.1;     // radians per step
    double tol_cls = 1e-7;
    double guard_factor = 10.0;
    int max_samples = 200000;
    double richardson_h0 = 1e-2;  // multiplied by the domain scale
    int richardson_levels = 6;
    double richardson_tol = 1e-4;
};

/// Local data at a point of the singular set, from jets of the tracing ODE
/// gamma' = J grad(lambda) / |grad(lambda)| (J the quarter turn).
/// The univariate jets are in the Euclidean arclength s from the point and are
/// stored in the first variable of a Jet2 based at the origin.
struct CurveGeometry {
    Vec2 point;
    Vec2 tangent;
    Vec2 eta;
    double grad_norm = 0.0;
    double phi = 0.0;   // det(tangent, eta)
    double dphi = 0.0;  // d phi / ds
    Jet2 gamma_u, gamma_v, eta_u, eta_v;
};

struct CurveSample {
    double t = 0.0;
    CurveGeometry geo;
    PointClass cls = PointClass::A2;
    std::optional<double> kappa_s;
    std::optional<double> kappa_pi;
    bool unreliable = false;
    double tau = 0.0;  // cumulative metric arclength
};

struct SingularCurve {
    std::vector<CurveSample> samples;
    bool closed = false;
    double closing_length = 0.0;  // parameter length from the last sample back to the first
    Domain domain;
    /// Parameter length; for closed curves this includes the closing segment.
    double parameter_length() const;
    std::vector<std::size_t> a3_indices() const;
};

/// Newton projection onto lambda = 0 along the gradient.
Vec2 project_to_singular_set(const MetricField& m, const Vec2& p, double tol = 1e-13, int max_iter = 50);

/// Geometry at an on-curve point. The hints fix the signs of the tangent and eta.
CurveGeometry curve_geometry(const MetricField& m, const Vec2& p, const Vec2& tangent_hint, const Vec2& eta_hint,
                             int jet_order = 4);

PointClass classify(const CurveGeometry& g, double tol_cls = 1e-7);

SingularCurve trace_singular_curve(const MetricField& m, const Vec2& seed, const KossowskiOptions& opt = {});

/// Seeds from sign changes of lambda on a grid, traced and deduplicated.
std::vector<SingularCurve> find_singular_curves(const MetricField& m, int grid = 64, const KossowskiOptions& opt = {});

/// The on-curve point at parameter t (samples interpolated by their Taylor jets, then projected).
CurveGeometry point_at(const MetricField& m, const SingularCurve& c, double t, int jet_order = 4);

PointClass classify_point(const MetricField& m, const SingularCurve& c, double t, const KossowskiOptions& opt = {});

/// (u', v') -> gamma(u') + v' eta(u'), strongly adapted at the point.
Chart curve_chart(const CurveGeometry& g);

double singular_curvature(const MetricField& m, const CurveGeometry& g, const KossowskiOptions& opt = {});

struct ProductCurvature {
    double value = 0.0;   // signed when the metric is co-oriented, else |value|
    bool is_signed = false;
    double error = 0.0;   // Richardson estimate of the K lambda limit
};

/// (K lambda) / (E^(1/4) |lambda_v|^(1/2)) in the curve chart, K lambda by Richardson extrapolation.
ProductCurvature product_curvature(const MetricField& m, const CurveGeometry& g, const KossowskiOptions& opt = {});

/// K lambda at an arbitrary point; extrapolated along the gradient when the point is degenerate.
double k_lambda(const MetricField& m, const Vec2& p, double h0 = 1e-3);

struct NormalizedCheck {
    double e_residual = 0.0;    // max |E(u,0) - 1|
    double gvv_residual = 0.0;  // max |G_vv(u,0) - 2|
    double f_residual = 0.0;    // max |F| on the collar
    bool normalized = false;
};
NormalizedCheck verify_normalized_chart(const MetricField& m, const std::vector<double>& us, double collar = 0.05,
                                        double tol = 1e-8);

struct NormalFormInvariants {
    double kappa_s = 0.0;
    double kappa_pi = 0.0;
    bool is_signed = false;
};
NormalFormInvariants normal_form_invariants(const MetricField& m, double u);

/// Fills kappa_s / kappa_pi on every A2 sample outside the guard band.
void annotate_invariants(const MetricField& m, SingularCurve& c, const KossowskiOptions& opt = {});

/// Columns t, u, v, tangent_u, tangent_v, eta_u, eta_v, class, kappa_s, kappa_pi, tau.
std::string curve_csv(const SingularCurve& c);

}  // namespace smlab
