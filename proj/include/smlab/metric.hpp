#pragma once

// Positive semi-definite metrics E du^2 + 2F du dv + G dv^2 given as
// jet-evaluable fields, together with coordinate charts and pullbacks.

#include <array>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "smlab/expr.hpp"
#include "smlab/jet.hpp"

namespace smlab {

/// Parameter rectangle with optional periodic identifications.
struct Domain {
    Vec2 lo{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    Vec2 hi{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    bool periodic_u = false;
    bool periodic_v = false;

    static Domain rectangle(double u0, double u1, double v0, double v1, bool pu = false, bool pv = false);

    bool bounded() const;
    bool periodic(int axis) const { return axis == 0 ? periodic_u : periodic_v; }
    double period(int axis) const { return hi[axis] - lo[axis]; }
    /// True when p lies in the rectangle; periodic axes never exclude.
    bool contains(const Vec2& p, double slack = 0.0) const;
    /// Representative of p inside the fundamental rectangle.
    Vec2 wrap(const Vec2& p) const;
    /// Shortest displacement from a to b under the identifications.
    Vec2 displacement(const Vec2& a, const Vec2& b) const;
    /// Characteristic length: the larger side, or 1 when unbounded.
    double scale() const;
};

/// A map f: U -> R^3 with optional unit normal field.
struct SurfaceMap {
    std::array<Expr, 3> f;
    std::optional<std::array<Expr, 3>> nu;
    Domain domain;
};

struct MetricJets {
    Jet2 E, F, G;
    std::optional<Jet2> lambda;
};

/// E G - F^2 as a jet.
inline Jet2 discriminant(const MetricJets& m) { return m.E * m.G - m.F * m.F; }

class MetricField {
public:
    using Evaluator = std::function<MetricJets(const Vec2&, int)>;

    MetricField(Evaluator eval, bool has_lambda, Domain domain);

    static MetricField from_expressions(const Expr& E, const Expr& F, const Expr& G,
                                        const std::optional<Expr>& lambda, Domain domain);

    /// Jets of E, F, G (and the co-orientation-signed lambda) at p.
    MetricJets jets(const Vec2& p, int order) const;
    Eigen::Matrix2d matrix(const Vec2& p) const;

    bool has_lambda() const { return has_lambda_; }
    const Domain& domain() const { return domain_; }
    const std::optional<SurfaceMap>& source() const { return source_; }

    /// +1 or -1; multiplies lambda. `co_oriented()` tells whether it was declared.
    int co_orientation_sign() const { return sign_; }
    bool co_oriented() const { return co_oriented_; }

    MetricField with_co_orientation(int sign, bool declared = true) const;
    MetricField with_source(SurfaceMap source) const;
    MetricField with_domain(Domain domain) const;

private:
    Evaluator eval_;
    bool has_lambda_;
    Domain domain_;
    std::optional<SurfaceMap> source_;
    int sign_ = 1;
    bool co_oriented_ = true;
};

struct ChartJets {
    Jet2 u, v;
};

/// A coordinate change (xi, eta) -> (u, v) evaluable as jets.
class Chart {
public:
    enum class Kind { Identity, Affine, Polynomial, CurveBased, Composite };
    using Evaluator = std::function<ChartJets(const Vec2&, int)>;

    Chart(Kind kind, Evaluator eval, std::string description);

    static Chart identity();
    /// (u, v) = offset + A (xi, eta).
    static Chart affine(const Vec2& offset, const Eigen::Matrix2d& A);
    /// Polynomial components whose coefficients are the jets' coefficients about the origin.
    static Chart polynomial(const Jet2& u_poly, const Jet2& v_poly, Kind kind = Kind::Polynomial,
                            std::string description = "polynomial");

    ChartJets jets(const Vec2& q, int order) const { return eval_(q, order); }
    Vec2 map(const Vec2& q) const;
    Eigen::Matrix2d jacobian(const Vec2& q) const;

    Kind kind() const { return kind_; }
    const std::string& description() const { return description_; }

    /// outer after inner: (xi, eta) -> inner -> outer.
    friend Chart compose(const Chart& outer, const Chart& inner);

private:
    Kind kind_;
    Evaluator eval_;
    std::string description_;
};

/// Polynomial substitution sum c_ij (x - x0)^i (y - y0)^j without base checks.
Jet2 substitute(const Jet2& poly, const Jet2& x, const Jet2& y);

MetricField induced_metric(const SurfaceMap& f);

/// Largest violations of |nu|^2 = 1 and nu . f_u = nu . f_v = 0 on a sample grid.
double surface_normal_residual(const SurfaceMap& f, int grid = 10);

struct MetricCheck {
    double psd_violation = 0.0;     // most negative of E, G, EG - F^2 (0 when fine)
    double lambda_residual = 0.0;   // max |EG - F^2 - lambda^2| / (1 + |EG|)
};
MetricCheck check_metric(const MetricField& m, int grid = 10);

/// Four-term Brioschi expression from order-2 jets.
double gaussian_curvature(const MetricJets& jets);
double gaussian_curvature(const MetricField& m, const Vec2& p);

/// Smaller eigenvalue of the metric matrix relative to its trace.
double degeneracy_margin(const Eigen::Matrix2d& g);
inline constexpr double kDegeneracyTolerance = 1e-10;

enum class Axis { U = 0, V = 1 };

/// Kossowski pseudo-connection on coordinate fields: (d_i g_jk + d_j g_ik - d_k g_ij) / 2.
double kossowski_gamma(const MetricJets& jets, Axis i, Axis j, Axis k);
double kossowski_gamma(const MetricField& m, const Vec2& p, Axis i, Axis j, Axis k);

struct NullSpace {
    int rank = 2;
    std::vector<Vec2> null_dirs;
    double margin = 0.0;  // smaller eigenvalue / trace
};

/// Orients a direction so that its second component is >= 0 (ties: first > 0).
Vec2 canonical_direction(Vec2 d);

NullSpace null_space(const Eigen::Matrix2d& g);
NullSpace null_space(const MetricField& m, const Vec2& p);

/// Metric in the coordinates of `chart`; lambda picks up the Jacobian determinant.
MetricField pullback(const MetricField& m, const Chart& chart, Domain chart_domain = Domain{});

struct SingularSample {
    Vec2 point;
    Vec2 null_dir;
};

struct AdmissibilityReport {
    std::vector<double> max_gamma;  // per sample
    double worst = 0.0;
    double threshold = 0.0;
    bool admissible = true;
};

/// Evaluates Gamma(d_u, d_u, N), Gamma(d_u, N, N), Gamma(N, N, N) in a chart aligned with N.
AdmissibilityReport admissibility_check(const MetricField& m, const std::vector<SingularSample>& samples,
                                        double relative_tol = 1e-8);

/// Rotation chart centred at p whose second axis is the unit direction n.
Chart aligned_chart(const Vec2& p, const Vec2& n);

}  // namespace smlab
