#include "smlab/metric.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/Eigenvalues>

namespace smlab {

Domain Domain::rectangle(double u0, double u1, double v0, double v1, bool pu, bool pv) {
    Domain d;
    d.lo = Vec2(u0, v0);
    d.hi = Vec2(u1, v1);
    d.periodic_u = pu;
    d.periodic_v = pv;
    return d;
}

bool Domain::bounded() const { return lo.allFinite() && hi.allFinite(); }

bool Domain::contains(const Vec2& p, double slack) const {
    for (int a = 0; a < 2; ++a) {
        if (periodic(a)) continue;
        if (p[a] < lo[a] - slack || p[a] > hi[a] + slack) return false;
    }
    return true;
}

Vec2 Domain::wrap(const Vec2& p) const {
    Vec2 out = p;
    for (int a = 0; a < 2; ++a) {
        if (!periodic(a)) continue;
        const double L = period(a);
        double r = std::fmod(p[a] - lo[a], L);
        if (r < 0) r += L;
        out[a] = lo[a] + r;
    }
    return out;
}

Vec2 Domain::displacement(const Vec2& a, const Vec2& b) const {
    Vec2 d = b - a;
    for (int k = 0; k < 2; ++k) {
        if (!periodic(k)) continue;
        const double L = period(k);
        d[k] -= L * std::round(d[k] / L);
    }
    return d;
}

double Domain::scale() const {
    if (!bounded()) return 1.0;
    return std::max(hi[0] - lo[0], hi[1] - lo[1]);
}

MetricField::MetricField(Evaluator eval, bool has_lambda, Domain domain)
    : eval_(std::move(eval)), has_lambda_(has_lambda), domain_(std::move(domain)) {}

MetricField MetricField::from_expressions(const Expr& E, const Expr& F, const Expr& G,
                                          const std::optional<Expr>& lambda, Domain domain) {
    auto eval = [E, F, G, lambda](const Vec2& p, int order) {
        MetricJets j{eval_jet(E, p, order), eval_jet(F, p, order), eval_jet(G, p, order), std::nullopt};
        if (lambda) j.lambda = eval_jet(*lambda, p, order);
        return j;
    };
    return MetricField(eval, lambda.has_value(), std::move(domain));
}

MetricJets MetricField::jets(const Vec2& p, int order) const {
    MetricJets j = eval_(p, order);
    if (j.lambda && sign_ < 0) j.lambda = -*j.lambda;
    if (!has_lambda_) j.lambda.reset();
    return j;
}

Eigen::Matrix2d MetricField::matrix(const Vec2& p) const {
    const MetricJets j = eval_(p, 0);
    Eigen::Matrix2d g;
    g << j.E.value(), j.F.value(), j.F.value(), j.G.value();
    return g;
}

MetricField MetricField::with_co_orientation(int sign, bool declared) const {
    MetricField out = *this;
    out.sign_ = sign < 0 ? -1 : 1;
    out.co_oriented_ = declared;
    return out;
}

MetricField MetricField::with_source(SurfaceMap source) const {
    MetricField out = *this;
    out.source_ = std::move(source);
    return out;
}

MetricField MetricField::with_domain(Domain domain) const {
    MetricField out = *this;
    out.domain_ = std::move(domain);
    return out;
}

Chart::Chart(Kind kind, Evaluator eval, std::string description)
    : kind_(kind), eval_(std::move(eval)), description_(std::move(description)) {}

Chart Chart::identity() {
    return Chart(Kind::Identity,
                 [](const Vec2& q, int order) {
                     return ChartJets{Jet2::variable(0, order, q), Jet2::variable(1, order, q)};
                 },
                 "identity");
}

Chart Chart::affine(const Vec2& offset, const Eigen::Matrix2d& A) {
    return Chart(Kind::Affine,
                 [offset, A](const Vec2& q, int order) {
                     const Jet2 x = Jet2::variable(0, order, q);
                     const Jet2 y = Jet2::variable(1, order, q);
                     return ChartJets{x * A(0, 0) + y * A(0, 1) + offset[0], x * A(1, 0) + y * A(1, 1) + offset[1]};
                 },
                 "affine");
}

Chart Chart::polynomial(const Jet2& u_poly, const Jet2& v_poly, Kind kind, std::string description) {
    return Chart(kind,
                 [u_poly, v_poly](const Vec2& q, int order) {
                     const Jet2 x = Jet2::variable(0, order, q);
                     const Jet2 y = Jet2::variable(1, order, q);
                     return ChartJets{substitute(u_poly, x, y), substitute(v_poly, x, y)};
                 },
                 std::move(description));
}

Vec2 Chart::map(const Vec2& q) const {
    const ChartJets j = eval_(q, 0);
    return Vec2(j.u.value(), j.v.value());
}

Eigen::Matrix2d Chart::jacobian(const Vec2& q) const {
    const ChartJets j = eval_(q, 1);
    Eigen::Matrix2d J;
    J << j.u.coeff(1, 0), j.u.coeff(0, 1), j.v.coeff(1, 0), j.v.coeff(0, 1);
    return J;
}

Chart compose(const Chart& outer, const Chart& inner) {
    return Chart(Chart::Kind::Composite,
                 [outer, inner](const Vec2& q, int order) {
                     const ChartJets in = inner.jets(q, order);
                     const ChartJets out = outer.jets(Vec2(in.u.value(), in.v.value()), order);
                     return ChartJets{compose(out.u, in.u, in.v), compose(out.v, in.u, in.v)};
                 },
                 outer.description() + " o " + inner.description());
}

Jet2 substitute(const Jet2& poly, const Jet2& x, const Jet2& y) {
    const int n = x.order();
    const Jet2 dx = x - poly.base()[0];
    const Jet2 dy = y - poly.base()[1];
    std::array<Jet2, Jet2::kMaxOrder + 1> px, py;
    px[0] = Jet2::constant(1.0, n, x.base());
    py[0] = px[0];
    for (int k = 1; k <= poly.order(); ++k) {
        px[k] = px[k - 1] * dx;
        py[k] = py[k - 1] * dy;
    }
    Jet2 out(n, x.base());
    for (int d = 0; d <= poly.order(); ++d) {
        for (int j = 0; j <= d; ++j) {
            const double c = poly.coeff(d - j, j);
            if (c != 0.0) out += (px[d - j] * py[j]) * c;
        }
    }
    return out;
}

namespace {

Jet2 dot3(const std::array<Jet2, 3>& a, const std::array<Jet2, 3>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

std::array<Jet2, 3> jets3(const std::array<Expr, 3>& e, const Vec2& p, int order) {
    return {eval_jet(e[0], p, order), eval_jet(e[1], p, order), eval_jet(e[2], p, order)};
}

std::array<Jet2, 3> diff3(const std::array<Jet2, 3>& a, int axis) {
    return {a[0].diff(axis), a[1].diff(axis), a[2].diff(axis)};
}

Jet2 det3(const std::array<Jet2, 3>& a, const std::array<Jet2, 3>& b, const std::array<Jet2, 3>& c) {
    return a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
           a[2] * (b[0] * c[1] - b[1] * c[0]);
}

std::vector<Vec2> sample_grid(const Domain& d, int grid) {
    Vec2 lo = d.bounded() ? d.lo : Vec2(-1, -1);
    Vec2 hi = d.bounded() ? d.hi : Vec2(1, 1);
    std::vector<Vec2> pts;
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            const double s = (i + 0.5) / grid, t = (j + 0.5) / grid;
            pts.emplace_back(lo[0] + s * (hi[0] - lo[0]), lo[1] + t * (hi[1] - lo[1]));
        }
    }
    return pts;
}

}  // namespace

MetricField induced_metric(const SurfaceMap& f) {
    const bool with_nu = f.nu.has_value();
    auto eval = [f](const Vec2& p, int order) {
        const auto x = jets3(f.f, p, order + 1);
        const auto fu = diff3(x, 0);
        const auto fv = diff3(x, 1);
        MetricJets j{dot3(fu, fu), dot3(fu, fv), dot3(fv, fv), std::nullopt};
        if (f.nu) j.lambda = det3(fu, fv, jets3(*f.nu, p, order));
        return j;
    };
    return MetricField(eval, with_nu, f.domain).with_source(f);
}

double surface_normal_residual(const SurfaceMap& f, int grid) {
    if (!f.nu) return 0.0;
    double worst = 0.0;
    for (const Vec2& p : sample_grid(f.domain, grid)) {
        const auto x = jets3(f.f, p, 1);
        const auto fu = diff3(x, 0);
        const auto fv = diff3(x, 1);
        const auto nu = jets3(*f.nu, p, 0);
        double n2 = 0, a = 0, b = 0;
        for (int k = 0; k < 3; ++k) {
            n2 += nu[k].value() * nu[k].value();
            a += nu[k].value() * fu[k].value();
            b += nu[k].value() * fv[k].value();
        }
        worst = std::max({worst, std::abs(n2 - 1.0), std::abs(a), std::abs(b)});
    }
    return worst;
}

MetricCheck check_metric(const MetricField& m, int grid) {
    MetricCheck out;
    for (const Vec2& p : sample_grid(m.domain(), grid)) {
        const MetricJets j = m.jets(p, 0);
        const double E = j.E.value(), F = j.F.value(), G = j.G.value();
        const double d = E * G - F * F;
        out.psd_violation = std::max({out.psd_violation, -E, -G, -d});
        if (j.lambda) {
            const double l = j.lambda->value();
            out.lambda_residual = std::max(out.lambda_residual, std::abs(d - l * l) / (1.0 + std::abs(E * G)));
        }
    }
    return out;
}

double gaussian_curvature(const MetricJets& j) {
    const double E = j.E.value(), F = j.F.value(), G = j.G.value();
    const double delta = E * G - F * F;
    if (degeneracy_margin((Eigen::Matrix2d() << E, F, F, G).finished()) <= kDegeneracyTolerance) {
        throw Error(ErrorKind::DegeneratePoint, "metric", "Gaussian curvature requested at a degenerate point");
    }
    const double Eu = j.E.derivative(1, 0), Ev = j.E.derivative(0, 1), Evv = j.E.derivative(0, 2);
    const double Fu = j.F.derivative(1, 0), Fv = j.F.derivative(0, 1), Fuv = j.F.derivative(1, 1);
    const double Gu = j.G.derivative(1, 0), Gv = j.G.derivative(0, 1), Guu = j.G.derivative(2, 0);
    Eigen::Matrix3d A, B;
    A << -Evv / 2 + Fuv - Guu / 2, Eu / 2, Fu - Ev / 2,
         Fv - Gu / 2, E, F,
         Gv / 2, F, G;
    B << 0, Ev / 2, Gu / 2,
         Ev / 2, E, F,
         Gu / 2, F, G;
    return (A.determinant() - B.determinant()) / (delta * delta);
}

double gaussian_curvature(const MetricField& m, const Vec2& p) { return gaussian_curvature(m.jets(p, 2)); }

double degeneracy_margin(const Eigen::Matrix2d& g) {
    const double tr = g.trace();
    if (!(tr > 0)) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(g, Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0] / tr;
}

double kossowski_gamma(const MetricJets& j, Axis i, Axis jj, Axis k) {
    const auto g = [&](Axis a, Axis b) -> const Jet2& {
        if (a == Axis::U && b == Axis::U) return j.E;
        if (a == Axis::V && b == Axis::V) return j.G;
        return j.F;
    };
    const auto d = [](const Jet2& x, Axis a) { return a == Axis::U ? x.derivative(1, 0) : x.derivative(0, 1); };
    return 0.5 * (d(g(jj, k), i) + d(g(i, k), jj) - d(g(i, jj), k));
}

double kossowski_gamma(const MetricField& m, const Vec2& p, Axis i, Axis j, Axis k) {
    return kossowski_gamma(m.jets(p, 1), i, j, k);
}

Vec2 canonical_direction(Vec2 d) {
    const double n = d.norm();
    if (n > 0) d /= n;
    if (d[1] < 0 || (d[1] == 0 && d[0] < 0)) d = -d;
    return d;
}

NullSpace null_space(const Eigen::Matrix2d& g) {
    NullSpace out;
    const double tr = g.trace();
    if (!(tr > 0)) {
        out.rank = 0;
        out.null_dirs = {Vec2(1, 0), Vec2(0, 1)};
        out.margin = 0.0;
        return out;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(g);
    const double tol = kDegeneracyTolerance * tr;
    out.margin = es.eigenvalues()[0] / tr;
    out.rank = 0;
    for (int k = 0; k < 2; ++k) {
        if (es.eigenvalues()[k] > tol) ++out.rank;
    }
    for (int k = 0; k < 2 - out.rank; ++k) out.null_dirs.push_back(canonical_direction(es.eigenvectors().col(k)));
    return out;
}

NullSpace null_space(const MetricField& m, const Vec2& p) { return null_space(m.matrix(p)); }

MetricField pullback(const MetricField& m, const Chart& chart, Domain chart_domain) {
    const double slack = 0.1 * m.domain().scale();
    auto eval = [m, chart, slack](const Vec2& q, int order) {
        const ChartJets c = chart.jets(q, order + 1);
        const Vec2 p(c.u.value(), c.v.value());
        if (!m.domain().contains(p, slack)) {
            throw Error(ErrorKind::ChartRangeError, "metric", "chart image leaves the metric's domain");
        }
        const MetricJets g = m.jets(p, order);
        const Jet2 u = c.u.truncated(order), v = c.v.truncated(order);
        const Jet2 ux = c.u.diff(0), uy = c.u.diff(1), vx = c.v.diff(0), vy = c.v.diff(1);
        const Jet2 E = compose(g.E, u, v), F = compose(g.F, u, v), G = compose(g.G, u, v);
        MetricJets out{E * ux * ux + 2.0 * F * ux * vx + G * vx * vx,
                       E * ux * uy + F * (ux * vy + uy * vx) + G * vx * vy,
                       E * uy * uy + 2.0 * F * uy * vy + G * vy * vy, std::nullopt};
        if (g.lambda) out.lambda = (ux * vy - uy * vx) * compose(*g.lambda, u, v);
        return out;
    };
    return MetricField(eval, m.has_lambda(), std::move(chart_domain)).with_co_orientation(1, m.co_oriented());
}

Chart aligned_chart(const Vec2& p, const Vec2& n) {
    const Vec2 N = n.normalized();
    Eigen::Matrix2d A;
    A.col(0) = Vec2(N[1], -N[0]);
    A.col(1) = N;
    return Chart::affine(p, A);
}

AdmissibilityReport admissibility_check(const MetricField& m, const std::vector<SingularSample>& samples,
                                        double relative_tol) {
    AdmissibilityReport out;
    for (const SingularSample& s : samples) {
        const Eigen::Matrix2d g = m.matrix(s.point);
        const NullSpace ns = null_space(g);
        if (ns.rank != 1) {
            throw Error(ErrorKind::RankMismatch, "metric",
                        "admissibility sample has rank " + std::to_string(ns.rank) + ", expected 1");
        }
        const MetricField a = pullback(m, aligned_chart(s.point, s.null_dir));
        const MetricJets j = a.jets(Vec2::Zero(), 1);
        const double worst = std::max({std::abs(kossowski_gamma(j, Axis::U, Axis::U, Axis::V)),
                                       std::abs(kossowski_gamma(j, Axis::U, Axis::V, Axis::V)),
                                       std::abs(kossowski_gamma(j, Axis::V, Axis::V, Axis::V))});
        const double threshold = relative_tol * std::max(g.trace(), 1e-300);
        out.max_gamma.push_back(worst);
        out.worst = std::max(out.worst, worst);
        out.threshold = std::max(out.threshold, threshold);
        if (worst > threshold) out.admissible = false;
    }
    return out;
}

}  // namespace smlab
