#include "smlab/integrate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <numbers>
#include <thread>

#include "json_util.hpp"
#include "smlab/error.hpp"
#include "smlab/numerics.hpp"
#include "smlab/whitney.hpp"

namespace smlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Rect {
    Vec2 lo, hi;
    Vec2 at(double s, double t) const { return Vec2(lo[0] + s * (hi[0] - lo[0]), lo[1] + t * (hi[1] - lo[1])); }
    double area() const { return (hi[0] - lo[0]) * (hi[1] - lo[1]); }
    std::array<Rect, 4> quarters() const {
        const Vec2 c = 0.5 * (lo + hi);
        return {Rect{lo, c}, Rect{Vec2(c[0], lo[1]), Vec2(hi[0], c[1])}, Rect{Vec2(lo[0], c[1]), Vec2(c[0], hi[1])},
                Rect{c, hi}};
    }
};

/// Pairwise sum in index order.
double pairwise_sum(const double* x, std::size_t n) {
    if (n == 0) return 0.0;
    if (n == 1) return x[0];
    const std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

/// Runs body(i) for i < n on the requested number of threads; the first failure by index is rethrown.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
    unsigned w = workers > 0 ? static_cast<unsigned>(workers) : std::max(1u, std::thread::hardware_concurrency());
    w = static_cast<unsigned>(std::min<std::size_t>(w, n));
    std::vector<std::exception_ptr> errors(n);
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < w; ++k) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        body(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
        for (std::thread& t : pool) t.join();
    }
    for (const std::exception_ptr& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

double lambda_at(const MetricField& m, const Vec2& p) { return m.jets(p, 0).lambda->value(); }

/// Roots of g on [a, b] from a sign-change scan with `samples` intervals.
std::vector<double> scan_roots(const std::function<double(double)>& g, double a, double b, int samples) {
    std::vector<double> roots;
    double xa = a, ga = g(a);
    for (int k = 1; k <= samples; ++k) {
        const double xb = a + (b - a) * k / samples;
        const double gb = g(xb);
        if (ga * gb < 0) roots.push_back(bracketed_root(g, xa, xb, ga, gb, 1e-14 * std::max({1.0, std::abs(a), std::abs(b)})));
        xa = xb;
        ga = gb;
    }
    return roots;
}

/// Gauss rule on [a, b] after splitting at the sorted interior points.
double split_gauss(const std::function<double(double)>& f, double a, double b, std::vector<double> cuts,
                   const GaussRule& rule) {
    std::sort(cuts.begin(), cuts.end());
    double sum = 0.0, x0 = a;
    cuts.push_back(b);
    for (double x1 : cuts) {
        if (x1 <= x0) continue;
        const double h = 0.5 * (x1 - x0), c = 0.5 * (x1 + x0);
        double s = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(c + h * rule.nodes[i]);
        sum += h * s;
        x0 = x1;
    }
    return sum;
}

double tensor_gauss(const std::function<double(const Vec2&)>& f, const Rect& r, const GaussRule& rule) {
    const auto inner = [&](double x) {
        return split_gauss([&](double y) { return f(Vec2(x, y)); }, r.lo[1], r.hi[1], {}, rule);
    };
    return split_gauss(inner, r.lo[0], r.hi[0], {}, rule);
}

/// Triangles from an apex on the rectangle to its four edges, each in Duffy coordinates so that 1/r
/// integrands become smooth. The angular direction gets four panels: curvature near a cross cap is
/// strongly anisotropic.
double duffy_gauss(const std::function<double(const Vec2&)>& f, const Rect& r, const Vec2& apex,
                   const GaussRule& rule) {
    const std::array<Vec2, 4> c = {r.lo, Vec2(r.hi[0], r.lo[1]), r.hi, Vec2(r.lo[0], r.hi[1])};
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) {
        const Vec2 e0 = c[k] - apex;
        const Vec2 e1 = c[(k + 1) % 4] - c[k];
        const double jac = e0[0] * e1[1] - e0[1] * e1[0];
        if (std::abs(jac) <= 1e-14 * r.area()) continue;
        const auto g = [&](double s) {
            return split_gauss([&](double t) { return s * f(apex + s * (e0 + t * e1)); }, 0.0, 1.0,
                               {0.25, 0.5, 0.75}, rule);
        };
        sum += jac * split_gauss(g, 0.0, 1.0, {}, rule);
    }
    return sum;
}

/// Distance from r to the nearest image of a cross cap, and that image.
std::optional<std::pair<double, Vec2>> nearest_cap(const Rect& r, const std::vector<Vec2>& caps, const Domain& dom) {
    const Vec2 mid = 0.5 * (r.lo + r.hi);
    std::optional<std::pair<double, Vec2>> best;
    for (const Vec2& c : caps) {
        Vec2 q = c;
        for (int a = 0; a < 2; ++a) {
            if (dom.periodic(a)) q[a] = mid[a] + dom.displacement(mid, c)[a];
        }
        const double d = (q.cwiseMax(r.lo).cwiseMin(r.hi) - q).norm();
        if (!best || d < best->first) best = std::pair{d, q};
    }
    return best;
}

struct TileIntegrator {
    const MetricField& m;
    const IntegrateOptions& opt;
    const GaussRule& rule;
    std::function<double(const Vec2&)> f;
    bool split_on_lambda = false;
    std::vector<Vec2> caps;

    TileIntegrator(const MetricField& m_, const IntegrateOptions& opt_, const GaussRule& rule_)
        : m(m_), opt(opt_), rule(rule_) {}

    double rect(const Rect& r, int level) const {
        if (!caps.empty()) {
            // Rectangles touching a cross cap use Duffy triangles; nearer ones than their diagonal are quartered.
            const auto [d, cap] = *nearest_cap(r, caps, m.domain());
            const double diag = (r.hi - r.lo).norm();
            if (d <= 1e-12 * m.domain().scale()) return duffy_gauss(f, r, cap.cwiseMax(r.lo).cwiseMin(r.hi), rule);
            if (d < diag) {
                double sum = 0.0;
                for (const Rect& q : r.quarters()) sum += rect(q, level);
                return sum;
            }
        }
        if (!split_on_lambda) return tensor_gauss(f, r, rule);
        return split_rect(r, level);
    }

    double split_rect(const Rect& r, int level) const {
        const int n = static_cast<int>(rule.nodes.size()) + 1;
        std::vector<double> lam((n + 1) * (n + 1));
        const auto idx = [&](int i, int j) { return i * (n + 1) + j; };
        for (int i = 0; i <= n; ++i) {
            for (int j = 0; j <= n; ++j) lam[idx(i, j)] = lambda_at(m, r.at(double(i) / n, double(j) / n));
        }
        // Transversality of the zero set to each axis at sampled sign changes.
        double worst_u = 1.0, worst_v = 1.0;
        bool crossing = false;
        for (int i = 0; i <= n; ++i) {
            for (int j = 0; j <= n; ++j) {
                const bool cu = i < n && lam[idx(i, j)] * lam[idx(i + 1, j)] < 0;
                const bool cv = j < n && lam[idx(i, j)] * lam[idx(i, j + 1)] < 0;
                if (!cu && !cv) continue;
                crossing = true;
                const Jet2 l = *m.jets(r.at(double(i) / n, double(j) / n), 1).lambda;
                const Vec2 g(l.coeff(1, 0), l.coeff(0, 1));
                const double gn = g.norm();
                if (gn == 0.0) {
                    worst_u = worst_v = 0.0;
                    continue;
                }
                worst_u = std::min(worst_u, std::abs(g[0]) / gn);
                worst_v = std::min(worst_v, std::abs(g[1]) / gn);
            }
        }
        if (!crossing) return tensor_gauss(f, r, rule);
        const int inner = worst_v >= worst_u ? 1 : 0;
        if (std::max(worst_u, worst_v) < 0.3) {
            if (level >= opt.max_split) {
                throw Error(ErrorKind::SingularSetUnresolved, "integrate",
                            "singular set is not transversal to either axis near (" + std::to_string(r.lo[0]) + ", " +
                                std::to_string(r.lo[1]) + ")");
            }
            double sum = 0.0;
            for (const Rect& q : r.quarters()) sum += rect(q, level + 1);
            return sum;
        }
        const int outer = 1 - inner;
        const auto point = [&](double x, double y) {
            Vec2 p;
            p[outer] = x;
            p[inner] = y;
            return p;
        };
        const double x0 = r.lo[outer], x1 = r.hi[outer], y0 = r.lo[inner], y1 = r.hi[inner];
        std::vector<double> cuts;
        for (double y : {y0, y1}) {
            const auto edge = scan_roots([&](double x) { return lambda_at(m, point(x, y)); }, x0, x1, n);
            cuts.insert(cuts.end(), edge.begin(), edge.end());
        }
        const auto line = [&](double x) {
            const auto g = [&](double y) { return lambda_at(m, point(x, y)); };
            return split_gauss([&](double y) { return f(point(x, y)); }, y0, y1, scan_roots(g, y0, y1, n), rule);
        };
        return split_gauss(line, x0, x1, cuts, rule);
    }

    Quadrature run() const {
        const Domain& dom = m.domain();
        if (!dom.bounded()) {
            throw Error(ErrorKind::DomainError, "integrate", "integration needs a bounded parameter rectangle");
        }
        const int d = opt.depth;
        const std::size_t tiles = static_cast<std::size_t>(d) * d;
        std::vector<double> fine(tiles), err(tiles);
        parallel_for(tiles, opt.workers, [&](std::size_t k) {
            const int i = static_cast<int>(k) / d, j = static_cast<int>(k) % d;
            const Vec2 span = dom.hi - dom.lo;
            const Rect r{dom.lo + Vec2(span[0] * i / d, span[1] * j / d),
                         dom.lo + Vec2(span[0] * (i + 1) / d, span[1] * (j + 1) / d)};
            double coarse = 0.0, refined = 0.0;
            for (const Rect& q : r.quarters()) {
                coarse += rect(q, 0);
                for (const Rect& e : q.quarters()) refined += rect(e, 0);
            }
            fine[k] = refined;
            err[k] = std::abs(refined - coarse);
        });
        return Quadrature{pairwise_sum(fine), pairwise_sum(err)};
    }
};

}  // namespace

double k_lambda_robust(const MetricField& m, const Vec2& p, const IntegrateOptions& opt) {
    if (!m.has_lambda()) {
        throw Error(ErrorKind::ConfigError, "integrate", "K d-hat-A needs a lambda field");
    }
    const MetricJets j = m.jets(p, 2);
    const Vec2 g(j.lambda->coeff(1, 0), j.lambda->coeff(0, 1));
    const double scale = m.domain().scale();
    const double lam = j.lambda->value();
    const double gn = g.norm();
    if (gn == 0.0 || std::abs(lam) >= opt.near_curve * scale * gn) {
        try {
            return gaussian_curvature(j) * lam;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::DegeneratePoint || gn == 0.0) throw;
        }
    }
    const Vec2 n = g / gn;
    const auto one = [&](const Vec2& q) {
        const MetricJets jq = m.jets(q, 2);
        return gaussian_curvature(jq) * jq.lambda->value();
    };
    const auto pair = [&](double h) { return 0.5 * (one(p + h * n) + one(p - h * n)); };
    return richardson(pair, opt.richardson_h0 * scale, 4, 2, 2, 1e-4, "integrate").value;
}

Quadrature integrate_K_dA(const MetricField& m, const IntegrateOptions& opt) {
    const GaussRule& rule = gauss_legendre(opt.gauss_order);
    TileIntegrator t(m, opt, rule);
    if (m.has_lambda()) {
        t.split_on_lambda = true;
        t.f = [&](const Vec2& p) {
            const double kl = k_lambda_robust(m, p, opt);
            return lambda_at(m, p) < 0 ? -kl : kl;
        };
    } else {
        for (const CrossCapCandidate& c : detect_cross_caps(m, opt.grid)) t.caps.push_back(c.point);
        t.f = [&](const Vec2& p) {
            const MetricJets j = m.jets(p, 2);
            const double delta = discriminant(j).value();
            return gaussian_curvature(j) * std::sqrt(std::max(0.0, delta));
        };
    }
    return t.run();
}

Quadrature integrate_K_dhatA(const MetricField& m, const IntegrateOptions& opt) {
    if (!m.has_lambda()) {
        throw Error(ErrorKind::ConfigError, "integrate", "K d-hat-A needs a lambda field");
    }
    const GaussRule& rule = gauss_legendre(opt.gauss_order);
    TileIntegrator t(m, opt, rule);
    t.f = [&](const Vec2& p) { return k_lambda_robust(m, p, opt); };
    return t.run();
}

namespace {

/// kappa_s d tau / ds on the segment from sample i to the next one. The base sample's Taylor prediction is
/// corrected linearly so that it ends on the next sample, then projected onto the curve.
struct SegmentForm {
    const MetricField& m;
    const CurveGeometry& base;
    Vec2 correction;
    const IntegrateOptions& opt;

    SegmentForm(const MetricField& m_, const CurveGeometry& base_, const Vec2& next, double len,
                const IntegrateOptions& opt_)
        : m(m_), base(base_), opt(opt_) {
        correction = m.domain().displacement(predicted(len), next) / len;
    }

    Vec2 predicted(double s) const { return Vec2(base.gamma_u.evaluate(s, 0), base.gamma_v.evaluate(s, 0)); }

    double operator()(double s) const {
        const Vec2 q = predicted(s) + s * correction;
        const Vec2 dq = Vec2(base.gamma_u.diff(0).evaluate(s, 0), base.gamma_v.diff(0).evaluate(s, 0)) + correction;
        // Projection along the fixed direction n: p = q + mu n with lambda(p) = 0, so that
        // dp = dq - (grad . dq / grad . n) n exactly.
        const Vec2 n(-base.tangent[1], base.tangent[0]);
        double mu = 0.0;
        Vec2 grad;
        for (int it = 0;; ++it) {
            const Jet2 l = *m.jets(q + mu * n, 1).lambda;
            grad = Vec2(l.coeff(1, 0), l.coeff(0, 1));
            const double step = l.value() / grad.dot(n);
            mu -= step;
            if (std::abs(step) <= 1e-15 * m.domain().scale()) break;
            if (it == 50 || !std::isfinite(mu)) {
                throw Error(ErrorKind::NoConvergence, "integrate", "projection onto the singular curve failed");
            }
        }
        const Vec2 p = q + mu * n;
        const Vec2 dp = dq - (grad.dot(dq) / grad.dot(n)) * n;
        const CurveGeometry g = curve_geometry(m, p, base.tangent, base.eta, opt.kossowski.jet_order);
        const double dtau = std::sqrt(std::max(0.0, dp.dot(m.matrix(p) * dp)));
        return singular_curvature(m, g, opt.kossowski) * dtau;
    }
};

/// Coarse rule and two halves on [a, b].
Quadrature segment(const std::function<double(double)>& f, double a, double b, const GaussRule& rule) {
    const double coarse = split_gauss(f, a, b, {}, rule);
    const double fine = split_gauss(f, a, b, {0.5 * (a + b)}, rule);
    return {fine, std::abs(fine - coarse)};
}

/// Integral over [a, b] where the form is smooth but unevaluable at `end` (an A3 point):
/// geometric pieces shrinking toward it until the guard band is reached.
Quadrature toward_a3(const std::function<double(double)>& f, double a, double b, bool end_is_b,
                     const GaussRule& rule) {
    const double len = b - a;
    Quadrature q;
    double last = 0.0, prev = 0.0;
    int pieces = 0;
    for (int k = 0; k < 60; ++k) {
        const double w0 = len * std::ldexp(1.0, -k), w1 = len * std::ldexp(1.0, -k - 1);
        const double lo = end_is_b ? b - w0 : a + w1;
        const double hi = end_is_b ? b - w1 : a + w0;
        Quadrature piece;
        try {
            piece = segment(f, lo, hi, rule);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NotA2) throw;
            break;
        }
        q.value += piece.value;
        q.error += piece.error;
        prev = last;
        last = piece.value;
        ++pieces;
        if (w1 <= 1e-15 * std::max(1.0, std::abs(len))) break;
    }
    if (pieces < 3 || std::abs(last) > 0.75 * std::abs(prev) + 1e-300) {
        throw Error(ErrorKind::NonConvergentNearA3, "integrate",
                    "kappa_s d-tau pieces stop shrinking toward the A3 point");
    }
    // A bounded integrand halves with every piece, so the unreached remainder is about the last piece.
    q.value += last;
    q.error += std::abs(last - prev / 2.0);
    if (std::abs(last) > 1e-4 * std::max(1.0, std::abs(q.value))) {
        throw Error(ErrorKind::NonConvergentNearA3, "integrate",
                    "guard band reached with a remainder of " + std::to_string(last));
    }
    return q;
}

}  // namespace

Quadrature integrate_kappa_s(const MetricField& m, const SingularCurve& c, const IntegrateOptions& opt) {
    const std::size_t n = c.samples.size();
    if (n < 2) return {};
    const GaussRule& rule = gauss_legendre(opt.gauss_order);
    const std::size_t segments = c.closed ? n : n - 1;
    std::vector<double> values, errors;
    for (std::size_t i = 0; i < segments; ++i) {
        const CurveSample& a = c.samples[i];
        const CurveSample& b = c.samples[(i + 1) % n];
        const double len = i + 1 < n ? b.t - a.t : c.closing_length;
        if (len <= 0) continue;
        const SegmentForm f(m, a.geo, b.geo.point, len, opt);
        const bool a3_start = a.cls != PointClass::A2, a3_end = b.cls != PointClass::A2;
        Quadrature q;
        if (a3_start && a3_end) {
            const Quadrature l = toward_a3(f, 0.0, len / 2, false, rule), r = toward_a3(f, len / 2, len, true, rule);
            q = {l.value + r.value, l.error + r.error};
        } else if (a3_start || a3_end) {
            q = toward_a3(f, 0.0, len, a3_end, rule);
        } else {
            q = segment(f, 0.0, len, rule);
        }
        values.push_back(q.value);
        errors.push_back(q.error);
    }
    return {pairwise_sum(values), pairwise_sum(errors)};
}

std::string_view to_string(A3Sign s) {
    switch (s) {
        case A3Sign::Positive: return "positive";
        case A3Sign::Negative: return "negative";
        case A3Sign::Ambiguous: return "ambiguous";
    }
    return "ambiguous";
}

A3SignReport a3_sign(const MetricField& m, const Vec2& p, const std::vector<double>& radii, int panels) {
    if (!m.has_lambda()) {
        throw Error(ErrorKind::ConfigError, "integrate", "A3 signs need a lambda field");
    }
    A3SignReport out;
    out.point = p;
    const double scale = m.domain().scale();
    bool pos = true, neg = true;
    for (double rr : radii) {
        const double r = rr * scale;
        double plus = 0.0, total = 0.0;
        for (int k = 0; k < panels; ++k) {
            const double t0 = kTwoPi * k / panels, t1 = kTwoPi * (k + 1) / panels, tm = 0.5 * (t0 + t1);
            const Vec2 w0(std::cos(t0), std::sin(t0)), w1(std::cos(t1), std::sin(t1));
            const Vec2 q = p + r * Vec2(std::cos(tm), std::sin(tm));
            const Eigen::Matrix2d g = m.matrix(q);
            // Angle from w0 to w1 measured in the metric at q.
            const double area = std::sqrt(std::max(0.0, g.determinant())) * (w0[0] * w1[1] - w0[1] * w1[0]);
            const double angle = std::atan2(area, w0.dot(g * w1));
            total += angle;
            if (lambda_at(m, q) > 0) plus += angle;
        }
        out.share = total > 0 ? plus / total : 0.5;
        pos = pos && out.share > 0.75;
        neg = neg && out.share < 0.25;
    }
    out.sign = pos ? A3Sign::Positive : neg ? A3Sign::Negative : A3Sign::Ambiguous;
    return out;
}

std::string_view to_string(GBKind k) {
    switch (k) {
        case GBKind::GB1: return "gb1";
        case GBKind::Euler: return "euler";
        case GBKind::WhitneyGB: return "whitney";
    }
    return "gb1";
}

GBKind parse_gb_kind(std::string_view s) {
    if (s == "gb1") return GBKind::GB1;
    if (s == "euler") return GBKind::Euler;
    if (s == "whitney") return GBKind::WhitneyGB;
    throw Error(ErrorKind::ConfigError, "integrate", "unknown Gauss-Bonnet kind '" + std::string(s) + "'");
}

GBReport gb_report(const MetricField& m, GBKind kind, const Topology& topo, const std::vector<SingularCurve>& curves,
                   double abs_tol, const IntegrateOptions& opt) {
    const auto need = [](const std::optional<int>& v, const char* path) {
        if (!v) throw Error(ErrorKind::ConfigError, "integrate", std::string("missing ") + path);
        return *v;
    };
    GBReport r;
    r.kind = kind;
    r.tolerance = abs_tol;
    r.curves = static_cast<int>(curves.size());
    switch (kind) {
        case GBKind::GB1: {
            const int chi = need(topo.chi, "$.topology.chi");
            r.K_dA = integrate_K_dA(m, opt);
            Quadrature ks;
            for (const SingularCurve& c : curves) {
                const Quadrature q = integrate_kappa_s(m, c, opt);
                ks.value += q.value;
                ks.error += q.error;
            }
            r.kappa_s_dtau = ks;
            r.lhs = r.K_dA->value + 2.0 * ks.value;
            r.error = r.K_dA->error + 2.0 * ks.error;
            r.rhs = kTwoPi * chi;
            break;
        }
        case GBKind::Euler: {
            const int cp = need(topo.chi_plus, "$.topology.chi_plus");
            const int cm = need(topo.chi_minus, "$.topology.chi_minus");
            r.K_dhatA = integrate_K_dhatA(m, opt);
            int sp = 0, sm = 0;
            for (const SingularCurve& c : curves) {
                for (std::size_t i : c.a3_indices()) {
                    const A3SignReport s = a3_sign(m, c.samples[i].geo.point);
                    r.a3.push_back(s);
                    if (s.sign == A3Sign::Positive) ++sp;
                    if (s.sign == A3Sign::Negative) ++sm;
                    if (s.sign == A3Sign::Ambiguous) r.ambiguous = true;
                }
            }
            r.S_plus = sp;
            r.S_minus = sm;
            r.lhs = r.K_dhatA->value / kTwoPi;
            r.error = r.K_dhatA->error / kTwoPi;
            r.rhs = cp - cm + sp - sm;
            break;
        }
        case GBKind::WhitneyGB: {
            const int chi = need(topo.chi, "$.topology.chi");
            r.cross_caps = static_cast<int>(detect_cross_caps(m, opt.grid).size());
            r.K_dA = integrate_K_dA(m, opt);
            r.lhs = r.K_dA->value;
            r.error = r.K_dA->error;
            r.rhs = kTwoPi * chi;
            break;
        }
    }
    r.residual = std::abs(r.lhs - r.rhs);
    r.pass = !r.ambiguous && r.residual <= std::max(abs_tol, 10.0 * r.error);
    return r;
}

GBReport gb_report(const MetricField& m, GBKind kind, const Topology& topo, double abs_tol,
                   const IntegrateOptions& opt) {
    std::vector<SingularCurve> curves;
    if (kind != GBKind::WhitneyGB) {
        curves = find_singular_curves(m, opt.grid, opt.kossowski);
        for (SingularCurve& c : curves) {
            for (const CurveSample& s : c.samples) {
                if (s.cls == PointClass::Other) {
                    throw Error(ErrorKind::SingularSetUnresolved, "integrate",
                                "singular curve has a point that is neither A2 nor A3");
                }
            }
        }
    }
    return gb_report(m, kind, topo, curves, abs_tol, opt);
}

std::string to_json(const GBReport& r) {
    using nlohmann::json;
    const auto quad = [](const std::optional<Quadrature>& q) {
        return q ? json{{"value", q->value}, {"error", q->error}} : json(nullptr);
    };
    json j;
    j["kind"] = std::string(to_string(r.kind));
    j["K_dA"] = quad(r.K_dA);
    j["kappa_s_dtau"] = quad(r.kappa_s_dtau);
    j["K_dhatA"] = quad(r.K_dhatA);
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["residual"] = r.residual;
    j["error"] = r.error;
    j["tolerance"] = r.tolerance;
    j["curves"] = r.curves;
    j["cross_caps"] = r.cross_caps;
    j["S_plus"] = r.S_plus ? json(*r.S_plus) : json(nullptr);
    j["S_minus"] = r.S_minus ? json(*r.S_minus) : json(nullptr);
    json a3 = json::array();
    for (const A3SignReport& s : r.a3) {
        a3.push_back({{"point", {s.point[0], s.point[1]}}, {"share", s.share}, {"sign", std::string(to_string(s.sign))}});
    }
    j["a3"] = a3;
    j["ambiguous"] = r.ambiguous;
    j["verdict"] = r.pass ? "PASS" : "FAIL";
    return detail::dump17(j);
}

}  // namespace smlab
