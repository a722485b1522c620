#include "smlab/kossowski.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "smlab/numerics.hpp"

namespace smlab {

std::string_view to_string(PointClass c) {
    switch (c) {
        case PointClass::A2: return "A2";
        case PointClass::A3: return "A3";
        case PointClass::Other: return "Other";
    }
    return "Other";
}

double SingularCurve::parameter_length() const {
    if (samples.empty()) return 0.0;
    return samples.back().t - samples.front().t + (closed ? closing_length : 0.0);
}

std::vector<std::size_t> SingularCurve::a3_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].cls == PointClass::A3) out.push_back(i);
    }
    return out;
}

namespace {

void require_lambda(const MetricField& m) {
    if (!m.has_lambda()) {
        throw Error(ErrorKind::ConfigError, "kossowski", "Kossowski analysis needs a lambda field");
    }
}

Jet2 odd_flipped(const Jet2& j) {
    Jet2 out = j;
    for (int i = 1; i <= j.order(); i += 2) out.coeff_ref(i, 0) = -j.coeff(i, 0);
    return out;
}

CurveGeometry reversed(const CurveGeometry& g) {
    CurveGeometry r = g;
    r.tangent = -g.tangent;
    r.phi = -g.phi;
    r.gamma_u = odd_flipped(g.gamma_u);
    r.gamma_v = odd_flipped(g.gamma_v);
    r.eta_u = odd_flipped(g.eta_u);
    r.eta_v = odd_flipped(g.eta_v);
    return r;
}

Vec2 predict(const CurveGeometry& g, double s) { return Vec2(g.gamma_u.evaluate(s, 0), g.gamma_v.evaluate(s, 0)); }

double angle_between(const Vec2& a, const Vec2& b) {
    return std::atan2(a[0] * b[1] - a[1] * b[0], a.dot(b));
}

}  // namespace

Vec2 project_to_singular_set(const MetricField& m, const Vec2& p, double tol, int max_iter) {
    require_lambda(m);
    Vec2 q = p;
    for (int it = 0; it < max_iter; ++it) {
        const Jet2 l = *m.jets(q, 1).lambda;
        const Vec2 g(l.coeff(1, 0), l.coeff(0, 1));
        const double g2 = g.squaredNorm();
        if (!(g2 > 1e-24)) {
            throw Error(ErrorKind::DegenerateStart, "kossowski", "vanishing d(lambda) while projecting");
        }
        const Vec2 step = l.value() * g / g2;
        q -= step;
        if (step.norm() <= tol) return q;
    }
    throw Error(ErrorKind::NoConvergence, "kossowski", "projection onto the singular set did not converge");
}

CurveGeometry curve_geometry(const MetricField& m, const Vec2& p, const Vec2& tangent_hint, const Vec2& eta_hint,
                             int jet_order) {
    require_lambda(m);
    const int N = std::clamp(jet_order, 2, Jet2::kMaxOrder - 1);
    const Vec2 origin = Vec2::Zero();
    const MetricJets mj = m.jets(p, N + 1);
    const Jet2& lam = *mj.lambda;
    const Jet2 lu = lam.diff(0), lv = lam.diff(1);
    const Jet2 gn = sqrt(lu * lu + lv * lv);

    CurveGeometry g;
    g.point = p;
    g.grad_norm = gn.value();
    Jet2 Xu = -lv / gn, Xv = lu / gn;
    if (Vec2(Xu.value(), Xv.value()).dot(tangent_hint) < 0) {
        Xu = -Xu;
        Xv = -Xv;
    }
    Jet2 gu = Jet2::constant(p[0], N, origin), gv = Jet2::constant(p[1], N, origin);
    for (int k = 0; k <= N; ++k) {
        const Jet2 cu = compose(Xu, gu, gv), cv = compose(Xv, gu, gv);
        gu = cu.integrate_u() + p[0];
        gv = cv.integrate_u() + p[1];
    }
    g.gamma_u = gu;
    g.gamma_v = gv;

    const Jet2 E = compose(mj.E.truncated(N), gu, gv);
    const Jet2 F = compose(mj.F.truncated(N), gu, gv);
    const Jet2 G = compose(mj.G.truncated(N), gu, gv);
    if (!(E.value() + G.value() > 0)) {
        throw Error(ErrorKind::RankZeroEncountered, "kossowski", "rank-zero point on the singular set");
    }
    Jet2 nu, nv;
    if (std::abs(E.value()) >= std::abs(G.value())) {
        nu = -F;
        nv = E;
    } else {
        nu = G;
        nv = -F;
    }
    const Jet2 norm = sqrt(nu * nu + nv * nv);
    nu = nu / norm;
    nv = nv / norm;
    Vec2 eta(nu.value(), nv.value());
    const bool flip = eta_hint.squaredNorm() > 0 ? eta.dot(eta_hint) < 0 : canonical_direction(eta).dot(eta) < 0;
    if (flip) {
        nu = -nu;
        nv = -nv;
        eta = -eta;
    }
    g.eta_u = nu;
    g.eta_v = nv;
    g.eta = eta;

    const Jet2 Tu = gu.diff(0), Tv = gv.diff(0);
    g.tangent = Vec2(Tu.value(), Tv.value());
    const Jet2 phi = Tu * nv.truncated(N - 1) - Tv * nu.truncated(N - 1);
    g.phi = phi.value();
    g.dphi = phi.coeff(1, 0);
    return g;
}

PointClass classify(const CurveGeometry& g, double tol_cls) {
    if (std::abs(g.phi) > tol_cls) return PointClass::A2;
    if (std::abs(g.dphi) > tol_cls) return PointClass::A3;
    return PointClass::Other;
}

namespace {

struct March {
    std::vector<CurveGeometry> points;
    std::vector<double> ts;
    bool closed = false;
    double closing_length = 0.0;
};

March march(const MetricField& m, const CurveGeometry& start, const KossowskiOptions& opt, bool allow_close) {
    const Domain& dom = m.domain();
    const double h_max = opt.max_step > 0 ? opt.max_step : dom.scale() / 100.0;
    March out;
    out.points.push_back(start);
    out.ts.push_back(0.0);
    double h = h_max;
    double t = 0.0;
    while (static_cast<int>(out.points.size()) < opt.max_samples) {
        const CurveGeometry& cur = out.points.back();
        const double kappa = 2.0 * Vec2(cur.gamma_u.coeff(2, 0), cur.gamma_v.coeff(2, 0)).norm();
        h = std::min({2.0 * h, h_max, opt.max_turn / std::max(kappa, 1e-12)});

        if (allow_close && out.points.size() >= 3) {
            const Vec2 w = dom.displacement(cur.point, start.point);
            const double along = w.dot(cur.tangent);
            const double perp = (w - along * cur.tangent).norm();
            if (along > 0 && along <= h && perp < 0.5 * h && cur.tangent.dot(start.tangent) > 0.5) {
                out.closed = true;
                out.closing_length = along;
                return out;
            }
        }

        bool exiting = false;
        for (;;) {
            if (h < opt.min_step) {
                throw Error(ErrorKind::NoConvergence, "kossowski", "step size underflow while tracing");
            }
            Vec2 q = predict(cur, h);
            double step = h;
            exiting = false;
            if (!dom.contains(q)) {
                double frac = 1.0;
                for (int a = 0; a < 2; ++a) {
                    if (dom.periodic(a)) continue;
                    const double d = q[a] - cur.point[a];
                    if (q[a] > dom.hi[a] && d > 0) frac = std::min(frac, (dom.hi[a] - cur.point[a]) / d);
                    if (q[a] < dom.lo[a] && d < 0) frac = std::min(frac, (dom.lo[a] - cur.point[a]) / d);
                }
                step = h * std::max(frac, 0.0);
                exiting = true;
                if (step < opt.min_step) return out;
                q = predict(cur, step);
            }
            Vec2 pn;
            try {
                pn = project_to_singular_set(m, q);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::NoConvergence) throw;
                h *= 0.5;
                continue;
            }
            if ((pn - q).norm() > 0.25 * step) {
                h *= 0.5;
                continue;
            }
            CurveGeometry next = curve_geometry(m, pn, cur.tangent, cur.eta, opt.jet_order);
            if (std::abs(angle_between(cur.tangent, next.tangent)) > opt.max_turn && !exiting) {
                h *= 0.5;
                continue;
            }
            t += step;
            out.points.push_back(std::move(next));
            out.ts.push_back(t);
            break;
        }
        if (exiting) return out;
    }
    throw Error(ErrorKind::NoConvergence, "kossowski", "sample budget exhausted while tracing");
}

double phi_at(const MetricField& m, const CurveGeometry& from, double s, int order) {
    const Vec2 p = project_to_singular_set(m, predict(from, s));
    return curve_geometry(m, p, from.tangent, from.eta, order).phi;
}

}  // namespace

SingularCurve trace_singular_curve(const MetricField& m, const Vec2& seed, const KossowskiOptions& opt) {
    require_lambda(m);
    {
        const Jet2 l = *m.jets(seed, 1).lambda;
        if (Vec2(l.coeff(1, 0), l.coeff(0, 1)).norm() < 1e-8) {
            throw Error(ErrorKind::DegenerateStart, "kossowski", "|d lambda| < 1e-8 at the seed");
        }
    }
    const Vec2 p0 = project_to_singular_set(m, seed);
    const CurveGeometry g0 = curve_geometry(m, p0, Vec2::Zero(), Vec2::Zero(), opt.jet_order);

    SingularCurve c;
    c.domain = m.domain();
    const March fwd = march(m, g0, opt, true);
    std::vector<CurveGeometry> pts;
    std::vector<double> ts;
    if (!fwd.closed) {
        const March bwd = march(m, reversed(g0), opt, false);
        for (std::size_t i = bwd.points.size(); i-- > 1;) {
            pts.push_back(reversed(bwd.points[i]));
            ts.push_back(-bwd.ts[i]);
        }
    } else {
        c.closed = true;
        c.closing_length = fwd.closing_length;
    }
    pts.insert(pts.end(), fwd.points.begin(), fwd.points.end());
    ts.insert(ts.end(), fwd.ts.begin(), fwd.ts.end());
    const double t0 = ts.front();

    const double guard = opt.guard_factor * opt.tol_cls;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CurveSample s;
        s.t = ts[i] - t0;
        s.geo = pts[i];
        s.cls = classify(s.geo, opt.tol_cls);
        s.unreliable = std::abs(s.geo.phi) <= guard;
        c.samples.push_back(std::move(s));
    }

    // A3 points between samples: roots of phi.
    std::vector<CurveSample> merged;
    const std::size_t n = c.samples.size();
    for (std::size_t i = 0; i < n; ++i) {
        merged.push_back(c.samples[i]);
        const bool last = i + 1 == n;
        if (last && !c.closed) break;
        const CurveSample& a = c.samples[i];
        const CurveSample& b = c.samples[last ? 0 : i + 1];
        const double len = last ? c.closing_length : b.t - a.t;
        if (a.cls != PointClass::A2 || b.cls != PointClass::A2) continue;
        if ((a.geo.phi > 0) == (b.geo.phi > 0)) continue;
        const auto f = [&](double s) { return phi_at(m, a.geo, s, opt.jet_order); };
        const double s = bracketed_root(f, 0.0, len, a.geo.phi, b.geo.phi, 1e-15 * std::max(1.0, len));
        CurveSample r;
        r.t = a.t + s;
        r.geo = curve_geometry(m, project_to_singular_set(m, predict(a.geo, s)), a.geo.tangent, a.geo.eta,
                               opt.jet_order);
        r.cls = classify(r.geo, opt.tol_cls);
        r.unreliable = true;
        if (last) {
            // Keep parameters increasing: the root lies on the closing segment.
            c.closing_length -= s;
        }
        merged.push_back(std::move(r));
    }
    c.samples = std::move(merged);

    // Metric arclength table.
    double tau = 0.0;
    c.samples.front().tau = 0.0;
    for (std::size_t i = 0; i + 1 < c.samples.size(); ++i) {
        const CurveGeometry& g = c.samples[i].geo;
        const double len = c.samples[i + 1].t - c.samples[i].t;
        const auto speed = [&](double s) {
            const Vec2 q = predict(g, s);
            const Vec2 T(g.gamma_u.diff(0).evaluate(s, 0), g.gamma_v.diff(0).evaluate(s, 0));
            const Eigen::Matrix2d gm = m.matrix(q);
            return std::sqrt(std::max(0.0, T.dot(gm * T)));
        };
        tau += gauss_integrate(speed, 0.0, len, 8);
        c.samples[i + 1].tau = tau;
    }
    return c;
}

std::vector<SingularCurve> find_singular_curves(const MetricField& m, int grid, const KossowskiOptions& opt) {
    require_lambda(m);
    const Domain& dom = m.domain();
    if (!dom.bounded()) {
        throw Error(ErrorKind::ConfigError, "kossowski", "singular-set search needs a bounded domain");
    }
    const double h_max = opt.max_step > 0 ? opt.max_step : dom.scale() / 100.0;
    const int nu = grid + (dom.periodic_u ? 0 : 1);
    const int nv = grid + (dom.periodic_v ? 0 : 1);
    const auto node = [&](int i, int j) {
        return Vec2(dom.lo[0] + (dom.hi[0] - dom.lo[0]) * i / grid, dom.lo[1] + (dom.hi[1] - dom.lo[1]) * j / grid);
    };
    std::vector<double> lam(static_cast<std::size_t>(nu) * nv);
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) lam[i * nv + j] = m.jets(node(i, j), 0).lambda->value();

    std::vector<Vec2> seeds;
    const auto edge = [&](int i0, int j0, int i1, int j1) {
        const double a = lam[i0 * nv + j0], b = lam[(i1 % nu) * nv + (j1 % nv)];
        if ((a > 0) == (b > 0)) return;
        const double w = a / (a - b);
        const Vec2 pa = node(i0, j0), pb = node(i1, j1);
        seeds.push_back(pa + w * (pb - pa));
    };
    for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) {
            if (i + 1 < nu || dom.periodic_u) edge(i, j, i + 1, j);
            if (j + 1 < nv || dom.periodic_v) edge(i, j, i, j + 1);
        }
    }

    std::vector<SingularCurve> curves;
    for (const Vec2& seed : seeds) {
        Vec2 p;
        try {
            p = project_to_singular_set(m, seed);
        } catch (const Error&) {
            continue;
        }
        if (!dom.contains(p)) continue;
        bool known = false;
        for (const SingularCurve& c : curves) {
            for (const CurveSample& s : c.samples) {
                if (dom.displacement(s.geo.point, p).norm() < h_max) {
                    known = true;
                    break;
                }
            }
            if (known) break;
        }
        if (known) continue;
        try {
            curves.push_back(trace_singular_curve(m, p, opt));
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::DegenerateStart) continue;
            throw;
        }
    }
    return curves;
}

CurveGeometry point_at(const MetricField& m, const SingularCurve& c, double t, int jet_order) {
    if (c.samples.empty()) throw Error(ErrorKind::DomainError, "kossowski", "empty curve");
    const double total = c.parameter_length();
    if (t < -1e-12 || t > total + 1e-12) {
        throw Error(ErrorKind::DomainError, "kossowski", "curve parameter out of range");
    }
    auto it = std::upper_bound(c.samples.begin(), c.samples.end(), t,
                               [](double x, const CurveSample& s) { return x < s.t; });
    const CurveSample& base = *(it == c.samples.begin() ? it : std::prev(it));
    const double s = t - base.t;
    if (s == 0.0) return base.geo;
    const Vec2 p = project_to_singular_set(m, predict(base.geo, s));
    return curve_geometry(m, p, base.geo.tangent, base.geo.eta, jet_order);
}

PointClass classify_point(const MetricField& m, const SingularCurve& c, double t, const KossowskiOptions& opt) {
    return classify(point_at(m, c, t, opt.jet_order), opt.tol_cls);
}

Chart curve_chart(const CurveGeometry& g) {
    const int N = g.gamma_u.order();
    Jet2 pu(N + 1, Vec2::Zero()), pv(N + 1, Vec2::Zero());
    for (int i = 0; i <= N; ++i) {
        pu.coeff_ref(i, 0) = g.gamma_u.coeff(i, 0);
        pv.coeff_ref(i, 0) = g.gamma_v.coeff(i, 0);
        pu.coeff_ref(i, 1) = g.eta_u.coeff(i, 0);
        pv.coeff_ref(i, 1) = g.eta_v.coeff(i, 0);
    }
    return Chart::polynomial(pu, pv, Chart::Kind::CurveBased, "curve");
}

namespace {

void require_a2(const CurveGeometry& g, const KossowskiOptions& opt) {
    const double margin = std::abs(g.phi);
    if (margin <= opt.guard_factor * opt.tol_cls) {
        throw Error(ErrorKind::NotA2, "kossowski",
                    "curve chart degenerates: |det(tangent, eta)| = " + std::to_string(margin));
    }
}

}  // namespace

double singular_curvature(const MetricField& m, const CurveGeometry& g, const KossowskiOptions& opt) {
    require_lambda(m);
    require_a2(g, opt);
    const MetricField a = pullback(m, curve_chart(g));
    const MetricJets j = a.jets(Vec2::Zero(), 2);
    double lv = j.lambda->derivative(0, 1);
    if (lv < 0) lv = -lv;
    const double E = j.E.value();
    const double Eu = j.E.derivative(1, 0), Evv = j.E.derivative(0, 2);
    const double Fv = j.F.derivative(0, 1), Fuv = j.F.derivative(1, 1);
    return (-Fv * Eu + 2.0 * E * Fuv - E * Evv) / (2.0 * std::pow(E, 1.5) * lv);
}

ProductCurvature product_curvature(const MetricField& m, const CurveGeometry& g, const KossowskiOptions& opt) {
    require_lambda(m);
    require_a2(g, opt);
    const MetricField a = pullback(m, curve_chart(g));
    const MetricJets j0 = a.jets(Vec2::Zero(), 1);
    const double E = j0.E.value();
    const double lv = j0.lambda->derivative(0, 1);
    const auto klam = [&](double h) {
        const auto one = [&](double v) {
            const MetricJets j = a.jets(Vec2(0.0, v), 2);
            return gaussian_curvature(j) * j.lambda->value();
        };
        return 0.5 * (one(h) + one(-h));
    };
    const double h0 = opt.richardson_h0 * m.domain().scale();
    const Extrapolation ex = richardson(klam, h0, opt.richardson_levels, 2, 2, opt.richardson_tol, "kossowski");
    const double sign_j = g.phi < 0 ? -1.0 : 1.0;
    ProductCurvature out;
    out.value = sign_j * ex.value / (std::pow(E, 0.25) * std::sqrt(std::abs(lv)));
    out.error = ex.error;
    out.is_signed = m.co_oriented();
    if (!out.is_signed) out.value = std::abs(out.value);
    return out;
}

double k_lambda(const MetricField& m, const Vec2& p, double h0) {
    require_lambda(m);
    const MetricJets j = m.jets(p, 2);
    try {
        return gaussian_curvature(j) * j.lambda->value();
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegeneratePoint) throw;
    }
    const Vec2 n = Vec2(j.lambda->coeff(1, 0), j.lambda->coeff(0, 1)).normalized();
    const auto one = [&](const Vec2& q) {
        const MetricJets jq = m.jets(q, 2);
        return gaussian_curvature(jq) * jq.lambda->value();
    };
    const auto f = [&](double h) { return 0.5 * (one(p + h * n) + one(p - h * n)); };
    return richardson(f, h0, 5, 2, 2, 1e-3, "integrate").value;
}

NormalizedCheck verify_normalized_chart(const MetricField& m, const std::vector<double>& us, double collar,
                                        double tol) {
    NormalizedCheck out;
    for (double u : us) {
        const MetricJets j = m.jets(Vec2(u, 0.0), 2);
        out.e_residual = std::max(out.e_residual, std::abs(j.E.value() - 1.0));
        out.gvv_residual = std::max(out.gvv_residual, std::abs(j.G.derivative(0, 2) - 2.0));
        for (int k = -4; k <= 4; ++k) {
            const double v = collar * k / 4.0;
            out.f_residual = std::max(out.f_residual, std::abs(m.jets(Vec2(u, v), 0).F.value()));
        }
    }
    out.normalized = out.e_residual <= tol && out.gvv_residual <= tol && out.f_residual <= tol;
    return out;
}

NormalFormInvariants normal_form_invariants(const MetricField& m, double u) {
    if (!verify_normalized_chart(m, {u}).normalized) {
        throw Error(ErrorKind::NotNormalized, "kossowski", "chart is not normalized at u = " + std::to_string(u));
    }
    const MetricJets j = m.jets(Vec2(u, 0.0), 3);
    const double alpha = j.E.coeff(0, 2);
    const double alpha_v = j.E.coeff(0, 3);
    const double beta = j.G.coeff(0, 3);
    NormalFormInvariants out;
    out.kappa_s = -alpha;
    out.kappa_pi = 0.5 * (alpha * beta - 3.0 * alpha_v);
    out.is_signed = m.has_lambda() && m.co_oriented();
    if (out.is_signed) {
        if (j.lambda->derivative(0, 1) < 0) out.kappa_pi = -out.kappa_pi;
    } else {
        out.kappa_pi = std::abs(out.kappa_pi);
    }
    return out;
}

void annotate_invariants(const MetricField& m, SingularCurve& c, const KossowskiOptions& opt) {
    for (CurveSample& s : c.samples) {
        if (s.cls != PointClass::A2 || s.unreliable) continue;
        s.kappa_s = singular_curvature(m, s.geo, opt);
        try {
            s.kappa_pi = product_curvature(m, s.geo, opt).value;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::ExtrapolationDiverged) throw;
        }
    }
}

namespace {

void put(std::string& out, double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    out.append(buf, r.ptr);
}

}  // namespace

std::string curve_csv(const SingularCurve& c) {
    std::string out = "t,u,v,tangent_u,tangent_v,eta_u,eta_v,class,kappa_s,kappa_pi,tau\n";
    for (const CurveSample& s : c.samples) {
        const Vec2 p = c.domain.wrap(s.geo.point);
        for (double x : {s.t, p[0], p[1], s.geo.tangent[0], s.geo.tangent[1], s.geo.eta[0], s.geo.eta[1]}) {
            put(out, x);
            out += ',';
        }
        out += to_string(s.cls);
        out += ',';
        if (s.kappa_s) put(out, *s.kappa_s);
        out += ',';
        if (s.kappa_pi) put(out, *s.kappa_pi);
        out += ',';
        put(out, s.tau);
        out += '\n';
    }
    return out;
}

}  // namespace smlab
