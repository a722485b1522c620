#include "smlab/whitney.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "json_util.hpp"
#include "smlab/numerics.hpp"

namespace smlab {

namespace {

struct DeltaJets {
    double value;
    Vec2 grad;
    Eigen::Matrix2d hess;
};

DeltaJets delta_jets(const MetricField& m, const Vec2& p) {
    const Jet2 d = discriminant(m.jets(p, 2));
    DeltaJets out;
    out.value = d.value();
    out.grad = Vec2(d.derivative(1, 0), d.derivative(0, 1));
    out.hess << d.derivative(2, 0), d.derivative(1, 1), d.derivative(1, 1), d.derivative(0, 2);
    return out;
}

struct CrossCapTest {
    bool ok = false;
    std::string why;
    double hess = 0.0;
};

CrossCapTest test_cross_cap(const MetricField& m, const Vec2& p) {
    const double s = m.domain().scale();
    const DeltaJets d = delta_jets(m, p);
    CrossCapTest out;
    out.hess = d.hess.determinant();
    if (!(std::abs(d.value) <= 1e-12 * s * s)) {
        out.why = "EG - F^2 = " + std::to_string(d.value) + " does not vanish";
    } else if (!(d.hess(0, 0) > 0 && out.hess > 1e-8 * std::pow(s, 4))) {
        out.why = "Hess(EG - F^2) = " + std::to_string(out.hess) + " is not positive";
    } else if (null_space(m, p).rank != 1) {
        out.why = "the null space is not one dimensional";
    } else {
        out.ok = true;
    }
    return out;
}

void require_cross_cap(const MetricField& m, const Vec2& p) {
    const CrossCapTest t = test_cross_cap(m, p);
    if (!t.ok) throw Error(ErrorKind::NotCrossCap, "whitney", t.why);
}

double west_target_gap(const MetricJets& j, const std::array<double, 9>& w) {
    const double have[9] = {j.E.derivative(2, 0), j.E.derivative(1, 1), j.E.derivative(0, 2),
                            j.F.derivative(2, 0), j.F.derivative(1, 1), j.F.derivative(0, 2),
                            j.G.derivative(2, 0), j.G.derivative(1, 1), j.G.derivative(0, 2)};
    double worst = 0.0;
    for (int k = 0; k < 9; ++k) worst = std::max(worst, std::abs(have[k] - w[k]));
    return worst;
}

Eigen::Matrix2d shear(double c) {
    Eigen::Matrix2d A;
    A << 1, 0, c, 1;
    return A;
}

}  // namespace

double discriminant_hessian(const MetricField& m, const Vec2& p) { return delta_jets(m, p).hess.determinant(); }

std::vector<CrossCapCandidate> detect_cross_caps(const MetricField& m, int grid) {
    const Domain& dom = m.domain();
    if (!dom.bounded()) {
        throw Error(ErrorKind::ConfigError, "whitney", "cross-cap search needs a bounded domain");
    }
    const double s = dom.scale();
    const int nu = grid + (dom.periodic_u ? 0 : 1);
    const int nv = grid + (dom.periodic_v ? 0 : 1);
    const auto node = [&](int i, int j) {
        return Vec2(dom.lo[0] + (dom.hi[0] - dom.lo[0]) * i / grid, dom.lo[1] + (dom.hi[1] - dom.lo[1]) * j / grid);
    };
    std::vector<double> d(static_cast<std::size_t>(nu) * nv);
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) d[i * nv + j] = discriminant(m.jets(node(i, j), 0)).value();

    std::vector<CrossCapCandidate> out;
    for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) {
            const double here = d[i * nv + j];
            bool minimum = true, strict = false;
            for (int di = -1; di <= 1 && minimum; ++di) {
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    int a = i + di, b = j + dj;
                    if (dom.periodic_u) a = (a + nu) % nu;
                    if (dom.periodic_v) b = (b + nv) % nv;
                    if (a < 0 || a >= nu || b < 0 || b >= nv) continue;
                    const double there = d[a * nv + b];
                    if (there < here) {
                        minimum = false;
                        break;
                    }
                    if (there > here) strict = true;
                }
            }
            if (!minimum || !strict) continue;

            Vec2 p = node(i, j);
            bool converged = false;
            for (int it = 0; it < 60; ++it) {
                const DeltaJets dj = delta_jets(m, p);
                const Eigen::FullPivLU<Eigen::Matrix2d> lu(dj.hess);
                if (!lu.isInvertible()) break;
                const Vec2 step = lu.solve(dj.grad);
                p -= step;
                if (!dom.contains(p, 1e-9 * s)) break;
                if (step.norm() <= 1e-15 * s) {
                    converged = true;
                    break;
                }
            }
            if (!converged) {
                // Newton may stall at roundoff level just above the tolerance.
                const DeltaJets dj = delta_jets(m, p);
                converged = dom.contains(p, 1e-9 * s) && dj.grad.norm() <= 1e-13 * s;
            }
            if (!converged) continue;
            p = dom.wrap(p);
            const CrossCapTest t = test_cross_cap(m, p);
            if (!t.ok) continue;
            const bool known = std::any_of(out.begin(), out.end(), [&](const CrossCapCandidate& c) {
                return dom.displacement(c.point, p).norm() < 1e-6;
            });
            if (!known) out.push_back({p, t.hess});
        }
    }
    std::sort(out.begin(), out.end(), [](const CrossCapCandidate& a, const CrossCapCandidate& b) {
        return a.point[0] != b.point[0] ? a.point[0] < b.point[0] : a.point[1] < b.point[1];
    });
    return out;
}

Chart adjusted_chart(const MetricField& m, const Vec2& p) {
    require_cross_cap(m, p);
    return aligned_chart(p, null_space(m, p).null_dirs.front());
}

Alpha02 cross_cap_alpha02(const MetricField& m, const Vec2& p) {
    const MetricField a = pullback(m, adjusted_chart(m, p));
    const MetricJets j = a.jets(Vec2::Zero(), 2);
    const double E = j.E.value();
    const double Fu = j.F.derivative(1, 0), Fv = j.F.derivative(0, 1);
    const double Guu = j.G.derivative(2, 0), Guv = j.G.derivative(1, 1), Gvv = j.G.derivative(0, 2);
    Eigen::Matrix3d D;
    D << E, Fu, Fv, Fu, Guu / 2, Guv / 2, Fv, Guv / 2, Gvv / 2;
    Alpha02 out;
    out.E = E;
    out.delta = D.determinant();
    out.alpha = E * Gvv / 2 - Fv * Fv;
    out.hess = discriminant_hessian(a, Vec2::Zero());
    if (!(out.alpha > 0 && out.delta > 0)) {
        throw Error(ErrorKind::NotCrossCap, "whitney", "alpha or Delta is not positive");
    }
    out.alpha02 = std::sqrt(E) * std::pow(out.alpha, 1.5) / out.delta;
    return out;
}

AdaptedStage adapted_stage(const MetricField& adjusted) {
    const double E0 = adjusted.jets(Vec2::Zero(), 0).E.value();
    if (!(E0 > 0)) throw Error(ErrorKind::SolveFailed, "whitney", "E vanishes at the cross cap");
    const double c1 = 1.0 / std::sqrt(E0);
    const auto chart_for = [&](const Eigen::Vector3d& c) {
        Jet2 u(2, Vec2::Zero()), v(2, Vec2::Zero());
        u.coeff_ref(1, 0) = c1;
        u.coeff_ref(2, 0) = c[0];
        u.coeff_ref(1, 1) = c[1];
        u.coeff_ref(0, 2) = c[2];
        v.coeff_ref(0, 1) = 1.0;
        return Chart::polynomial(u, v, Chart::Kind::Polynomial, "adapted");
    };
    const auto residual = [&](const Eigen::Vector3d& c) {
        const MetricJets j = pullback(adjusted, chart_for(c)).jets(Vec2::Zero(), 1);
        Eigen::Matrix<double, 7, 1> r;
        r << j.E.value() - 1.0, j.E.derivative(1, 0), j.E.derivative(0, 1), j.F.derivative(1, 0),
            j.F.derivative(0, 1), j.G.derivative(1, 0), j.G.derivative(0, 1);
        return r;
    };
    // The first derivatives are affine in (c11, c12, c22).
    const Eigen::Matrix<double, 7, 1> r0 = residual(Eigen::Vector3d::Zero());
    Eigen::Matrix<double, 6, 3> A;
    for (int k = 0; k < 3; ++k) A.col(k) = (residual(Eigen::Vector3d::Unit(k)) - r0).tail<6>();
    const Eigen::ColPivHouseholderQR<Eigen::Matrix<double, 6, 3>> qr(A);
    if (qr.rank() < 3) throw Error(ErrorKind::SolveFailed, "whitney", "adapted-chart system is singular");
    const Eigen::Vector3d c = qr.solve(Eigen::Matrix<double, 6, 1>(-r0.tail<6>()));

    AdaptedStage out;
    out.chart = chart_for(c);
    out.c1 = c1;
    out.c11 = c[0];
    out.c12 = c[1];
    out.c22 = c[2];
    out.residual = residual(c).cwiseAbs().maxCoeff();
    if (!(out.residual <= 1e-10)) {
        throw Error(ErrorKind::SolveFailed, "whitney",
                    "adapted chart misses its conditions by " + std::to_string(out.residual));
    }
    return out;
}

Chart build_adapted_chart(const MetricField& m, const Vec2& p) {
    const Chart adj = adjusted_chart(m, p);
    return compose(adj, adapted_stage(pullback(m, adj)).chart);
}

LevelAdjustment level_adjust(const MetricField& adapted, double alpha02) {
    LevelAdjustment out;
    const double Gvv = adapted.jets(Vec2::Zero(), 2).G.derivative(0, 2);
    if (!(Gvv > 0)) throw Error(ErrorKind::SolveFailed, "whitney", "G_vv is not positive at the cross cap");
    out.scale = std::pow(2.0, 0.25) * std::sqrt(alpha02) / std::pow(Gvv, 0.25);
    Eigen::Matrix2d S = Eigen::Matrix2d::Identity();
    S(1, 1) = out.scale;
    out.first = Chart::affine(Vec2::Zero(), S);
    const MetricField first = pullback(adapted, out.first);
    const MetricJets j1 = first.jets(Vec2::Zero(), 2);
    out.first_residual = std::abs(j1.G.derivative(0, 2) - 2 * alpha02 * alpha02);
    if (!(out.first_residual <= 1e-10 * std::max(1.0, 2 * alpha02 * alpha02))) {
        throw Error(ErrorKind::SolveFailed, "whitney", "first-level adjustment failed");
    }

    const auto second_det = [](const MetricJets& j) {
        const double a = j.F.derivative(2, 0) - j.E.derivative(1, 1) / 2;
        const double b = j.F.derivative(1, 1) - j.E.derivative(0, 2) / 2;
        return a * j.G.derivative(0, 2) - j.G.derivative(1, 1) * b;
    };
    const double Guu = j1.G.derivative(2, 0), Guv = j1.G.derivative(1, 1), Gvv1 = j1.G.derivative(0, 2);
    const double detG = Guu * Gvv1 - Guv * Guv;
    if (!(std::abs(detG) > 1e-12 * std::max(1.0, Guu * Guu + Gvv1 * Gvv1))) {
        throw Error(ErrorKind::DegenerateGHessian, "whitney", "the Hessian of G is degenerate");
    }
    // Under v = eta + c xi the determinant changes by c det Hess(G).
    out.shear = -second_det(j1) / detG;
    out.second = Chart::affine(Vec2::Zero(), shear(out.shear));
    out.second_residual = std::abs(second_det(pullback(first, out.second).jets(Vec2::Zero(), 2)));
    if (!(out.second_residual <= 1e-10 * std::max(1.0, std::abs(detG)))) {
        throw Error(ErrorKind::SolveFailed, "whitney", "second-level adjustment failed");
    }
    return out;
}

std::array<double, 9> west_second_derivatives(double a20, double a11, double a02) {
    return {2 * a20 * a20,
            2 * a11 * a20,
            2 * (1 + a11 * a11),
            2 * a11 * a20,
            1 + a11 * a11 + a02 * a20,
            2 * a02 * a11,
            2 * (1 + a11 * a11),
            2 * a02 * a11,
            2 * a02 * a02};
}

WestStage west_chart(const MetricField& second_level, double a20, double a11, double a02) {
    const std::array<double, 9> w = west_second_derivatives(a20, a11, a02);
    const auto chart_for = [](const Eigen::Vector4d& c) {
        Jet2 u(3, Vec2::Zero()), v(3, Vec2::Zero());
        u.coeff_ref(1, 0) = 1.0;
        u.coeff_ref(3, 0) = c[0];
        u.coeff_ref(2, 1) = c[1];
        u.coeff_ref(1, 2) = c[2];
        u.coeff_ref(0, 3) = c[3];
        v.coeff_ref(0, 1) = 1.0;
        return Chart::polynomial(u, v, Chart::Kind::Polynomial, "west");
    };
    const auto residual = [&](const Eigen::Vector4d& c) {
        const MetricJets j = pullback(second_level, chart_for(c)).jets(Vec2::Zero(), 2);
        return Eigen::Vector4d(j.E.derivative(2, 0) - w[0], j.F.derivative(2, 0) - w[3], j.F.derivative(1, 1) - w[4],
                               j.F.derivative(0, 2) - w[5]);
    };
    const Eigen::Vector4d r0 = residual(Eigen::Vector4d::Zero());
    Eigen::Matrix4d A;
    for (int k = 0; k < 4; ++k) A.col(k) = residual(Eigen::Vector4d::Unit(k)) - r0;
    const Eigen::FullPivLU<Eigen::Matrix4d> lu(A);
    if (!lu.isInvertible()) throw Error(ErrorKind::SolveFailed, "whitney", "West-chart system is singular");
    const Eigen::Vector4d c = lu.solve(Eigen::Vector4d(-r0));

    WestStage out;
    out.chart = chart_for(c);
    out.c30 = c[0];
    out.c21 = c[1];
    out.c12 = c[2];
    out.c03 = c[3];
    out.residual = west_target_gap(pullback(second_level, out.chart).jets(Vec2::Zero(), 2), w);
    if (!(out.residual <= 1e-9)) {
        throw Error(ErrorKind::SolveFailed, "whitney",
                    "West chart misses the expansion by " + std::to_string(out.residual));
    }
    return out;
}

double ray_limit_formula(double a20, double a11, double a02, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    const double q = c * c + std::pow(a11 * c + a02 * s, 2);
    return a02 * (a20 * c * c - a02 * s * s) / (q * q);
}

RayLimit curvature_ray_limit(const MetricField& second_level, double theta, double h0, int levels, double rel_tol) {
    const Vec2 dir(std::cos(theta), std::sin(theta));
    const auto f = [&](double r) { return r * r * gaussian_curvature(second_level, r * dir); };
    const Extrapolation ex = richardson(f, h0, levels, 1, 1, rel_tol, "whitney");
    RayLimit out;
    out.theta = theta;
    out.value = ex.value;
    out.error = ex.error;
    return out;
}

namespace {

struct Pipeline {
    Alpha02 a;
    Chart adjusted = Chart::identity();
    AdaptedStage adapted;
    LevelAdjustment level;
    MetricField second;
};

Pipeline run_pipeline(const MetricField& m, const Vec2& p) {
    Alpha02 a = cross_cap_alpha02(m, p);
    const Chart adj = adjusted_chart(m, p);
    const MetricField m1 = pullback(m, adj);
    AdaptedStage ad = adapted_stage(m1);
    const MetricField m2 = pullback(m1, ad.chart);
    LevelAdjustment lv = level_adjust(m2, a.alpha02);
    MetricField m4 = pullback(pullback(m2, lv.first), lv.second);
    return Pipeline{a, adj, std::move(ad), std::move(lv), std::move(m4)};
}

}  // namespace

MetricField second_level_metric(const MetricField& m, const Vec2& p) { return run_pipeline(m, p).second; }

CrossCapReport cross_cap_invariants(const MetricField& m, const Vec2& p, const WhitneyOptions& opt) {
    const Pipeline pl = run_pipeline(m, p);
    CrossCapReport r;
    r.location = p;
    r.hess = pl.a.hess;
    r.delta = pl.a.delta;
    r.alpha = pl.a.alpha;
    r.E = pl.a.E;
    r.alpha02 = pl.a.alpha02;
    r.residual_hess = std::abs(r.hess - 4 * r.E * r.delta);

    const MetricJets j = pl.second.jets(Vec2::Zero(), 2);
    const double a02 = r.alpha02;
    const double a11 = j.G.derivative(1, 1) / (2 * a02);
    const double a20 = (j.F.derivative(1, 1) - j.E.derivative(0, 2) / 2) / a02;
    r.alpha20 = a20;
    r.residual_a1_2 = std::abs(j.G.derivative(2, 0) - 2 * (1 + a11 * a11));
    r.residual_FE2 = std::abs(j.F.derivative(2, 0) - j.E.derivative(1, 1) / 2 - a11 * a20);

    r.stack.push_back({"adjusted", pl.adjusted.jacobian(Vec2::Zero()), {}});
    r.stack.push_back({"adapted",
                       pl.adapted.chart.jacobian(Vec2::Zero()),
                       {pl.adapted.c1, pl.adapted.c11, pl.adapted.c12, pl.adapted.c22}});
    r.stack.push_back({"first-level", pl.level.first.jacobian(Vec2::Zero()), {pl.level.scale}});
    r.stack.push_back({"second-level", pl.level.second.jacobian(Vec2::Zero()), {pl.level.shear}});
    if (opt.west) {
        const WestStage w = west_chart(pl.second, a20, a11, a02);
        r.residual_west = w.residual;
        r.stack.push_back({"west", w.chart.jacobian(Vec2::Zero()), {w.c30, w.c21, w.c12, w.c03}});
    }
    const bool preserving = std::all_of(r.stack.begin(), r.stack.end(),
                                        [](const ChartStage& s) { return s.jacobian.determinant() > 0; });
    r.alpha11_signed = opt.oriented && preserving;
    r.alpha11 = r.alpha11_signed ? a11 : std::abs(a11);

    const double h0 = opt.richardson_h0 * m.domain().scale();
    for (int k = 0; k < opt.rays; ++k) {
        const double theta = std::numbers::pi * k / opt.rays;
        RayLimit ray = curvature_ray_limit(pl.second, theta, h0, opt.richardson_levels, opt.richardson_tol);
        ray.formula = ray_limit_formula(a20, a11, a02, theta);
        r.rays.push_back(ray);
    }
    return r;
}

std::string to_json(const CrossCapReport& r) {
    using nlohmann::json;
    json j;
    j["location"] = {r.location[0], r.location[1]};
    j["hess"] = r.hess;
    j["delta"] = r.delta;
    j["alpha"] = r.alpha;
    j["E"] = r.E;
    j["alpha02"] = r.alpha02;
    j["alpha11"] = r.alpha11;
    j["alpha11_signed"] = r.alpha11_signed;
    j["alpha20"] = r.alpha20;
    j["residual_hess"] = r.residual_hess;
    j["residual_a1_2"] = r.residual_a1_2;
    j["residual_FE2"] = r.residual_FE2;
    j["residual_west"] = r.residual_west ? json(*r.residual_west) : json(nullptr);
    j["west_convention"] =
        "second derivatives at the origin: E_uu = 2 a20^2, E_uv = 2 a11 a20, E_vv = 2 (1 + a11^2), "
        "F_uu = 2 a11 a20, F_uv = 1 + a11^2 + a02 a20, F_vv = 2 a02 a11, "
        "G_uu = 2 (1 + a11^2), G_uv = 2 a02 a11, G_vv = 2 a02^2";
    json stack = json::array();
    for (const ChartStage& s : r.stack) {
        stack.push_back({{"name", s.name},
                         {"jacobian", {{s.jacobian(0, 0), s.jacobian(0, 1)}, {s.jacobian(1, 0), s.jacobian(1, 1)}}},
                         {"constants", s.constants}});
    }
    j["chart_stack"] = stack;
    json rays = json::array();
    for (const RayLimit& ray : r.rays) {
        rays.push_back({{"theta", ray.theta}, {"numeric", ray.value}, {"formula", ray.formula}, {"error", ray.error}});
    }
    j["rays"] = rays;
    return detail::dump17(j);
}

}  // namespace smlab
