#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "smlab/metric.hpp"

using namespace smlab;

namespace {

SurfaceMap map_of(const char* x, const char* y, const char* z, const char* n0 = nullptr, const char* n1 = nullptr,
                  const char* n2 = nullptr) {
    SurfaceMap f;
    f.f = {parse(x), parse(y), parse(z)};
    if (n0) f.nu = std::array<Expr, 3>{parse(n0), parse(n1), parse(n2)};
    f.domain = Domain::rectangle(-1, 1, -1, 1);
    return f;
}

MetricField metric_of(const char* E, const char* F, const char* G, const char* lambda = nullptr) {
    std::optional<Expr> l;
    if (lambda) l = parse(lambda);
    return MetricField::from_expressions(parse(E), parse(F), parse(G), l, Domain::rectangle(-2, 2, -2, 2));
}

SurfaceMap cuspidal_edge() {
    return map_of("u^2", "u^3", "v", "3*u/sqrt(9*u^2+4)", "-2/sqrt(9*u^2+4)", "0");
}
SurfaceMap swallowtail() {
    return map_of("3*u^4 + u^2*v", "4*u^3 + 2*u*v", "v", "1/sqrt(1+u^2+u^4)", "-u/sqrt(1+u^2+u^4)",
                  "u^2/sqrt(1+u^2+u^4)");
}
SurfaceMap cuspidal_cross_cap() {
    return map_of("u", "v^2", "u*v^3", "-2*v^3/sqrt(4+9*u^2*v^2+4*v^6)", "-3*u*v/sqrt(4+9*u^2*v^2+4*v^6)",
                  "2/sqrt(4+9*u^2*v^2+4*v^6)");
}

/// Random chart (xi, eta) -> p + A (xi, eta) + quadratic terms, with det A > 0.
Chart random_chart(std::mt19937_64& rng, const Vec2& p, double quad = 0.3) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Eigen::Matrix2d A;
    do {
        A << d(rng), d(rng), d(rng), d(rng);
    } while (A.determinant() < 0.3);
    Jet2 u(2, Vec2::Zero()), v(2, Vec2::Zero());
    u.coeff_ref(0, 0) = p[0];
    v.coeff_ref(0, 0) = p[1];
    u.coeff_ref(1, 0) = A(0, 0);
    u.coeff_ref(0, 1) = A(0, 1);
    v.coeff_ref(1, 0) = A(1, 0);
    v.coeff_ref(0, 1) = A(1, 1);
    for (int k = 0; k < 3; ++k) {
        u.coeff_ref(2 - k, k) = quad * d(rng);
        v.coeff_ref(2 - k, k) = quad * d(rng);
    }
    return Chart::polynomial(u, v);
}

}  // namespace

TEST_CASE("metric: induced metric of the cuspidal edge") {
    const MetricField m = induced_metric(cuspidal_edge());
    std::mt19937_64 rng(0x3e01);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const double u = d(rng), v = d(rng);
        // f_u = (2u, 3u^2, 0), f_v = (0, 0, 1)
        const double fu[3] = {2 * u, 3 * u * u, 0}, fv[3] = {0, 0, 1};
        const MetricJets j = m.jets(Vec2(u, v), 0);
        CHECK(j.E.value() == doctest::Approx(fu[0] * fu[0] + fu[1] * fu[1] + fu[2] * fu[2]).epsilon(1e-13));
        CHECK(std::abs(j.F.value()) < 1e-15);
        CHECK(j.G.value() == doctest::Approx(fv[2] * fv[2]));
        CHECK(j.lambda->value() == doctest::Approx(u * std::sqrt(9 * u * u + 4)).epsilon(1e-13));
    }
}

TEST_CASE("metric: induced metric of the standard cross cap and the plane") {
    const MetricField m = induced_metric(map_of("u", "u*v", "v^2"));
    CHECK_FALSE(m.has_lambda());
    const MetricJets j = m.jets(Vec2(0.3, -0.7), 0);
    CHECK(j.E.value() == doctest::Approx(1 + 0.49));
    CHECK(j.F.value() == doctest::Approx(0.3 * -0.7));
    CHECK(j.G.value() == doctest::Approx(0.09 + 4 * 0.49));
    const MetricJets p = induced_metric(map_of("u", "v", "0")).jets(Vec2(0.2, 0.1), 1);
    CHECK(p.E.value() == 1.0);
    CHECK(p.F.value() == 0.0);
    CHECK(p.G.value() == 1.0);
}

TEST_CASE("metric: supplied normals are unit and normal") {
    CHECK(surface_normal_residual(cuspidal_edge()) < 1e-10);
    CHECK(surface_normal_residual(swallowtail()) < 1e-10);
    CHECK(surface_normal_residual(cuspidal_cross_cap()) < 1e-10);
    CHECK(surface_normal_residual(map_of("u", "v", "0", "1", "0", "0")) > 0.5);
}

TEST_CASE("metric: lambda squared equals the discriminant for induced metrics") {
    std::mt19937_64 rng(0x3e02);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (const SurfaceMap& f : {cuspidal_edge(), swallowtail(), cuspidal_cross_cap()}) {
        const MetricField m = induced_metric(f);
        for (int k = 0; k < 1000; ++k) {
            const MetricJets j = m.jets(Vec2(d(rng), d(rng)), 0);
            const double delta = j.E.value() * j.G.value() - j.F.value() * j.F.value();
            const double l = j.lambda->value();
            CHECK(std::abs(delta - l * l) <= 1e-9 * (1 + std::abs(j.E.value() * j.G.value())));
        }
        const MetricCheck c = check_metric(m);
        CHECK(c.psd_violation <= 1e-10);
        CHECK(c.lambda_residual <= 1e-9);
    }
}

TEST_CASE("metric: Gaussian curvature examples") {
    CHECK(gaussian_curvature(metric_of("1", "0", "sin(u)^2"), Vec2(M_PI / 3, 0)) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(gaussian_curvature(metric_of("1", "0", "1"), Vec2(0.3, 0.4)) == 0.0);
    CHECK(std::abs(gaussian_curvature(induced_metric(cuspidal_edge()), Vec2(0.5, 0))) < 1e-14);
    // hyperbolic upper half plane (du^2 + dv^2)/v^2 has K = -1
    CHECK(gaussian_curvature(metric_of("v^-2", "0", "v^-2"), Vec2(0.1, 0.7)) == doctest::Approx(-1.0).epsilon(1e-12));
    // extrinsic oracle: graph z = u^2 - v^2 / 2 at (0.3, 0.2); K = (f_uu f_vv - f_uv^2)/(1 + |grad|^2)^2
    const MetricField g = induced_metric(map_of("u", "v", "u^2 - v^2/2"));
    const double fu = 0.6, fv = -0.2;
    CHECK(gaussian_curvature(g, Vec2(0.3, 0.2)) ==
          doctest::Approx(2.0 * -1.0 / std::pow(1 + fu * fu + fv * fv, 2)).epsilon(1e-12));
    try {
        (void)gaussian_curvature(induced_metric(cuspidal_edge()), Vec2(0, 0.3));
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegeneratePoint);
    }
}

TEST_CASE("metric: Kossowski pseudo-connection examples") {
    const MetricField cc = metric_of("1+v^2", "u*v", "u^2+4*v^2");
    CHECK(kossowski_gamma(cc, Vec2(0, 0), Axis::U, Axis::U, Axis::V) == 0.0);
    const MetricField flat = metric_of("1", "0", "1");
    for (Axis i : {Axis::U, Axis::V})
        for (Axis j : {Axis::U, Axis::V})
            for (Axis k : {Axis::U, Axis::V}) CHECK(kossowski_gamma(flat, Vec2(0.2, 0.3), i, j, k) == 0.0);
    CHECK(kossowski_gamma(metric_of("1+v^2", "0", "1"), Vec2(0, 1), Axis::U, Axis::U, Axis::V) ==
          doctest::Approx(-1.0));
}

TEST_CASE("metric: pseudo-connection identities at random points") {
    std::mt19937_64 rng(0x3e03);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const MetricField m = metric_of("2 + sin(u*v)", "0.3*cos(u+2*v)", "3 + u^2*v");
    for (int k = 0; k < 200; ++k) {
        const Vec2 p(d(rng), d(rng));
        const MetricJets j = m.jets(p, 1);
        const auto g = [&](Axis a, Axis b) -> const Jet2& {
            if (a == Axis::U && b == Axis::U) return j.E;
            if (a == Axis::V && b == Axis::V) return j.G;
            return j.F;
        };
        for (Axis a : {Axis::U, Axis::V})
            for (Axis b : {Axis::U, Axis::V})
                for (Axis c : {Axis::U, Axis::V}) {
                    const double dg = a == Axis::U ? g(b, c).derivative(1, 0) : g(b, c).derivative(0, 1);
                    CHECK(std::abs(dg - kossowski_gamma(j, a, b, c) - kossowski_gamma(j, a, c, b)) <= 1e-10);
                    CHECK(kossowski_gamma(j, a, b, c) == kossowski_gamma(j, b, a, c));
                }
    }
}

TEST_CASE("metric: null space examples") {
    const NullSpace cc = null_space(metric_of("1+v^2", "u*v", "u^2+4*v^2"), Vec2(0, 0));
    CHECK(cc.rank == 1);
    REQUIRE(cc.null_dirs.size() == 1);
    CHECK(cc.null_dirs[0].isApprox(Vec2(0, 1)));
    const NullSpace flat = null_space(metric_of("1", "0", "1"), Vec2(0.5, 0.5));
    CHECK(flat.rank == 2);
    CHECK(flat.null_dirs.empty());
    const NullSpace zero = null_space(metric_of("u^2+v^2", "u^2+v^2", "u^2+v^2"), Vec2(0, 0));
    CHECK(zero.rank == 0);
    CHECK(zero.null_dirs.size() == 2);
    const NullSpace skew = null_space((Eigen::Matrix2d() << 1, -1, -1, 1).finished());
    CHECK(skew.rank == 1);
    CHECK(skew.null_dirs[0].isApprox(Vec2(1, 1).normalized()));
    CHECK(canonical_direction(Vec2(-1, 0)).isApprox(Vec2(1, 0)));
    CHECK(canonical_direction(Vec2(0.5, -2)).isApprox(Vec2(-0.5, 2).normalized()));
}

TEST_CASE("metric: pullback examples") {
    const MetricField sphere = metric_of("1", "0", "sin(u)^2");
    const MetricJets a = pullback(sphere, Chart::identity()).jets(Vec2(0.4, 0.2), 3);
    const MetricJets b = sphere.jets(Vec2(0.4, 0.2), 3);
    for (int k = 0; k < a.E.size(); ++k) {
        CHECK(a.E.data()[k] == doctest::Approx(b.E.data()[k]));
        CHECK(a.G.data()[k] == doctest::Approx(b.G.data()[k]));
    }
    Eigen::Matrix2d swap;
    swap << 0, 1, 1, 0;
    const MetricField s = pullback(sphere, Chart::affine(Vec2::Zero(), swap));
    const MetricJets sj = s.jets(Vec2(0.1, 0.9), 2);
    CHECK(sj.E.value() == doctest::Approx(std::pow(std::sin(0.9), 2)));
    CHECK(sj.G.value() == doctest::Approx(1.0));
    CHECK(gaussian_curvature(s, Vec2(0.1, 0.9)) == doctest::Approx(1.0));
}

TEST_CASE("metric: discriminant Hessian scales by J^6 under charts fixing a cross cap") {
    const MetricField cc = metric_of("1+v^2", "u*v", "u^2+4*v^2");
    const auto hess = [](const MetricField& m) {
        const Jet2 d = discriminant(m.jets(Vec2::Zero(), 2));
        return d.derivative(2, 0) * d.derivative(0, 2) - d.derivative(1, 1) * d.derivative(1, 1);
    };
    CHECK(hess(cc) == doctest::Approx(16.0));
    std::mt19937_64 rng(0x3e04);
    for (int k = 0; k < 20; ++k) {
        const Chart c = random_chart(rng, Vec2::Zero());
        const double J = c.jacobian(Vec2::Zero()).determinant();
        const double h = hess(pullback(cc, c));
        CHECK(std::abs(h - std::pow(J, 6) * 16.0) <= 1e-9 * std::abs(h));
    }
}

TEST_CASE("metric: Gaussian curvature is chart invariant") {
    const MetricField m = metric_of("1 + u^2", "0.3*u*v", "2 + sin(v)");
    std::mt19937_64 rng(0x3e05);
    std::uniform_real_distribution<double> d(-0.5, 0.5);
    for (int k = 0; k < 50; ++k) {
        const Vec2 p(d(rng), d(rng));
        const Chart c = random_chart(rng, p);
        const Vec2 q(0.1 * d(rng), 0.1 * d(rng));
        const double K1 = gaussian_curvature(pullback(m, c), q);
        const double K0 = gaussian_curvature(m, c.map(q));
        CHECK(std::abs(K1 - K0) <= 1e-8 * std::max(1.0, std::abs(K0)));
    }
}

TEST_CASE("metric: pullback transforms lambda by the Jacobian") {
    const MetricField m = induced_metric(swallowtail());
    std::mt19937_64 rng(0x3e06);
    for (int k = 0; k < 20; ++k) {
        const Chart c = random_chart(rng, Vec2(0.1, -0.2));
        const Vec2 q(0.05, 0.02);
        const double J = c.jacobian(q).determinant();
        const double l1 = pullback(m, c).jets(q, 0).lambda->value();
        const double l0 = m.jets(c.map(q), 0).lambda->value();
        CHECK(l1 == doctest::Approx(J * l0).epsilon(1e-12));
    }
    CHECK(m.with_co_orientation(-1).jets(Vec2(0.3, 0.1), 0).lambda->value() ==
          doctest::Approx(-m.jets(Vec2(0.3, 0.1), 0).lambda->value()));
}

TEST_CASE("metric: compose charts") {
    std::mt19937_64 rng(0x3e07);
    const Chart a = random_chart(rng, Vec2(0.2, 0.1));
    const Chart b = random_chart(rng, Vec2(0.0, 0.0));
    const Chart ab = compose(a, b);
    const Vec2 q(0.03, -0.02);
    CHECK((ab.map(q) - a.map(b.map(q))).norm() < 1e-14);
    CHECK((ab.jacobian(q) - a.jacobian(b.map(q)) * b.jacobian(q)).norm() < 1e-13);
}

TEST_CASE("metric: admissibility") {
    const MetricField fc = induced_metric(cuspidal_edge());
    std::vector<SingularSample> samples;
    for (int k = -5; k <= 5; ++k) samples.push_back({Vec2(0, 0.15 * k), Vec2(1, 0)});
    const AdmissibilityReport r = admissibility_check(fc, samples);
    CHECK(r.admissible);
    CHECK(r.worst <= 1e-8);

    const MetricField cc = induced_metric(map_of("u", "u*v", "v^2"));
    CHECK(admissibility_check(cc, {{Vec2(0, 0), Vec2(0, 1)}}).admissible);

    const MetricField bad = metric_of("1", "u", "u^2 + v");
    const AdmissibilityReport rb = admissibility_check(bad, {{Vec2(0, 0), Vec2(0, 1)}});
    CHECK_FALSE(rb.admissible);
    CHECK(rb.worst == doctest::Approx(1.0));  // Gamma(u,u,v) = F_u - E_v/2 = 1, Gamma(v,v,v) = G_v/2 = 1/2

    try {
        (void)admissibility_check(metric_of("1", "0", "1"), {{Vec2(0, 0), Vec2(0, 1)}});
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::RankMismatch);
    }
}

TEST_CASE("metric: domain helpers") {
    const Domain d = Domain::rectangle(0, 2 * M_PI, -1, 1, true, false);
    CHECK(d.wrap(Vec2(7, 0))[0] == doctest::Approx(7 - 2 * M_PI));
    CHECK(d.displacement(Vec2(0.1, 0), Vec2(2 * M_PI - 0.1, 0))[0] == doctest::Approx(-0.2));
    CHECK(d.contains(Vec2(100, 0.5)));
    CHECK_FALSE(d.contains(Vec2(0, 1.5)));
    CHECK(Domain{}.scale() == 1.0);
}
