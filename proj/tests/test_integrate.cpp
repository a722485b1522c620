#include <doctest.h>

#include <cmath>
#include <numbers>

#include "smlab/config.hpp"
#include "smlab/error.hpp"
#include "smlab/integrate.hpp"

using namespace smlab;

namespace {

constexpr double kPi = std::numbers::pi;

MetricField gallery_metric(const char* name) { return build_metric(gallery_config(name)); }

MetricField sphere(bool with_lambda) {
    const Domain d = Domain::rectangle(0, kPi, 0, 2 * kPi, false, true);
    return MetricField::from_expressions(parse("1"), parse("0"), parse("sin(u)^2"),
                                         with_lambda ? std::optional<Expr>(parse("sin(u)")) : std::nullopt, d);
}

/// Height of the front's unit normal, 2 sin v / sqrt(cos^2 v + 4 sin^2 v).
double front_nu_z(double v) { return 2 * std::sin(v) / std::sqrt(std::cos(v) * std::cos(v) + 4 * std::sin(v) * std::sin(v)); }

/// First singular latitude of the front: sin^2 v = (3^(2/3) - 1) / 3.
double front_v1() { return std::asin(std::sqrt((std::cbrt(9.0) - 1.0) / 3.0)); }

/// Composite Simpson on [a, b] with n (even) panels.
template <class F>
double simpson(F f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4 : 2) * f(a + k * h);
    return s * h / 3;
}

}  // namespace

TEST_CASE("integrate: flat torus has zero total curvature") {
    const Domain d = Domain::rectangle(0, 2 * kPi, 0, 2 * kPi, true, true);
    const MetricField m = MetricField::from_expressions(parse("1"), parse("0"), parse("1"), std::nullopt, d);
    const Quadrature q = integrate_K_dA(m);
    CHECK(std::abs(q.value) <= 1e-12);
    CHECK(q.error <= 1e-12);
}

TEST_CASE("integrate: round sphere gives 4 pi, signed and unsigned alike") {
    const Quadrature a = integrate_K_dA(sphere(false));
    CHECK(std::abs(a.value - 4 * kPi) <= 1e-6);
    const Quadrature b = integrate_K_dA(sphere(true));
    const Quadrature c = integrate_K_dhatA(sphere(true));
    CHECK(std::abs(b.value - 4 * kPi) <= 1e-6);
    CHECK(std::abs(c.value - b.value) <= 1e-9);

    const GBReport r = gb_report(sphere(false), GBKind::WhitneyGB, Topology{2, {}, {}}, {}, 1e-3);
    CHECK(r.pass);
    CHECK(r.cross_caps == 0);
}

TEST_CASE("integrate: bump torus total curvature vanishes and refines") {
    const MetricField m = gallery_metric("bump-torus");
    IntegrateOptions opt;
    const Quadrature q = integrate_K_dA(m, opt);
    CHECK(std::abs(q.value) <= 1e-3);
    CHECK(q.error <= 1e-3);
    opt.depth = 16;
    const Quadrature fine = integrate_K_dA(m, opt);
    CHECK(fine.error * 4 <= q.error);
    CHECK(std::abs(fine.value - q.value) <= q.error);

    const GBReport r = gb_report(m, GBKind::WhitneyGB, Topology{0, {}, {}}, 1e-3);
    CHECK(r.pass);
    CHECK(r.cross_caps == 1);
    CHECK(r.residual <= 1e-3);
}

TEST_CASE("integrate: polar subdivision at a cross cap matches a polar oracle") {
    // f = (u, uv, v^2): K sqrt(EG - F^2) = -4 v^2 / (u^2 + 4 v^2 + 4 v^4)^(3/2), about 1/r at the origin.
    const double a = 0.5;
    const MetricField m = MetricField::from_expressions(parse("1 + v^2"), parse("u*v"), parse("u^2 + 4*v^2"),
                                                        std::nullopt, Domain::rectangle(-a, a, -a, a));
    IntegrateOptions opt;
    opt.depth = 4;
    const Quadrature q = integrate_K_dA(m, opt);

    const auto radial = [&](double th) {
        const double c = std::cos(th), s = std::sin(th);
        const double R = a / std::max(std::abs(c), std::abs(s));
        // r * K sqrt(delta) with the factor r^3 cancelled: -4 s^2 / (c^2 + 4 s^2 + 4 r^2 s^4)^(3/2).
        const auto g = [&](double r) { return -4 * s * s / std::pow(c * c + 4 * s * s + 4 * r * r * s * s * s * s, 1.5); };
        return simpson(g, 0.0, R, 400);
    };
    double oracle = 0.0;
    for (int k = 0; k < 8; ++k) oracle += simpson(radial, k * kPi / 4, (k + 1) * kPi / 4, 2000);
    CHECK(std::abs(q.value - oracle) <= 1e-10);
    CHECK(q.error <= 1e-10);
}

TEST_CASE("integrate: parallel torus front, signed area form") {
    const MetricField m = gallery_metric("parallel-torus-front");
    const Quadrature h = integrate_K_dhatA(m);
    CHECK(std::abs(h.value) <= 1e-3);

    // Bands between latitudes: K d-hat-A is the pulled-back area of the Gauss map, 2 pi (nu_z(v1) - nu_z(v0)).
    const double v1 = front_v1();
    for (const auto& [v0, vb] : {std::pair{0.0, v1}, std::pair{-v1, v1}, std::pair{0.3, 1.1}}) {
        const MetricField band = m.with_domain(Domain::rectangle(0, 2 * kPi, v0, vb, true, false));
        IntegrateOptions opt;
        opt.depth = 4;
        const Quadrature b = integrate_K_dhatA(band, opt);
        CHECK(std::abs(b.value - 2 * kPi * (front_nu_z(vb) - front_nu_z(v0))) <= 1e-8);
    }

    const Quadrature flipped = integrate_K_dhatA(m.with_co_orientation(-1));
    CHECK(std::abs(flipped.value + h.value) <= 1e-9);
}

TEST_CASE("integrate: parallel torus front, unsigned area and GB1") {
    const MetricField m = gallery_metric("parallel-torus-front");
    const Quadrature a = integrate_K_dA(m);
    const Quadrature b = integrate_K_dA(m.with_co_orientation(-1));
    CHECK(std::abs(a.value - b.value) <= 1e-9);
    CHECK(std::abs(a.value) <= 1e-6);

    // The band between the first two singular latitudes, where lambda keeps one sign.
    const double v1 = front_v1();
    IntegrateOptions opt;
    opt.depth = 4;
    const Quadrature band = integrate_K_dA(m.with_domain(Domain::rectangle(0, 2 * kPi, -v1, v1, true, false)), opt);
    const double gauss_image = 2 * kPi * 2 * front_nu_z(v1);
    CHECK(std::abs(std::abs(band.value) - gauss_image) <= 1e-8);

    // Each singular circle carries half of the adjacent band's curvature.
    const auto curves = find_singular_curves(m, 64);
    REQUIRE(curves.size() == 4);
    double total = 0.0;
    for (const SingularCurve& c : curves) {
        const Quadrature k = integrate_kappa_s(m, c);
        CHECK(std::abs(std::abs(k.value) - gauss_image / 2) <= 1e-8);
        total += k.value;
    }
    CHECK(std::abs(a.value + 2 * total) <= 5e-3);

    const GBReport r = gb_report(m, GBKind::GB1, Topology{0, 0, 0}, curves, 5e-3);
    CHECK(r.pass);
    CHECK(r.residual <= 5e-3);
    const GBReport e = gb_report(m, GBKind::Euler, Topology{0, 0, 0}, curves, 1e-3);
    CHECK(e.pass);
    CHECK(e.S_plus == 0);
    CHECK(e.S_minus == 0);
    CHECK(e.residual <= 1e-3);
}

TEST_CASE("integrate: kappa_s line integrals on the local examples") {
    SUBCASE("cuspidal edge") {
        const MetricField m = gallery_metric("cuspidal-edge");
        for (const SingularCurve& c : find_singular_curves(m, 64)) {
            CHECK(std::abs(integrate_kappa_s(m, c).value) <= 1e-8);
        }
    }
    SUBCASE("normal form alpha = -1 + v, beta = 2") {
        const AnalysisConfig cfg = gallery_config("normal-form");
        const MetricField m = build_metric(cfg);
        const SingularCurve c = trace_singular_curve(m, cfg.seeds.front());
        const double u0 = c.samples.front().geo.point[0], u1 = c.samples.back().geo.point[0];
        CHECK(std::abs(std::abs(u1 - u0) - 1.0) <= 1e-9);
        // kappa_s = 1 and d tau = du along v = 0.
        CHECK(std::abs(integrate_kappa_s(m, c).value - 1.0) <= 1e-8);
    }
    SUBCASE("swallowtail, refined toward the A3 point") {
        const MetricField m = gallery_metric("swallowtail");
        const auto curves = find_singular_curves(m, 64);
        REQUIRE(curves.size() == 1);
        const SingularCurve& c = curves.front();
        REQUIRE(c.a3_indices().size() == 1);
        const double t0 = c.samples.front().geo.point[0], t1 = c.samples.back().geo.point[0];
        // kappa_s d tau = -2 sqrt(1 + t^2 + t^4) / (1 + 4 t^2 + t^4) dt along (t, -6 t^2), traversed in either direction.
        const auto form = [](double t) { return -2 * std::sqrt(1 + t * t + t * t * t * t) / (1 + 4 * t * t + t * t * t * t); };
        const double oracle = simpson(form, std::min(t0, t1), std::max(t0, t1), 20000);
        const Quadrature q = integrate_kappa_s(m, c);
        CHECK(std::abs(std::abs(q.value) - std::abs(oracle)) <= 1e-9);
    }
}

TEST_CASE("integrate: A3 signs from the metric angle on small circles") {
    const MetricField m = gallery_metric("swallowtail");
    // The zero-angle region sits inside the parabola v = -6 u^2.
    const bool inside_negative = m.jets(Vec2(0.0, -0.01), 0).lambda->value() < 0;
    const A3SignReport s = a3_sign(m, Vec2::Zero());
    CHECK(s.sign == (inside_negative ? A3Sign::Positive : A3Sign::Negative));
    const A3SignReport f = a3_sign(m.with_co_orientation(-1), Vec2::Zero());
    CHECK(f.sign == (inside_negative ? A3Sign::Negative : A3Sign::Positive));
    CHECK(std::abs(s.share + f.share - 1.0) <= 1e-12);
}

TEST_CASE("integrate: results do not depend on the worker count") {
    IntegrateOptions one, many;
    one.workers = 1;
    many.workers = 3;
    one.depth = many.depth = 6;
    const MetricField bump = gallery_metric("bump-torus");
    const Quadrature a = integrate_K_dA(bump, one), b = integrate_K_dA(bump, many);
    CHECK(a.value == b.value);
    CHECK(a.error == b.error);
    const MetricField front = gallery_metric("parallel-torus-front");
    const Quadrature c = integrate_K_dhatA(front, one), d = integrate_K_dhatA(front, many);
    CHECK(c.value == d.value);
    CHECK(c.error == d.error);
}

TEST_CASE("integrate: errors and report serialization") {
    const MetricField flat = MetricField::from_expressions(parse("1"), parse("0"), parse("1"), std::nullopt,
                                                           Domain::rectangle(0, 1, 0, 1));
    CHECK_THROWS_AS(integrate_K_dhatA(flat), Error);
    try {
        gb_report(flat, GBKind::WhitneyGB, Topology{}, 1e-3);
        FAIL("expected ConfigError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConfigError);
    }
    CHECK(parse_gb_kind("euler") == GBKind::Euler);
    CHECK_THROWS_AS(parse_gb_kind("gb2"), Error);

    const GBReport r = gb_report(flat, GBKind::WhitneyGB, Topology{1, {}, {}}, 1e-3);
    CHECK_FALSE(r.pass);
    const std::string j = to_json(r);
    CHECK(j.find("\"verdict\": \"FAIL\"") != std::string::npos);
    CHECK(j.find("\"kind\": \"whitney\"") != std::string::npos);
}
