#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <json.hpp>

#include "smlab/config.hpp"
#include "smlab/whitney.hpp"

using namespace smlab;

namespace {

MetricField gallery_metric(const char* name) { return build_metric(gallery_config(name)); }

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "(%.17g)", x);
    return buf;
}

/// Cross cap in West's normal form up to cubic terms; its canonical chart is West type.
MetricField west_normal_form_map(double a20, double a11, double a02, double b3, double a30, double a21, double a12,
                                 double a03) {
    SurfaceMap f;
    f.f = {parse("u"), parse("u*v + " + num(b3 / 6) + "*v^3"),
           parse(num(a20 / 2) + "*u^2 + " + num(a11) + "*u*v + " + num(a02 / 2) + "*v^2 + " + num(a30 / 6) +
                 "*u^3 + " + num(a21 / 2) + "*u^2*v + " + num(a12 / 2) + "*u*v^2 + " + num(a03 / 6) + "*v^3")};
    f.domain = Domain::rectangle(-1, 1, -1, 1);
    return induced_metric(f);
}

Chart random_chart_at_origin(std::mt19937_64& rng, bool adjusted, double quad = 0.3) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Eigen::Matrix2d A;
    do {
        A << d(rng), adjusted ? 0.0 : d(rng), d(rng), d(rng);
    } while (A.determinant() < 0.3);
    Jet2 u(2, Vec2::Zero()), v(2, Vec2::Zero());
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

const Domain kLocal = Domain::rectangle(-0.2, 0.2, -0.2, 0.2);

}  // namespace

TEST_CASE("whitney: standard cross cap") {
    const MetricField m = gallery_metric("cross-cap-standard");
    const auto caps = detect_cross_caps(m, 64);
    REQUIRE(caps.size() == 1);
    CHECK(caps[0].point.norm() < 1e-12);
    CHECK(caps[0].hess == doctest::Approx(16.0).epsilon(1e-12));

    const Alpha02 a = cross_cap_alpha02(m, Vec2::Zero());
    CHECK(a.alpha == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(a.delta == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(a.alpha02 == doctest::Approx(2.0).epsilon(1e-12));

    const CrossCapReport r = cross_cap_invariants(m, Vec2::Zero());
    CHECK(std::abs(r.hess - 16) <= 1e-9);
    CHECK(std::abs(r.delta - 4) <= 1e-9);
    CHECK(r.residual_hess <= 1e-9);
    CHECK(std::abs(r.alpha02 - 2) <= 1e-8);
    CHECK(std::abs(r.alpha11) <= 1e-8);
    CHECK(std::abs(r.alpha20) <= 1e-8);
    CHECK(r.residual_a1_2 <= 1e-9);
    CHECK(r.residual_FE2 <= 1e-9);
    REQUIRE(r.residual_west);
    CHECK(*r.residual_west <= 1e-9);
    CHECK(r.alpha11_signed);

    // Already adapted, first- and second-level adjusted and of West type.
    REQUIRE(r.stack.size() == 5);
    for (const ChartStage& s : r.stack) {
        CAPTURE(s.name);
        CHECK((s.jacobian - Eigen::Matrix2d::Identity()).norm() < 1e-12);
    }
    CHECK(r.stack[1].constants == std::vector<double>{1.0, 0.0, 0.0, 0.0});
    CHECK(r.stack[2].constants[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(r.stack[3].constants[0]) < 1e-14);
    for (double c : r.stack[4].constants) CHECK(std::abs(c) < 1e-12);

    REQUIRE(r.rays.size() == 16);
    CHECK(r.rays[8].theta == doctest::Approx(std::numbers::pi / 2));
    CHECK(std::abs(r.rays[8].value + 0.25) <= 1e-3);
    CHECK(std::abs(r.rays[0].value) <= 1e-3);
    for (const RayLimit& ray : r.rays) CHECK(std::abs(ray.value - ray.formula) <= 1e-3);
}

TEST_CASE("whitney: flat metric has no cross caps") {
    const MetricField flat = MetricField::from_expressions(parse("1"), parse("0"), parse("1"), std::nullopt,
                                                           Domain::rectangle(-1, 1, -1, 1));
    CHECK(detect_cross_caps(flat, 16).empty());
    try {
        cross_cap_alpha02(flat, Vec2::Zero());
        FAIL("expected NotCrossCap");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotCrossCap);
    }
    CHECK_THROWS_AS(cross_cap_invariants(flat, Vec2::Zero()), Error);
}

TEST_CASE("whitney: the bump torus has exactly one cross cap") {
    const MetricField m = gallery_metric("bump-torus");
    const auto caps = detect_cross_caps(m, 64);
    REQUIRE(caps.size() == 1);
    CHECK(caps[0].point.norm() < 1e-12);
    const CrossCapReport r = cross_cap_invariants(m, caps[0].point);
    CHECK(std::abs(r.alpha02 - 2) <= 1e-8);
    for (const RayLimit& ray : r.rays) CHECK(std::abs(ray.value - ray.formula) <= 1e-3);
}

TEST_CASE("whitney: synthetic West metric") {
    const MetricField m = build_metric(west_config(1.0, 0.5, 2.0));
    const auto caps = detect_cross_caps(m, 64);
    REQUIRE(caps.size() == 1);
    const CrossCapReport r = cross_cap_invariants(m, caps[0].point);
    CHECK(std::abs(r.alpha20 - 1.0) <= 1e-8);
    CHECK(std::abs(r.alpha11 - 0.5) <= 1e-8);
    CHECK(std::abs(r.alpha02 - 2.0) <= 1e-9);
    for (const ChartStage& s : r.stack) CHECK((s.jacobian - Eigen::Matrix2d::Identity()).norm() < 1e-12);
    CHECK(r.rays[0].formula == doctest::Approx(1.28).epsilon(1e-14));
    CHECK(std::abs(r.rays[0].value - 1.28) <= 1e-3);

    const MetricField m3 = build_metric(west_config(0.0, 0.0, 3.0));
    CHECK(std::abs(cross_cap_alpha02(m3, Vec2::Zero()).alpha02 - 3.0) <= 1e-9);
}

TEST_CASE("whitney: invariants of West's normal form are its coefficients") {
    std::mt19937_64 rng(0xc40c);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const double a20 = d(rng), a11 = d(rng), a02 = 1.25 + 0.75 * d(rng);
        const MetricField m = west_normal_form_map(a20, a11, a02, d(rng), d(rng), d(rng), d(rng), d(rng));
        const CrossCapReport r = cross_cap_invariants(m, Vec2::Zero());
        CHECK(std::abs(r.alpha02 - a02) <= 1e-8);
        CHECK(std::abs(r.alpha11 - a11) <= 1e-8);
        CHECK(std::abs(r.alpha20 - a20) <= 1e-8);
        CHECK(r.residual_hess <= 1e-8 * r.hess);
        CHECK(r.residual_a1_2 <= 1e-8);
        CHECK(r.residual_FE2 <= 1e-8);
        CHECK(*r.residual_west <= 1e-9);
        for (const RayLimit& ray : r.rays) CHECK(std::abs(ray.value - ray.formula) <= 1e-3);
    }
}

TEST_CASE("whitney: invariants survive random charts") {
    const MetricField base = build_metric(west_config(1.0, 0.5, 2.0));
    std::mt19937_64 rng(0x1a7e);
    for (int trial = 0; trial < 20; ++trial) {
        const MetricField m = pullback(base, random_chart_at_origin(rng, trial % 2 == 0), kLocal);
        const Alpha02 a = cross_cap_alpha02(m, Vec2::Zero());
        CHECK(std::abs(a.alpha02 - 2.0) <= 1e-6);
        CHECK(std::abs(a.hess - 4 * a.E * a.delta) <= 1e-8 * a.hess);
        WhitneyOptions opt;
        opt.rays = 4;
        const CrossCapReport r = cross_cap_invariants(m, Vec2::Zero(), opt);
        CHECK(std::abs(r.alpha20 - 1.0) <= 1e-6);
        CHECK(std::abs(r.alpha11 - 0.5) <= 1e-6);
        CHECK(r.residual_a1_2 <= 1e-8);
        CHECK(r.residual_FE2 <= 1e-8);
    }
}

TEST_CASE("whitney: alpha11 changes sign with the orientation") {
    const MetricField base = build_metric(west_config(1.0, 0.5, 2.0));
    Eigen::Matrix2d R;
    R << -1, 0, 0, 1;
    const MetricField m = pullback(base, Chart::affine(Vec2::Zero(), R), kLocal);
    const CrossCapReport r = cross_cap_invariants(m, Vec2::Zero());
    CHECK(r.alpha11_signed);
    CHECK(std::abs(r.alpha11 + 0.5) <= 1e-8);
    CHECK(std::abs(r.alpha20 - 1.0) <= 1e-8);
    WhitneyOptions opt;
    opt.oriented = false;
    const CrossCapReport u = cross_cap_invariants(m, Vec2::Zero(), opt);
    CHECK_FALSE(u.alpha11_signed);
    CHECK(std::abs(u.alpha11 - 0.5) <= 1e-8);
}

TEST_CASE("whitney: chart stages") {
    // A scaled metric: alpha02 scales with the length and c1 = 1/2 restores E = 1.
    const MetricField std_m = gallery_metric("cross-cap-standard");
    const MetricField scaled = MetricField::from_expressions(parse("4*(1 + v^2)"), parse("4*u*v"),
                                                             parse("4*(u^2 + 4*v^2)"), std::nullopt,
                                                             Domain::rectangle(-1, 1, -1, 1));
    CHECK(cross_cap_alpha02(scaled, Vec2::Zero()).alpha02 == doctest::Approx(4.0).epsilon(1e-12));
    const AdaptedStage st = adapted_stage(pullback(scaled, adjusted_chart(scaled, Vec2::Zero())));
    CHECK(st.c1 == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(st.residual <= 1e-10);

    // Adapted chart of a randomly perturbed metric meets all five conditions.
    std::mt19937_64 rng(0xada9);
    for (int trial = 0; trial < 10; ++trial) {
        const MetricField m = pullback(std_m, random_chart_at_origin(rng, false), kLocal);
        const MetricJets j = pullback(m, build_adapted_chart(m, Vec2::Zero())).jets(Vec2::Zero(), 1);
        CHECK(std::abs(j.E.value() - 1) <= 1e-10);
        for (const Jet2* f : {&j.E, &j.F, &j.G}) {
            CHECK(std::abs(f->derivative(1, 0)) <= 1e-10);
            CHECK(std::abs(f->derivative(0, 1)) <= 1e-10);
        }
    }

    // A sheared West metric is undone by the opposite shear.
    const MetricField west = build_metric(west_config(1.0, 0.5, 2.0));
    Eigen::Matrix2d S;
    S << 1, 0, 0.3, 1;
    const MetricField sheared = pullback(west, Chart::affine(Vec2::Zero(), S), kLocal);
    const LevelAdjustment lv = level_adjust(sheared, 2.0);
    CHECK(lv.scale == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lv.shear == doctest::Approx(-0.3).epsilon(1e-10));
    const CrossCapReport r = cross_cap_invariants(sheared, Vec2::Zero());
    CHECK(std::abs(r.alpha20 - 1.0) <= 1e-8);
    CHECK(std::abs(r.alpha11 - 0.5) <= 1e-8);
    CHECK(std::abs(r.alpha02 - 2.0) <= 1e-8);
}

TEST_CASE("whitney: West chart recovers a known cubic perturbation") {
    const MetricField west = build_metric(west_config(1.0, 0.5, 2.0));
    const double c[4] = {0.1, -0.2, 0.05, 0.3};
    Jet2 u(3, Vec2::Zero()), v(3, Vec2::Zero());
    u.coeff_ref(1, 0) = 1;
    u.coeff_ref(3, 0) = c[0];
    u.coeff_ref(2, 1) = c[1];
    u.coeff_ref(1, 2) = c[2];
    u.coeff_ref(0, 3) = c[3];
    v.coeff_ref(0, 1) = 1;
    const MetricField m = pullback(west, Chart::polynomial(u, v), kLocal);
    const WestStage w = west_chart(m, 1.0, 0.5, 2.0);
    // To third order the inverse of u = xi + cubic(xi, eta), v = eta negates the cubic.
    CHECK(std::abs(w.c30 + c[0]) <= 1e-8);
    CHECK(std::abs(w.c21 + c[1]) <= 1e-8);
    CHECK(std::abs(w.c12 + c[2]) <= 1e-8);
    CHECK(std::abs(w.c03 + c[3]) <= 1e-8);
    CHECK(w.residual <= 1e-9);
}

TEST_CASE("whitney: ray limit formula") {
    CHECK(ray_limit_formula(0, 0, 2, std::numbers::pi / 2) == doctest::Approx(-0.25));
    CHECK(ray_limit_formula(0, 0, 2, 0) == 0.0);
    CHECK(ray_limit_formula(1, 0.5, 2, 0) == doctest::Approx(1.28));
    // Period pi.
    for (double t : {0.1, 0.7, 2.0}) {
        CHECK(ray_limit_formula(1, 0.5, 2, t) == doctest::Approx(ray_limit_formula(1, 0.5, 2, t + std::numbers::pi)));
    }
}

TEST_CASE("whitney: report JSON") {
    const CrossCapReport r = cross_cap_invariants(gallery_metric("cross-cap-standard"), Vec2::Zero());
    const nlohmann::json j = nlohmann::json::parse(to_json(r));
    CHECK(j["alpha02"].get<double>() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(j["chart_stack"].size() == 5);
    CHECK(j["chart_stack"][0]["name"] == "adjusted");
    CHECK(j["rays"].size() == 16);
    CHECK(j.contains("west_convention"));
    for (const char* key : {"location", "hess", "delta", "alpha11", "alpha20", "residual_a1_2", "residual_FE2"}) {
        CHECK(j.contains(key));
    }
}
