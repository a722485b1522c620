#include <doctest.h>

#include <cmath>
#include <string>

#include <json.hpp>

#include "smlab/cli.hpp"

using namespace smlab;
using nlohmann::json;

TEST_CASE("cli: cross-cap-standard gallery reports alpha02 = 2") {
    const CommandOutput out = cmd_gallery(gallery_config("cross-cap-standard"));
    CHECK(out.pass);
    const json j = json::parse(out.text);
    REQUIRE(j["cross_caps"].size() == 1);
    CHECK(std::abs(j["cross_caps"][0]["alpha02"].get<double>() - 2.0) <= 1e-9);
    CHECK(j["verdict"] == "PASS");
}

TEST_CASE("cli: swallowtail classification has one A3 point at the origin") {
    const json j = json::parse(cmd_classify(gallery_config("swallowtail")).text);
    REQUIRE(j["curves"].size() == 1);
    const json& a3 = j["curves"][0]["a3"];
    REQUIRE(a3.size() == 1);
    CHECK(std::hypot(a3[0]["point"][0].get<double>(), a3[0]["point"][1].get<double>()) <= 1e-7);
    CHECK(j["curves"][0]["other"] == 0);
}

TEST_CASE("cli: user config with a metric and a seed") {
    const AnalysisConfig c = parse_config(R"cfg({
        "name": "shifted-normal-form",
        "input": "metric",
        "metric": {"E": "1 - v^2", "F": "0", "G": "v^2 * (1 + 2*v)", "lambda": "v * sqrt(1 - v^2) * sqrt(1 + 2*v)"},
        "domain": {"u": [0, 1], "v": [-0.25, 0.25]},
        "seeds": [[0.5, 0.01]]
    })cfg");
    const CommandOutput csv = cmd_curve(c);
    CHECK(csv.text.rfind("curve,t,u,v,", 0) == 0);
    CHECK(csv.text.find("\n0,") != std::string::npos);
    CHECK(csv.text.find("\n1,") == std::string::npos);

    const json inv = json::parse(cmd_invariants(c).text);
    REQUIRE(inv["curves"].size() == 1);
    for (const json& s : inv["curves"][0]["samples"]) {
        if (s["kappa_s"].is_null()) continue;
        CHECK(std::abs(s["kappa_s"].get<double>() - 1.0) <= 1e-8);
    }
}

TEST_CASE("cli: overrides are validated") {
    Overrides o;
    o.depth = 12;
    o.tol = 5e-3;
    const AnalysisConfig c = apply_overrides(gallery_config("bump-torus"), o);
    CHECK(c.tol.depth == 12);
    CHECK(c.tol.gb_abs == 5e-3);
    CHECK(integrate_options(c).depth == 12);

    o.depth = 0;
    try {
        apply_overrides(gallery_config("bump-torus"), o);
        FAIL("expected ConfigError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConfigError);
        CHECK(exit_code_for(e) == 2);
        CHECK(render_error(e).rfind("error [cli] ConfigError: ", 0) == 0);
    }
    CHECK(exit_code_for(Error(ErrorKind::NotA2, "kossowski", "x")) == 1);
    CHECK(parse_format("csv") == Format::Csv);
    CHECK_THROWS_AS(parse_format("xml"), Error);
    AnalysisConfig unnamed = normal_form_config("0", "0");
    unnamed.name = "mine";
    CHECK_THROWS_AS(cmd_gallery(unnamed), Error);
}

TEST_CASE("cli: Gauss-Bonnet without topology is a configuration error") {
    AnalysisConfig c = gallery_config("cross-cap-standard");
    try {
        cmd_gauss_bonnet(c, GBKind::WhitneyGB);
        FAIL("expected ConfigError");
    } catch (const Error& e) {
        CHECK(exit_code_for(e) == 2);
    }
}
