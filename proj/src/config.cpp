#include "smlab/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "json_util.hpp"

namespace smlab {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
    throw Error(ErrorKind::ConfigError, "cli", path + ": " + what);
}

const json& field(const json& j, const char* key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) config_error(path + "." + key, "missing");
    return j.at(key);
}

std::string expr_field(const json& j, const char* key, const std::string& path) {
    const json& v = field(j, key, path);
    if (!v.is_string()) config_error(path + "." + key, "expected an expression string");
    const std::string text = v.get<std::string>();
    try {
        (void)parse(text);
    } catch (const Error& e) {
        config_error(path + "." + key, e.what());
    }
    return text;
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) config_error(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) config_error(path, "not finite");
    return x;
}

int integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) config_error(path, "expected an integer");
    return v.get<int>();
}

bool boolean(const json& v, const std::string& path) {
    if (!v.is_boolean()) config_error(path, "expected true or false");
    return v.get<bool>();
}

Vec2 interval(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2) config_error(path, "expected [low, high]");
    const double a = number(v[0], path + "[0]"), b = number(v[1], path + "[1]");
    if (!(a < b)) config_error(path, "empty interval");
    return Vec2(a, b);
}

std::string join_expr(const std::string& scale, const std::string& inner) { return "(" + scale + ")*(" + inner + ")"; }

}  // namespace

AnalysisConfig parse_config(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        config_error("$", std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) config_error("$", "expected an object");

    AnalysisConfig c;
    if (j.contains("name")) {
        if (!j["name"].is_string()) config_error("$.name", "expected a string");
        c.name = j["name"].get<std::string>();
    }
    const json& input = field(j, "input", "$");
    if (input == "map") {
        c.input = AnalysisConfig::Input::Map;
        const json& m = field(j, "map", "$");
        c.map = {expr_field(m, "x", "$.map"), expr_field(m, "y", "$.map"), expr_field(m, "z", "$.map")};
        if (m.contains("nu")) {
            const json& n = m["nu"];
            if (!n.is_array() || n.size() != 3) config_error("$.map.nu", "expected three expressions");
            std::array<std::string, 3> nu;
            for (int k = 0; k < 3; ++k) {
                const std::string path = "$.map.nu[" + std::to_string(k) + "]";
                if (!n[k].is_string()) config_error(path, "expected an expression string");
                nu[k] = n[k].get<std::string>();
                try {
                    (void)parse(nu[k]);
                } catch (const Error& e) {
                    config_error(path, e.what());
                }
            }
            c.nu = nu;
        }
    } else if (input == "metric") {
        c.input = AnalysisConfig::Input::Metric;
        const json& m = field(j, "metric", "$");
        c.E = expr_field(m, "E", "$.metric");
        c.F = expr_field(m, "F", "$.metric");
        c.G = expr_field(m, "G", "$.metric");
        if (m.contains("lambda")) c.lambda = expr_field(m, "lambda", "$.metric");
    } else {
        config_error("$.input", "expected \"map\" or \"metric\"");
    }

    const json& d = field(j, "domain", "$");
    const Vec2 u = interval(field(d, "u", "$.domain"), "$.domain.u");
    const Vec2 v = interval(field(d, "v", "$.domain"), "$.domain.v");
    const bool pu = d.contains("periodic_u") ? boolean(d["periodic_u"], "$.domain.periodic_u") : false;
    const bool pv = d.contains("periodic_v") ? boolean(d["periodic_v"], "$.domain.periodic_v") : false;
    c.domain = Domain::rectangle(u[0], u[1], v[0], v[1], pu, pv);

    if (j.contains("orientation")) {
        const json& o = j["orientation"];
        if (o.contains("oriented")) c.oriented = boolean(o["oriented"], "$.orientation.oriented");
        if (o.contains("co_orientation")) {
            const int s = integer(o["co_orientation"], "$.orientation.co_orientation");
            if (s != 1 && s != -1) config_error("$.orientation.co_orientation", "expected 1 or -1");
            c.co_orientation = s;
        }
    }
    if (j.contains("topology")) {
        const json& t = j["topology"];
        if (t.contains("chi")) c.topology.chi = integer(t["chi"], "$.topology.chi");
        if (t.contains("chi_plus")) c.topology.chi_plus = integer(t["chi_plus"], "$.topology.chi_plus");
        if (t.contains("chi_minus")) c.topology.chi_minus = integer(t["chi_minus"], "$.topology.chi_minus");
    }
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        const auto positive = [&](const char* key, double& out) {
            if (!t.contains(key)) return;
            const std::string path = std::string("$.tolerances.") + key;
            out = number(t[key], path);
            if (!(out > 0)) config_error(path, "must be positive");
        };
        const auto count = [&](const char* key, int& out, int lo, int hi) {
            if (!t.contains(key)) return;
            const std::string path = std::string("$.tolerances.") + key;
            out = integer(t[key], path);
            if (out < lo || out > hi) {
                config_error(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
            }
        };
        positive("gb_abs", c.tol.gb_abs);
        positive("richardson_h0", c.tol.richardson_h0);
        count("depth", c.tol.depth, 1, 16);
        count("gauss_order", c.tol.gauss_order, 2, 32);
        count("jet_order", c.tol.jet_order, 2, 5);
        count("grid", c.tol.grid, 4, 4096);
        count("richardson_levels", c.tol.richardson_levels, 2, 12);
        count("workers", c.tol.workers, 0, 1024);
    }
    if (j.contains("seeds")) {
        const json& s = j["seeds"];
        if (!s.is_array()) config_error("$.seeds", "expected an array of [u, v]");
        for (std::size_t k = 0; k < s.size(); ++k) {
            const std::string path = "$.seeds[" + std::to_string(k) + "]";
            if (!s[k].is_array() || s[k].size() != 2) config_error(path, "expected [u, v]");
            c.seeds.emplace_back(number(s[k][0], path + "[0]"), number(s[k][1], path + "[1]"));
        }
    }
    if (j.contains("samples_u")) {
        const json& s = j["samples_u"];
        if (!s.is_array()) config_error("$.samples_u", "expected an array of numbers");
        for (std::size_t k = 0; k < s.size(); ++k) c.samples_u.push_back(number(s[k], "$.samples_u[" + std::to_string(k) + "]"));
    }
    return c;
}

AnalysisConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigError, "cli", path + ": cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string to_json(const AnalysisConfig& c) {
    json j;
    if (!c.name.empty()) j["name"] = c.name;
    if (c.input == AnalysisConfig::Input::Map) {
        j["input"] = "map";
        j["map"] = {{"x", c.map[0]}, {"y", c.map[1]}, {"z", c.map[2]}};
        if (c.nu) j["map"]["nu"] = {(*c.nu)[0], (*c.nu)[1], (*c.nu)[2]};
    } else {
        j["input"] = "metric";
        j["metric"] = {{"E", c.E}, {"F", c.F}, {"G", c.G}};
        if (c.lambda) j["metric"]["lambda"] = *c.lambda;
    }
    j["domain"] = {{"u", {c.domain.lo[0], c.domain.hi[0]}},
                   {"v", {c.domain.lo[1], c.domain.hi[1]}},
                   {"periodic_u", c.domain.periodic_u},
                   {"periodic_v", c.domain.periodic_v}};
    j["orientation"] = {{"oriented", c.oriented}};
    if (c.co_orientation) j["orientation"]["co_orientation"] = *c.co_orientation;
    json t = json::object();
    if (c.topology.chi) t["chi"] = *c.topology.chi;
    if (c.topology.chi_plus) t["chi_plus"] = *c.topology.chi_plus;
    if (c.topology.chi_minus) t["chi_minus"] = *c.topology.chi_minus;
    j["topology"] = t;
    j["tolerances"] = {{"gb_abs", c.tol.gb_abs},
                       {"depth", c.tol.depth},
                       {"gauss_order", c.tol.gauss_order},
                       {"jet_order", c.tol.jet_order},
                       {"grid", c.tol.grid},
                       {"richardson_h0", c.tol.richardson_h0},
                       {"richardson_levels", c.tol.richardson_levels},
                       {"workers", c.tol.workers}};
    if (!c.seeds.empty()) {
        json s = json::array();
        for (const Vec2& p : c.seeds) s.push_back({p[0], p[1]});
        j["seeds"] = s;
    }
    if (!c.samples_u.empty()) j["samples_u"] = c.samples_u;
    return detail::dump17(j);
}

MetricField build_metric(const AnalysisConfig& c) {
    MetricField m = [&] {
        if (c.input == AnalysisConfig::Input::Map) {
            SurfaceMap f;
            f.f = {parse(c.map[0]), parse(c.map[1]), parse(c.map[2])};
            if (c.nu) f.nu = std::array<Expr, 3>{parse((*c.nu)[0]), parse((*c.nu)[1]), parse((*c.nu)[2])};
            f.domain = c.domain;
            return induced_metric(f);
        }
        std::optional<Expr> lambda;
        if (c.lambda) lambda = parse(*c.lambda);
        return MetricField::from_expressions(parse(c.E), parse(c.F), parse(c.G), lambda, c.domain);
    }();
    return m.with_co_orientation(c.co_orientation.value_or(1), c.co_orientation.has_value());
}

std::vector<std::string> gallery_names() {
    return {"cuspidal-edge",  "swallowtail",    "cuspidal-cross-cap", "cross-cap-standard",
            "normal-form",    "west-synthetic", "bump-torus",         "parallel-torus-front"};
}

AnalysisConfig normal_form_config(const std::string& alpha, const std::string& beta) {
    AnalysisConfig c;
    c.name = "normal-form";
    c.input = AnalysisConfig::Input::Metric;
    c.E = "1 + v^2*(" + alpha + ")";
    c.F = "0";
    c.G = "v^2*(1 + v*(" + beta + "))";
    c.lambda = "v*sqrt((1 + v*(" + beta + "))*(1 + v^2*(" + alpha + ")))";
    c.domain = Domain::rectangle(0.0, 1.0, -0.25, 0.25);
    c.co_orientation = 1;
    c.seeds = {Vec2(0.5, 0.0)};
    c.samples_u = {0.0, 0.25, 0.5, 0.75, 1.0};
    return c;
}

AnalysisConfig west_config(double a20, double a11, double a02) {
    const auto n = [](double x) { return "(" + detail::format17(x) + ")"; };
    const std::string A20 = n(a20), A11 = n(a11), A02 = n(a02);
    AnalysisConfig c;
    c.name = "west-synthetic";
    c.input = AnalysisConfig::Input::Metric;
    c.E = "1 + " + A20 + "^2*u^2 + 2*" + A11 + "*" + A20 + "*u*v + (1 + " + A11 + "^2)*v^2";
    c.F = A11 + "*" + A20 + "*u^2 + (1 + " + A11 + "^2 + " + A02 + "*" + A20 + ")*u*v + " + A02 + "*" + A11 + "*v^2";
    c.G = "(1 + " + A11 + "^2)*u^2 + 2*" + A02 + "*" + A11 + "*u*v + " + A02 + "^2*v^2";
    c.domain = Domain::rectangle(-0.5, 0.5, -0.5, 0.5);
    return c;
}

AnalysisConfig gallery_config(std::string_view name) {
    AnalysisConfig c;
    c.name = std::string(name);
    if (name == "cuspidal-edge") {
        c.input = AnalysisConfig::Input::Map;
        c.map = {"u^2", "u^3", "v"};
        c.nu = std::array<std::string, 3>{"3*u/sqrt(9*u^2 + 4)", "-2/sqrt(9*u^2 + 4)", "0"};
        c.co_orientation = 1;
        return c;
    }
    if (name == "swallowtail") {
        c.input = AnalysisConfig::Input::Map;
        c.map = {"3*u^4 + u^2*v", "4*u^3 + 2*u*v", "v"};
        c.nu = std::array<std::string, 3>{"1/sqrt(1 + u^2 + u^4)", "-u/sqrt(1 + u^2 + u^4)",
                                          "u^2/sqrt(1 + u^2 + u^4)"};
        c.co_orientation = 1;
        return c;
    }
    if (name == "cuspidal-cross-cap") {
        c.input = AnalysisConfig::Input::Map;
        c.map = {"u", "v^2", "u*v^3"};
        c.nu = std::array<std::string, 3>{"-2*v^3/sqrt(4 + 9*u^2*v^2 + 4*v^6)", "-3*u*v/sqrt(4 + 9*u^2*v^2 + 4*v^6)",
                                          "2/sqrt(4 + 9*u^2*v^2 + 4*v^6)"};
        c.co_orientation = 1;
        return c;
    }
    if (name == "cross-cap-standard") {
        c.input = AnalysisConfig::Input::Map;
        c.map = {"u", "u*v", "v^2"};
        return c;
    }
    if (name == "normal-form") return normal_form_config("-1 + v", "2");
    if (name == "west-synthetic") return west_config(1.0, 0.5, 2.0);
    if (name == "bump-torus") {
        const std::string rho = "bump(2*sqrt(u^2 + v^2))";
        c.input = AnalysisConfig::Input::Metric;
        c.E = rho + "*(1 + v^2) + (1 - " + rho + ")";
        c.F = rho + "*u*v";
        c.G = rho + "*(u^2 + 4*v^2) + (1 - " + rho + ")";
        c.domain = Domain::rectangle(-1, 1, -1, 1, true, true);
        c.topology.chi = 0;
        return c;
    }
    if (name == "parallel-torus-front") {
        // Offset by d = 3/2 of the torus swept by the ellipse (2 cos v, sin v) at distance 6 from the axis.
        const std::string S = "sqrt(cos(v)^2 + 4*sin(v)^2)";
        const std::string x = "(2*cos(v) - 1.5*cos(v)/" + S + ")";
        const std::string z = "(sin(v) - 3*sin(v)/" + S + ")";
        c.input = AnalysisConfig::Input::Map;
        c.map = {"(6 + " + x + ")*cos(u)", "(6 + " + x + ")*sin(u)", z};
        c.nu = std::array<std::string, 3>{"cos(v)*cos(u)/" + S, "cos(v)*sin(u)/" + S, "2*sin(v)/" + S};
        c.domain = Domain::rectangle(0, 2 * std::numbers::pi, 0, 2 * std::numbers::pi, true, true);
        c.co_orientation = 1;
        c.topology = {0, 0, 0};
        return c;
    }
    throw Error(ErrorKind::ConfigError, "cli", "unknown gallery case '" + std::string(name) + "'");
}

}  // namespace smlab
