#include "smlab/cli.hpp"

#include <cmath>
#include <sstream>

#include "json_util.hpp"

namespace smlab {

using nlohmann::json;

AnalysisConfig apply_overrides(AnalysisConfig c, const Overrides& o) {
    if (o.tol) c.tol.gb_abs = *o.tol;
    if (o.depth) c.tol.depth = *o.depth;
    if (o.gauss_order) c.tol.gauss_order = *o.gauss_order;
    if (o.jet_order) c.tol.jet_order = *o.jet_order;
    if (o.workers) c.tol.workers = *o.workers;
    return parse_config(to_json(c));
}

KossowskiOptions kossowski_options(const AnalysisConfig& c) {
    KossowskiOptions k;
    k.jet_order = c.tol.jet_order;
    k.richardson_h0 = c.tol.richardson_h0;
    k.richardson_levels = c.tol.richardson_levels;
    return k;
}

IntegrateOptions integrate_options(const AnalysisConfig& c) {
    IntegrateOptions o;
    o.depth = c.tol.depth;
    o.gauss_order = c.tol.gauss_order;
    o.workers = c.tol.workers;
    o.grid = c.tol.grid;
    o.kossowski = kossowski_options(c);
    return o;
}

std::vector<SingularCurve> singular_curves(const MetricField& m, const AnalysisConfig& c) {
    const KossowskiOptions k = kossowski_options(c);
    if (c.seeds.empty()) return find_singular_curves(m, c.tol.grid, k);
    std::vector<SingularCurve> out;
    const double near = 1e-6 * m.domain().scale();
    for (const Vec2& seed : c.seeds) {
        const Vec2 p = project_to_singular_set(m, seed);
        bool seen = false;
        for (const SingularCurve& done : out) {
            for (const CurveSample& s : done.samples) {
                seen = seen || m.domain().displacement(s.geo.point, p).norm() <= near;
            }
        }
        if (!seen) out.push_back(trace_singular_curve(m, seed, k));
    }
    return out;
}

Format parse_format(std::string_view s) {
    if (s == "json") return Format::Json;
    if (s == "csv") return Format::Csv;
    throw Error(ErrorKind::ConfigError, "cli", "unknown format '" + std::string(s) + "' (json or csv)");
}

namespace {

json point(const Vec2& p) { return json::array({p[0], p[1]}); }

json opt_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

json classification(const MetricField& m, const std::vector<SingularCurve>& curves, bool& complete) {
    json list = json::array();
    for (const SingularCurve& c : curves) {
        int a2 = 0, other = 0;
        json a3 = json::array();
        for (const CurveSample& s : c.samples) {
            if (s.cls == PointClass::A2) ++a2;
            if (s.cls == PointClass::Other) ++other;
            if (s.cls == PointClass::A3) {
                a3.push_back({{"t", s.t},
                              {"point", point(m.domain().wrap(s.geo.point))},
                              {"phi", s.geo.phi},
                              {"dphi", s.geo.dphi}});
            }
        }
        complete = complete && other == 0;
        list.push_back({{"closed", c.closed},
                        {"parameter_length", c.parameter_length()},
                        {"metric_length", c.samples.empty() ? 0.0 : c.samples.back().tau},
                        {"samples", c.samples.size()},
                        {"a2", a2},
                        {"a3", a3},
                        {"other", other}});
    }
    return list;
}

json profile(const MetricField& m, const SingularCurve& c) {
    json rows = json::array();
    for (const CurveSample& s : c.samples) {
        rows.push_back({{"t", s.t},
                        {"point", point(m.domain().wrap(s.geo.point))},
                        {"class", std::string(to_string(s.cls))},
                        {"kappa_s", opt_number(s.kappa_s)},
                        {"kappa_pi", opt_number(s.kappa_pi)},
                        {"tau", s.tau},
                        {"unreliable", s.unreliable}});
    }
    return rows;
}

/// Both routes at (u, 0) of a normal-form chart.
json normal_form_routes(const MetricField& m, const AnalysisConfig& c) {
    const KossowskiOptions k = kossowski_options(c);
    json rows = json::array();
    for (double u : c.samples_u) {
        const NormalFormInvariants nf = normal_form_invariants(m, u);
        const CurveGeometry g = curve_geometry(m, project_to_singular_set(m, Vec2(u, 0.0)), Vec2(1, 0), Vec2(0, 1),
                                               k.jet_order);
        const double ks = singular_curvature(m, g, k);
        const ProductCurvature kp = product_curvature(m, g, k);
        rows.push_back({{"u", u},
                        {"kappa_s_normal_form", nf.kappa_s},
                        {"kappa_pi_normal_form", nf.kappa_pi},
                        {"kappa_s_pointwise", ks},
                        {"kappa_pi_pointwise", kp.value},
                        {"kappa_pi_error", kp.error},
                        {"signed", kp.is_signed}});
    }
    return rows;
}

json classify_json(const AnalysisConfig& c, bool& complete) {
    const MetricField m = build_metric(c);
    json j;
    complete = true;
    if (m.has_lambda()) {
        j["curves"] = classification(m, singular_curves(m, c), complete);
        j["cross_caps"] = json::array();
    } else {
        j["curves"] = json::array();
        json caps = json::array();
        for (const CrossCapCandidate& cc : detect_cross_caps(m, c.tol.grid)) {
            caps.push_back({{"point", point(cc.point)}, {"hess", cc.hess}});
        }
        j["cross_caps"] = caps;
    }
    return j;
}

json invariants_json(const AnalysisConfig& c) {
    const MetricField m = build_metric(c);
    json curves = json::array();
    for (SingularCurve& curve : singular_curves(m, c)) {
        annotate_invariants(m, curve, kossowski_options(c));
        curves.push_back({{"closed", curve.closed}, {"samples", profile(m, curve)}});
    }
    json j;
    j["curves"] = curves;
    j["signed"] = m.co_oriented();
    if (!c.samples_u.empty()) j["normal_form"] = normal_form_routes(m, c);
    return j;
}

json crosscap_json(const AnalysisConfig& c) {
    const MetricField m = build_metric(c);
    WhitneyOptions w;
    w.oriented = c.oriented;
    w.richardson_h0 = c.tol.richardson_h0;
    w.richardson_levels = c.tol.richardson_levels;
    json list = json::array();
    for (const CrossCapCandidate& cc : detect_cross_caps(m, c.tol.grid)) {
        list.push_back(json::parse(to_json(cross_cap_invariants(m, cc.point, w))));
    }
    return list;
}

GBReport gb(const AnalysisConfig& c, GBKind kind) {
    const MetricField m = build_metric(c);
    const IntegrateOptions o = integrate_options(c);
    if (kind == GBKind::WhitneyGB) return gb_report(m, kind, c.topology, {}, c.tol.gb_abs, o);
    return gb_report(m, kind, c.topology, singular_curves(m, c), c.tol.gb_abs, o);
}

}  // namespace

CommandOutput cmd_classify(const AnalysisConfig& c) {
    bool complete = true;
    json j = classify_json(c, complete);
    j["name"] = c.name;
    j["verdict"] = complete ? "PASS" : "FAIL";
    return {detail::dump17(j), complete};
}

CommandOutput cmd_curve(const AnalysisConfig& c) {
    const MetricField m = build_metric(c);
    std::string out;
    int index = 0;
    for (SingularCurve& curve : singular_curves(m, c)) {
        annotate_invariants(m, curve, kossowski_options(c));
        std::istringstream rows(curve_csv(curve));
        std::string line;
        bool header = true;
        while (std::getline(rows, line)) {
            if (header) {
                if (index == 0) out += "curve," + line + "\n";
                header = false;
                continue;
            }
            out += std::to_string(index) + "," + line + "\n";
        }
        ++index;
    }
    if (index == 0) out = "curve,t,u,v,tangent_u,tangent_v,eta_u,eta_v,class,kappa_s,kappa_pi,tau\n";
    return {out, true};
}

CommandOutput cmd_invariants(const AnalysisConfig& c, Format f) {
    if (f == Format::Csv) return cmd_curve(c);
    json j = invariants_json(c);
    j["name"] = c.name;
    return {detail::dump17(j), true};
}

CommandOutput cmd_crosscap(const AnalysisConfig& c) {
    json j;
    j["name"] = c.name;
    j["cross_caps"] = crosscap_json(c);
    return {detail::dump17(j), true};
}

CommandOutput cmd_gauss_bonnet(const AnalysisConfig& c, GBKind kind) {
    const GBReport r = gb(c, kind);
    return {to_json(r), r.pass};
}

CommandOutput cmd_gallery(const AnalysisConfig& c) {
    json j;
    j["case"] = c.name;
    j["config"] = json::parse(to_json(c));
    bool pass = true;
    const std::string& n = c.name;
    if (n == "cuspidal-edge" || n == "swallowtail" || n == "cuspidal-cross-cap" || n == "normal-form") {
        bool complete = true;
        j["classification"] = classify_json(c, complete);
        j["invariants"] = invariants_json(c);
        pass = complete;
    } else if (n == "cross-cap-standard" || n == "west-synthetic") {
        j["cross_caps"] = crosscap_json(c);
        pass = !j["cross_caps"].empty();
    } else if (n == "bump-torus") {
        const GBReport r = gb(c, GBKind::WhitneyGB);
        j["gauss_bonnet"] = {{"whitney", json::parse(to_json(r))}};
        pass = r.pass;
    } else if (n == "parallel-torus-front") {
        bool complete = true;
        j["classification"] = classify_json(c, complete);
        const GBReport g1 = gb(c, GBKind::GB1), eu = gb(c, GBKind::Euler);
        j["gauss_bonnet"] = {{"gb1", json::parse(to_json(g1))}, {"euler", json::parse(to_json(eu))}};
        pass = complete && g1.pass && eu.pass;
    } else {
        throw Error(ErrorKind::ConfigError, "cli", "no gallery run for '" + n + "'");
    }
    j["verdict"] = pass ? "PASS" : "FAIL";
    return {detail::dump17(j), pass};
}

std::string render_error(const Error& e) {
    return "error [" + e.module() + "] " + std::string(to_string(e.kind())) + ": " + e.what();
}

int exit_code_for(const Error& e) {
    return e.kind() == ErrorKind::ConfigError || e.kind() == ErrorKind::ParseError ||
                   e.kind() == ErrorKind::RejectedConstruct
               ? 2
               : 1;
}

}  // namespace smlab
