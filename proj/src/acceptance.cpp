#include "smlab/acceptance.hpp"

#include <algorithm>
#include <deque>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "json_util.hpp"
#include "smlab/cli.hpp"

namespace smlab {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

// Pinned tolerances.
constexpr double kPhiA3 = 1e-7;
constexpr double kDphiA3 = 0.1;
constexpr double kA3Origin = 1e-7;
constexpr double kKappaPiOrigin = 1e-4;
constexpr double kKappaS = 1e-8;
constexpr double kKappaPi = 1e-4;
constexpr double kRouteAgreement = 1e-4;
constexpr double kChartKappaS = 1e-6;
constexpr double kChartKappaPi = 1e-4;
constexpr double kHessDelta = 1e-9;
constexpr double kAlpha = 1e-8;
constexpr double kRoundTrip = 1e-6;
constexpr double kConsistency = 1e-8;
constexpr double kRay = 1e-3;
constexpr double kWhitneyGB = 1e-3 * 2 * kPi;
constexpr double kWhitneyError = 1e-3;
constexpr double kFrontGB1 = 5e-3;
constexpr double kFrontDhat = 5e-3;
constexpr double kFrontEuler = 1e-3;
constexpr double kAdmissible = 1e-8;

constexpr int kCharts = 20;
constexpr int kParallelWorkers = 4;

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

/// Tracks the worst value of a quantity against its bound.
struct Bound {
    std::string label;
    double limit;
    bool upper = true;  // value must stay <= limit; otherwise >= limit
    double worst = std::numeric_limits<double>::quiet_NaN();

    void see(double x) {
        if (std::isnan(worst) || std::isnan(x) || (upper ? x > worst : x < worst)) worst = x;
    }
    bool ok() const { return !std::isnan(worst) && (upper ? worst <= limit : worst >= limit); }
    std::string text() const { return label + " " + fmt(worst) + (upper ? " <= " : " >= ") + fmt(limit); }
};

struct Collector {
    std::deque<Bound> bounds;
    std::vector<std::string> notes;
    bool failed = false;

    Bound& add(std::string label, double limit, bool upper = true) {
        bounds.push_back({std::move(label), limit, upper});
        return bounds.back();
    }
    void require(bool ok, const std::string& what) {
        if (!ok) {
            failed = true;
            notes.push_back(what);
        }
    }
    CriterionResult result(int id, std::string name) const {
        CriterionResult r{id, std::move(name), !failed, ""};
        for (const Bound& b : bounds) {
            r.pass = r.pass && b.ok();
            r.detail += (r.detail.empty() ? "" : "; ") + b.text();
        }
        for (const std::string& n : notes) r.detail += (r.detail.empty() ? "" : "; ") + n;
        return r;
    }
};

/// Gallery outputs computed once and shared by the criteria that read them.
class GalleryRuns {
public:
    const std::string& get(const std::string& name) {
        auto it = runs_.find(name);
        if (it == runs_.end()) it = runs_.emplace(name, cmd_gallery(gallery_config(name)).text).first;
        return it->second;
    }
    json parsed(const std::string& name) { return json::parse(get(name)); }

private:
    std::map<std::string, std::string> runs_;
};

CriterionResult classification(GalleryRuns& runs) {
    Collector c;
    {
        const json j = runs.parsed("cuspidal-edge")["classification"]["curves"];
        c.require(!j.empty(), "cuspidal-edge: no curve");
        for (const json& curve : j) {
            c.require(curve["a3"].empty() && curve["other"] == 0 && curve["a2"] == curve["samples"],
                      "cuspidal-edge: non-A2 sample");
        }
    }
    {
        const json j = runs.parsed("swallowtail")["classification"]["curves"];
        int a3 = 0;
        for (const json& curve : j) {
            a3 += static_cast<int>(curve["a3"].size());
            c.require(curve["other"] == 0, "swallowtail: unclassified sample");
        }
        c.require(a3 == 1, "swallowtail: " + std::to_string(a3) + " A3 points");
        Bound& phi = c.add("|phi(A3)|", kPhiA3);
        Bound& dphi = c.add("|phi'(A3)|", kDphiA3, false);
        Bound& at = c.add("|A3 - origin|", kA3Origin);
        for (const json& curve : j) {
            for (const json& p : curve["a3"]) {
                phi.see(std::abs(p["phi"].get<double>()));
                dphi.see(std::abs(p["dphi"].get<double>()));
                at.see(std::hypot(p["point"][0].get<double>(), p["point"][1].get<double>()));
            }
        }
    }
    {
        const json j = runs.parsed("cuspidal-cross-cap")["classification"]["curves"];
        c.require(!j.empty(), "cuspidal-cross-cap: no curve");
        for (const json& curve : j) {
            c.require(curve["a3"].empty() && curve["other"] == 0, "cuspidal-cross-cap: non-A2 sample");
        }
        const AnalysisConfig cfg = gallery_config("cuspidal-cross-cap");
        const MetricField m = build_metric(cfg);
        const CurveGeometry g =
            curve_geometry(m, project_to_singular_set(m, Vec2::Zero()), Vec2(1, 0), Vec2(0, 1), cfg.tol.jet_order);
        c.add("|kappa_Pi(origin)|", kKappaPiOrigin).see(std::abs(product_curvature(m, g, kossowski_options(cfg)).value));
    }
    return c.result(1, "classification of the local fronts");
}

CriterionResult singular_curvature_criterion() {
    Collector c;
    {
        const AnalysisConfig cfg = gallery_config("cuspidal-edge");
        const MetricField m = build_metric(cfg);
        const auto curves = singular_curves(m, cfg);
        c.require(!curves.empty(), "cuspidal-edge: no curve");
        Bound& ks = c.add("cuspidal-edge max |kappa_s|", kKappaS);
        for (const SingularCurve& curve : curves) {
            const double L = curve.parameter_length();
            for (int k = 0; k < 50; ++k) {
                const CurveGeometry g = point_at(m, curve, L * (k + 0.5) / 50, cfg.tol.jet_order);
                ks.see(std::abs(singular_curvature(m, g, kossowski_options(cfg))));
            }
        }
    }
    {
        const AnalysisConfig cfg = gallery_config("normal-form");
        const MetricField m = build_metric(cfg);
        const KossowskiOptions k = kossowski_options(cfg);
        Bound& nks = c.add("normal-form route |kappa_s - 1|", kKappaS);
        Bound& nkp = c.add("normal-form route |kappa_Pi + 2.5|", kKappaPi);
        Bound& pks = c.add("pointwise route |kappa_s - 1|", kKappaS);
        Bound& pkp = c.add("pointwise route |kappa_Pi + 2.5|", kKappaPi);
        Bound& agree = c.add("route disagreement", kRouteAgreement);
        c.require(!cfg.samples_u.empty(), "normal-form: no samples");
        for (double u : cfg.samples_u) {
            const NormalFormInvariants nf = normal_form_invariants(m, u);
            const CurveGeometry g =
                curve_geometry(m, project_to_singular_set(m, Vec2(u, 0)), Vec2(1, 0), Vec2(0, 1), k.jet_order);
            const double ks = singular_curvature(m, g, k);
            const double kp = product_curvature(m, g, k).value;
            nks.see(std::abs(nf.kappa_s - 1.0));
            nkp.see(std::abs(nf.kappa_pi + 2.5));
            pks.see(std::abs(ks - 1.0));
            pkp.see(std::abs(kp + 2.5));
            agree.see(std::max(std::abs(ks - nf.kappa_s), std::abs(kp - nf.kappa_pi)));
        }
    }
    return c.result(2, "singular and product curvature");
}

/// u = u0 + a1 x + a2 x^2 + c y^2, v = y (b0 + b1 x + b2 y): keeps the u-axis singular and the chart strongly adapted.
Chart random_adapted_chart(std::mt19937_64& rng, double u0) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const auto away_from_zero = [&] { return (0.6 + 0.4 * std::abs(d(rng))) * (d(rng) < 0 ? -1 : 1); };
    Jet2 u(2, Vec2::Zero()), v(2, Vec2::Zero());
    const double a1 = away_from_zero(), b0 = away_from_zero();
    u.coeff_ref(0, 0) = u0;
    u.coeff_ref(1, 0) = a1;
    u.coeff_ref(2, 0) = 0.3 * d(rng);
    u.coeff_ref(0, 2) = 0.3 * d(rng);
    v.coeff_ref(0, 1) = b0;
    v.coeff_ref(1, 1) = 0.3 * d(rng);
    v.coeff_ref(0, 2) = 0.3 * d(rng);
    return Chart::polynomial(u, v);
}

CriterionResult chart_invariance() {
    Collector c;
    const AnalysisConfig cfg = gallery_config("normal-form");
    const MetricField base = build_metric(cfg);
    const KossowskiOptions k = kossowski_options(cfg);
    const double ks0 = normal_form_invariants(base, 0.5).kappa_s;
    const double kp0 = std::abs(normal_form_invariants(base, 0.5).kappa_pi);
    Bound& ks = c.add("max |delta kappa_s|", kChartKappaS);
    Bound& kp = c.add("max |delta |kappa_Pi||", kChartKappaPi);
    std::mt19937_64 rng(0x3c4a7d);
    std::uniform_real_distribution<double> at(0.3, 0.7);
    for (int trial = 0; trial < kCharts; ++trial) {
        const double u0 = at(rng);
        const MetricField m = pullback(base, random_adapted_chart(rng, u0), Domain::rectangle(-0.1, 0.1, -0.1, 0.1));
        const double ref_s = normal_form_invariants(base, u0).kappa_s;
        const double ref_p = std::abs(normal_form_invariants(base, u0).kappa_pi);
        const CurveGeometry g = curve_geometry(m, Vec2::Zero(), Vec2::Zero(), Vec2::Zero(), k.jet_order);
        ks.see(std::abs(singular_curvature(m, g, k) - ref_s));
        kp.see(std::abs(std::abs(product_curvature(m, g, k).value) - ref_p));
    }
    c.require(std::abs(ks0 - 1.0) <= kKappaS && std::abs(kp0 - 2.5) <= kKappaPi, "normal-form reference off");
    return c.result(3, "chart invariance of kappa_s and kappa_Pi");
}

WhitneyOptions whitney_options(const AnalysisConfig& cfg) {
    WhitneyOptions w;
    w.oriented = cfg.oriented;
    w.richardson_h0 = cfg.tol.richardson_h0;
    w.richardson_levels = cfg.tol.richardson_levels;
    return w;
}

CriterionResult whitney_identities() {
    Collector c;
    const AnalysisConfig cfg = gallery_config("cross-cap-standard");
    const MetricField m = build_metric(cfg);
    const auto caps = detect_cross_caps(m, cfg.tol.grid);
    c.require(caps.size() == 1, std::to_string(caps.size()) + " cross caps detected");
    if (caps.size() == 1) {
        const CrossCapReport r = cross_cap_invariants(m, caps[0].point, whitney_options(cfg));
        c.add("|Hess - 16|", kHessDelta).see(std::abs(r.hess - 16));
        c.add("|Delta - 4|", kHessDelta).see(std::abs(r.delta - 4));
        c.add("|Hess - 4 E Delta|", kHessDelta).see(r.residual_hess);
        c.add("|alpha02 - 2|", kAlpha).see(std::abs(r.alpha02 - 2));
        c.add("|alpha11|", kAlpha).see(std::abs(r.alpha11));
        c.add("|alpha20|", kAlpha).see(std::abs(r.alpha20));
    }
    return c.result(4, "Whitney identities on the standard cross cap");
}

/// Orientation-preserving affine map plus quadratic terms, fixing the origin.
Chart random_chart_at_origin(std::mt19937_64& rng, bool adjusted) {
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
        u.coeff_ref(2 - k, k) = 0.3 * d(rng);
        v.coeff_ref(2 - k, k) = 0.3 * d(rng);
    }
    return Chart::polynomial(u, v);
}

CriterionResult round_trip() {
    Collector c;
    const AnalysisConfig cfg = gallery_config("west-synthetic");
    const MetricField base = build_metric(cfg);
    WhitneyOptions w = whitney_options(cfg);
    w.rays = 0;
    Bound& a20 = c.add("max |alpha20 - 1|", kRoundTrip);
    Bound& a11 = c.add("max |alpha11 - 0.5|", kRoundTrip);
    Bound& a02 = c.add("max |alpha02 - 2|", kRoundTrip);
    Bound& g = c.add("max |G_uu - 2(1 + alpha11^2)|", kConsistency);
    Bound& f = c.add("max |F_uu - E_uv/2 - alpha11 alpha20|", kConsistency);
    std::mt19937_64 rng(0x77e57);
    for (int trial = 0; trial < kCharts; ++trial) {
        const MetricField m =
            pullback(base, random_chart_at_origin(rng, trial % 2 == 0), Domain::rectangle(-0.2, 0.2, -0.2, 0.2));
        const CrossCapReport r = cross_cap_invariants(m, Vec2::Zero(), w);
        a20.see(std::abs(r.alpha20 - 1.0));
        a11.see(std::abs(r.alpha11 - 0.5));
        a02.see(std::abs(r.alpha02 - 2.0));
        g.see(r.residual_a1_2);
        f.see(r.residual_FE2);
    }
    return c.result(5, "invariant recovery through random charts");
}

CriterionResult ray_limits() {
    Collector c;
    const AnalysisConfig cfg = gallery_config("cross-cap-standard");
    const CrossCapReport r = cross_cap_invariants(build_metric(cfg), Vec2::Zero(), whitney_options(cfg));
    c.require(r.rays.size() == 16, std::to_string(r.rays.size()) + " rays");
    Bound& dev = c.add("max |r^2 K - formula|", kRay);
    for (std::size_t k = 0; k < r.rays.size(); ++k) {
        const double th = r.rays[k].theta;
        c.require(std::abs(th - k * kPi / 16) <= 1e-15, "ray angle off the k pi / 16 grid");
        const double cs = std::cos(th), sn = std::sin(th);
        // alpha20 = alpha11 = 0, alpha02 = 2.
        const double q = cs * cs + 4 * sn * sn;
        const double expected = -4 * sn * sn / (q * q);
        dev.see(std::abs(r.rays[k].value - expected));
    }
    if (r.rays.size() == 16) c.add("|r^2 K(pi/2) + 0.25|", kRay).see(std::abs(r.rays[8].value + 0.25));
    return c.result(6, "curvature ray limits at the cross cap");
}

double report_number(const json& j, const char* quad, const char* field = "value") {
    return j[quad].is_null() ? std::numeric_limits<double>::quiet_NaN() : j[quad][field].get<double>();
}

CriterionResult whitney_gb(GalleryRuns& runs) {
    Collector c;
    const json j = runs.parsed("bump-torus")["gauss_bonnet"]["whitney"];
    c.add("|int K dA|", kWhitneyGB).see(std::abs(report_number(j, "K_dA")));
    c.add("quadrature error", kWhitneyError).see(report_number(j, "K_dA", "error"));
    c.require(j["cross_caps"] == 1, "expected one cross cap");
    return c.result(7, "Whitney Gauss-Bonnet on the bump torus");
}

CriterionResult kossowski_gb(GalleryRuns& runs) {
    Collector c;
    const json j = runs.parsed("parallel-torus-front")["gauss_bonnet"];
    c.add("|int K dA + 2 int kappa_s d tau|", kFrontGB1).see(j["gb1"]["residual"].get<double>());
    c.add("|int K d-hat-A|", kFrontDhat).see(std::abs(report_number(j["euler"], "K_dhatA")));
    c.add("Euler residual", kFrontEuler).see(j["euler"]["residual"].get<double>());
    c.require(j["euler"]["rhs"].get<double>() == 0.0, "Euler right-hand side is not 0");
    c.require(j["euler"]["a3"].empty(), "unexpected A3 points");
    return c.result(8, "Kossowski Gauss-Bonnet on the parallel torus front");
}

CriterionResult determinism(GalleryRuns& runs) {
    Collector c;
    int compared = 0;
    for (const std::string& name : gallery_names()) {
        const AnalysisConfig cfg = gallery_config(name);
        const std::string first = runs.get(name);
        const std::string again = cmd_gallery(cfg).text;
        AnalysisConfig one = cfg, many = cfg;
        one.tol.workers = 1;
        many.tol.workers = kParallelWorkers;
        // The config echo carries the worker count; compare everything else.
        const auto strip = [](std::string s) {
            json j = json::parse(s);
            j["config"]["tolerances"].erase("workers");
            return detail::dump17(j);
        };
        const std::string serial = strip(cmd_gallery(one).text), parallel = strip(cmd_gallery(many).text);
        c.require(first == again, name + " differs between invocations");
        c.require(serial == parallel, name + " differs between 1 and " + std::to_string(kParallelWorkers) + " workers");
        c.require(strip(first) == serial, name + " differs from the default worker count");
        ++compared;
    }
    c.notes.push_back(std::to_string(compared) + " gallery cases compared");
    return c.result(9, "determinism across runs and worker counts");
}

CriterionResult admissibility() {
    Collector c;
    Bound& worst = c.add("max |Gamma-hat| on the null space", kAdmissible);
    int cases = 0, samples = 0;
    for (const std::string& name : gallery_names()) {
        const AnalysisConfig cfg = gallery_config(name);
        if (cfg.input != AnalysisConfig::Input::Map) continue;
        ++cases;
        const MetricField m = build_metric(cfg);
        std::vector<Vec2> points;
        if (m.has_lambda()) {
            for (const SingularCurve& curve : singular_curves(m, cfg)) {
                const std::size_t step = std::max<std::size_t>(1, curve.samples.size() / 40);
                for (std::size_t i = 0; i < curve.samples.size(); i += step) points.push_back(curve.samples[i].geo.point);
            }
        } else {
            for (const CrossCapCandidate& cc : detect_cross_caps(m, cfg.tol.grid)) points.push_back(cc.point);
        }
        std::vector<SingularSample> ss;
        for (const Vec2& p : points) {
            const NullSpace ns = null_space(m, p);
            if (ns.rank == 1) ss.push_back({p, ns.null_dirs.front()});
        }
        c.require(!ss.empty(), name + ": no singular samples");
        if (ss.empty()) continue;
        samples += static_cast<int>(ss.size());
        worst.see(admissibility_check(m, ss).worst);
    }
    c.notes.push_back(std::to_string(samples) + " samples over " + std::to_string(cases) + " induced metrics");
    return c.result(10, "admissibility of induced metrics");
}

CriterionResult guarded(int id, const std::string& name, const std::function<CriterionResult()>& run) {
    try {
        return run();
    } catch (const Error& e) {
        return {id, name, false, render_error(e)};
    } catch (const std::exception& e) {
        return {id, name, false, e.what()};
    }
}

}  // namespace

std::string format_line(const CriterionResult& r) {
    return std::string(r.pass ? "PASS" : "FAIL") + " " + std::to_string(r.id) + " " + r.name + ": " + r.detail;
}

std::vector<CriterionResult> run_acceptance(std::ostream* log) {
    GalleryRuns runs;
    const std::vector<std::pair<std::string, std::function<CriterionResult()>>> criteria = {
        {"classification of the local fronts", [&] { return classification(runs); }},
        {"singular and product curvature", [] { return singular_curvature_criterion(); }},
        {"chart invariance of kappa_s and kappa_Pi", [] { return chart_invariance(); }},
        {"Whitney identities on the standard cross cap", [] { return whitney_identities(); }},
        {"invariant recovery through random charts", [] { return round_trip(); }},
        {"curvature ray limits at the cross cap", [] { return ray_limits(); }},
        {"Whitney Gauss-Bonnet on the bump torus", [&] { return whitney_gb(runs); }},
        {"Kossowski Gauss-Bonnet on the parallel torus front", [&] { return kossowski_gb(runs); }},
        {"determinism across runs and worker counts", [&] { return determinism(runs); }},
        {"admissibility of induced metrics", [] { return admissibility(); }},
    };
    std::vector<CriterionResult> out;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        out.push_back(guarded(static_cast<int>(i + 1), criteria[i].first, criteria[i].second));
        if (log) *log << format_line(out.back()) << std::endl;
    }
    return out;
}

std::string acceptance_json(const std::vector<CriterionResult>& results) {
    json list = json::array();
    bool all = true;
    for (const CriterionResult& r : results) {
        list.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
        all = all && r.pass;
    }
    return detail::dump17(json{{"criteria", list}, {"verdict", all ? "PASS" : "FAIL"}});
}

}  // namespace smlab
