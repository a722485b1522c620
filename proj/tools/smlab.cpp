// smlab: singular metric analysis from the command line.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "smlab/acceptance.hpp"
#include "smlab/cli.hpp"

namespace {

using namespace smlab;

/// A path to a JSON config, or the name of a gallery case.
AnalysisConfig resolve(const std::string& arg) {
    if (!std::filesystem::exists(arg)) {
        const auto names = gallery_names();
        if (std::find(names.begin(), names.end(), arg) != names.end()) return gallery_config(arg);
    }
    return load_config(arg);
}

int emit(const CommandOutput& out, const std::string& path) {
    if (path.empty()) {
        std::cout << out.text;
        if (!out.text.empty() && out.text.back() != '\n') std::cout << '\n';
    } else {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error(ErrorKind::ConfigError, "cli", "cannot write " + path);
        f << out.text;
        if (!out.text.empty() && out.text.back() != '\n') f << '\n';
    }
    return out.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Positive semi-definite metrics on surfaces: singular points, invariants, Gauss-Bonnet checks"};
    app.require_subcommand(1);

    std::string target, out_path, format = "json", kind;
    Overrides ov;
    double tol = 0;
    int depth = 0, gauss_order = 0, jet_order = 0, workers = 0;

    const auto common = [&](CLI::App* sub) {
        sub->add_option("--tol", tol, "Absolute tolerance for Gauss-Bonnet residuals");
        sub->add_option("--depth", depth, "Quadrature tiles per side");
        sub->add_option("--gauss-order", gauss_order, "Gauss nodes per direction in a tile");
        sub->add_option("--jet-order", jet_order, "Taylor order for curve geometry");
        sub->add_option("--workers", workers, "Integration threads (0: all cores)");
        sub->add_option("--out", out_path, "Write output here instead of stdout");
    };

    auto* classify = app.add_subcommand("classify", "Singular curves with A2/A3 tags, and cross caps");
    auto* curve = app.add_subcommand("curve", "Trace singular curves as CSV");
    auto* invariants = app.add_subcommand("invariants", "kappa_s and kappa_Pi along the singular curves");
    auto* crosscap = app.add_subcommand("crosscap", "Cross-cap invariants");
    auto* gb = app.add_subcommand("gauss-bonnet", "Check a Gauss-Bonnet identity");
    auto* gallery = app.add_subcommand("gallery", "Run a built-in example end to end");
    auto* selftest = app.add_subcommand("selftest", "Run the acceptance criteria");

    gb->add_option("kind", kind, "gb1, euler or whitney")->required();
    for (CLI::App* sub : {classify, curve, invariants, crosscap, gb}) {
        sub->add_option("config", target, "JSON config file or gallery name")->required();
        common(sub);
    }
    gallery->add_option("name", target, "Gallery case")->required();
    common(gallery);
    invariants->add_option("--format", format, "json or csv");
    selftest->add_option("--out", out_path, "Write the report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    for (CLI::App* sub : app.get_subcommands()) {
        if (sub->count("--tol")) ov.tol = tol;
        if (sub->count("--depth")) ov.depth = depth;
        if (sub->count("--gauss-order")) ov.gauss_order = gauss_order;
        if (sub->count("--jet-order")) ov.jet_order = jet_order;
        if (sub->count("--workers")) ov.workers = workers;
    }

    try {
        if (selftest->parsed()) {
            const auto results = run_acceptance(std::cout);
            const bool ok = std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.pass; });
            if (!out_path.empty()) emit({acceptance_json(results), ok}, out_path);
            return ok ? 0 : 1;
        }
        if (gallery->parsed()) return emit(cmd_gallery(apply_overrides(gallery_config(target), ov)), out_path);

        const AnalysisConfig c = apply_overrides(resolve(target), ov);
        if (classify->parsed()) return emit(cmd_classify(c), out_path);
        if (curve->parsed()) return emit(cmd_curve(c), out_path);
        if (invariants->parsed()) return emit(cmd_invariants(c, parse_format(format)), out_path);
        if (crosscap->parsed()) return emit(cmd_crosscap(c), out_path);
        return emit(cmd_gauss_bonnet(c, parse_gb_kind(kind)), out_path);
    } catch (const Error& e) {
        std::cerr << render_error(e) << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error [cli] " << e.what() << '\n';
        return 1;
    }
}
