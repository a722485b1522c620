#pragma once

// Command implementations behind the smlab executable.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smlab/config.hpp"
#include "smlab/error.hpp"
#include "smlab/integrate.hpp"
#include "smlab/kossowski.hpp"
#include "smlab/whitney.hpp"

namespace smlab {

struct Overrides {
    std::optional<double> tol;
    std::optional<int> depth;
    std::optional<int> gauss_order;
    std::optional<int> jet_order;
    std::optional<int> workers;
};

/// Applies command-line values on top of the config's tolerances, revalidating them.
AnalysisConfig apply_overrides(AnalysisConfig c, const Overrides& o);

KossowskiOptions kossowski_options(const AnalysisConfig& c);
IntegrateOptions integrate_options(const AnalysisConfig& c);

/// Curves through the configured seeds, or from the grid search when there are none.
std::vector<SingularCurve> singular_curves(const MetricField& m, const AnalysisConfig& c);

struct CommandOutput {
    std::string text;
    bool pass = true;
};

enum class Format { Json, Csv };
Format parse_format(std::string_view s);

/// Curves with A2/A3 tags, and cross caps for metrics without lambda. Fails when a sample is neither A2 nor A3.
CommandOutput cmd_classify(const AnalysisConfig& c);
/// Traced curves as CSV with a leading curve index column.
CommandOutput cmd_curve(const AnalysisConfig& c);
/// kappa_s / kappa_Pi along every curve; for normal-form configs also both routes at samples_u.
CommandOutput cmd_invariants(const AnalysisConfig& c, Format f = Format::Json);
CommandOutput cmd_crosscap(const AnalysisConfig& c);
CommandOutput cmd_gauss_bonnet(const AnalysisConfig& c, GBKind kind);
/// The natural end-to-end run for a gallery case.
CommandOutput cmd_gallery(const AnalysisConfig& c);

/// "error [module] Kind: message".
std::string render_error(const Error& e);

/// Exit code for a failure: 2 for configuration and parse errors, 1 otherwise.
int exit_code_for(const Error& e);

}  // namespace smlab
