#pragma once

// Analysis configuration (one JSON document) and the built-in gallery.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smlab/metric.hpp"

namespace smlab {

struct Topology {
    std::optional<int> chi;
    std::optional<int> chi_plus;
    std::optional<int> chi_minus;
};

struct Tolerances {
    double gb_abs = 1e-3;
    int depth = 8;
    int gauss_order = 8;
    int jet_order = 4;
    int grid = 64;
    double richardson_h0 = 1e-2;
    int richardson_levels = 6;
    int workers = 0;  // 0: hardware concurrency
};

struct AnalysisConfig {
    enum class Input { Map, Metric };

    std::string name;
    Input input = Input::Metric;
    std::array<std::string, 3> map;
    std::optional<std::array<std::string, 3>> nu;
    std::string E, F, G;
    std::optional<std::string> lambda;
    Domain domain = Domain::rectangle(-1, 1, -1, 1);
    bool oriented = true;
    std::optional<int> co_orientation;
    Topology topology;
    Tolerances tol;
    std::vector<Vec2> seeds;        // curve seeds; empty: grid search
    std::vector<double> samples_u;  // normal-form sample abscissae
};

/// Parses and validates; throws Error(ConfigError) naming the offending field path.
AnalysisConfig parse_config(std::string_view json_text);
AnalysisConfig load_config(const std::string& path);
std::string to_json(const AnalysisConfig& c);

MetricField build_metric(const AnalysisConfig& c);

std::vector<std::string> gallery_names();
/// Throws Error(ConfigError) for unknown names.
AnalysisConfig gallery_config(std::string_view name);

/// Normal-form metric (1 + v^2 alpha) du^2 + v^2 (1 + v beta) dv^2 with lambda.
AnalysisConfig normal_form_config(const std::string& alpha, const std::string& beta);
/// Metric whose quadratic expansion is exactly the West form with the given constants.
AnalysisConfig west_config(double a20, double a11, double a02);

}  // namespace smlab
