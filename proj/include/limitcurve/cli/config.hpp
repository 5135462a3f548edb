#pragma once

#include "limitcurve/analytic.hpp"
#include "limitcurve/continuation.hpp"
#include "limitcurve/core.hpp"
#include "limitcurve/fem/model.hpp"

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace limitcurve::cli {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class AnalysisKind { ll_trace, ssr_trace, la_bracket, ell_curve, classify, solve };

AnalysisKind analysis_from_string(const std::string& name);
const char* to_string(AnalysisKind kind);

struct AnalysisParams {
    std::optional<double> t;                  // solve
    std::optional<double> omega;              // la_bracket
    std::vector<double> lambda_grid;          // ell_curve
    std::vector<double> t_values;             // ll_trace, direct variant
    std::string variant = "indirect";         // ll_trace: indirect | direct
    double band = 1e-3;                       // classify
};

struct OutputOptions {
    std::filesystem::path dir = ".";
    std::string prefix = "run";
    bool write_vtk = false;
    bool include_timing = false;  // real wall time breaks byte-reproducibility
};

/// A parsed run configuration plus the constructed model. `family` is null
/// for purely load-parametrized models; `fem` is set for finite-element
/// models so field output can reach the mesh.
struct RunConfig {
    std::string model_name;
    std::shared_ptr<const PotentialModel> model;
    std::shared_ptr<const ParamFamily> family;
    std::shared_ptr<const fem::FemModel> fem;
    std::optional<LoadVector> load;

    AnalysisKind analysis = AnalysisKind::ll_trace;
    AnalysisParams params;
    ScheduleOptions schedule;
    NewtonOptions newton;
    OutputOptions output;
    int threads = 0;

    nlohmann::ordered_json echo;  // resolved configuration for the report
};

/// Loads and validates a configuration file, constructing the model it
/// names. Overrides (from command-line flags) are applied before model
/// construction where they matter.
struct ConfigOverrides {
    std::optional<AnalysisKind> analysis;  // the CLI subcommand wins over the config entry
    std::optional<double> omega_start;
    std::optional<int> max_steps;
    std::vector<double> lambda_grid;
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::string> prefix;
    std::optional<int> threads;
};

RunConfig load_run_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

/// Parses "a,b,c" into numbers; throws ConfigError on malformed input.
std::vector<double> parse_grid(const std::string& csv);

}  // namespace limitcurve::cli
