#include "limitcurve/cli/runner.hpp"

#include "limitcurve/cli/config.hpp"
#include "limitcurve/cli/report.hpp"
#include "limitcurve/continuation.hpp"
#include "limitcurve/fem/vtk.hpp"
#include "limitcurve/limit_analysis.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

namespace limitcurve::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitPartial = 4;

void check_output_dir(const OutputOptions& out) {
    std::error_code ec;
    std::filesystem::create_directories(out.dir, ec);
    const auto probe = out.dir / (out.prefix + ".probe");
    {
        std::ofstream f(probe);
        if (!f) {
            throw ConfigError("config: output dir not writable: " + out.dir.string());
        }
    }
    std::filesystem::remove(probe, ec);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path.string());
    }
    out << text;
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

void maybe_write_vtk(const RunConfig& rc, const Vector& u) {
    if (!rc.output.write_vtk || !rc.fem || u.size() != rc.fem->dim()) {
        return;
    }
    const auto path = rc.output.dir / (rc.output.prefix + "_fields.vtk");
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path.string());
    }
    fem::write_vtk(out, rc.fem->mesh(), rc.fem->nodal_displacements(u),
                   rc.fem->deviatoric_strain_field(u));
}

int run_config(const RunConfig& rc) {
    check_output_dir(rc.output);
    const auto t0 = std::chrono::steady_clock::now();

    FosReport report;
    report.config_echo = rc.echo;
    int exit_code = kExitOk;
    const auto report_path = rc.output.dir / (rc.output.prefix + "_report.json");

    switch (rc.analysis) {
        case AnalysisKind::ll_trace: {
            ContinuationTrace trace;
            if (rc.params.variant == "direct") {
                trace = trace_ll_direct(*rc.model, *rc.load, rc.params.t_values, rc.newton);
                report.method = "ll_direct";
            } else {
                trace = trace_ll_indirect(*rc.model, *rc.load, rc.schedule);
                report.method = "ll_indirect";
            }
            write_text(rc.output.dir / (rc.output.prefix + "_trace.csv"), trace_csv(trace));
            report.fos = trace.fos_estimate;
            report.fos_is_inf_lower_bound = trace.ceiling_hit;
            report.bracket = trace.fos_bracket;
            report.converged = trace.converged;
            report.steps = static_cast<int>(trace.records.size());
            maybe_write_vtk(rc, trace.final_u);
            if (!trace.converged) {
                exit_code = kExitPartial;
            }
            break;
        }
        case AnalysisKind::ssr_trace: {
            auto trace = trace_ssr_indirect(*rc.family, *rc.load, rc.schedule);
            if (trace.records.empty()) {
                throw std::runtime_error("strength trace produced no steps: " +
                                         trace.abort_reason);
            }
            report.method = "ssr_indirect";
            write_text(rc.output.dir / (rc.output.prefix + "_trace.csv"), trace_csv(trace));
            report.fos = trace.fos_estimate;
            report.fos_is_inf_lower_bound = trace.ceiling_hit;
            report.converged = trace.converged;
            report.steps = static_cast<int>(trace.records.size());
            maybe_write_vtk(rc, trace.final_u);
            if (!trace.converged) {
                exit_code = kExitPartial;
            }
            break;
        }
        case AnalysisKind::la_bracket: {
            if (!rc.params.omega) {
                throw ConfigError("config: la_bracket needs analysis_params.omega");
            }
            const auto br = bracket_t_star(*rc.model, *rc.load, *rc.params.omega, rc.newton);
            report.method = "la_bracket";
            report.fos = br.upper;
            report.bracket = std::make_pair(br.lower, br.upper);
            report.converged = true;
            report.steps = 1;
            break;
        }
        case AnalysisKind::ell_curve: {
            EllCurveOptions opts;
            opts.sched = rc.schedule;
            opts.threads = rc.threads;
            const auto curve = ell_curve(*rc.family, *rc.load, rc.params.lambda_grid, opts);
            write_text(rc.output.dir / (rc.output.prefix + "_ell.csv"), ell_csv(curve));
            report.method = "ell_curve";
            report.fos = curve.lambda_star.value_or(0.0);
            report.converged = curve.lambda_star.has_value();
            report.steps = static_cast<int>(curve.samples.size());
            if (!report.converged) {
                exit_code = kExitPartial;
            }
            break;
        }
        case AnalysisKind::classify: {
            const auto verdict =
                classify_solvability(*rc.model, *rc.load, rc.params.band, rc.schedule);
            report.method = "classify";
            report.verdict = to_string(verdict.verdict);
            report.fos = verdict.t_inf_estimate;
            report.fos_is_inf_lower_bound = verdict.estimate_is_lower_bound &&
                                            verdict.verdict == Solvability::bounded_nonempty;
            report.bracket = verdict.bracket;
            report.converged = verdict.verdict != Solvability::inconclusive;
            if (!report.converged) {
                exit_code = kExitPartial;
            }
            break;
        }
        case AnalysisKind::solve: {
            const double t = rc.params.t.value_or(1.0);
            auto outcome =
                newton_solve(*rc.model, *rc.load, t, Vector::Zero(rc.model->dim()), rc.newton);
            report.method = "solve";
            report.fos = t;
            report.converged = outcome.converged;
            report.steps = outcome.iterations;
            maybe_write_vtk(rc, outcome.u);
            if (!outcome.converged) {
                exit_code = kExitPartial;
            }
            break;
        }
    }

    if (rc.output.include_timing) {
        report.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    write_report(report, report_path);
    return exit_code;
}

struct RawFlags {
    std::string config_path;
    double omega_start = 0.0;
    int max_steps = 0;
    std::string lambda_grid;
    std::string out_dir;
    std::string prefix;
    int threads = 0;
};

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Safety factors for convex potential-based systems via indirect continuation"};
    app.require_subcommand(1);

    const std::vector<std::tuple<std::string, AnalysisKind, std::string>> subcommands = {
        {"ll-trace", AnalysisKind::ll_trace, "limit-load continuation trace"},
        {"ssr-trace", AnalysisKind::ssr_trace, "strength-reduction continuation trace"},
        {"la-bracket", AnalysisKind::la_bracket, "two-sided limit-factor bracket at one work level"},
        {"ell-curve", AnalysisKind::ell_curve, "limit factor as a function of the reduction factor"},
        {"classify", AnalysisKind::classify, "solvability verdict for F(u) = b"},
        {"solve", AnalysisKind::solve, "single Newton solve at a fixed load factor"}};

    RawFlags flags;
    for (const auto& [name, kind, help] : subcommands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", flags.config_path, "JSON run configuration")->required();
        sub->add_option("--omega-start", flags.omega_start, "override schedule.omega_start");
        sub->add_option("--max-steps", flags.max_steps, "override schedule.max_steps");
        sub->add_option("--lambda-grid", flags.lambda_grid,
                        "comma-separated lambda grid for ell-curve");
        sub->add_option("--out", flags.out_dir, "output directory");
        sub->add_option("--prefix", flags.prefix, "output file prefix");
        sub->add_option("--threads", flags.threads, "worker pool size for ell-curve");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);
        }
        std::cerr << "ERROR 2: " << e.what() << '\n';
        return kExitConfig;
    }

    AnalysisKind requested = AnalysisKind::ll_trace;
    CLI::App* active = nullptr;
    for (const auto& [name, kind, help] : subcommands) {
        auto* sub = app.get_subcommand(name);
        if (sub->parsed()) {
            requested = kind;
            active = sub;
        }
    }

    try {
        ConfigOverrides overrides;
        overrides.analysis = requested;
        if (active->count("--omega-start") > 0) {
            overrides.omega_start = flags.omega_start;
        }
        if (active->count("--max-steps") > 0) {
            overrides.max_steps = flags.max_steps;
        }
        if (active->count("--lambda-grid") > 0) {
            overrides.lambda_grid = parse_grid(flags.lambda_grid);
        }
        if (active->count("--out") > 0) {
            overrides.out_dir = flags.out_dir;
        }
        if (active->count("--prefix") > 0) {
            overrides.prefix = flags.prefix;
        }
        if (active->count("--threads") > 0) {
            overrides.threads = flags.threads;
        } else if (const char* env = std::getenv("LIMITCURVE_THREADS")) {
            overrides.threads = std::atoi(env);
        }

        const RunConfig rc = load_run_config(flags.config_path, overrides);
        return run_config(rc);
    } catch (const ConfigError& e) {
        std::cerr << "ERROR 2: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "ERROR 2: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "ERROR 3: " << e.what() << '\n';
        return kExitSolver;
    }
}

int run(const std::vector<std::string>& args) {
    std::vector<std::string> storage;
    storage.reserve(args.size() + 1);
    storage.push_back("limitcurve");
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(storage.size());
    for (const auto& s : storage) {
        argv.push_back(s.c_str());
    }
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace limitcurve::cli
