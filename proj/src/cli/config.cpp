#include "limitcurve/cli/config.hpp"

#include "limitcurve/format.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace limitcurve::cli {

namespace {

using nlohmann::ordered_json;

double get_num(const ordered_json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    if (!j.at(key).is_number()) {
        throw ConfigError("config: '" + key + "' must be a number");
    }
    return j.at(key).get<double>();
}

Vector get_vector(const ordered_json& j, const std::string& key) {
    const auto& v = j.at(key);
    if (v.is_number()) {
        Vector out(1);
        out(0) = v.get<double>();
        return out;
    }
    if (!v.is_array() || v.empty()) {
        throw ConfigError("config: '" + key + "' must be a number or a nonempty array");
    }
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) {
            throw ConfigError("config: '" + key + "' must contain numbers");
        }
        out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
    }
    return out;
}

AnalyticFamily build_analytic(const ordered_json& model) {
    if (!model.contains("name") || !model.at("name").is_string()) {
        throw ConfigError("config: analytic model needs a 'name'");
    }
    const std::string name = model.at("name").get<std::string>();
    const ordered_json params = model.value("params", ordered_json::object());

    if (name == "quadratic" || name == "quadratic1d" || name == "capped_quadratic" ||
        name == "capped_quadratic1d" || name == "exp" || name == "exp1d") {
        AnalyticFamily fam = make_scalar_example(name);
        if (params.contains("b")) {
            fam.load = LoadVector(get_vector(params, "b"), "configured");
        }
        return fam;
    }
    if (name == "psd_quadratic") {
        if (!params.contains("A") || !params.at("A").is_array()) {
            throw ConfigError("config: psd_quadratic needs params.A as an array of rows");
        }
        const auto& rows = params.at("A");
        const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
        Eigen::MatrixXd a(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& row = rows[static_cast<std::size_t>(i)];
            if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
                throw ConfigError("config: psd_quadratic A must be square");
            }
            for (Eigen::Index j = 0; j < n; ++j) {
                a(i, j) = row[static_cast<std::size_t>(j)].get<double>();
            }
        }
        return make_psd_quadratic(a, get_vector(params, "b"));
    }
    if (name == "ball") {
        return make_ball_family(get_num(params, "lambda0", 0.5), get_vector(params, "b"));
    }
    if (name == "wedge") {
        const Vector b = get_vector(params, "b");
        if (b.size() != 2) {
            throw ConfigError("config: wedge model needs a 2-component b");
        }
        return make_wedge_family(get_num(params, "lambda0", 0.5), Eigen::Vector2d(b(0), b(1)));
    }
    throw ConfigError("config: unknown analytic model '" + name + "'");
}

fem::Material parse_material(const ordered_json& j) {
    fem::Material mat = fem::default_slope_material();
    if (j.is_null()) {
        return mat;
    }
    mat.E = get_num(j, "E", mat.E);
    mat.nu = get_num(j, "nu", mat.nu);
    mat.c = get_num(j, "c", mat.c);
    if (j.contains("phi_deg")) {
        mat.phi = get_num(j, "phi_deg", 0.0) * std::numbers::pi / 180.0;
    } else {
        mat.phi = get_num(j, "phi", mat.phi);
    }
    mat.gamma = get_num(j, "gamma", mat.gamma);
    return mat;
}

}  // namespace

AnalysisKind analysis_from_string(const std::string& name) {
    if (name == "ll_trace") return AnalysisKind::ll_trace;
    if (name == "ssr_trace") return AnalysisKind::ssr_trace;
    if (name == "la_bracket") return AnalysisKind::la_bracket;
    if (name == "ell_curve") return AnalysisKind::ell_curve;
    if (name == "classify") return AnalysisKind::classify;
    if (name == "solve") return AnalysisKind::solve;
    throw ConfigError("config: unknown analysis '" + name + "'");
}

const char* to_string(AnalysisKind kind) {
    switch (kind) {
        case AnalysisKind::ll_trace: return "ll_trace";
        case AnalysisKind::ssr_trace: return "ssr_trace";
        case AnalysisKind::la_bracket: return "la_bracket";
        case AnalysisKind::ell_curve: return "ell_curve";
        case AnalysisKind::classify: return "classify";
        case AnalysisKind::solve: return "solve";
    }
    return "unknown";
}

std::vector<double> parse_grid(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
            out.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError("config: malformed grid entry '" + item + "'");
        }
    }
    if (out.empty()) {
        throw ConfigError("config: empty grid");
    }
    return out;
}

RunConfig load_run_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config not found: " + path.string());
    }
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config: JSON parse failure in " + path.string() + ": " + e.what());
    }

    RunConfig rc;

    if (!j.contains("model") || !j.at("model").is_object()) {
        throw ConfigError("config: missing 'model' object");
    }
    const auto& model = j.at("model");
    const std::string kind = model.value("kind", std::string{});

    try {
        if (kind == "analytic") {
            AnalyticFamily fam = build_analytic(model);
            rc.model_name = fam.name;
            rc.model = fam.model;
            rc.family = fam.family;
            rc.load = fam.load;
        } else if (kind == "fem_fixture" || kind == "fem_mesh") {
            const fem::Material mat = parse_material(model.value("material", ordered_json()));
            const double lambda0 = get_num(model, "lambda0", 0.5);
            std::shared_ptr<fem::FemModel> fem_model;
            if (kind == "fem_fixture") {
                fem::SlopeGeometry geo;
                const ordered_json g = model.value("geometry", ordered_json::object());
                geo.height = get_num(g, "height", geo.height);
                geo.inclination_deg = get_num(g, "inclination_deg", geo.inclination_deg);
                geo.pad = get_num(g, "pad", geo.pad);
                geo.h_mesh = get_num(g, "h_mesh", geo.h_mesh);
                fem_model = fem::build_slope_fixture(geo, mat, lambda0);
                rc.model_name = "fem_fixture";
            } else {
                if (!model.contains("mesh_path")) {
                    throw ConfigError("config: fem_mesh model needs 'mesh_path'");
                }
                auto mesh = fem::load_mesh(model.at("mesh_path").get<std::string>());
                fem_model = fem::FemModel::create(std::move(mesh), mat, lambda0);
                rc.model_name = "fem_mesh";
            }
            rc.fem = fem_model;
            rc.family = fem_model;
            rc.model = fem_model->model_at(1.0);
            rc.load = fem_model->assemble_gravity();
        } else {
            throw ConfigError("config: model.kind must be analytic, fem_fixture or fem_mesh");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: model construction failed: ") + e.what());
    }

    if (overrides.analysis) {
        rc.analysis = *overrides.analysis;
    } else {
        if (!j.contains("analysis") || !j.at("analysis").is_string()) {
            throw ConfigError("config: missing 'analysis' string");
        }
        rc.analysis = analysis_from_string(j.at("analysis").get<std::string>());
    }

    const ordered_json ap = j.value("analysis_params", ordered_json::object());
    if (ap.contains("t")) {
        rc.params.t = get_num(ap, "t", 1.0);
    }
    if (ap.contains("omega")) {
        rc.params.omega = get_num(ap, "omega", 1.0);
    }
    if (ap.contains("lambda_grid")) {
        for (const auto& v : ap.at("lambda_grid")) {
            rc.params.lambda_grid.push_back(v.get<double>());
        }
    }
    if (ap.contains("t_values")) {
        for (const auto& v : ap.at("t_values")) {
            rc.params.t_values.push_back(v.get<double>());
        }
    }
    rc.params.variant = ap.value("variant", std::string("indirect"));
    rc.params.band = get_num(ap, "band", 1e-3);

    const ordered_json sched = j.value("schedule", ordered_json::object());
    rc.schedule.omega_start = get_num(sched, "omega_start", rc.schedule.omega_start);
    rc.schedule.omega_step0 = get_num(sched, "omega_step0", rc.schedule.omega_step0);
    rc.schedule.growth_factor = get_num(sched, "growth_factor", rc.schedule.growth_factor);
    rc.schedule.stall_threshold = get_num(sched, "stall_threshold", rc.schedule.stall_threshold);
    rc.schedule.max_steps = static_cast<int>(get_num(sched, "max_steps", rc.schedule.max_steps));
    rc.schedule.fos_window = static_cast<int>(get_num(sched, "fos_window", rc.schedule.fos_window));
    rc.schedule.fos_rel_tol = get_num(sched, "fos_rel_tol", rc.schedule.fos_rel_tol);
    rc.schedule.factor_ceiling = get_num(sched, "factor_ceiling", rc.schedule.factor_ceiling);

    const ordered_json newton = j.value("newton", ordered_json::object());
    rc.newton.tol_rel = get_num(newton, "tol_rel", rc.newton.tol_rel);
    rc.newton.tol_abs = get_num(newton, "tol_abs", rc.newton.tol_abs);
    rc.newton.max_iter = static_cast<int>(get_num(newton, "max_iter", rc.newton.max_iter));
    rc.schedule.newton = rc.newton;

    const ordered_json output = j.value("output", ordered_json::object());
    rc.output.dir = output.value("dir", std::string("."));
    rc.output.prefix = output.value("prefix", std::string("run"));
    rc.output.write_vtk = output.value("write_vtk", false);
    rc.output.include_timing = output.value("include_timing", false);
    rc.threads = static_cast<int>(get_num(j, "threads", 0));

    // command-line overrides
    if (overrides.omega_start) {
        rc.schedule.omega_start = *overrides.omega_start;
    }
    if (overrides.max_steps) {
        rc.schedule.max_steps = *overrides.max_steps;
    }
    if (!overrides.lambda_grid.empty()) {
        rc.params.lambda_grid = overrides.lambda_grid;
    }
    if (overrides.out_dir) {
        rc.output.dir = *overrides.out_dir;
    }
    if (overrides.prefix) {
        rc.output.prefix = *overrides.prefix;
    }
    if (overrides.threads) {
        rc.threads = *overrides.threads;
    }

    if (rc.schedule.max_steps < 1 || rc.schedule.fos_window < 1) {
        throw ConfigError("config: schedule.max_steps and schedule.fos_window must be at least 1");
    }
    if (!(rc.schedule.growth_factor >= 1.0)) {
        throw ConfigError("config: schedule.growth_factor must be at least 1");
    }
    if (!(rc.schedule.fos_rel_tol > 0.0) || !(rc.schedule.stall_threshold > 0.0)) {
        throw ConfigError("config: schedule tolerances must be positive");
    }
    if (!(rc.newton.tol_rel > 0.0) || !(rc.newton.tol_abs > 0.0) || rc.newton.max_iter < 1) {
        throw ConfigError("config: newton tolerances must be positive and max_iter at least 1");
    }

    if (rc.analysis == AnalysisKind::ssr_trace || rc.analysis == AnalysisKind::ell_curve) {
        if (!rc.family) {
            throw ConfigError("config: analysis '" + std::string(to_string(rc.analysis)) +
                              "' needs a parametrized model (ball, wedge or fem)");
        }
    }
    if (rc.analysis == AnalysisKind::ell_curve && rc.params.lambda_grid.size() < 2) {
        throw ConfigError("config: ell_curve needs analysis_params.lambda_grid with >= 2 points");
    }
    if (rc.analysis == AnalysisKind::ll_trace && rc.params.variant == "direct" &&
        rc.params.t_values.empty()) {
        throw ConfigError("config: direct ll_trace needs analysis_params.t_values");
    }

    // resolved echo for the report
    ordered_json echo;
    echo["model"] = j.at("model");
    echo["analysis"] = to_string(rc.analysis);
    ordered_json ap_echo;
    if (rc.params.t) ap_echo["t"] = *rc.params.t;
    if (rc.params.omega) ap_echo["omega"] = *rc.params.omega;
    if (!rc.params.lambda_grid.empty()) ap_echo["lambda_grid"] = rc.params.lambda_grid;
    if (!rc.params.t_values.empty()) ap_echo["t_values"] = rc.params.t_values;
    ap_echo["variant"] = rc.params.variant;
    ap_echo["band"] = rc.params.band;
    echo["analysis_params"] = ap_echo;
    ordered_json sched_echo;
    if (std::isfinite(rc.schedule.omega_start)) sched_echo["omega_start"] = rc.schedule.omega_start;
    if (std::isfinite(rc.schedule.omega_step0)) sched_echo["omega_step0"] = rc.schedule.omega_step0;
    sched_echo["growth_factor"] = rc.schedule.growth_factor;
    sched_echo["stall_threshold"] = rc.schedule.stall_threshold;
    sched_echo["max_steps"] = rc.schedule.max_steps;
    sched_echo["fos_window"] = rc.schedule.fos_window;
    sched_echo["fos_rel_tol"] = rc.schedule.fos_rel_tol;
    sched_echo["factor_ceiling"] = rc.schedule.factor_ceiling;
    echo["schedule"] = sched_echo;
    echo["newton"] = {{"tol_rel", rc.newton.tol_rel},
                      {"tol_abs", rc.newton.tol_abs},
                      {"max_iter", rc.newton.max_iter}};
    echo["output"] = {{"dir", rc.output.dir.string()},
                      {"prefix", rc.output.prefix},
                      {"write_vtk", rc.output.write_vtk},
                      {"include_timing", rc.output.include_timing}};
    echo["threads"] = rc.threads;
    rc.echo = std::move(echo);

    return rc;
}

}  // namespace limitcurve::cli
