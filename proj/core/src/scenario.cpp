#include "ottolab/scenario.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ottolab/bridge.hpp"
#include "ottolab/local.hpp"
#include "ottolab/toy.hpp"

namespace ottolab {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// gate thresholds for the consistency diagnostics
constexpr double kCostIdentityRelTol = 1e-6;
constexpr double kEnergyDeviationTol = 1e-7;
constexpr double kMassDriftTol = 1e-10;
constexpr double kVelocityRouteTol = 1e-9;
constexpr double kToyIdentityTol = 1e-8;
constexpr double kToyEnergyTol = 1e-8;
constexpr double kMinimalityTol = 1e-8;

void append_series(RunReport& rep, const std::string& name, std::vector<std::string> columns) {
    RunReport::Series s;
    s.columns = std::move(columns);
    rep.series.emplace(name, std::move(s));
}

FModel make_toy_model(const ExperimentConfig& cfg) {
    const int d = static_cast<int>(cfg.toy_x.size());
    if (cfg.toy_model == "zero") return FModel::zero(d);
    if (cfg.toy_model == "quadratic") return FModel::quadratic(cfg.toy_param, d);
    if (cfg.toy_model == "log_barrier") {
        if (d != 1) throw ConfigError("log_barrier model is one-dimensional");
        return FModel::log_barrier(cfg.toy_param);
    }
    throw ConfigError("unknown toy model '" + cfg.toy_model + "'");
}

ToyMode make_toy_mode(const ExperimentConfig& cfg) {
    if (cfg.mode_family == "rho_infinity") return ToyMode::rho_inf(cfg.rho);
    return ToyMode::zero_n(cfg.dim_n);
}

BridgeMode make_bridge_mode(const ExperimentConfig& cfg) {
    if (cfg.mode_family == "rho_infinity") return BridgeMode::rho_inf(cfg.rho);
    return BridgeMode::zero_n(cfg.dim_n);
}

Eigen::VectorXd to_vec(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
}

void run_toy_suite(const ExperimentConfig& cfg, RunReport& rep) {
    const auto t0 = Clock::now();
    FModel F = make_toy_model(cfg);
    ToyPath path = solve_newton_bvp(F, to_vec(cfg.toy_x), to_vec(cfg.toy_y), cfg.T, cfg.toy_m);
    ToyDiagnostics diag = lambda_curve(F, path);
    rep.timings_ms["toy_solve"] = ms_since(t0);

    rep.diagnostics["toy_newton_iterations"] = path.newton_iterations;
    rep.diagnostics["toy_residual"] = path.residual;
    rep.diagnostics["toy_cost"] = diag.cost;
    rep.diagnostics["toy_energy"] = diag.energy.mean;
    rep.diagnostics["toy_energy_max_deviation"] = diag.energy.max_deviation;
    const Eigen::VectorXd x0 = path.states.row(0).transpose();
    const Eigen::VectorXd xT = path.states.row(path.segments()).transpose();
    const double identity_gap =
        std::abs(diag.lambda[path.segments()] - (diag.cost + 2.0 * (F.value(xT) - F.value(x0))));
    rep.diagnostics["toy_lambda_identity_gap"] = identity_gap;

    // minimality against seeded smooth perturbations (cost may only go up)
    SplitMix64 rng(cfg.seed);
    double worst_gap = std::numeric_limits<double>::infinity();
    const int m = path.segments();
    for (int trial = 0; trial < 20; ++trial) {
        ToyPath pert = path;
        for (int comp = 0; comp < F.dim; ++comp) {
            const int k = 1 + static_cast<int>(rng.below(5));
            const double amp = rng.uniform(-0.02, 0.02);
            for (int j = 0; j <= m; ++j)
                pert.states(j, comp) += amp * std::sin(k * std::numbers::pi * path.times[j] / path.T);
        }
        bool ok = true;
        for (int j = 0; j <= m && ok; ++j) ok = F.admissible(pert.states.row(j).transpose());
        if (!ok) continue;
        recompute_velocities(pert);
        worst_gap = std::min(worst_gap, path_cost(F, pert) - diag.cost);
    }
    rep.diagnostics["toy_minimality_worst_gap"] = worst_gap;

    auto ineqs = check_toy_inequalities(F, path, make_toy_mode(cfg));
    for (auto& r : ineqs) {
        r.scenario = cfg.id;
        rep.inequalities.push_back(r);
    }

    append_series(rep, "lambda", {"t", "lambda"});
    append_series(rep, "phi", {"t", "phi"});
    append_series(rep, "lambda_prime", {"t", "lambda_prime"});
    append_series(rep, "energy", {"t", "energy"});
    auto& s_lambda = rep.series["lambda"];
    auto& s_phi = rep.series["phi"];
    auto& s_lp = rep.series["lambda_prime"];
    auto& s_e = rep.series["energy"];
    std::vector<std::vector<double>> path_rows;
    for (int j = 0; j <= m; ++j) {
        const double t = path.times[j];
        const Eigen::VectorXd g = F.grad(path.states.row(j).transpose());
        const double e = path.velocities.row(j).squaredNorm() - g.squaredNorm();
        s_lambda.rows.push_back({t, diag.lambda[j]});
        s_phi.rows.push_back({t, diag.phi[j]});
        s_lp.rows.push_back({t, diag.lambda_prime[j]});
        s_e.rows.push_back({t, e});
        std::vector<double> row{t};
        for (int c = 0; c < F.dim; ++c) row.push_back(path.states(j, c));
        for (int c = 0; c < F.dim; ++c) row.push_back(path.velocities(j, c));
        row.push_back(e);
        row.push_back(diag.lambda[j]);
        row.push_back(diag.phi[j]);
        row.push_back(diag.lambda_prime[j]);
        path_rows.push_back(std::move(row));
    }
    RunReport::Series path_series;
    path_series.columns = {"t"};
    for (int c = 0; c < F.dim; ++c) path_series.columns.push_back("x" + std::to_string(c));
    for (int c = 0; c < F.dim; ++c) path_series.columns.push_back("xdot" + std::to_string(c));
    path_series.columns.insert(path_series.columns.end(), {"energy", "lambda", "phi", "lambda_prime"});
    path_series.rows = std::move(path_rows);
    rep.series.emplace("toy_path", std::move(path_series));

    if (identity_gap > kToyIdentityTol || diag.energy.max_deviation > kToyEnergyTol ||
        worst_gap < -kMinimalityTol)
        rep.exit_status = 1;
}

void run_bridge_suite(const ExperimentConfig& cfg, const ManifoldPtr& M, RunReport& rep) {
    Density mu = build_preset_density(M, cfg.functions.at("mu"));
    Density nu = build_preset_density(M, cfg.functions.at("nu"));

    auto t0 = Clock::now();
    std::vector<double> history;
    SchrodingerPotentials pots = ipfp_solve(M, cfg.T, mu, nu, cfg.ipfp_tol, cfg.ipfp_max_iter, &history);
    rep.timings_ms["ipfp"] = ms_since(t0);
    rep.diagnostics["ipfp_iterations"] = pots.iterations;
    rep.diagnostics["ipfp_residual_mu"] = pots.residual_mu;
    rep.diagnostics["ipfp_residual_nu"] = pots.residual_nu;
    bool monotone = true;
    for (size_t i = 1; i < history.size(); ++i)
        if (history[i] > history[i - 1] * (1.0 + 1e-9)) monotone = false;
    rep.diagnostics["ipfp_residual_monotone"] = monotone ? 1.0 : 0.0;

    BridgePath path = BridgePath::from_potentials(pots);
    rep.diagnostics["path_normalization"] = path.normalization;

    t0 = Clock::now();
    CostPair cost = entropic_cost(path, cfg.time_nodes, cfg.refine_tol);
    rep.timings_ms["entropic_cost"] = ms_since(t0);
    rep.diagnostics["cost_quadrature"] = cost.quadrature;
    rep.diagnostics["cost_closed_form"] = cost.closed_form;
    const double denom = std::max(std::abs(cost.closed_form), 1e-30);
    const double rel_gap = std::abs(cost.quadrature - cost.closed_form) / denom;
    rep.diagnostics["cost_identity_rel_gap"] = rel_gap;
    rep.diagnostics["cost_time_nodes"] = cost.time_nodes;
    rep.diagnostics["entropy_mu"] = cost.entropy_mu;
    rep.diagnostics["entropy_nu"] = cost.entropy_nu;

    EnergyReport energy = conserved_energy(path);
    rep.diagnostics["energy_value"] = energy.value;
    rep.diagnostics["energy_max_deviation"] = energy.max_deviation;
    rep.diagnostics["energy_mid_gamma_gap"] = std::abs(energy_mid_gamma(path) - energy.value);

    append_series(rep, "bridge_time_samples", {"t", "mass", "velocity_cost", "energy_sample"});
    auto& samples = rep.series["bridge_time_samples"];
    double mass_drift_max = 0.0, route_gap_max = 0.0;
    for (int k = 0; k <= 10; ++k) {
        const double t = cfg.T * k / 10.0;
        double drift = 0.0;
        interpolate(path, t, &drift);
        mass_drift_max = std::max(mass_drift_max, std::abs(drift));
        const double v = velocity_cost_sample(path, t);
        route_gap_max = std::max(route_gap_max, std::abs(v - velocity_cost_direct(path, t)));
        samples.rows.push_back({t, 1.0 + drift, v, energy.sample_values[k]});
    }
    rep.diagnostics["mass_drift_max"] = mass_drift_max;
    rep.diagnostics["velocity_route_gap"] = route_gap_max;

    auto ineqs = check_bridge_inequalities(path, make_bridge_mode(cfg));
    for (auto& r : ineqs) {
        r.scenario = cfg.id;
        rep.inequalities.push_back(r);
    }

    if (rel_gap > kCostIdentityRelTol || energy.max_deviation > kEnergyDeviationTol ||
        mass_drift_max > kMassDriftTol || route_gap_max > kVelocityRouteTol || !monotone)
        rep.exit_status = 1;
}

void push_pointwise(RunReport& rep, const ExperimentConfig& cfg, const ManifoldPtr& M,
                    const PointwiseReport& pr) {
    InequalityReport worst = pr.worst;
    worst.scenario = cfg.id;
    rep.inequalities.push_back(worst);
    RunReport::Series s;
    s.columns = {"point", "x", "lhs", "rhs", "slack"};
    for (size_t i = 0; i < pr.points.size(); ++i) {
        const int p = pr.points[i];
        s.rows.push_back({static_cast<double>(p), M->coordinate(0)[p], pr.lhs[i], pr.rhs[i],
                          pr.rhs[i] - pr.lhs[i]});
    }
    rep.series.emplace("slack_profile:" + pr.worst.name, std::move(s));
}

void run_local_suite(const ExperimentConfig& cfg, const ManifoldPtr& M, RunReport& rep) {
    ScalarField g = build_preset_field(M, cfg.functions.at("g"));
    const double rho = cfg.mode_family == "rho_infinity" ? cfg.rho : 0.0;
    push_pointwise(rep, cfg, M, eval_grad_commutation(M, rho, g, cfg.T));
    push_pointwise(rep, cfg, M, eval_local_lsi(M, rho, g, cfg.T));
    push_pointwise(rep, cfg, M, eval_reverse_lsi(M, rho, g, cfg.T));
    if (cfg.mode_family == "zero_n") {
        auto dim = eval_dim_lsi(M, cfg.dim_n, g, cfg.T);
        push_pointwise(rep, cfg, M, dim.exponential);
        push_pointwise(rep, cfg, M, dim.simplified);
        auto rev = eval_dim_reverse_liyau(M, cfg.dim_n, g, cfg.T);
        push_pointwise(rep, cfg, M, rev.exponential);
        push_pointwise(rep, cfg, M, rev.li_yau);
        push_pointwise(rep, cfg, M, rev.li_yau_literal);
    }
}

void run_delta_suite(const ExperimentConfig& cfg, const ManifoldPtr& M, RunReport& rep) {
    ScalarField g = build_preset_field(M, cfg.functions.at("g"));
    const int center = M->point_count() / 4;
    for (auto which : {LocalInequality::gradient_commutation, LocalInequality::local_log_sobolev}) {
        DeltaLimitRecord rec = delta_limit_bridge_vs_local(M, which, g, center, cfg.T, cfg.widths);
        RunReport::Series s;
        s.columns = {"width", "bridge_lhs", "bridge_rhs", "local_lhs", "local_rhs", "gap_lhs", "gap_rhs"};
        bool monotone = true;
        for (size_t i = 0; i < rec.widths.size(); ++i) {
            s.rows.push_back({rec.widths[i], rec.bridge_lhs[i], rec.bridge_rhs[i], rec.local_lhs,
                              rec.local_rhs, rec.gap_lhs[i], rec.gap_rhs[i]});
            if (i > 0 && (rec.gap_lhs[i] >= rec.gap_lhs[i - 1] || rec.gap_rhs[i] >= rec.gap_rhs[i - 1]))
                monotone = false;
        }
        rep.series.emplace("delta_gap:" + rec.inequality, std::move(s));
        rep.diagnostics["delta_monotone:" + rec.inequality] = monotone ? 1.0 : 0.0;
        rep.diagnostics["delta_final_gap_lhs:" + rec.inequality] = rec.gap_lhs.back();
        rep.diagnostics["delta_final_gap_rhs:" + rec.inequality] = rec.gap_rhs.back();
        if (!monotone) rep.exit_status = 1;
    }
}

}  // namespace

RunReport run_scenario(const ExperimentConfig& cfg) {
    RunReport rep;
    rep.config = cfg;
    const auto t0 = Clock::now();
    if (cfg.suite == "toy") {
        run_toy_suite(cfg, rep);
    } else {
        ManifoldPtr M = GridManifold::build(cfg.kind, cfg.n, cfg.geometry);
        rep.timings_ms["build_grid"] = ms_since(t0);
        RunReport::Series spec;
        spec.columns = {"index", "eigenvalue"};
        Eigen::VectorXd ev = M->eigenvalues_full();
        for (int i = 0; i < ev.size(); ++i) spec.rows.push_back({static_cast<double>(i), ev[i]});
        rep.series.emplace("spectrum", std::move(spec));

        if (cfg.suite == "bridge") run_bridge_suite(cfg, M, rep);
        else if (cfg.suite == "local") run_local_suite(cfg, M, rep);
        else if (cfg.suite == "delta") run_delta_suite(cfg, M, rep);
        else {  // all
            run_bridge_suite(cfg, M, rep);
            run_local_suite(cfg, M, rep);
            run_delta_suite(cfg, M, rep);
        }
    }
    for (const auto& r : rep.inequalities)
        if (!r.informational && !r.pass) rep.exit_status = 1;
    rep.timings_ms["total"] = ms_since(t0);
    return rep;
}

namespace {

std::string csv_of_series(const RunReport::Series& s) {
    std::string out;
    for (size_t c = 0; c < s.columns.size(); ++c) {
        if (c) out += ",";
        out += s.columns[c];
    }
    out += "\n";
    for (const auto& row : s.rows) {
        for (size_t c = 0; c < row.size(); ++c) {
            if (c) out += ",";
            out += format_float(row[c]);
        }
        out += "\n";
    }
    return out;
}

std::string sanitize(const std::string& name) {
    std::string s = name;
    for (char& c : s)
        if (c == ':' || c == '/' || c == ' ') c = '_';
    return s;
}

}  // namespace

std::string write_report(const RunReport& report, const std::string& dir) {
    ensure_directory(dir);
    JsonWriter j;
    j.begin_object();
    j.field("schema_version", 1);
    j.field("scenario", report.config.id);
    j.field("suite", report.config.suite);
    j.field("exit_status", report.exit_status);
    j.field("config", report.config.canonical_text());
    j.key("diagnostics");
    j.begin_object();
    for (const auto& [k, v] : report.diagnostics) j.field(k, v);
    j.end_object();
    j.begin_array("inequalities");
    for (const auto& r : report.inequalities) {
        j.begin_object();
        j.field("name", r.name);
        j.field("where", r.where);
        j.field("lhs", r.lhs);
        j.field("rhs", r.rhs);
        j.field("slack", r.slack);
        j.field("tolerance", r.tolerance);
        j.field("pass", r.pass);
        j.field("informational", r.informational);
        j.field("T", r.T);
        j.field("rho", r.rho);
        j.field("n", r.dim_n);
        if (!r.note.empty()) j.field("note", r.note);
        j.end_object();
    }
    j.end_array();
    j.key("series");
    j.begin_object();
    for (const auto& [name, s] : report.series) {
        j.key(name);
        j.begin_object();
        j.begin_array("columns");
        for (const auto& c : s.columns) j.value(c);
        j.end_array();
        j.begin_array("rows");
        for (const auto& row : s.rows) {
            j.begin_array();
            for (double v : row) j.value(v);
            j.end_array();
        }
        j.end_array();
        j.end_object();
    }
    j.end_object();
    j.end_object();

    const std::string report_path = dir + "/report.json";
    write_text_file(report_path, j.str() + "\n");

    for (const auto& [name, s] : report.series) {
        if (name == "toy_path" || name == "bridge_time_samples" || name == "spectrum" ||
            name.rfind("delta_gap:", 0) == 0)
            write_text_file(dir + "/" + sanitize(name) + ".csv", csv_of_series(s));
    }

    // volatile, excluded from the determinism contract
    std::string timings = "# wall-clock timings (ms); nondeterministic by nature\n";
    for (const auto& [k, v] : report.timings_ms) timings += k + " " + format_float(v) + "\n";
    write_text_file(dir + "/timings.txt", timings);
    return report_path;
}

namespace {

struct BuiltinScenario {
    const char* id;
    const char* description;
    const char* config;
};

const BuiltinScenario kBuiltins[] = {
    {"uniform-sanity", "uniform marginals on the circle; every slack collapses to its trivial value",
     R"(
[scenario]
id = uniform-sanity
suite = bridge
[manifold]
kind = circle
n = 64
[mode]
family = zero_n
n = 1
[run]
T = 0.5
[functions]
mu = constant
nu = constant
)"},
    {"circle-bump-0n", "cosine bump pair on the circle, dimensional estimates with n = 1",
     R"(
[scenario]
id = circle-bump-0n
suite = bridge
[manifold]
kind = circle
n = 256
[mode]
family = zero_n
n = 1
[run]
T = 0.5
[functions]
mu = cosine amplitude=0.5 center=0
nu = cosine amplitude=-0.5 center=0
)"},
    {"torus-bump-0n", "product cosine pair on the flat torus, dimensional estimates with n = 2",
     R"(
[scenario]
id = torus-bump-0n
suite = bridge
[manifold]
kind = torus2d
n = 48
[mode]
family = zero_n
n = 2
[run]
T = 0.5
[functions]
mu = cosine amplitude=0.4 center=0
nu = cosine amplitude=-0.4 center=0
)"},
    {"ou-gaussian-cd1", "Gaussian pair under the Ornstein-Uhlenbeck semigroup, exponential estimates at rho = 1",
     R"(
[scenario]
id = ou-gaussian-cd1
suite = bridge
[manifold]
kind = ou_line
n = 256
halfwidth = 6
[mode]
family = rho_infinity
rho = 1
[run]
T = 0.5
[functions]
mu = gaussian mean=0 variance=0.25
nu = gaussian mean=0.5 variance=0.25
)"},
    {"circle-local-rho0", "pointwise semigroup inequalities on the circle at rho = 0 and n = 1",
     R"(
[scenario]
id = circle-local-rho0
suite = local
[manifold]
kind = circle
n = 256
[mode]
family = zero_n
n = 1
[run]
T = 0.5
[functions]
g = cosine amplitude=0.5 center=0
)"},
    {"torus-local-0n", "pointwise semigroup inequalities on the torus with n = 2",
     R"(
[scenario]
id = torus-local-0n
suite = local
[manifold]
kind = torus2d
n = 48
[mode]
family = zero_n
n = 2
[run]
T = 0.5
[functions]
g = cosine amplitude=0.4 center=0
)"},
    {"ou-local-cd1", "pointwise exponential-family inequalities for the Ornstein-Uhlenbeck generator",
     R"(
[scenario]
id = ou-local-cd1
suite = local
[manifold]
kind = ou_line
n = 256
halfwidth = 6
[mode]
family = rho_infinity
rho = 1
[run]
T = 0.5
[functions]
g = exp_sin amplitude=0.3
)"},
    {"circle-liyau-sharpness", "pointwise bounds applied to a heat-kernel column (near-sharp case)",
     R"(
[scenario]
id = circle-liyau-sharpness
suite = local
[manifold]
kind = circle
n = 256
[mode]
family = zero_n
n = 1
[run]
T = 0.5
[functions]
g = heat_kernel y=1.5707963267948966 s=0.1
)"},
    {"toy-quadratic-rho1", "quadratic potential, endpoints 0 to 1, exponential-family estimates",
     R"(
[scenario]
id = toy-quadratic-rho1
suite = toy
[manifold]
kind = circle
n = 8
[mode]
family = rho_infinity
rho = 1
[run]
T = 1
seed = 42
[toy]
model = quadratic
param = 1
x = 0
y = 1
m = 256
)"},
    {"toy-log-0n", "logarithmic barrier potential, dimensional estimates with n = 1",
     R"(
[scenario]
id = toy-log-0n
suite = toy
[manifold]
kind = circle
n = 8
[mode]
family = zero_n
n = 1
[run]
T = 1
seed = 42
[toy]
model = log_barrier
param = 1
x = 1
y = 2
m = 512
)"},
    {"toy-free-sanity", "zero potential; straight-line interpolation and trivial slack values",
     R"(
[scenario]
id = toy-free-sanity
suite = toy
[manifold]
kind = circle
n = 8
[mode]
family = zero_n
n = 1
[run]
T = 2
seed = 7
[toy]
model = zero
param = 0
x = 0.3
y = 1.7
m = 128
)"},
    {"circle-delta-limit", "integrated estimates against shrinking bumps versus their pointwise limits",
     R"(
[scenario]
id = circle-delta-limit
suite = delta
[manifold]
kind = circle
n = 512
[mode]
family = zero_n
n = 1
[run]
T = 0.5
[functions]
g = cosine amplitude=0.5 center=0
widths = 0.4 0.2 0.1 0.05
)"},
};

}  // namespace

std::vector<std::pair<std::string, std::string>> builtin_scenarios() {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& b : kBuiltins) out.emplace_back(b.id, b.description);
    return out;
}

bool is_builtin_scenario(const std::string& id) {
    for (const auto& b : kBuiltins)
        if (id == b.id) return true;
    return false;
}

std::string builtin_config_text(const std::string& id) {
    for (const auto& b : kBuiltins)
        if (id == b.id) return b.config;
    throw ConfigError("unknown built-in scenario '" + id + "'");
}

void emit_plot_data(const std::string& report_path, const std::string& series_name,
                    const std::string& out_path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(report_path));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("cannot parse report " + report_path + ": " + e.what());
    }
    if (!j.contains("series") || !j["series"].contains(series_name)) {
        std::string have;
        if (j.contains("series"))
            for (auto it = j["series"].begin(); it != j["series"].end(); ++it)
                have += (have.empty() ? "" : ", ") + it.key();
        throw ConfigError("report has no series '" + series_name + "' (available: " + have + ")");
    }
    const auto& s = j["series"][series_name];
    std::string out = "#";
    for (const auto& c : s["columns"]) out += " " + c.get<std::string>();
    out += "\n";
    for (const auto& row : s["rows"]) {
        bool first = true;
        for (const auto& v : row) {
            if (!first) out += " ";
            first = false;
            out += format_float(v.get<double>());
        }
        out += "\n";
    }
    write_text_file(out_path, out);
}

}  // namespace ottolab
