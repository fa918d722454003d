#include "ottolab/config.hpp"

#include <algorithm>

#include "ottolab/local.hpp"
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace ottolab {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& s, const std::string& context) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("expected a number for " + context + ", got '" + s + "'");
    }
}

long parse_int(const std::string& s, const std::string& context) {
    try {
        size_t pos = 0;
        long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("expected an integer for " + context + ", got '" + s + "'");
    }
}

std::vector<double> parse_number_list(const std::string& s, const std::string& context) {
    std::vector<double> out;
    std::istringstream ss(s);
    std::string tok;
    while (ss >> tok) out.push_back(parse_double(tok, context));
    if (out.empty()) throw ConfigError("expected at least one number for " + context);
    return out;
}

PresetSpec parse_preset(const std::string& s, const std::string& context) {
    std::istringstream ss(s);
    PresetSpec spec;
    if (!(ss >> spec.kind)) throw ConfigError("empty preset for " + context);
    std::string tok;
    while (ss >> tok) {
        const size_t eq = tok.find('=');
        if (eq == std::string::npos)
            throw ConfigError("preset parameter '" + tok + "' for " + context + " is not key=value");
        spec.params[tok.substr(0, eq)] = parse_double(tok.substr(eq + 1), context + "." + tok.substr(0, eq));
    }
    return spec;
}

const std::set<std::string> kSections = {"scenario", "manifold", "mode", "run",
                                         "functions", "toy", "solver", "output"};

}  // namespace

double PresetSpec::param(const std::string& name, std::optional<double> fallback) const {
    auto it = params.find(name);
    if (it != params.end()) return it->second;
    if (fallback) return *fallback;
    throw ConfigError("preset '" + kind + "' is missing parameter '" + name + "'");
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    bool geometry_seen = false;

    auto fail = [&](const std::string& msg) {
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + msg);
    };

    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail("malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!kSections.count(section)) fail("unknown section [" + section + "]");
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) fail("key '" + key + "' before any section header");
        if (value.empty()) fail("empty value for key '" + key + "'");

        if (section == "scenario") {
            if (key == "id") cfg.id = value;
            else if (key == "suite") cfg.suite = value;
            else fail("unknown key '" + key + "' in [scenario]");
        } else if (section == "manifold") {
            if (key == "kind") {
                if (value == "circle") cfg.kind = ManifoldKind::circle;
                else if (value == "torus2d") cfg.kind = ManifoldKind::torus2d;
                else if (value == "ou_line") cfg.kind = ManifoldKind::ou_line;
                else fail("unknown manifold kind '" + value + "'");
            } else if (key == "n") {
                cfg.n = static_cast<int>(parse_int(value, "manifold.n"));
            } else if (key == "length" || key == "halfwidth") {
                cfg.geometry = parse_double(value, "manifold." + key);
                geometry_seen = true;
            } else {
                fail("unknown key '" + key + "' in [manifold]");
            }
        } else if (section == "mode") {
            if (key == "family") {
                if (value != "rho_infinity" && value != "zero_n") fail("unknown mode family '" + value + "'");
                cfg.mode_family = value;
            } else if (key == "rho") cfg.rho = parse_double(value, "mode.rho");
            else if (key == "n") cfg.dim_n = parse_double(value, "mode.n");
            else fail("unknown key '" + key + "' in [mode]");
        } else if (section == "run") {
            if (key == "T") cfg.T = parse_double(value, "run.T");
            else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(value, "run.seed"));
            else fail("unknown key '" + key + "' in [run]");
        } else if (section == "functions") {
            if (key == "widths") cfg.widths = parse_number_list(value, "functions.widths");
            else if (key == "mu" || key == "nu" || key == "g")
                cfg.functions[key] = parse_preset(value, "functions." + key);
            else fail("unknown key '" + key + "' in [functions]");
        } else if (section == "toy") {
            if (key == "model") cfg.toy_model = value;
            else if (key == "param") cfg.toy_param = parse_double(value, "toy.param");
            else if (key == "x") cfg.toy_x = parse_number_list(value, "toy.x");
            else if (key == "y") cfg.toy_y = parse_number_list(value, "toy.y");
            else if (key == "m") cfg.toy_m = static_cast<int>(parse_int(value, "toy.m"));
            else fail("unknown key '" + key + "' in [toy]");
        } else if (section == "solver") {
            if (key == "ipfp_tol") cfg.ipfp_tol = parse_double(value, "solver.ipfp_tol");
            else if (key == "ipfp_max_iter") cfg.ipfp_max_iter = static_cast<int>(parse_int(value, "solver.ipfp_max_iter"));
            else if (key == "time_nodes") cfg.time_nodes = static_cast<int>(parse_int(value, "solver.time_nodes"));
            else if (key == "refine_tol") cfg.refine_tol = parse_double(value, "solver.refine_tol");
            else fail("unknown key '" + key + "' in [solver]");
        } else if (section == "output") {
            if (key == "dir") cfg.out_dir = value;
            else fail("unknown key '" + key + "' in [output]");
        }
    }

    // validation
    if (cfg.id.empty()) throw ConfigError(origin + ": [scenario] id is required");
    const std::set<std::string> suites = {"toy", "bridge", "local", "delta", "all"};
    if (!suites.count(cfg.suite)) throw ConfigError(origin + ": suite must be toy|bridge|local|delta|all");
    if (!(cfg.T > 0)) throw ConfigError(origin + ": run.T must be positive");
    if (!(cfg.ipfp_tol > 0)) throw ConfigError(origin + ": solver.ipfp_tol must be positive");
    if (!(cfg.refine_tol > 0)) throw ConfigError(origin + ": solver.refine_tol must be positive");
    if (cfg.ipfp_max_iter <= 0) throw ConfigError(origin + ": solver.ipfp_max_iter must be positive");
    if (cfg.kind == ManifoldKind::ou_line && !geometry_seen) cfg.geometry = 6.0;
    if (cfg.mode_family.empty() && cfg.suite != "delta")
        throw ConfigError(origin + ": [mode] family is required");
    if (cfg.suite == "toy" || cfg.suite == "all") {
        const std::set<std::string> models = {"zero", "quadratic", "log_barrier"};
        if (!models.count(cfg.toy_model))
            throw ConfigError(origin + ": toy.model must be zero|quadratic|log_barrier");
        if (cfg.toy_x.empty() || cfg.toy_y.empty())
            throw ConfigError(origin + ": toy.x and toy.y endpoints are required");
        if (cfg.toy_x.size() != cfg.toy_y.size())
            throw ConfigError(origin + ": toy.x and toy.y have different dimensions");
    }
    if (cfg.suite == "bridge" || cfg.suite == "all") {
        if (!cfg.functions.count("mu") || !cfg.functions.count("nu"))
            throw ConfigError(origin + ": bridge suite requires functions mu and nu");
    }
    if (cfg.suite == "local" || cfg.suite == "delta" || cfg.suite == "all") {
        if (!cfg.functions.count("g"))
            throw ConfigError(origin + ": local/delta suites require function g");
    }
    if (cfg.suite == "delta" || cfg.suite == "all") {
        if (cfg.widths.empty()) cfg.widths = {0.4, 0.2, 0.1, 0.05};
    }
    if (cfg.out_dir.empty()) cfg.out_dir = "out/" + cfg.id;
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const IoError& e) {
        throw ConfigError(std::string("config file: ") + e.what());
    }
    return parse_config_text(text, path);
}

std::string ExperimentConfig::canonical_text() const {
    std::ostringstream out;
    out << "[scenario]\nid = " << id << "\nsuite = " << suite << "\n";
    out << "[manifold]\nkind = " << to_string(kind) << "\nn = " << n << "\n"
        << (kind == ManifoldKind::ou_line ? "halfwidth" : "length") << " = " << format_float(geometry) << "\n";
    if (!mode_family.empty()) {
        out << "[mode]\nfamily = " << mode_family << "\n";
        if (mode_family == "rho_infinity") out << "rho = " << format_float(rho) << "\n";
        else out << "n = " << format_float(dim_n) << "\n";
    }
    out << "[run]\nT = " << format_float(T) << "\nseed = " << seed << "\n";
    if (!functions.empty() || !widths.empty()) {
        out << "[functions]\n";
        for (const auto& [name, spec] : functions) {
            out << name << " = " << spec.kind;
            for (const auto& [k, v] : spec.params) out << " " << k << "=" << format_float(v);
            out << "\n";
        }
        if (!widths.empty()) {
            out << "widths =";
            for (double w : widths) out << " " << format_float(w);
            out << "\n";
        }
    }
    if (!toy_model.empty()) {
        out << "[toy]\nmodel = " << toy_model << "\nparam = " << format_float(toy_param) << "\nx =";
        for (double v : toy_x) out << " " << format_float(v);
        out << "\ny =";
        for (double v : toy_y) out << " " << format_float(v);
        out << "\nm = " << toy_m << "\n";
    }
    out << "[solver]\nipfp_tol = " << format_float(ipfp_tol) << "\nipfp_max_iter = " << ipfp_max_iter
        << "\ntime_nodes = " << time_nodes << "\nrefine_tol = " << format_float(refine_tol) << "\n";
    out << "[output]\ndir = " << out_dir << "\n";
    return out.str();
}

ScalarField build_preset_field(const ManifoldPtr& M, const PresetSpec& spec) {
    const double pi = std::numbers::pi;
    if (spec.kind == "constant") {
        const double c = spec.param("value", 1.0);
        if (!(c > 0)) throw ConfigError("constant preset needs a positive value");
        return ScalarField::constant(M, c);
    }
    if (spec.kind == "cosine") {
        const double a = spec.param("amplitude");
        const double c = spec.param("center", 0.0);
        const double k = spec.param("harmonic", 1.0);
        if (std::abs(a) >= 1.0) throw ConfigError("cosine preset needs |amplitude| < 1 to stay positive");
        const double om = 2.0 * pi * k / M->geometry();
        if (M->kind() == ManifoldKind::ou_line) throw ConfigError("cosine preset is periodic-only");
        return ScalarField::from_function(M, [&](double x, double y = 0.0) {
            double v = 1.0 + a * std::cos(om * (x - c));
            if (M->dimension() == 2) v *= 1.0 + a * std::cos(om * (y - c));
            return v;
        });
    }
    if (spec.kind == "bump") {
        const double width = spec.param("width");
        const double center = spec.param("center", 0.0);
        int idx = 0;
        double bestdist = std::numeric_limits<double>::infinity();
        for (int i = 0; i < M->point_count(); ++i) {
            double d = std::abs(M->coordinate(0)[i] - center);
            if (M->dimension() == 2) d += std::abs(M->coordinate(1)[i] - center);
            if (d < bestdist) {
                bestdist = d;
                idx = i;
            }
        }
        return ScalarField(M, Eigen::VectorXd(bump_density(M, idx, width).values()));
    }
    if (spec.kind == "gaussian") {
        if (M->kind() != ManifoldKind::ou_line) throw ConfigError("gaussian preset is ou_line-only");
        const double mean = spec.param("mean");
        const double var = spec.param("variance");
        if (!(var > 0)) throw ConfigError("gaussian preset needs positive variance");
        // density w.r.t. the standard normal reference measure
        const double alpha = 1.0 - 1.0 / var;
        const double beta = mean / var;
        const double c0 = -mean * mean / (2.0 * var) - 0.5 * std::log(var);
        return ScalarField::from_function(M, [&](double x) { return std::exp(0.5 * alpha * x * x + beta * x + c0); });
    }
    if (spec.kind == "heat_kernel") {
        const double y = spec.param("y", 0.0);
        const double s = spec.param("s");
        if (!(s > 0)) throw ConfigError("heat_kernel preset needs s > 0");
        int idx = 0;
        double bestdist = std::numeric_limits<double>::infinity();
        for (int i = 0; i < M->point_count(); ++i) {
            double d = std::abs(M->coordinate(0)[i] - y);
            if (M->dimension() == 2) d += std::abs(M->coordinate(1)[i] - y);
            if (d < bestdist) {
                bestdist = d;
                idx = i;
            }
        }
        return heat_kernel_column(M, s, idx);
    }
    if (spec.kind == "exp_sin") {
        const double a = spec.param("amplitude", 0.3);
        const double om = M->kind() == ManifoldKind::ou_line ? 1.0 : 2.0 * pi / M->geometry();
        return ScalarField::from_function(M, [&](double x, double y = 0.0) {
            double v = std::exp(a * std::sin(om * x));
            if (M->dimension() == 2) v *= std::exp(a * std::sin(om * y));
            return v;
        });
    }
    throw ConfigError("unknown preset kind '" + spec.kind + "'");
}

Density build_preset_density(const ManifoldPtr& M, const PresetSpec& spec) {
    return Density::normalized(build_preset_field(M, spec));
}

}  // namespace ottolab
