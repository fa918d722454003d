#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ottolab/manifold.hpp"

namespace ottolab {

// Named function/density preset with typed parameters, e.g.
//   mu = cosine amplitude=0.5 center=0
struct PresetSpec {
    std::string kind;
    std::map<std::string, double> params;
    double param(const std::string& name, std::optional<double> fallback = std::nullopt) const;
};

// Parsed and validated experiment configuration. Flat `key = value` text with
// bracketed section headers; unknown sections or keys are rejected.
struct ExperimentConfig {
    // [scenario]
    std::string id;
    std::string suite;  // toy | bridge | local | delta | all

    // [manifold]
    ManifoldKind kind = ManifoldKind::circle;
    int n = 256;
    double geometry = 2.0 * 3.14159265358979323846;

    // [mode]
    std::string mode_family;  // rho_infinity | zero_n
    double rho = 0.0;
    double dim_n = 1.0;

    // [run]
    double T = 0.5;
    std::uint64_t seed = 0;

    // [functions]
    std::map<std::string, PresetSpec> functions;
    std::vector<double> widths;  // delta suite bump widths

    // [toy]
    std::string toy_model;  // zero | quadratic | log_barrier
    double toy_param = 1.0;
    std::vector<double> toy_x, toy_y;
    int toy_m = 256;

    // [solver]
    double ipfp_tol = 1e-12;
    int ipfp_max_iter = 200;
    int time_nodes = 33;
    double refine_tol = 1e-7;

    // [output]
    std::string out_dir;

    std::string canonical_text() const;  // deterministic echo of the config
};

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "<memory>");
ExperimentConfig parse_config(const std::string& path);

// materialization of presets on a manifold
ScalarField build_preset_field(const ManifoldPtr& M, const PresetSpec& spec);
Density build_preset_density(const ManifoldPtr& M, const PresetSpec& spec);

}  // namespace ottolab
