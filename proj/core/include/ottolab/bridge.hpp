#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ottolab/manifold.hpp"
#include "ottolab/report.hpp"

namespace ottolab {

struct BridgeMode {
    enum class Family { rho_infinity, zero_n };
    Family family = Family::rho_infinity;
    double rho = 0.0;
    double n = 1.0;
    static BridgeMode rho_inf(double rho) {
        return {Family::rho_infinity, rho, std::numeric_limits<double>::infinity()};
    }
    static BridgeMode zero_n(double n) { return {Family::zero_n, 0.0, n}; }
};

// Potential pair (f, g) with f * P_T g and g * P_T f matching the two
// marginal densities. Stored in log form; the normalization convention is
// equal integrals of f and g against the reference measure.
struct SchrodingerPotentials {
    ManifoldPtr M;
    double T = 0.0;
    Eigen::VectorXd log_f, log_g;
    int iterations = 0;
    double residual_mu = 0.0, residual_nu = 0.0;
    std::string normalization = "equal-integrals";

    ScalarField f() const { return ScalarField(M, log_f.array().exp().matrix()); }
    ScalarField g() const { return ScalarField(M, log_g.array().exp().matrix()); }
};

// Iterative proportional fitting in the log domain with halved corrections
// whenever the residual fails to decrease.
SchrodingerPotentials ipfp_solve(const ManifoldPtr& M, double T, const Density& mu, const Density& nu,
                                 double tol = 1e-12, int max_iter = 200,
                                 std::vector<double>* residual_history = nullptr);

// The product-formula path t -> P_t f * P_{T-t} g / Z with Z = int f P_T g.
// Built either from solved potentials (Z ~ 1) or from arbitrary positive
// fields, which is enough to run every bridge inequality without a solve.
struct BridgePath {
    ManifoldPtr M;
    double T = 0.0;
    Eigen::VectorXd log_f, log_g;
    double normalization = 1.0;  // Z

    static BridgePath from_potentials(const SchrodingerPotentials& pots);
};

// product-formula path from arbitrary positive fields (normalized)
BridgePath product_path(const ScalarField& f, const ScalarField& g, double T);

// explicit path started from a point mass at grid point y and ending at nu
BridgePath dirac_bridge(const ManifoldPtr& M, int y_index, const Density& nu, double T);

// path density at time t (renormalized to exact unit mass; the measured
// drift |mass - 1| is reported through *mass_drift)
Density interpolate(const BridgePath& path, double t, double* mass_drift = nullptr);

// |mu_dot + grad F|^2 at time t: 4 int Gamma(log P_{T-t} g) dmu_t, using the
// quotient identity Gamma(u)/u = u Gamma(log u)
double velocity_cost_sample(const BridgePath& path, double t);
// same quantity through the velocity + entropy-gradient decomposition
double velocity_cost_direct(const BridgePath& path, double t);

struct CostPair {
    double quadrature = 0.0;   // time integral of the velocity cost, minus 2(F(nu)-F(mu))
    double closed_form = 0.0;  // 4 int [P_T(g log g) - P_T g log P_T g] f dx / Z, minus the same
    int time_nodes = 0;        // Simpson nodes used after adaptive doubling
    double last_refinement = 0.0;
    double entropy_mu = 0.0, entropy_nu = 0.0;
    double lambda_quadrature = 0.0, lambda_closed = 0.0;
};

// Entropic cost through both routes. The Simpson ladder starts at
// `time_nodes` nodes and doubles until the value moves by less than
// `refine_tol`. On manifolds with a kernel resolution floor (ou_line) the
// unresolvable end layers [0,a) and (T-a,T] are integrated exactly through
// the antiderivative P_t(u_t log u_t) of the velocity integrand.
CostPair entropic_cost(const BridgePath& path, int time_nodes = 33, double refine_tol = 1e-7,
                       int max_nodes = 4097);

struct EnergyReport {
    double value = 0.0;          // 4 int (L P_T g) f dx / Z
    double max_deviation = 0.0;  // against |mu_dot|^2 - Gamma-entropy samples
    int samples = 0;
    std::vector<double> sample_times, sample_values;
};

EnergyReport conserved_energy(const BridgePath& path, int samples = 11);

// -4 int Gamma(P_{T/2} g, P_{T/2} f) dx / Z; equals the conserved energy
double energy_mid_gamma(const BridgePath& path);

// Evaluates the bridge inequalities for the mode, refusing modes inconsistent
// with the manifold's reference curvature class.
std::vector<InequalityReport> check_bridge_inequalities(const BridgePath& path, const BridgeMode& mode,
                                                        double tolerance = 1e-6);

}  // namespace ottolab
