#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "ottolab/report.hpp"
#include "ottolab/util.hpp"

namespace ottolab {

// Potential for the finite-dimensional interpolation model: F with gradient
// and Hessian evaluators plus an open admissible-domain predicate.
struct FModel {
    int dim = 1;
    std::string name;
    std::function<double(const Eigen::VectorXd&)> value;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hess;
    std::function<bool(const Eigen::VectorXd&)> admissible;

    static FModel zero(int d);
    static FModel quadratic(double rho0, int d);  // rho0 |x|^2 / 2
    static FModel log_barrier(double n0);         // -n0 log x on (0, inf)
};

// Time-sampled solution of the two-point boundary value problem
//   Xdd = F''(X) F'(X),  X(0) = x,  X(T) = y.
struct ToyPath {
    double T = 0.0;
    Eigen::VectorXd times;       // m+1 nodes
    Eigen::MatrixXd states;      // (m+1) x d
    Eigen::MatrixXd velocities;  // (m+1) x d, fourth-order differences
    int newton_iterations = 0;
    double residual = 0.0;

    int segments() const { return static_cast<int>(times.size()) - 1; }
};

struct NewtonOptions {
    double tol = 1e-11;          // target sup-norm of the collocation residual
    double accept_tol = 1e-10;   // contract: anything above this is a solver error
    int max_iter = 60;
};

// Fourth-order compact (Numerov) collocation with damped Newton, initialized
// from the straight line between the endpoints.
ToyPath solve_newton_bvp(const FModel& F, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                         double T, int m, const NewtonOptions& opts = {});

// Rebuilds the velocity samples from the states (used after perturbing a path).
void recompute_velocities(ToyPath& path);

// Simpson quadrature of |Xdot|^2 + |F'(X)|^2 over [0, T] (no 1/2 factor).
double path_cost(const FModel& F, const ToyPath& path);

struct EnergyStats {
    double mean = 0.0;
    double max_deviation = 0.0;
};
// samples of E = |Xdot|^2 - |F'(X)|^2 along the path
EnergyStats path_energy(const FModel& F, const ToyPath& path);

struct ToyDiagnostics {
    double T = 0.0;
    Eigen::VectorXd times;
    double cost = 0.0;
    EnergyStats energy;
    Eigen::VectorXd lambda;        // cumulative integral of the defect |Xdot + F'(X)|^2
    Eigen::VectorXd phi;           // lambda(t) - t * E
    Eigen::VectorXd lambda_prime;  // the defect integrand itself
};

ToyDiagnostics lambda_curve(const FModel& F, const ToyPath& path);

struct ToyMode {
    enum class Family { rho_infinity, zero_n };
    Family family = Family::rho_infinity;
    double rho = 0.0;
    double n = 1.0;
    static ToyMode rho_inf(double rho) { return {Family::rho_infinity, rho, std::numeric_limits<double>::infinity()}; }
    static ToyMode zero_n(double n) { return {Family::zero_n, 0.0, n}; }
};

// min over sample points of the smallest eigenvalue of
//   F'' - rho I - (1/n) F' (F')^T
InequalityReport certify_convexity(const FModel& F, double rho, double n,
                                   const Eigen::MatrixXd& sample_points, double tolerance = 1e-10);

// Evaluates the interpolation inequalities for the given convexity mode,
// including the discrete differential facts. Reports flagged `informational`
// evaluate the printed textbook coefficient/endpoint variants side by side
// and do not gate pass/fail.
std::vector<InequalityReport> check_toy_inequalities(const FModel& F, const ToyPath& path,
                                                     const ToyMode& mode, double tolerance = 1e-6);

}  // namespace ottolab
