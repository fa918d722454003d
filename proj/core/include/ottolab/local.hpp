#pragma once

#include <string>
#include <vector>

#include "ottolab/manifold.hpp"
#include "ottolab/report.hpp"

namespace ottolab {

// Pointwise semigroup inequalities, evaluated at every trusted grid point.
// All quotient quantities Gamma(u)/u are computed as u * Gamma(log u), which
// stays stable where u is exponentially small.

// Gamma(P_T g)/P_T g <= e^{-2 rho T} P_T(Gamma(g)/g)
PointwiseReport eval_grad_commutation(const ManifoldPtr& M, double rho, const ScalarField& g, double T,
                                      double tolerance = 1e-8);

// P_T(g log g) - P_T g log P_T g <= c(rho,T) P_T(Gamma(g)/g)
PointwiseReport eval_local_lsi(const ManifoldPtr& M, double rho, const ScalarField& g, double T,
                               double tolerance = 1e-8);

// c'(rho,T) Gamma(P_T g)/P_T g <= P_T(g log g) - P_T g log P_T g
PointwiseReport eval_reverse_lsi(const ManifoldPtr& M, double rho, const ScalarField& g, double T,
                                 double tolerance = 1e-8);

struct DimensionalLsiReports {
    PointwiseReport exponential;  // the full exponential form (restored bracket reading)
    PointwiseReport simplified;   // L P_T g / P_T g - P_T(Gamma(g)/g)/P_T g <= n/(2T)
};
DimensionalLsiReports eval_dim_lsi(const ManifoldPtr& M, double n, const ScalarField& g, double T,
                                   double tolerance = 1e-8);

struct DimensionalReverseReports {
    PointwiseReport exponential;      // reverse exponential form (restored bracket reading)
    PointwiseReport li_yau;           // Gamma(u)/u^2 - Lu/u <= n/(2T), u = P_T g
    PointwiseReport li_yau_literal;   // the unnormalized printed variant, informational
};
DimensionalReverseReports eval_dim_reverse_liyau(const ManifoldPtr& M, double n, const ScalarField& g,
                                                 double T, double tolerance = 1e-8);

enum class LocalInequality { gradient_commutation, local_log_sobolev };

// Integrates both sides of the chosen inequality against shrinking bump
// densities centered at grid point y and records convergence toward the
// pointwise values there.
DeltaLimitRecord delta_limit_bridge_vs_local(const ManifoldPtr& M, LocalInequality which,
                                             const ScalarField& g, int y_index, double T,
                                             const std::vector<double>& widths);

// mass-one bump density of the given width centered at grid point y
// (periodic exponential bump on circle/torus, Gaussian on the line)
Density bump_density(const ManifoldPtr& M, int center_index, double width);

}  // namespace ottolab
