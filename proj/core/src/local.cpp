#include "ottolab/local.hpp"

#include <cmath>
#include <numbers>

namespace ottolab {

namespace {

void require_positive(const ScalarField& g) {
    if (g.values.minCoeff() <= 0.0) throw std::domain_error("test function g must be strictly positive");
}

void require_rho_class(const GridManifold& M, double rho) {
    if (rho > M.curvature_rho() + 1e-12)
        throw CurvatureError("manifold " + to_string(M.kind()) + " carries the exponential class only up to rho = " +
                             format_float(M.curvature_rho()) + "; requested " + format_float(rho));
}

void require_dimension_class(const GridManifold& M, double n) {
    if (!(M.curvature_rho() >= 0.0) || std::isinf(M.curvature_dim()))
        throw CurvatureError("manifold " + to_string(M.kind()) +
                             " is not in a finite-dimension nonnegative-curvature class");
    if (n < M.curvature_dim() - 1e-12)
        throw CurvatureError("dimensional parameter n = " + format_float(n) +
                             " is below the manifold dimension " + format_float(M.curvature_dim()));
}

struct SemigroupData {
    Eigen::VectorXd u;               // P_T g
    Eigen::VectorXd log_u;           // log P_T g
    Eigen::VectorXd gamma_ratio_u;   // Gamma(u)/u = u Gamma(log u)
    Eigen::VectorXd pt_gamma_ratio;  // P_T (Gamma(g)/g)
    Eigen::VectorXd entropy_bracket; // P_T(g log g) - u log u
    Eigen::VectorXd lap_u;           // L P_T g
};

SemigroupData semigroup_data(const ManifoldPtr& M, const ScalarField& g, double T) {
    require_positive(g);
    SemigroupData d;
    Eigen::VectorXd log_g = g.values.array().log().matrix();
    d.log_u = M->apply_heat_log(T, log_g);
    d.u = d.log_u.array().exp().matrix();
    d.gamma_ratio_u = gamma(ScalarField(M, d.log_u)).values.cwiseProduct(d.u);
    Eigen::VectorXd ratio_g = gamma(ScalarField(M, log_g)).values.cwiseProduct(g.values);
    d.pt_gamma_ratio = M->apply_heat(T, ratio_g);
    d.entropy_bracket = M->apply_heat(T, g.values.cwiseProduct(log_g)) - d.u.cwiseProduct(d.log_u);
    d.lap_u = M->apply_generator(d.u);
    return d;
}

PointwiseReport assemble(const ManifoldPtr& M, const std::string& name, const Eigen::VectorXd& lhs,
                         const Eigen::VectorXd& rhs, double T, double rho, double n, double tolerance,
                         const std::string& note = {}, bool informational = false) {
    PointwiseReport rep;
    double worst = std::numeric_limits<double>::infinity();
    int worst_point = -1;
    for (int i : M->interior_indices()) {
        rep.points.push_back(i);
        rep.lhs.push_back(lhs[i]);
        rep.rhs.push_back(rhs[i]);
        const double slack = rhs[i] - lhs[i];
        if (slack < worst) {
            worst = slack;
            worst_point = i;
        }
    }
    rep.worst = InequalityReport::make(name, lhs[worst_point], rhs[worst_point], tolerance,
                                       "point " + std::to_string(worst_point));
    rep.worst.T = T;
    rep.worst.rho = rho;
    rep.worst.dim_n = n;
    rep.worst.note = note;
    rep.worst.informational = informational;
    return rep;
}

}  // namespace

PointwiseReport eval_grad_commutation(const ManifoldPtr& M, double rho, const ScalarField& g, double T,
                                      double tolerance) {
    require_rho_class(*M, rho);
    SemigroupData d = semigroup_data(M, g, T);
    Eigen::VectorXd rhs = std::exp(-2.0 * rho * T) * d.pt_gamma_ratio;
    return assemble(M, "gradient-commutation", d.gamma_ratio_u, rhs, T, rho,
                    std::numeric_limits<double>::infinity(), tolerance);
}

PointwiseReport eval_local_lsi(const ManifoldPtr& M, double rho, const ScalarField& g, double T,
                               double tolerance) {
    require_rho_class(*M, rho);
    SemigroupData d = semigroup_data(M, g, T);
    Eigen::VectorXd rhs = contraction_coefficient(rho, T) * d.pt_gamma_ratio;
    return assemble(M, "local-log-sobolev", d.entropy_bracket, rhs, T, rho,
                    std::numeric_limits<double>::infinity(), tolerance);
}

PointwiseReport eval_reverse_lsi(const ManifoldPtr& M, double rho, const ScalarField& g, double T,
                                 double tolerance) {
    require_rho_class(*M, rho);
    SemigroupData d = semigroup_data(M, g, T);
    Eigen::VectorXd lhs = expansion_coefficient(rho, T) * d.gamma_ratio_u;
    return assemble(M, "reverse-local-log-sobolev", lhs, d.entropy_bracket, T, rho,
                    std::numeric_limits<double>::infinity(), tolerance);
}

DimensionalLsiReports eval_dim_lsi(const ManifoldPtr& M, double n, const ScalarField& g, double T,
                                   double tolerance) {
    require_dimension_class(*M, n);
    SemigroupData d = semigroup_data(M, g, T);
    const double c = n / (2.0 * T);
    // bracket with the dimensional correction -T L P_T g
    Eigen::VectorXd B = d.entropy_bracket - T * d.lap_u;
    Eigen::VectorXd lhs =
        (c * d.u.array() * (2.0 * B.array() / (n * d.u.array())).exp()).matrix();
    Eigen::VectorXd rhs = d.pt_gamma_ratio - d.lap_u + c * d.u;
    DimensionalLsiReports reports;
    reports.exponential = assemble(M, "dimensional-log-sobolev", lhs, rhs, T, 0.0, n, tolerance,
                                   "restored bracket reading: entropy term P_T g log P_T g completed, L = generator");
    Eigen::VectorXd lhs2 = (d.lap_u.array() / d.u.array() - d.pt_gamma_ratio.array() / d.u.array()).matrix();
    Eigen::VectorXd rhs2 = Eigen::VectorXd::Constant(lhs2.size(), c);
    reports.simplified = assemble(M, "generator-ratio-bound", lhs2, rhs2, T, 0.0, n, tolerance);
    return reports;
}

DimensionalReverseReports eval_dim_reverse_liyau(const ManifoldPtr& M, double n, const ScalarField& g,
                                                 double T, double tolerance) {
    require_dimension_class(*M, n);
    SemigroupData d = semigroup_data(M, g, T);
    const double c = n / (2.0 * T);
    Eigen::VectorXd B = d.entropy_bracket - T * d.lap_u;
    Eigen::VectorXd lhs =
        (c * d.u.array() * (-2.0 * B.array() / (n * d.u.array())).exp()).matrix();
    Eigen::VectorXd rhs = -d.gamma_ratio_u + d.lap_u + c * d.u;
    DimensionalReverseReports reports;
    reports.exponential = assemble(M, "dimensional-reverse-log-sobolev", lhs, rhs, T, 0.0, n, tolerance,
                                   "restored bracket reading: entropy term P_T g log P_T g completed, L = generator");
    // standard normalized form: Gamma(u)/u^2 - Lu/u <= n / (2T)
    Eigen::VectorXd li = (d.gamma_ratio_u.array() / d.u.array() - d.lap_u.array() / d.u.array()).matrix();
    reports.li_yau = assemble(M, "li-yau", li, Eigen::VectorXd::Constant(li.size(), c), T, 0.0, n, tolerance);
    // literal printed variant without the 1/u normalization of the generator term
    Eigen::VectorXd li2 = (d.gamma_ratio_u.array() / d.u.array() - d.lap_u.array()).matrix();
    reports.li_yau_literal = assemble(M, "li-yau-literal", li2, Eigen::VectorXd::Constant(li2.size(), c), T,
                                      0.0, n, tolerance, "printed variant without generator normalization", true);
    return reports;
}

Density bump_density(const ManifoldPtr& M, int center_index, double width) {
    if (!(width > 0)) throw std::invalid_argument("bump width must be positive");
    if (center_index < 0 || center_index >= M->point_count()) throw std::out_of_range("bump center index");
    const double inv_w2 = 1.0 / (width * width);
    Eigen::VectorXd v(M->point_count());
    int covered = 0;
    if (M->kind() == ManifoldKind::ou_line) {
        const double c = M->coordinate(0)[center_index];
        for (int i = 0; i < v.size(); ++i) {
            const double dx = M->coordinate(0)[i] - c;
            v[i] = std::exp(-0.5 * dx * dx * inv_w2);
            if (std::abs(dx) <= width) ++covered;
        }
    } else {
        const double L = M->geometry();
        const double om = 2.0 * std::numbers::pi / L;
        const double cx = M->coordinate(0)[center_index];
        const double cy = M->dimension() == 2 ? M->coordinate(1)[center_index] : 0.0;
        for (int i = 0; i < v.size(); ++i) {
            double e = (std::cos(om * (M->coordinate(0)[i] - cx)) - 1.0) * inv_w2 / (om * om);
            double dist2 = std::pow(std::remainder(M->coordinate(0)[i] - cx, L), 2);
            if (M->dimension() == 2) {
                e += (std::cos(om * (M->coordinate(1)[i] - cy)) - 1.0) * inv_w2 / (om * om);
                dist2 += std::pow(std::remainder(M->coordinate(1)[i] - cy, L), 2);
            }
            v[i] = std::exp(e);
            if (dist2 <= width * width) ++covered;
        }
    }
    if (covered < 6)
        throw ConfigError("bump of width " + format_float(width) +
                          " is under-resolved on this grid (fewer than 6 points across)");
    return Density::normalized(ScalarField(M, std::move(v)));
}

DeltaLimitRecord delta_limit_bridge_vs_local(const ManifoldPtr& M, LocalInequality which,
                                             const ScalarField& g, int y_index, double T,
                                             const std::vector<double>& widths) {
    require_positive(g);
    if (widths.empty()) throw std::invalid_argument("need at least one bump width");
    for (size_t i = 1; i < widths.size(); ++i)
        if (!(widths[i] < widths[i - 1])) throw std::invalid_argument("bump widths must strictly decrease");

    SemigroupData d = semigroup_data(M, g, T);
    const double rho = 0.0;  // valid on every built-in kind; the circle pairs are the sharp case
    DeltaLimitRecord rec;
    rec.center_index = y_index;
    rec.T = T;
    Eigen::VectorXd lhs_field, rhs_field;
    switch (which) {
        case LocalInequality::gradient_commutation:
            rec.inequality = "gradient-commutation";
            lhs_field = d.gamma_ratio_u;
            rhs_field = std::exp(-2.0 * rho * T) * d.pt_gamma_ratio;
            break;
        case LocalInequality::local_log_sobolev:
            rec.inequality = "local-log-sobolev";
            lhs_field = d.entropy_bracket;
            rhs_field = contraction_coefficient(rho, T) * d.pt_gamma_ratio;
            break;
    }
    rec.local_lhs = lhs_field[y_index];
    rec.local_rhs = rhs_field[y_index];
    for (double w : widths) {
        Density f = bump_density(M, y_index, w);
        const double bl = M->quadrature(lhs_field.cwiseProduct(f.values()));
        const double br = M->quadrature(rhs_field.cwiseProduct(f.values()));
        rec.widths.push_back(w);
        rec.bridge_lhs.push_back(bl);
        rec.bridge_rhs.push_back(br);
        rec.gap_lhs.push_back(std::abs(bl - rec.local_lhs));
        rec.gap_rhs.push_back(std::abs(br - rec.local_rhs));
    }
    return rec;
}

}  // namespace ottolab
