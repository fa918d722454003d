#include "ottolab/bridge.hpp"

#include <cmath>

namespace ottolab {

namespace {

Eigen::VectorXd log_values_of(const Density& d) {
    return d.values().unaryExpr([](double v) { return safe_log(v); });
}

double weighted_sum(const GridManifold& M, const Eigen::VectorXd& v) { return M.quadrature(v); }

// entropy of a path slice given its log-density and density values
double slice_entropy(const GridManifold& M, const Eigen::VectorXd& dens, const Eigen::VectorXd& logd) {
    double s = 0.0;
    const auto& w = M.weights();
    for (int i = 0; i < dens.size(); ++i)
        if (dens[i] > 0.0) s += w[i] * dens[i] * logd[i];
    return s;
}

}  // namespace

SchrodingerPotentials ipfp_solve(const ManifoldPtr& M, double T, const Density& mu, const Density& nu,
                                 double tol, int max_iter, std::vector<double>* residual_history) {
    if (!(T > 0)) throw std::domain_error("horizon T must be positive");
    if (!(tol > 0)) throw std::invalid_argument("ipfp tolerance must be positive");
    if (mu.manifold().get() != M.get() || nu.manifold().get() != M.get())
        throw std::invalid_argument("marginals live on a different manifold");
    if (mu.values().minCoeff() <= 0.0 || nu.values().minCoeff() <= 0.0)
        throw std::domain_error("ipfp_solve requires strictly positive marginal densities");

    const Eigen::VectorXd log_mu = log_values_of(mu);
    const Eigen::VectorXd log_nu = log_values_of(nu);
    const int n = M->point_count();
    Eigen::VectorXd log_f = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd log_g = Eigen::VectorXd::Zero(n);

    const Eigen::MatrixXd HT1 = M->heat_matrix_1d(T);
    auto apply_T = [&](const Eigen::VectorXd& logv) {
        const double shift = logv.maxCoeff();
        Eigen::VectorXd u = (logv.array() - shift).exp();
        Eigen::VectorXd h;
        if (M->kind() == ManifoldKind::torus2d) {
            Eigen::Map<const Eigen::MatrixXd> F(u.data(), M->axis_points(), M->axis_points());
            Eigen::MatrixXd O = HT1 * F * HT1.transpose();
            h = Eigen::Map<Eigen::VectorXd>(O.data(), n);
        } else {
            h = HT1 * u;
        }
        const double mn = h.minCoeff();
        if (mn <= 0.0)
            throw NumericalError("heat image hit zero during IPFP (min " + format_float(mn) + ")");
        return Eigen::VectorXd((h.array().log() + shift).matrix());
    };

    auto residuals = [&](const Eigen::VectorXd& lf, const Eigen::VectorXd& lg, double& rmu, double& rnu) {
        Eigen::VectorXd Pg = apply_T(lg);
        Eigen::VectorXd Pf = apply_T(lf);
        rmu = ((lf + Pg).array().exp() - mu.values().array()).abs().maxCoeff();
        rnu = ((lg + Pf).array().exp() - nu.values().array()).abs().maxCoeff();
    };

    double rmu = 0.0, rnu = 0.0;
    residuals(log_f, log_g, rmu, rnu);
    double best = std::max(rmu, rnu);
    int it = 0;
    for (; it < max_iter; ++it) {
        if (best <= tol) break;
        Eigen::VectorXd lf_new = log_mu - apply_T(log_g);
        Eigen::VectorXd lg_new = log_nu - apply_T(lf_new);
        // normalization: equal integrals of f and g
        const double sf = weighted_sum(*M, lf_new.array().exp().matrix());
        const double sg = weighted_sum(*M, lg_new.array().exp().matrix());
        const double c = 0.5 * (std::log(sg) - std::log(sf));
        lf_new.array() += c;
        lg_new.array() -= c;

        double rmu_new, rnu_new;
        residuals(lf_new, lg_new, rmu_new, rnu_new);
        double cand = std::max(rmu_new, rnu_new);
        if (cand > best) {
            // halve the correction in the log domain
            Eigen::VectorXd lf_half = 0.5 * (log_f + lf_new);
            Eigen::VectorXd lg_half = 0.5 * (log_g + lg_new);
            double rmu_h, rnu_h;
            residuals(lf_half, lg_half, rmu_h, rnu_h);
            if (std::max(rmu_h, rnu_h) < cand) {
                lf_new = lf_half;
                lg_new = lg_half;
                rmu_new = rmu_h;
                rnu_new = rnu_h;
                cand = std::max(rmu_h, rnu_h);
            }
        }
        log_f = lf_new;
        log_g = lg_new;
        rmu = rmu_new;
        rnu = rnu_new;
        best = std::min(best, cand);
        if (residual_history) residual_history->push_back(std::max(rmu, rnu));
    }
    if (std::max(rmu, rnu) > tol)
        throw SolverError("IPFP did not converge in " + std::to_string(max_iter) +
                              " iterations (marginal residuals " + format_float(rmu) + ", " +
                              format_float(rnu) + ")",
                          std::max(rmu, rnu));

    SchrodingerPotentials pots;
    pots.M = M;
    pots.T = T;
    pots.log_f = std::move(log_f);
    pots.log_g = std::move(log_g);
    pots.iterations = it;
    pots.residual_mu = rmu;
    pots.residual_nu = rnu;
    return pots;
}

BridgePath BridgePath::from_potentials(const SchrodingerPotentials& pots) {
    BridgePath p;
    p.M = pots.M;
    p.T = pots.T;
    p.log_f = pots.log_f;
    p.log_g = pots.log_g;
    Eigen::VectorXd pg = p.M->apply_heat_log(p.T, p.log_g);
    p.normalization = p.M->quadrature((p.log_f + pg).array().exp().matrix());
    return p;
}

BridgePath product_path(const ScalarField& f, const ScalarField& g, double T) {
    if (f.manifold.get() != g.manifold.get()) throw std::invalid_argument("fields on different manifolds");
    if (!(T > 0)) throw std::domain_error("horizon T must be positive");
    if (f.values.minCoeff() <= 0.0 || g.values.minCoeff() <= 0.0)
        throw std::domain_error("product_path requires strictly positive fields");
    BridgePath p;
    p.M = f.manifold;
    p.T = T;
    p.log_f = f.values.array().log().matrix();
    p.log_g = g.values.array().log().matrix();
    Eigen::VectorXd pg = p.M->apply_heat_log(T, p.log_g);
    p.normalization = p.M->quadrature((p.log_f + pg).array().exp().matrix());
    return p;
}

BridgePath dirac_bridge(const ManifoldPtr& M, int y_index, const Density& nu, double T) {
    if (nu.values().minCoeff() <= 0.0)
        throw std::domain_error("dirac_bridge requires a strictly positive terminal density");
    Eigen::VectorXd pT = M->heat_kernel_column(T, y_index);
    if (pT.minCoeff() <= 0.0)
        throw NumericalError("heat kernel column vanished at horizon T; increase resolution");
    BridgePath p;
    p.M = M;
    p.T = T;
    p.log_f = Eigen::VectorXd::Constant(M->point_count(), -1e4);
    p.log_f[y_index] = -std::log(M->weights()[y_index]);
    p.log_g = (nu.values().array().log() - pT.array().log()).matrix();
    Eigen::VectorXd pg = M->apply_heat_log(T, p.log_g);
    p.normalization = M->quadrature((p.log_f + pg).array().exp().matrix());
    return p;
}

namespace {

struct Slice {
    Eigen::VectorXd log_gt, log_ft, density;  // density normalized by Z
};

Slice path_slice(const BridgePath& path, double t) {
    Slice s;
    s.log_gt = path.M->apply_heat_log(path.T - t, path.log_g);
    s.log_ft = path.M->apply_heat_log(t, path.log_f);
    s.density = ((s.log_gt + s.log_ft).array().exp() / path.normalization).matrix();
    return s;
}

double check_time(const BridgePath& path, double t) {
    if (t < 0.0 || t > path.T) throw std::domain_error("time outside [0, T]");
    return t;
}

}  // namespace

Density interpolate(const BridgePath& path, double t, double* mass_drift) {
    check_time(path, t);
    Slice s = path_slice(path, t);
    const double mass = path.M->quadrature(s.density);
    if (mass_drift) *mass_drift = mass - 1.0;
    if (std::abs(mass - 1.0) > 1e-10)
        throw NumericalError("interpolated density mass drift " + format_float(mass - 1.0) +
                             " exceeds 1e-10 at t = " + format_float(t));
    return Density::normalized(ScalarField(path.M, std::move(s.density)));
}

double velocity_cost_sample(const BridgePath& path, double t) {
    check_time(path, t);
    Slice s = path_slice(path, t);
    ScalarField lgt(path.M, s.log_gt);
    Eigen::VectorXd g = gamma(lgt).values;
    return 4.0 * path.M->quadrature(g.cwiseProduct(s.density));
}

double velocity_cost_direct(const BridgePath& path, double t) {
    check_time(path, t);
    Slice s = path_slice(path, t);
    ScalarField phi(path.M, (s.log_gt - s.log_ft) + (s.log_gt + s.log_ft));
    Eigen::VectorXd g = gamma(phi).values;
    return path.M->quadrature(g.cwiseProduct(s.density));
}

namespace {

// 4 int [Phi(b) - Phi(a)] f dx / Z with Phi(t) = P_t(u_t log u_t), u_t = P_{T-t} g.
// This is the antiderivative of the velocity cost in t; used for the end
// layers that the kernel quadrature cannot resolve.
double velocity_antiderivative_span(const BridgePath& path, double a, double b) {
    const auto& M = *path.M;
    auto Phi = [&](double t) {
        Eigen::VectorXd lu = M.apply_heat_log(path.T - t, path.log_g);
        Eigen::VectorXd u = lu.array().exp().matrix();
        Eigen::VectorXd ulogu = u.cwiseProduct(lu);
        return Eigen::VectorXd(M.apply_heat(t, ulogu));
    };
    Eigen::VectorXd diff = Phi(b) - Phi(a);
    Eigen::VectorXd f = path.log_f.array().exp().matrix();
    return 4.0 * M.quadrature(diff.cwiseProduct(f)) / path.normalization;
}

double simpson_on(const BridgePath& path, double a, double b, int nodes) {
    const double h = (b - a) / (nodes - 1);
    double s = 0.0;
    for (int j = 0; j < nodes; ++j) {
        const double t = (j == nodes - 1) ? b : a + h * j;
        const double v = velocity_cost_sample(path, t);
        const double wgt = (j == 0 || j == nodes - 1) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
        s += wgt * v;
    }
    return s * h / 3.0;
}

}  // namespace

CostPair entropic_cost(const BridgePath& path, int time_nodes, double refine_tol, int max_nodes) {
    const auto& M = *path.M;
    const double T = path.T;
    // end layers below the kernel resolution floor are integrated exactly
    double cap = 0.0;
    double a = 0.0, b = T;
    const double floor_t = M.min_resolved_time();
    if (floor_t > 0.0 && 2.5 * floor_t < T) {
        a = 1.25 * floor_t;
        b = T - a;
        cap = velocity_antiderivative_span(path, 0.0, a) + velocity_antiderivative_span(path, b, T);
    }

    if (time_nodes < 5 || time_nodes % 2 == 0) time_nodes = 33;
    int nodes = time_nodes;
    double mid = simpson_on(path, a, b, nodes);
    double change = std::numeric_limits<double>::infinity();
    while (nodes < max_nodes) {
        const int next = 2 * (nodes - 1) + 1;
        const double refined = simpson_on(path, a, b, next);
        change = std::abs(refined - mid);
        mid = refined;
        nodes = next;
        if (change < refine_tol) break;
    }

    CostPair pair;
    pair.time_nodes = nodes;
    pair.last_refinement = change;
    pair.lambda_quadrature = cap + mid;

    // closed form: 4 int [P_T(g log g) - P_T g log P_T g] f dx / Z
    Eigen::VectorXd g = path.log_g.array().exp().matrix();
    Eigen::VectorXd glogg(g.size());
    for (int i = 0; i < g.size(); ++i) glogg[i] = g[i] > 0.0 ? g[i] * path.log_g[i] : 0.0;
    Eigen::VectorXd log_pg = M.apply_heat_log(T, path.log_g);
    Eigen::VectorXd pg = log_pg.array().exp().matrix();
    Eigen::VectorXd bracket = M.apply_heat(T, glogg) - pg.cwiseProduct(log_pg);
    Eigen::VectorXd f = path.log_f.array().exp().matrix();
    pair.lambda_closed = 4.0 * M.quadrature(bracket.cwiseProduct(f)) / path.normalization;

    Slice s0 = path_slice(path, 0.0);
    Slice sT = path_slice(path, T);
    pair.entropy_mu = slice_entropy(M, s0.density, s0.log_gt + s0.log_ft -
                                                      Eigen::VectorXd::Constant(s0.density.size(),
                                                                                std::log(path.normalization)));
    pair.entropy_nu = slice_entropy(M, sT.density, sT.log_gt + sT.log_ft -
                                                      Eigen::VectorXd::Constant(sT.density.size(),
                                                                                std::log(path.normalization)));
    const double two_dF = 2.0 * (pair.entropy_nu - pair.entropy_mu);
    pair.quadrature = pair.lambda_quadrature - two_dF;
    pair.closed_form = pair.lambda_closed - two_dF;
    return pair;
}

EnergyReport conserved_energy(const BridgePath& path, int samples) {
    const auto& M = *path.M;
    Eigen::VectorXd log_pg = M.apply_heat_log(path.T, path.log_g);
    Eigen::VectorXd pg = log_pg.array().exp().matrix();
    Eigen::VectorXd f = path.log_f.array().exp().matrix();
    EnergyReport rep;
    rep.value = 4.0 * M.quadrature(M.apply_generator(pg).cwiseProduct(f)) / path.normalization;
    rep.samples = samples;
    for (int k = 0; k < samples; ++k) {
        const double t = path.T * k / (samples - 1);
        Slice s = path_slice(path, t);
        ScalarField a(path.M, s.log_gt - s.log_ft);
        ScalarField b(path.M, s.log_gt + s.log_ft);
        Eigen::VectorXd diff = gamma(a).values - gamma(b).values;
        const double e = M.quadrature(diff.cwiseProduct(s.density));
        rep.sample_times.push_back(t);
        rep.sample_values.push_back(e);
        rep.max_deviation = std::max(rep.max_deviation, std::abs(e - rep.value));
    }
    return rep;
}

double energy_mid_gamma(const BridgePath& path) {
    Slice s = path_slice(path, path.T / 2.0);
    ScalarField gt(path.M, s.log_gt.array().exp().matrix());
    ScalarField ft(path.M, s.log_ft.array().exp().matrix());
    return -4.0 * path.M->quadrature(gamma(gt, ft).values) / path.normalization;
}

std::vector<InequalityReport> check_bridge_inequalities(const BridgePath& path, const BridgeMode& mode,
                                                        double tolerance) {
    const auto& M = *path.M;
    if (mode.family == BridgeMode::Family::rho_infinity) {
        if (mode.rho > M.curvature_rho() + 1e-12)
            throw CurvatureError("manifold " + to_string(M.kind()) + " only satisfies the exponential " +
                                 "convexity class up to rho = " + format_float(M.curvature_rho()) +
                                 "; requested rho = " + format_float(mode.rho));
    } else {
        if (!(M.curvature_rho() >= 0.0) || std::isinf(M.curvature_dim()))
            throw CurvatureError("manifold " + to_string(M.kind()) +
                                 " does not satisfy a finite-dimension nonnegative-curvature class");
        if (mode.n < M.curvature_dim() - 1e-12)
            throw CurvatureError("dimensional parameter n = " + format_float(mode.n) +
                                 " is below the manifold dimension " + format_float(M.curvature_dim()));
    }

    const double T = path.T;
    const double v0 = velocity_cost_sample(path, 0.0);
    const double vT = velocity_cost_sample(path, T);
    CostPair cost = entropic_cost(path);
    const double lhs_cost = cost.lambda_closed;  // = C_T + 2(F(nu) - F(mu))
    EnergyReport energy = conserved_energy(path);
    const double E = energy.value;

    std::vector<InequalityReport> out;
    auto tag = [&](InequalityReport r) {
        r.T = T;
        r.rho = mode.rho;
        r.dim_n = mode.n;
        out.push_back(r);
    };

    if (mode.family == BridgeMode::Family::rho_infinity) {
        const double rho = mode.rho;
        tag(InequalityReport::make("velocity-contraction", v0, std::exp(-2.0 * rho * T) * vT, tolerance));
        tag(InequalityReport::make("cost-upper", lhs_cost, contraction_coefficient(rho, T) * vT, tolerance));
        tag(InequalityReport::make("cost-lower", expansion_coefficient(rho, T) * v0, lhs_cost, tolerance));
    } else {
        const double n = mode.n;
        const double arg = (lhs_cost - T * E) / (2.0 * n);
        tag(InequalityReport::make("dimensional-exp-upper", std::exp(arg),
                                   1.0 + T / (2.0 * n) * (vT - E), tolerance));
        tag(InequalityReport::make("dimensional-exp-lower", std::exp(-arg),
                                   1.0 - T / (2.0 * n) * (v0 - E), tolerance));
        tag(InequalityReport::make("energy-upper", E, 2.0 * n / T + vT, tolerance));
        tag(InequalityReport::make("variational-li-yau", -2.0 * n / T + v0, E, tolerance));
    }
    return out;
}

}  // namespace ottolab
