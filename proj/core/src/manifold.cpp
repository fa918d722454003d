#include "ottolab/manifold.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace ottolab {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr int kOuModalCap = 48;   // highest Hermite order used for derivatives
constexpr int kOuMaxPoints = 320; // beyond this the edge quadrature weights underflow
}  // namespace

std::string to_string(ManifoldKind k) {
    switch (k) {
        case ManifoldKind::circle: return "circle";
        case ManifoldKind::torus2d: return "torus2d";
        case ManifoldKind::ou_line: return "ou_line";
    }
    return "?";
}

std::shared_ptr<const GridManifold> GridManifold::build(ManifoldKind kind, int n, double geometry) {
    if (n < 8) throw ConfigError("n too small: need n >= 8 grid points per axis, got " + std::to_string(n));
    if (!(geometry > 0.0))
        throw ConfigError(std::string("geometry parameter must be positive (") +
                          (kind == ManifoldKind::ou_line ? "halfwidth R" : "length L") + ")");
    auto m = std::shared_ptr<GridManifold>(new GridManifold());
    m->kind_ = kind;
    m->n_ = n;
    m->geometry_ = geometry;
    if (kind == ManifoldKind::ou_line) {
        if (geometry < 1.0) throw ConfigError("halfwidth R too small: need R >= 1");
        if (n > kOuMaxPoints)
            throw ConfigError("n too large for ou_line: edge quadrature weights underflow beyond n = " +
                              std::to_string(kOuMaxPoints));
        m->build_ou_axis(n);
    } else {
        m->build_circle_axis(n, geometry);
    }
    m->finalize();
    return m;
}

void GridManifold::build_circle_axis(int n, double L) {
    SpectralAxis& ax = axis_;
    ax.nodes = Eigen::VectorXd::LinSpaced(n, 0.0, L * (n - 1) / n);
    ax.weights = Eigen::VectorXd::Constant(n, L / n);
    ax.basis.resize(n, n);
    ax.basis_deriv.resize(n, n);
    ax.eigenvalues.resize(n);

    const double inv_sqrt_L = 1.0 / std::sqrt(L);
    const double amp = std::sqrt(2.0 / L);
    int col = 0;
    ax.basis.col(col).setConstant(inv_sqrt_L);
    ax.basis_deriv.col(col).setZero();
    ax.eigenvalues[col] = 0.0;
    ++col;
    for (int k = 1; col < n; ++k) {
        const double om = 2.0 * kPi * k / L;
        if (2 * k == n) {
            // Nyquist cosine: sin(om x) vanishes at the nodes, so its
            // collocated derivative is zero while the generator keeps -om^2.
            for (int i = 0; i < n; ++i) ax.basis(i, col) = std::cos(om * ax.nodes[i]) * inv_sqrt_L;
            ax.basis_deriv.col(col).setZero();
            ax.eigenvalues[col] = -om * om;
            ++col;
        } else {
            for (int i = 0; i < n; ++i) {
                const double c = std::cos(om * ax.nodes[i]);
                const double s = std::sin(om * ax.nodes[i]);
                ax.basis(i, col) = amp * c;
                ax.basis_deriv(i, col) = -om * amp * s;
                ax.basis(i, col + 1) = amp * s;
                ax.basis_deriv(i, col + 1) = om * amp * c;
            }
            ax.eigenvalues[col] = -om * om;
            ax.eigenvalues[col + 1] = -om * om;
            col += 2;
        }
    }
    t_resolved_ = 0.0;
}

void GridManifold::build_ou_axis(int n) {
    SpectralAxis& ax = axis_;
    // Golub-Welsch on the probabilists' Hermite recurrence (off-diagonal sqrt(k)).
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(n - 1);
    for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) throw NumericalError("Gauss quadrature eigensolve failed");
    ax.nodes = es.eigenvalues();
    ax.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        const double v0 = es.eigenvectors()(0, i);
        ax.weights[i] = v0 * v0;  // total mass 1 (standard normal reference)
    }
    // enforce exact symmetry of the rule
    for (int i = 0; i < n / 2; ++i) {
        const int j = n - 1 - i;
        const double xm = 0.5 * (ax.nodes[j] - ax.nodes[i]);
        ax.nodes[i] = -xm;
        ax.nodes[j] = xm;
        const double wm = 0.5 * (ax.weights[i] + ax.weights[j]);
        ax.weights[i] = ax.weights[j] = wm;
    }
    if (n % 2 == 1) ax.nodes[n / 2] = 0.0;
    ax.weights *= 1.0 / ax.weights.sum();
    if (ax.weights.minCoeff() <= 0.0)
        throw NumericalError("nonpositive quadrature weight in Gauss-Hermite rule");

    const int K = std::min(n, kOuModalCap);
    ax.basis.resize(n, K);
    ax.basis_deriv.resize(n, K);
    ax.eigenvalues.resize(K);
    ax.basis.col(0).setOnes();
    if (K > 1) ax.basis.col(1) = ax.nodes;
    for (int k = 1; k + 1 < K; ++k)
        ax.basis.col(k + 1) =
            (ax.nodes.cwiseProduct(ax.basis.col(k)) - std::sqrt(static_cast<double>(k)) * ax.basis.col(k - 1)) /
            std::sqrt(static_cast<double>(k + 1));
    ax.basis_deriv.col(0).setZero();
    for (int k = 1; k < K; ++k)
        ax.basis_deriv.col(k) = std::sqrt(static_cast<double>(k)) * ax.basis.col(k - 1);
    for (int k = 0; k < K; ++k) ax.eigenvalues[k] = -static_cast<double>(k);

    log_axis_weights_ = ax.weights.array().log().matrix();
    // kernel quadrature trust threshold: variance >= (2.8 h)^2 at the bulk spacing
    const double h = kPi / std::sqrt(4.0 * n + 2.0);
    const double s2 = std::min(0.9, 8.0 * h * h);
    t_resolved_ = -0.5 * std::log1p(-s2);
}

void GridManifold::finalize() {
    SpectralAxis& ax = axis_;
    ax.analysis = ax.basis.transpose() * ax.weights.asDiagonal();
    // discrete orthonormality is exact by construction; a large defect means
    // a broken spectral setup
    Eigen::MatrixXd gram = ax.analysis * ax.basis;
    gram.diagonal().array() -= 1.0;
    if (gram.cwiseAbs().maxCoeff() > 1e-10)
        throw NumericalError("spectral basis failed orthonormality check");

    const int n = n_;
    if (kind_ == ManifoldKind::torus2d) {
        total_points_ = n * n;
        weights_.resize(total_points_);
        coord_[0].resize(total_points_);
        coord_[1].resize(total_points_);
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                const int i = ix + n * iy;
                weights_[i] = ax.weights[ix] * ax.weights[iy];
                coord_[0][i] = ax.nodes[ix];
                coord_[1][i] = ax.nodes[iy];
            }
    } else {
        total_points_ = n;
        weights_ = ax.weights;
        coord_[0] = ax.nodes;
    }

    interior_.clear();
    if (kind_ == ManifoldKind::ou_line) {
        const double cut = 0.9 * geometry_;
        for (int i = 0; i < total_points_; ++i)
            if (std::abs(coord_[0][i]) <= cut) interior_.push_back(i);
        if (interior_.size() < 8)
            throw ConfigError("halfwidth R leaves fewer than 8 interior points at this n");
    } else {
        interior_.resize(total_points_);
        for (int i = 0; i < total_points_; ++i) interior_[i] = i;
    }
}

double GridManifold::volume() const {
    switch (kind_) {
        case ManifoldKind::circle: return geometry_;
        case ManifoldKind::torus2d: return geometry_ * geometry_;
        case ManifoldKind::ou_line: return 1.0;
    }
    return 0.0;
}

const Eigen::VectorXd& GridManifold::coordinate(int axis) const {
    if (axis < 0 || axis >= dimension()) throw std::out_of_range("axis index");
    return coord_[axis];
}

double GridManifold::curvature_rho() const { return kind_ == ManifoldKind::ou_line ? 1.0 : 0.0; }

double GridManifold::curvature_dim() const {
    switch (kind_) {
        case ManifoldKind::circle: return 1.0;
        case ManifoldKind::torus2d: return 2.0;
        case ManifoldKind::ou_line: return std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

Eigen::VectorXd GridManifold::eigenvalues_full() const {
    if (kind_ != ManifoldKind::torus2d) {
        Eigen::VectorXd ev = axis_.eigenvalues;
        std::sort(ev.data(), ev.data() + ev.size(), std::greater<double>());
        return ev;
    }
    const int K = axis_.modes();
    Eigen::VectorXd ev(K * K);
    int c = 0;
    for (int j = 0; j < K; ++j)
        for (int k = 0; k < K; ++k) ev[c++] = axis_.eigenvalues[j] + axis_.eigenvalues[k];
    std::sort(ev.data(), ev.data() + ev.size(), std::greater<double>());
    return ev;
}

Eigen::MatrixXd GridManifold::mehler_matrix(double t) const {
    const int n = n_;
    const double r = std::exp(-t);
    const double s2 = -std::expm1(-2.0 * t);
    const double lognorm = -0.5 * std::log(s2);
    Eigen::MatrixXd H(n, n);
    const auto& x = axis_.nodes;
    for (int j = 0; j < n; ++j) {
        const double xj = x[j];
        const double lw = log_axis_weights_[j];
        for (int i = 0; i < n; ++i) {
            const double xi = x[i];
            const double q = (r * r * (xi * xi + xj * xj) - 2.0 * r * xi * xj) / (2.0 * s2);
            H(i, j) = std::exp(lw + lognorm - q);
        }
    }
    return H;
}

Eigen::MatrixXd GridManifold::heat_matrix_1d(double t) const {
    if (t < 0) throw std::domain_error("heat time must be nonnegative");
    if (kind_ == ManifoldKind::ou_line) {
        if (t == 0.0) return Eigen::MatrixXd::Identity(n_, n_);
        return mehler_matrix(t);
    }
    Eigen::VectorXd decay = (axis_.eigenvalues.array() * t).exp();
    return axis_.basis * decay.asDiagonal() * axis_.analysis;
}

Eigen::VectorXd GridManifold::apply_axis_op(const Eigen::MatrixXd& op1d, const Eigen::VectorXd& v, int ax) const {
    if (kind_ != ManifoldKind::torus2d) return op1d * v;
    Eigen::Map<const Eigen::MatrixXd> F(v.data(), n_, n_);
    Eigen::VectorXd out(total_points_);
    Eigen::Map<Eigen::MatrixXd> O(out.data(), n_, n_);
    if (ax == 0)
        O = op1d * F;
    else
        O = F * op1d.transpose();
    return out;
}

Eigen::VectorXd GridManifold::apply_heat(double t, const Eigen::VectorXd& v) const {
    if (t < 0) throw std::domain_error("heat time must be nonnegative, got t = " + std::to_string(t));
    if (t == 0.0) return v;
    switch (kind_) {
        case ManifoldKind::circle: {
            Eigen::VectorXd c = axis_.analysis * v;
            c.array() *= (axis_.eigenvalues.array() * t).exp();
            return axis_.basis * c;
        }
        case ManifoldKind::ou_line:
            return mehler_matrix(t) * v;
        case ManifoldKind::torus2d: {
            Eigen::MatrixXd H = heat_matrix_1d(t);
            return apply_axis_op(H, apply_axis_op(H, v, 0), 1);
        }
    }
    return v;
}

Eigen::VectorXd GridManifold::apply_heat_log(double t, const Eigen::VectorXd& logv) const {
    if (t == 0.0) return logv;
    const double shift = logv.maxCoeff();
    Eigen::VectorXd u = (logv.array() - shift).exp();
    Eigen::VectorXd h = apply_heat(t, u);
    return h.unaryExpr([shift](double x) { return safe_log(x) + shift; });
}

Eigen::VectorXd GridManifold::apply_generator(const Eigen::VectorXd& v) const {
    if (kind_ == ManifoldKind::torus2d) {
        Eigen::MatrixXd G = axis_.basis * axis_.eigenvalues.asDiagonal() * axis_.analysis;
        return apply_axis_op(G, v, 0) + apply_axis_op(G, v, 1);
    }
    Eigen::VectorXd c = axis_.analysis * v;
    c.array() *= axis_.eigenvalues.array();
    return axis_.basis * c;
}

Eigen::VectorXd GridManifold::derivative(int ax, const Eigen::VectorXd& v) const {
    if (ax < 0 || ax >= dimension()) throw std::out_of_range("axis index");
    if (kind_ == ManifoldKind::torus2d) {
        Eigen::MatrixXd D = axis_.basis_deriv * axis_.analysis;
        return apply_axis_op(D, v, ax);
    }
    return axis_.basis_deriv * (axis_.analysis * v);
}

Eigen::VectorXd GridManifold::heat_kernel_column(double t, int y_index) const {
    if (y_index < 0 || y_index >= total_points_) throw std::out_of_range("heat kernel center index");
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(total_points_);
    delta[y_index] = 1.0 / weights_[y_index];
    return apply_heat(t, delta);
}

// ---------- fields ----------

ScalarField::ScalarField(ManifoldPtr m, Eigen::VectorXd v) : manifold(std::move(m)), values(std::move(v)) {
    if (!manifold) throw std::invalid_argument("ScalarField requires a manifold");
    if (values.size() != manifold->point_count())
        throw std::invalid_argument("field length does not match manifold point count");
    if (!values.allFinite()) throw NumericalError("field contains non-finite values");
}

ScalarField ScalarField::constant(const ManifoldPtr& m, double c) {
    return ScalarField(m, Eigen::VectorXd::Constant(m->point_count(), c));
}

static void check_same_manifold(const ScalarField& a, const ScalarField& b) {
    if (a.manifold.get() != b.manifold.get())
        throw std::invalid_argument("fields live on different manifolds");
}

Density Density::normalized(ScalarField f) {
    double mn = f.values.minCoeff();
    if (mn < -1e-12) throw NumericalError("density has negative values (min " + format_float(mn) + ")");
    if (mn < 0.0) f.values = f.values.cwiseMax(0.0);
    const double mass = f.manifold->quadrature(f.values);
    if (!(mass > 0.0)) throw NumericalError("density has nonpositive total mass");
    f.values /= mass;
    Density d;
    d.field = std::move(f);
    return d;
}

Density Density::validated(ScalarField f) {
    if (f.values.minCoeff() < 0.0) throw NumericalError("density has negative values");
    const double mass = f.manifold->quadrature(f.values);
    if (std::abs(mass - 1.0) > 1e-12)
        throw NumericalError("density mass " + format_float(mass) + " is not 1 within 1e-12");
    Density d;
    d.field = std::move(f);
    return d;
}

ScalarField heat_apply(const ScalarField& f, double t, HeatClampInfo* clamp) {
    const bool nonneg_input = f.values.minCoeff() >= 0.0;
    Eigen::VectorXd out = f.manifold->apply_heat(t, f.values);
    if (nonneg_input) {
        const double mn = out.minCoeff();
        if (mn < -1e-12)
            throw NumericalError("heat semigroup lost positivity (undershoot " + format_float(mn) +
                                 "): broken spectral setup or unresolved input");
        if (mn < 0.0) {
            int count = 0;
            for (int i = 0; i < out.size(); ++i)
                if (out[i] < 0.0) {
                    out[i] = 0.0;
                    ++count;
                }
            if (clamp) {
                clamp->max_undershoot = std::min(clamp->max_undershoot, mn);
                clamp->clamped_points += count;
            }
        }
    }
    return ScalarField(f.manifold, std::move(out));
}

Density dual_apply(const Density& mu, double t) {
    // the dual semigroup acts on densities w.r.t. the reference measure by
    // the (self-adjoint) semigroup itself
    ScalarField evolved = heat_apply(mu.field, t);
    const double mass = integrate(evolved);
    if (std::abs(mass - 1.0) > 1e-12)
        throw NumericalError("dual semigroup failed to conserve mass (drift " + format_float(mass - 1.0) +
                             "); the density is too sharp for this grid resolution at t = " + format_float(t));
    Density d;
    d.field = std::move(evolved);
    return d;
}

ScalarField apply_generator(const ScalarField& f) {
    return ScalarField(f.manifold, f.manifold->apply_generator(f.values));
}

ScalarField gamma(const ScalarField& f, const ScalarField& g) {
    check_same_manifold(f, g);
    const auto& M = *f.manifold;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(f.size());
    for (int ax = 0; ax < M.dimension(); ++ax)
        out.array() += M.derivative(ax, f.values).array() * M.derivative(ax, g.values).array();
    return ScalarField(f.manifold, std::move(out));
}

ScalarField gamma(const ScalarField& f) { return gamma(f, f); }

ScalarField gamma2(const ScalarField& f) {
    ScalarField gf = gamma(f);
    ScalarField lf = apply_generator(f);
    Eigen::VectorXd out = 0.5 * f.manifold->apply_generator(gf.values) - gamma(f, lf).values;
    return ScalarField(f.manifold, std::move(out));
}

double integrate(const ScalarField& f) { return f.manifold->quadrature(f.values); }

double entropy(const Density& mu) {
    const auto& v = mu.values();
    const auto& w = mu.manifold()->weights();
    double s = 0.0;
    for (int i = 0; i < v.size(); ++i)
        if (v[i] > 0.0) s += w[i] * v[i] * std::log(v[i]);
    return s;
}

double fisher_info(const Density& mu) {
    const auto& v = mu.values();
    for (int i = 0; i < v.size(); ++i)
        if (!(v[i] > 0.0))
            throw std::domain_error("fisher_info requires a strictly positive density; point " +
                                    std::to_string(i) + " is nonpositive");
    ScalarField logd(mu.manifold(), v.array().log().matrix());
    ScalarField g = gamma(logd);
    return mu.manifold()->quadrature(g.values.cwiseProduct(v));
}

InequalityReport check_cd(const ManifoldPtr& M, double rho, double n,
                          const std::vector<ScalarField>& trial_fields, double tolerance) {
    if (trial_fields.empty()) throw std::invalid_argument("check_cd requires at least one trial field");
    if (!(n > 0)) throw std::invalid_argument("check_cd requires n in (0, inf]");
    const double inv_n = std::isinf(n) ? 0.0 : 1.0 / n;
    double worst = std::numeric_limits<double>::infinity();
    int worst_point = -1;
    for (const auto& f : trial_fields) {
        Eigen::VectorXd slack = gamma2(f).values - rho * gamma(f).values;
        if (inv_n != 0.0) slack -= inv_n * apply_generator(f).values.array().square().matrix();
        for (int i : M->interior_indices())
            if (slack[i] < worst) {
                worst = slack[i];
                worst_point = i;
            }
    }
    auto rep = InequalityReport::make("curvature-dimension", 0.0, worst, tolerance,
                                      "point " + std::to_string(worst_point));
    rep.rho = rho;
    rep.dim_n = n;
    return rep;
}

ScalarField heat_kernel_column(const ManifoldPtr& M, double t, int y_index) {
    return ScalarField(M, M->heat_kernel_column(t, y_index));
}

}  // namespace ottolab
