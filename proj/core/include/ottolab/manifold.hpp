#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ottolab/report.hpp"
#include "ottolab/util.hpp"

namespace ottolab {

enum class ManifoldKind { circle, torus2d, ou_line };

std::string to_string(ManifoldKind k);

// Spectral data for one spatial axis: collocation nodes, quadrature weights,
// and a discretely orthonormal eigenbasis of the generator together with the
// pointwise derivatives of the basis functions.
struct SpectralAxis {
    Eigen::VectorXd nodes;        // n
    Eigen::VectorXd weights;      // n, strictly positive
    Eigen::MatrixXd basis;        // n x K
    Eigen::MatrixXd basis_deriv;  // n x K
    Eigen::VectorXd eigenvalues;  // K, all <= 0
    Eigen::MatrixXd analysis;     // K x n  (= basis^T diag(weights))
    int modes() const { return static_cast<int>(eigenvalues.size()); }
};

struct HeatClampInfo {
    double max_undershoot = 0.0;  // most negative value seen before clamping
    int clamped_points = 0;
};

// A discretized model space with exact-to-quadrature spectral calculus.
//
//   circle : uniform grid on [0, L), Fourier basis, generator d^2/dx^2
//            (eigenvalues -(2 pi k / L)^2)
//   torus2d: tensor square of the circle axis
//   ou_line: Gauss-Hermite collocation for L f = f'' - x f', reference
//            measure = standard Gaussian, Hermite eigenbasis (eigenvalue -k).
//            The heat semigroup is applied through its closed-form kernel
//            (the spectral sum in closed form), which is strictly positive
//            and exact for t above min_resolved_time(); the modal basis is
//            capped at 48 modes and drives derivatives and the generator.
//
// All operations are const and the object is immutable after build; any
// number of threads may use one manifold concurrently.
class GridManifold {
public:
    // geometry: domain length L per axis (circle/torus), or the pointwise
    // trust half-width R for ou_line (checks exclude |x| > 0.9 R).
    static std::shared_ptr<const GridManifold> build(ManifoldKind kind, int n, double geometry);

    ManifoldKind kind() const { return kind_; }
    int axis_points() const { return n_; }
    int point_count() const { return total_points_; }
    int dimension() const { return kind_ == ManifoldKind::torus2d ? 2 : 1; }
    double geometry() const { return geometry_; }
    double volume() const;

    const Eigen::VectorXd& weights() const { return weights_; }
    // coordinate of every grid point along the given axis (flattened layout;
    // torus index i = ix + n*iy)
    const Eigen::VectorXd& coordinate(int axis) const;
    const SpectralAxis& axis() const { return axis_; }

    // reference curvature class: (0,1) circle, (0,2) torus, (1,inf) ou_line
    double curvature_rho() const;
    double curvature_dim() const;  // +inf for ou_line

    // every modal eigenvalue of the generator (tensor sums on the torus),
    // sorted by decreasing value (0 first)
    Eigen::VectorXd eigenvalues_full() const;

    // indices where pointwise checks are trusted (all points on circle and
    // torus; |x| <= 0.9 R on ou_line)
    const std::vector<int>& interior_indices() const { return interior_; }

    // Smallest t at which the ou_line kernel quadrature is exact to rounding;
    // 0 on circle/torus. Heat applications on ou_line with 0 < t below this
    // threshold lose accuracy (the kernel is narrower than the node spacing).
    double min_resolved_time() const { return t_resolved_; }

    // raw-vector operations (ScalarField wrappers below)
    Eigen::VectorXd apply_heat(double t, const Eigen::VectorXd& v) const;
    // log-domain heat: returns log(P_t exp(logv)) with overflow-safe shifting
    Eigen::VectorXd apply_heat_log(double t, const Eigen::VectorXd& logv) const;
    Eigen::VectorXd apply_generator(const Eigen::VectorXd& v) const;
    Eigen::VectorXd derivative(int ax, const Eigen::VectorXd& v) const;
    double quadrature(const Eigen::VectorXd& v) const { return weights_.dot(v); }

    // dense action of P_t, reusable across many applications at the same t
    Eigen::MatrixXd heat_matrix_1d(double t) const;  // per-axis (circle/torus) or full (ou)

    // heat-kernel column p_t^y as a density in the second argument
    Eigen::VectorXd heat_kernel_column(double t, int y_index) const;

private:
    GridManifold() = default;
    void build_circle_axis(int n, double L);
    void build_ou_axis(int n);
    void finalize();
    Eigen::MatrixXd mehler_matrix(double t) const;
    Eigen::VectorXd apply_axis_op(const Eigen::MatrixXd& op1d, const Eigen::VectorXd& v, int ax) const;

    ManifoldKind kind_ = ManifoldKind::circle;
    int n_ = 0;
    int total_points_ = 0;
    double geometry_ = 0.0;
    double t_resolved_ = 0.0;
    SpectralAxis axis_;
    Eigen::VectorXd weights_;      // flattened over all points
    Eigen::VectorXd coord_[2];
    Eigen::VectorXd log_axis_weights_;  // ou_line kernel assembly
    std::vector<int> interior_;
};

using ManifoldPtr = std::shared_ptr<const GridManifold>;

// A grid function: one value per grid point.
struct ScalarField {
    ManifoldPtr manifold;
    Eigen::VectorXd values;

    ScalarField() = default;
    ScalarField(ManifoldPtr m, Eigen::VectorXd v);

    int size() const { return static_cast<int>(values.size()); }
    // builds a field from a function of the point coordinates; accepts either
    // f(x) on one-dimensional manifolds or f(x, y) (called with y = 0 in 1d)
    template <typename F>
    static ScalarField from_function(const ManifoldPtr& m, F&& f) {
        Eigen::VectorXd v(m->point_count());
        for (int i = 0; i < m->point_count(); ++i) {
            if constexpr (std::is_invocable_v<F, double, double>) {
                const double y = m->dimension() == 2 ? m->coordinate(1)[i] : 0.0;
                v[i] = f(m->coordinate(0)[i], y);
            } else {
                if (m->dimension() != 1)
                    throw std::invalid_argument("one-dimensional function on a two-dimensional manifold");
                v[i] = f(m->coordinate(0)[i]);
            }
        }
        return ScalarField(m, std::move(v));
    }
    static ScalarField constant(const ManifoldPtr& m, double c);
};

// Nonnegative grid function with unit quadrature mass.
struct Density {
    ScalarField field;

    // normalizes a nonnegative field to unit mass (values in [-1e-12, 0) are
    // clamped to zero; anything more negative is an error)
    static Density normalized(ScalarField f);
    // validates the invariants without rescaling
    static Density validated(ScalarField f);

    const Eigen::VectorXd& values() const { return field.values; }
    const ManifoldPtr& manifold() const { return field.manifold; }
};

// ---- grid_semigroup operations ----

ScalarField heat_apply(const ScalarField& f, double t, HeatClampInfo* clamp = nullptr);
Density dual_apply(const Density& mu, double t);
ScalarField apply_generator(const ScalarField& f);
ScalarField gamma(const ScalarField& f, const ScalarField& g);
ScalarField gamma(const ScalarField& f);
ScalarField gamma2(const ScalarField& f);
double integrate(const ScalarField& f);
double entropy(const Density& mu);
double fisher_info(const Density& mu);

// min over trial fields and interior points of
//   Gamma2(f) - rho Gamma(f) - (Lf)^2 / n        (n may be +inf)
InequalityReport check_cd(const ManifoldPtr& M, double rho, double n,
                          const std::vector<ScalarField>& trial_fields,
                          double tolerance = 1e-9);

ScalarField heat_kernel_column(const ManifoldPtr& M, double t, int y_index);

}  // namespace ottolab
