#pragma once

#include <memory>

#include <Eigen/Dense>

#include "kinhydro/field.hpp"
#include "kinhydro/grid.hpp"

namespace kinhydro {

/// (rho, u, theta) on the spatial grid; u is N_x x d.
struct MacroFields {
    MacroFields() = default;
    explicit MacroFields(std::shared_ptr<const SpatialGrid> x);

    int dim() const { return x ? x->dim() : 0; }
    int nx() const { return static_cast<int>(rho.size()); }
    const SpatialGrid& xgrid() const { return *x; }

    std::shared_ptr<const SpatialGrid> x;
    Eigen::VectorXd rho;
    Eigen::MatrixXd u;
    Eigen::VectorXd theta;
};

/// Discrete macroscopic structure of one velocity grid.
///
/// U holds the moment test functions times M, {M, v_k M, (|v|^2-d) M / d}, so
/// that moments are m = U^T W f with W = diag(w / M). The infinitesimal
/// Maxwellian basis is E = U (U^T W U)^{-1}; it is the exact right inverse of
/// the moment map and spans the same space as {M, v M, |v|^2 M}.
class MacroBasis {
public:
    explicit MacroBasis(const VelocityGrid& grid);

    int dim() const { return d_; }
    int rank() const { return d_ + 2; }
    const Profile& M() const { return M_; }
    const Eigen::MatrixXd& U() const { return U_; }
    const Eigen::MatrixXd& E() const { return E_; }
    /// W U: moments of a profile are moment_weights()^T f.
    const Eigen::MatrixXd& moment_weights() const { return WU_; }
    /// Gram-corrected projector Pi = E (W U)^T (N_v x N_v).
    const Eigen::MatrixXd& pi() const { return Pi_; }
    /// E^T W E: metric of macro coefficients (rho, u, theta).
    const Eigen::MatrixXd& metric() const { return G_; }
    /// Coefficient a of the well-prepared pair (a, -a): orthogonal projection
    /// of (rho, theta) onto the Boussinesq line in the discrete metric.
    double wp_coefficient(double rho, double theta) const;
    /// Unit-sum direction (n_rho, n_theta) complementary to (1, -1).
    std::array<double, 2> acoustic_direction() const { return {n_rho_, n_theta_}; }

private:
    int d_;
    Profile M_;
    Eigen::MatrixXd U_, E_, WU_, Pi_, G_;
    double wp_r_, wp_t_, n_rho_, n_theta_;
};

MacroFields moments(const DistributionField& f);
MacroFields moments(const DistributionField& f, const MacroBasis& mb);
DistributionField project_pi(const DistributionField& f);
DistributionField project_pi(const DistributionField& f, const MacroBasis& mb);

/// Leray projection of an N_x x d vector field, modewise in Fourier space.
Eigen::MatrixXd leray_project(const SpatialGrid& x, const Eigen::MatrixXd& u);
/// Spectral divergence, returned on the grid.
Eigen::VectorXd divergence(const SpatialGrid& x, const Eigen::MatrixXd& u);

/// (rho_bar, u_bar, theta_bar) = (a, P u, -a).
MacroFields well_prepared_part(const MacroFields& m, const MacroBasis& mb);

struct SplitParts {
    DistributionField wp, ip, perp;
};
SplitParts split_initial(const DistributionField& f);
SplitParts split_initial(const DistributionField& f, const MacroBasis& mb);

DistributionField infinitesimal_maxwellian(const MacroFields& m,
                                           std::shared_ptr<const VelocityGrid> v);
DistributionField infinitesimal_maxwellian(const MacroFields& m,
                                           std::shared_ptr<const VelocityGrid> v,
                                           const MacroBasis& mb);

}  // namespace kinhydro
