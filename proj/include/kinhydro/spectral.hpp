#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "kinhydro/collision.hpp"
#include "kinhydro/field.hpp"
#include "kinhydro/micromacro.hpp"

namespace kinhydro {

/// Tensor polynomials of total degree <= K times M, orthonormal in the grid
/// L^2(M^{-1}) inner product.
class GalerkinBasis {
public:
    GalerkinBasis(std::shared_ptr<const CollisionOperator> op, int K = 8);

    int degree() const { return K_; }
    int size() const { return static_cast<int>(phi_.cols()); }
    int dim() const { return op_->vgrid().dim(); }
    const CollisionOperator& op() const { return *op_; }
    const std::shared_ptr<const CollisionOperator>& op_ptr() const { return op_; }

    /// N_v x size(): grid values of the basis functions.
    const Eigen::MatrixXd& phi() const { return phi_; }
    /// Galerkin matrix of the linearized operator, symmetrized.
    const Eigen::MatrixXd& L() const { return L_; }
    /// ||G - G^T|| / ||G|| of the raw Galerkin matrix.
    double raw_asymmetry() const { return asym_; }
    /// Galerkin matrix of multiplication by v_k (symmetric).
    const Eigen::MatrixXd& V(int k) const { return V_[k]; }
    /// size() x (d+2) orthonormal coordinates of the macroscopic subspace,
    /// columns aligned with (rho, u, theta) through the metric.
    const Eigen::MatrixXd& kernel() const { return Q0_; }
    /// Coordinates of the moment basis E (size() x (d+2)).
    const Eigen::MatrixXd& kernel_coords() const { return E0_; }

    Eigen::VectorXd coords(const Profile& f) const;
    Profile values(const Eigen::VectorXd& c) const { return phi_ * c; }

    /// Pseudo-inverse of L on the orthogonal complement of the kernel.
    const Eigen::MatrixXd& L_pinv() const { return Lp_; }
    /// Eigenvalues of L, ascending.
    const Eigen::VectorXd& L_eigenvalues() const { return evals_; }
    /// Spectral gap: -(largest eigenvalue outside the d+2 kernel).
    double gap() const;

private:
    std::shared_ptr<const CollisionOperator> op_;
    int K_;
    Eigen::MatrixXd phi_, L_, Q0_, E0_, Lp_;
    std::vector<Eigen::MatrixXd> V_;
    Eigen::VectorXd evals_;
    double asym_ = 0;
};

/// Matrix of L + i v.xi in the basis.
Eigen::MatrixXcd assemble_operator(const Eigen::VectorXd& xi, const GalerkinBasis& basis);

struct SpectralBranch {
    int j = 0;             // -1, 0, +1, 2
    int multiplicity = 1;  // d - 1 for j = 2
    std::vector<double> xi;
    std::vector<cplx> lambda;              // mean over the multiplicity
    std::vector<Eigen::MatrixXcd> projector;
    cplx lambda1 = 0;      // fitted, purely imaginary
    double lambda2 = 0;    // fitted, real
    double fit_residual = 0;
    bool flagged = false;
};

struct BranchSet {
    Eigen::VectorXd direction;
    std::vector<SpectralBranch> branches;  // order -1, 0, +1, 2
    double gap = 0;
    const SpectralBranch& branch(int j) const;
};

/// Eigenvalue curves of L + i v.xi along one direction, continued from the
/// smallest |xi| by subspace overlap.
BranchSet eigen_branches(const Eigen::VectorXd& direction, const std::vector<double>& xi_mags,
                         const GalerkinBasis& basis);

struct DispersionFit {
    cplx c1 = 0, c2 = 0;   // raw complex least-squares coefficients
    cplx lambda1 = 0;      // i Im c1
    double lambda2 = 0;    // Re c2
    double residual = 0;   // max |lambda - fit|
    bool flagged = false;
};
DispersionFit fit_dispersion(const std::vector<double>& xi, const std::vector<cplx>& lambda);
DispersionFit fit_dispersion(const SpectralBranch& b);

/// Transport coefficients entering the limit system.
struct HydroCoefficients {
    double mu = 0;     // kinematic viscosity
    double kappa = 0;  // heat conductivity
    double c = 0;      // speed of sound
    double gamma = 0;  // acoustic damping ((d-1) mu + kappa) / d
};

struct ChapmanEnskog {
    Eigen::MatrixXd Phi;  // N_v x d^2, entry (i, a*d+b)
    Eigen::MatrixXd phi;  // N_v x d
    double mu = 0, kappa = 0, c = 0, gamma = 0;
    double ortho_residual = 0;  // largest kernel component of Phi, phi
    HydroCoefficients coefficients() const { return {mu, kappa, c, gamma}; }
};

/// Solves L Phi = (|v|^2/d Id - v(x)v) M and L phi = v((d+2)/2 - |v|^2/2) M in
/// the Galerkin space; c from the acoustic branch slope.
ChapmanEnskog chapman_enskog(const GalerkinBasis& basis);
/// Same solves with the full grid operator instead of the Galerkin surrogate;
/// c is the linearized Euler value.
ChapmanEnskog chapman_enskog_grid(const CollisionOperator& op);

struct HydroProjector {
    Eigen::MatrixXcd flat, P0, P1;
    /// Per-branch pieces, order -1, 0, +1, 2.
    std::array<Eigen::MatrixXcd, 4> flat_j, P0_j, P1_j;
};
HydroProjector hydro_projector(const Eigen::VectorXd& xi, const GalerkinBasis& basis);

/// U^0(t): heat flow on the Boussinesq part, Stokes flow on P u.
DistributionField u0_apply(const MacroFields& m, double t, const HydroCoefficients& hc,
                           std::shared_ptr<const VelocityGrid> v, const MacroBasis& mb);
DistributionField u0_apply(const DistributionField& f, double t, const HydroCoefficients& hc,
                           const MacroBasis& mb);
/// U^eps_disp(t): damped acoustic waves on the ill-prepared part.
DistributionField acoustic_propagate(const DistributionField& f, double t, double epsilon,
                                     const HydroCoefficients& hc, const MacroBasis& mb);

/// Source of the kinetic NSF system for one collision term:
/// Pi_WP (v.grad_x) L^{-1} Q, returned as macro fields.
MacroFields psi0_source(const DistributionField& q, const CollisionOperator& op,
                        const Eigen::MatrixXd& L_pinv);
/// Pseudo-inverse of the grid operator on the complement of its kernel.
Eigen::MatrixXd grid_l_pinv(const CollisionOperator& op);

struct Psi0Result {
    DistributionField value;
    bool flagged = false;  // fewer than 8 samples per diffusion time
};
/// Trapezoidal Psi^0(t) from Q samples at times k * dt, k = 0..n-1 with
/// (n-1) dt = t.
Psi0Result psi0_apply(const std::vector<DistributionField>& q_history, double dt,
                      const HydroCoefficients& hc, const CollisionOperator& op,
                      const Eigen::MatrixXd& L_pinv);

}  // namespace kinhydro
