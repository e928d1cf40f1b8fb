#pragma once

#include <map>
#include <memory>
#include <mutex>

#include <Eigen/Dense>

#include "kinhydro/field.hpp"
#include "kinhydro/grid.hpp"
#include "kinhydro/micromacro.hpp"

namespace kinhydro {

enum class Interpolation { Linear, Quadratic };

struct CollisionOptions {
    /// d = 2: number of angles; d = 3: number of polar nodes (2n^2 points).
    /// 0 picks 16 (d = 2) or 4 (d = 3).
    int n_sigma = 0;
    Interpolation interp = Interpolation::Quadratic;
    /// Interpolate f / M and multiply by the exact M(v') M(v'_*) = M(v) M(v_*).
    bool maxwell_weighted = true;
};

struct SplittingParams {
    double delta = 0.05;
    void validate() const;
};

/// Smooth cutoff in (|v|, |v - v_*|, |cos theta|), product of degree-5
/// smoothstep ramps between the plateau and support thresholds.
double theta_delta(const double* v, const double* v_star, const double* sigma, int d,
                   const SplittingParams& params);
double smoothstep5(double t);

/// Interpolation stencil of one off-grid velocity. Weights already include
/// the 1/M(node) factor when the operator is Maxwell-weighted.
struct Stencil {
    int n = 0;
    int idx[27];
    double w[27];
};

class CollisionOperator {
public:
    explicit CollisionOperator(std::shared_ptr<const VelocityGrid> v, CollisionOptions opt = {});

    const VelocityGrid& vgrid() const { return *v_; }
    const std::shared_ptr<const VelocityGrid>& vgrid_ptr() const { return v_; }
    const AngleQuadrature& angles() const { return quad_; }
    const CollisionOptions& options() const { return opt_; }
    const Profile& M() const { return M_; }
    const Profile& nu() const { return nu_; }
    const MacroBasis& macro() const { return *macro_; }

    /// Symmetrized Q(F, G) on raw N_x x N_v arrays, one spatial node per row.
    Eigen::MatrixXd q_raw(const Eigen::MatrixXd& F, const Eigen::MatrixXd& G) const;
    DistributionField q_bilinear(const DistributionField& f, const DistributionField& g,
                                 bool conserve_fix = false) const;
    /// Least-squares removal of the collision invariants: (I - Pi) per node.
    Eigen::MatrixXd conserve_rows(const Eigen::MatrixXd& Q) const;

    /// Dense velocity matrices assembled from the same (v_*, sigma) quadrature
    /// as q_raw; built on first use.
    const Eigen::MatrixXd& L() const;
    const Eigen::MatrixXd& K() const;
    /// (I - Pi) L (I - Pi): exact discrete conservation and exact kernel.
    const Eigen::MatrixXd& L_conserving() const;
    const Eigen::MatrixXd& A_delta(const SplittingParams& p) const;
    const Eigen::MatrixXd& B_bar(const SplittingParams& p) const;
    const Eigen::MatrixXd& B_tilde(const SplittingParams& p) const;
    /// B_delta = -nu + B_bar = L - A_delta.
    Eigen::MatrixXd B_delta(const SplittingParams& p) const;

    DistributionField linearized_l(const DistributionField& h) const;
    DistributionField k_apply(const DistributionField& h) const;
    DistributionField a_delta_apply(const DistributionField& f, const SplittingParams& p) const;
    DistributionField b_delta_apply(const DistributionField& f, const SplittingParams& p) const;
    DistributionField b_tilde_apply(const DistributionField& f, const SplittingParams& p) const;

    /// Interpolation stencil at an arbitrary velocity; false outside the hull.
    bool stencil(const double* y, Stencil& s) const;

private:
    struct DeltaMats {
        Eigen::MatrixXd A, Bbar, Btilde;
    };
    const DeltaMats& delta_mats(const SplittingParams& p) const;
    template <class Visit>
    void for_each_collision(int i, Visit&& visit) const;

    std::shared_ptr<const VelocityGrid> v_;
    CollisionOptions opt_;
    AngleQuadrature quad_;
    std::vector<int> half_;  // one sigma per antipodal pair
    Profile M_, nu_;
    Eigen::MatrixXd loss_;   // |v_i - v_j| w
    std::shared_ptr<MacroBasis> macro_;

    mutable std::mutex mu_;
    mutable Eigen::MatrixXd L_, K_, Lc_;
    mutable std::map<double, DeltaMats> delta_cache_;
};

/// H = sum F log F w_v w_x (F clamped below at 1e-300).
double entropy(const DistributionField& F);

struct Invariants {
    double mass = 0;
    Eigen::VectorXd momentum;
    double energy = 0;
};
/// Quadrature moments (1, v, |v|^2) integrated over the torus.
Invariants collision_invariants(const DistributionField& F);

struct RegimeConstants {
    double phi_p = 0;
    double alpha_B = 0;
    double alpha_Q = 0;
    double alpha_star = 0;
    double sigma_B = 0;
    bool flagged = false;  // sigma_B <= 0
};
double phi_p(double p, double alpha);
RegimeConstants regime_constants(double p, double alpha, int d, double nu0, double nu1);

struct CoercivityResult {
    double ratio = 0;           // <B^eps h, h>_alpha / (-eps^-2 ||h||^2_{E_nu})
    double form = 0;            // <B^eps h, h>_alpha
    double transport_form = 0;  // contribution of the transport term alone
    double nu_norm2 = 0;        // ||h||^2_{E_nu^{2, alpha}}
};
CoercivityResult coercivity_check(const CollisionOperator& op, const DistributionField& h,
                                  const SplittingParams& params, double epsilon, double alpha,
                                  double s = 2.0, bool include_transport = true);

}  // namespace kinhydro
