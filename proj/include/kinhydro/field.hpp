#pragma once

#include <memory>

#include <Eigen/Dense>

#include "kinhydro/grid.hpp"

namespace kinhydro {

enum class Role { Absolute, Fluctuation };

/// Samples on (x-grid) x (v-grid). Storage is an N_x x N_v column-major
/// matrix, so every velocity node owns a contiguous spatial slice.
class DistributionField {
public:
    DistributionField() = default;
    DistributionField(std::shared_ptr<const VelocityGrid> v,
                      std::shared_ptr<const SpatialGrid> x,
                      Role role = Role::Fluctuation);

    const VelocityGrid& vgrid() const { return *v_; }
    const SpatialGrid& xgrid() const { return *x_; }
    const std::shared_ptr<const VelocityGrid>& vgrid_ptr() const { return v_; }
    const std::shared_ptr<const SpatialGrid>& xgrid_ptr() const { return x_; }

    int nx() const { return static_cast<int>(data.rows()); }
    int nv() const { return static_cast<int>(data.cols()); }
    double& operator()(int ix, int iv) { return data(ix, iv); }
    double operator()(int ix, int iv) const { return data(ix, iv); }

    bool same_grids(const DistributionField& o) const;
    /// Throws InvalidArgument unless the grids match.
    void require_same_grids(const DistributionField& o, const char* where) const;
    bool finite() const { return data.allFinite(); }
    /// Same grids and role, zero data.
    DistributionField zeros_like() const;
    /// Copy with new data (must have the same shape).
    DistributionField with_data(Eigen::MatrixXd d) const;

    /// x-constant field with the given velocity profile.
    static DistributionField from_profile(std::shared_ptr<const VelocityGrid> v,
                                          std::shared_ptr<const SpatialGrid> x,
                                          const Profile& p,
                                          Role role = Role::Fluctuation);

    Role role = Role::Fluctuation;
    Eigen::MatrixXd data;

private:
    std::shared_ptr<const VelocityGrid> v_;
    std::shared_ptr<const SpatialGrid> x_;
};

DistributionField operator+(const DistributionField& a, const DistributionField& b);
DistributionField operator-(const DistributionField& a, const DistributionField& b);
DistributionField operator*(double s, const DistributionField& a);

/// Apply a velocity-space matrix A (N_v x N_v) at every spatial node:
/// out(x, .) = A f(x, .).
DistributionField apply_velocity_matrix(const Eigen::MatrixXd& A, const DistributionField& f);
/// Multiply by a velocity profile at every spatial node.
DistributionField scale_velocity(const Profile& p, const DistributionField& f);

/// Discrete L^2_{x,v}(M^{-1}) inner product with normalized torus measure.
double inner_minv(const DistributionField& a, const DistributionField& b, const Profile& M);

}  // namespace kinhydro
