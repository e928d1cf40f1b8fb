#pragma once

#include <array>
#include <complex>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace kinhydro {

using cplx = std::complex<double>;
/// One value per velocity node.
using Profile = Eigen::VectorXd;

class DistributionField;

/// Midpoint-uniform tensor grid on [-v_max, v_max]^d. Flat index runs with
/// axis 0 fastest.
class VelocityGrid {
public:
    VelocityGrid(int d, double v_max, int n_v);

    int dim() const { return d_; }
    double v_max() const { return v_max_; }
    int n_axis() const { return n_; }
    int size() const { return size_; }
    double spacing() const { return h_; }
    double weight() const { return w_; }

    double axis_node(int m) const { return -v_max_ + (m + 0.5) * h_; }
    double coord(int i, int k) const { return coords_(i, k); }
    /// size() x d matrix of node coordinates.
    const Eigen::MatrixXd& coords() const { return coords_; }
    /// |v|^2 at every node.
    const Profile& speed2() const { return speed2_; }
    int axis_index(int i, int k) const;
    int flat(const std::array<int, 3>& m) const;
    bool same_as(const VelocityGrid& o) const {
        return d_ == o.d_ && n_ == o.n_ && v_max_ == o.v_max_;
    }

private:
    int d_, n_, size_;
    double v_max_, h_, w_;
    Eigen::MatrixXd coords_;
    Profile speed2_;
};

VelocityGrid build_velocity_grid(int d, double v_max, int n_v);

/// Periodic grid on [0, 2pi)^d with FFTW transforms. Flat index is row-major
/// (last axis fastest). Forward transforms return Fourier-series
/// coefficients, i.e. they are normalized by 1/size().
class SpatialGrid {
public:
    SpatialGrid(int d, int n_x);
    ~SpatialGrid();
    SpatialGrid(const SpatialGrid&) = delete;
    SpatialGrid& operator=(const SpatialGrid&) = delete;

    int dim() const { return d_; }
    int n_axis() const { return n_; }
    int size() const { return size_; }
    double spacing() const;
    double cell_volume() const;
    double volume() const;

    double coord(int j, int axis) const;
    /// Signed integer wavenumber of Fourier index j; Nyquist kept as +n/2.
    std::array<int, 3> wave(int j) const;
    /// Wavenumber for odd-order operators: Nyquist components set to 0 so the
    /// operator keeps real fields real.
    std::array<int, 3> wave_odd(int j) const;
    double k2(int j) const;

    void forward(const double* in, cplx* out) const;
    void forward(const cplx* in, cplx* out) const;
    void inverse(const cplx* in, cplx* out) const;
    /// Inverse transform keeping the real part.
    void inverse(const cplx* in, double* out) const;

    bool same_as(const SpatialGrid& o) const { return d_ == o.d_ && n_ == o.n_; }

private:
    int d_, n_, size_;
    void* plan_fwd_ = nullptr;
    void* plan_bwd_ = nullptr;
};

/// Nodes on S^{d-1} with weights summing to one.
struct AngleQuadrature {
    int d = 2;
    Eigen::MatrixXd nodes;  // count x d
    Eigen::VectorXd weights;
    int degree = 0;         // exact for spherical polynomials up to this degree
    std::vector<int> antipode;  // index of -sigma_k, or -1 if absent

    int size() const { return static_cast<int>(weights.size()); }
    bool antipodal() const;
};

/// d = 2: n uniform angles. d = 3: product of n Gauss-Legendre nodes in
/// cos(theta) and 2n uniform azimuths.
AngleQuadrature build_angle_quadrature(int d, int n);

struct NormSpec {
    enum class Flavor { Polynomial, Gaussian, NuWeighted };
    Flavor flavor = Flavor::Polynomial;
    double p = 1.0;
    double alpha = 0.0;
    double beta = 0.0;
    double s = 2.0;

    static constexpr double inf = std::numeric_limits<double>::infinity();
    static NormSpec polynomial(double p, double alpha, double s = 2.0);
    static NormSpec gaussian(double beta, double s = 2.0);
    static NormSpec nu_weighted(double p, double alpha, double s = 2.0);
    void validate() const;
};

double japanese(double r2);  // <v> = sqrt(1 + |v|^2)

Profile maxwellian(const VelocityGrid& grid);
/// nu(v) = sum_* M(v_*)|v - v_*| w. The sphere measure has mass one, so the
/// quadrature only enters through the adequacy check.
Profile collision_frequency(const VelocityGrid& grid, const AngleQuadrature& quad);
Profile collision_frequency(const VelocityGrid& grid);
/// Same quadrature at an arbitrary velocity (e.g. v = 0, which is not a node).
double collision_frequency_at(const VelocityGrid& grid, const double* v);
std::pair<double, double> nu_bounds(const Profile& nu, const VelocityGrid& grid);

/// ||f(., v)||_{H^s_x} for every velocity node, normalized torus measure.
Profile hs_norms(const DistributionField& f, double s);
double weighted_norm(const DistributionField& f, const NormSpec& spec,
                     const Profile* nu = nullptr);

}  // namespace kinhydro
