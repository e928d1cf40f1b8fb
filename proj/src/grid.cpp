#include "kinhydro/grid.hpp"

#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "kinhydro/errors.hpp"
#include "kinhydro/field.hpp"

namespace kinhydro {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

VelocityGrid::VelocityGrid(int d, double v_max, int n_v) : d_(d), n_(n_v), v_max_(v_max) {
    if (d != 2 && d != 3) throw InvalidArgument("velocity grid: d must be 2 or 3");
    if (!(v_max > 0)) throw InvalidArgument("velocity grid: v_max must be positive");
    if (n_v % 2 != 0) throw InvalidArgument("velocity grid: n_v must be even (odd n_v puts a node at 0 and breaks parity)");
    if (n_v < 2) throw InvalidArgument("velocity grid: n_v too small");
    h_ = 2.0 * v_max / n_v;
    w_ = std::pow(h_, d);
    size_ = 1;
    for (int k = 0; k < d; ++k) size_ *= n_;
    coords_.resize(size_, d);
    speed2_.resize(size_);
    for (int i = 0; i < size_; ++i) {
        double s2 = 0;
        for (int k = 0; k < d; ++k) {
            double c = axis_node(axis_index(i, k));
            coords_(i, k) = c;
            s2 += c * c;
        }
        speed2_[i] = s2;
    }
}

int VelocityGrid::axis_index(int i, int k) const {
    for (int a = 0; a < k; ++a) i /= n_;
    return i % n_;
}

int VelocityGrid::flat(const std::array<int, 3>& m) const {
    int i = 0;
    for (int k = d_ - 1; k >= 0; --k) i = i * n_ + m[k];
    return i;
}

VelocityGrid build_velocity_grid(int d, double v_max, int n_v) { return VelocityGrid(d, v_max, n_v); }

SpatialGrid::SpatialGrid(int d, int n_x) : d_(d), n_(n_x) {
    if (d < 1 || d > 3) throw InvalidArgument("spatial grid: d must be 1..3");
    if (n_x < 1) throw InvalidArgument("spatial grid: n_x must be positive");
    size_ = 1;
    int dims[3];
    for (int k = 0; k < d; ++k) {
        size_ *= n_;
        dims[k] = n_;
    }
    std::vector<cplx> a(size_), b(size_);
    std::lock_guard<std::mutex> lock(planner_mutex());
    auto* pa = reinterpret_cast<fftw_complex*>(a.data());
    auto* pb = reinterpret_cast<fftw_complex*>(b.data());
    plan_fwd_ = fftw_plan_dft(d, dims, pa, pb, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plan_bwd_ = fftw_plan_dft(d, dims, pa, pb, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
}

SpatialGrid::~SpatialGrid() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

double SpatialGrid::spacing() const { return 2.0 * std::numbers::pi / n_; }
double SpatialGrid::cell_volume() const { return std::pow(spacing(), d_); }
double SpatialGrid::volume() const { return std::pow(2.0 * std::numbers::pi, d_); }

double SpatialGrid::coord(int j, int axis) const {
    for (int a = d_ - 1; a > axis; --a) j /= n_;
    return spacing() * (j % n_);
}

std::array<int, 3> SpatialGrid::wave(int j) const {
    std::array<int, 3> k{0, 0, 0};
    for (int a = d_ - 1; a >= 0; --a) {
        int m = j % n_;
        j /= n_;
        k[a] = (m <= n_ / 2) ? m : m - n_;
    }
    return k;
}

std::array<int, 3> SpatialGrid::wave_odd(int j) const {
    auto k = wave(j);
    for (int a = 0; a < d_; ++a)
        if (n_ % 2 == 0 && k[a] == n_ / 2) k[a] = 0;
    return k;
}

double SpatialGrid::k2(int j) const {
    auto k = wave(j);
    return double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2];
}

void SpatialGrid::forward(const double* in, cplx* out) const {
    std::vector<cplx> tmp(in, in + size_);
    forward(tmp.data(), out);
}

void SpatialGrid::forward(const cplx* in, cplx* out) const {
    fftw_execute_dft(static_cast<fftw_plan>(plan_fwd_),
                     reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
    const double s = 1.0 / size_;
    for (int j = 0; j < size_; ++j) out[j] *= s;
}

void SpatialGrid::inverse(const cplx* in, cplx* out) const {
    fftw_execute_dft(static_cast<fftw_plan>(plan_bwd_),
                     reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

void SpatialGrid::inverse(const cplx* in, double* out) const {
    std::vector<cplx> tmp(size_);
    inverse(in, tmp.data());
    for (int j = 0; j < size_; ++j) out[j] = tmp[j].real();
}

bool AngleQuadrature::antipodal() const {
    for (int a : antipode)
        if (a < 0) return false;
    return !antipode.empty();
}

namespace {
// Golub-Welsch for Gauss-Legendre on [-1, 1].
void gauss_legendre(int n, Eigen::VectorXd& x, Eigen::VectorXd& w) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        double b = k / std::sqrt(4.0 * k * k - 1.0);
        J(k, k - 1) = J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    x = es.eigenvalues();
    w.resize(n);
    for (int k = 0; k < n; ++k) w[k] = 2.0 * es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
    // exact antisymmetry of the node set
    for (int k = 0; k < n / 2; ++k) {
        double a = 0.5 * (x[n - 1 - k] - x[k]);
        x[k] = -a;
        x[n - 1 - k] = a;
        double ww = 0.5 * (w[k] + w[n - 1 - k]);
        w[k] = w[n - 1 - k] = ww;
    }
    if (n % 2 == 1) x[n / 2] = 0.0;
}
}  // namespace

AngleQuadrature build_angle_quadrature(int d, int n) {
    AngleQuadrature q;
    q.d = d;
    const double pi = std::numbers::pi;
    if (d == 2) {
        if (n < 2) throw InvalidArgument("angle quadrature: need at least 2 angles");
        q.nodes.resize(n, 2);
        q.weights = Eigen::VectorXd::Constant(n, 1.0 / n);
        q.antipode.assign(n, -1);
        for (int k = 0; k < n; ++k) {
            double t = 2.0 * pi * (k + 0.5) / n;
            q.nodes(k, 0) = std::cos(t);
            q.nodes(k, 1) = std::sin(t);
            if (n % 2 == 0) q.antipode[k] = (k + n / 2) % n;
        }
        q.degree = n - 1;
    } else if (d == 3) {
        if (n < 1) throw InvalidArgument("angle quadrature: need at least 1 polar node");
        Eigen::VectorXd z, wz;
        gauss_legendre(n, z, wz);
        const int na = 2 * n;
        q.nodes.resize(n * na, 3);
        q.weights.resize(n * na);
        q.antipode.assign(n * na, -1);
        for (int a = 0; a < n; ++a) {
            double st = std::sqrt(std::max(0.0, 1.0 - z[a] * z[a]));
            for (int m = 0; m < na; ++m) {
                double ph = 2.0 * pi * (m + 0.5) / na;
                int k = a * na + m;
                q.nodes(k, 0) = st * std::cos(ph);
                q.nodes(k, 1) = st * std::sin(ph);
                q.nodes(k, 2) = z[a];
                q.weights[k] = 0.5 * wz[a] / na;
                q.antipode[k] = (n - 1 - a) * na + (m + n) % na;
            }
        }
        q.degree = 2 * n - 1;
    } else {
        throw InvalidArgument("angle quadrature: d must be 2 or 3");
    }
    q.weights /= q.weights.sum();
    return q;
}

NormSpec NormSpec::polynomial(double p, double alpha, double s) {
    NormSpec n;
    n.flavor = Flavor::Polynomial;
    n.p = p;
    n.alpha = alpha;
    n.s = s;
    n.validate();
    return n;
}

NormSpec NormSpec::gaussian(double beta, double s) {
    NormSpec n;
    n.flavor = Flavor::Gaussian;
    n.p = inf;
    n.beta = beta;
    n.s = s;
    n.validate();
    return n;
}

NormSpec NormSpec::nu_weighted(double p, double alpha, double s) {
    NormSpec n = polynomial(p, alpha, s);
    n.flavor = Flavor::NuWeighted;
    return n;
}

void NormSpec::validate() const {
    if (!(p >= 1.0)) throw InvalidArgument("norm: p must lie in [1, inf]");
    if (!(alpha >= 0.0) || !(beta >= 0.0)) throw InvalidArgument("norm: alpha and beta must be non-negative");
    if (!(s >= 2.0)) throw InvalidArgument("norm: Sobolev index s must be at least 2");
}

double japanese(double r2) { return std::sqrt(1.0 + r2); }

Profile maxwellian(const VelocityGrid& grid) {
    const double c = std::pow(2.0 * std::numbers::pi, -0.5 * grid.dim());
    return (c * (-0.5 * grid.speed2().array()).exp()).matrix();
}

Profile collision_frequency(const VelocityGrid& grid) {
    const Profile M = maxwellian(grid);
    const double mass = M.sum() * grid.weight();
    if (std::abs(mass - 1.0) > 0.01)
        throw InvalidArgument("collision frequency: Maxwellian mass " + std::to_string(mass) +
                              " is off by more than 1%; increase v_max or n_v");
    const int N = grid.size(), d = grid.dim();
    const auto& X = grid.coords();
    Profile nu(N);
    for (int i = 0; i < N; ++i) {
        double acc = 0;
        for (int j = 0; j < N; ++j) {
            double r2 = 0;
            for (int k = 0; k < d; ++k) {
                double t = X(i, k) - X(j, k);
                r2 += t * t;
            }
            acc += M[j] * std::sqrt(r2);
        }
        nu[i] = acc * grid.weight();
    }
    return nu;
}

double collision_frequency_at(const VelocityGrid& grid, const double* v) {
    const Profile M = maxwellian(grid);
    const auto& X = grid.coords();
    double acc = 0;
    for (int j = 0; j < grid.size(); ++j) {
        double r2 = 0;
        for (int k = 0; k < grid.dim(); ++k) {
            const double t = v[k] - X(j, k);
            r2 += t * t;
        }
        acc += M[j] * std::sqrt(r2);
    }
    return acc * grid.weight();
}

Profile collision_frequency(const VelocityGrid& grid, const AngleQuadrature& quad) {
    if (quad.d != grid.dim()) throw InvalidArgument("collision frequency: dimension mismatch");
    if (std::abs(quad.weights.sum() - 1.0) > 1e-12)
        throw InvalidArgument("collision frequency: sphere weights must sum to one");
    return collision_frequency(grid);
}

std::pair<double, double> nu_bounds(const Profile& nu, const VelocityGrid& grid) {
    if (nu.size() != grid.size()) throw InvalidArgument("nu_bounds: size mismatch");
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (int i = 0; i < grid.size(); ++i) {
        if (!(nu[i] > 0)) throw InvalidArgument("nu_bounds: collision frequency must be positive");
        double r = nu[i] / japanese(grid.speed2()[i]);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    return {lo, hi};
}

Profile hs_norms(const DistributionField& f, double s) {
    const SpatialGrid& xg = f.xgrid();
    const int nx = xg.size();
    std::vector<double> wk(nx);
    for (int j = 0; j < nx; ++j) wk[j] = std::pow(1.0 + xg.k2(j), s);
    Profile out(f.nv());
    std::vector<cplx> hat(nx);
    for (int iv = 0; iv < f.nv(); ++iv) {
        xg.forward(f.data.col(iv).data(), hat.data());
        double acc = 0;
        for (int j = 0; j < nx; ++j) acc += wk[j] * std::norm(hat[j]);
        out[iv] = std::sqrt(acc);
    }
    return out;
}

double weighted_norm(const DistributionField& f, const NormSpec& spec, const Profile* nu) {
    spec.validate();
    const VelocityGrid& vg = f.vgrid();
    const Profile hs = hs_norms(f, spec.s);
    const Profile& r2 = vg.speed2();
    const int N = vg.size();
    Profile g(N);
    switch (spec.flavor) {
        case NormSpec::Flavor::Gaussian: {
            const Profile M = maxwellian(vg);
            double m = 0;
            for (int i = 0; i < N; ++i)
                m = std::max(m, hs[i] * std::pow(japanese(r2[i]), spec.beta) / std::sqrt(M[i]));
            return m;
        }
        case NormSpec::Flavor::Polynomial:
            for (int i = 0; i < N; ++i) g[i] = hs[i] * std::pow(japanese(r2[i]), spec.alpha);
            break;
        case NormSpec::Flavor::NuWeighted: {
            Profile own;
            if (!nu) {
                own = collision_frequency(vg);
                nu = &own;
            }
            const double e = std::isinf(spec.p) ? 0.0 : 1.0 / spec.p;
            for (int i = 0; i < N; ++i)
                g[i] = std::pow((*nu)[i], e) * hs[i] * std::pow(japanese(r2[i]), spec.alpha);
            break;
        }
    }
    if (std::isinf(spec.p)) return g.maxCoeff();
    double acc = 0;
    for (int i = 0; i < N; ++i) acc += std::pow(g[i], spec.p);
    return std::pow(acc * vg.weight(), 1.0 / spec.p);
}

}  // namespace kinhydro
