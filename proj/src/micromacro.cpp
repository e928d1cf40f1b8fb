#include "kinhydro/micromacro.hpp"

#include <cmath>

#include "kinhydro/errors.hpp"

namespace kinhydro {

MacroFields::MacroFields(std::shared_ptr<const SpatialGrid> xg) : x(std::move(xg)) {
    if (!x) throw InvalidArgument("macro fields: null grid");
    rho = Eigen::VectorXd::Zero(x->size());
    u = Eigen::MatrixXd::Zero(x->size(), x->dim());
    theta = Eigen::VectorXd::Zero(x->size());
}

MacroBasis::MacroBasis(const VelocityGrid& grid) : d_(grid.dim()) {
    const int N = grid.size(), r = d_ + 2;
    M_ = maxwellian(grid);
    U_.resize(N, r);
    U_.col(0) = M_;
    for (int k = 0; k < d_; ++k) U_.col(1 + k) = grid.coords().col(k).cwiseProduct(M_);
    U_.col(d_ + 1) = ((grid.speed2().array() - d_) * M_.array() / d_).matrix();
    const Eigen::VectorXd W = (grid.weight() / M_.array()).matrix();
    WU_ = W.asDiagonal() * U_;
    const Eigen::MatrixXd Gu = U_.transpose() * WU_;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Gu);
    const double dmin = ldlt.vectorD().minCoeff(), dmax = ldlt.vectorD().maxCoeff();
    if (!(dmin > 1e-12 * dmax)) throw InvalidArgument("macro basis: singular Gram matrix (degenerate grid)");
    G_ = ldlt.solve(Eigen::MatrixXd::Identity(r, r));
    G_ = 0.5 * (G_ + G_.transpose()).eval();
    E_ = U_ * G_;
    Pi_ = E_ * WU_.transpose();
    const double grr = G_(0, 0), grt = G_(0, d_ + 1), gtt = G_(d_ + 1, d_ + 1);
    const double A = grr - grt, B = grt - gtt, den = grr - 2 * grt + gtt;
    wp_r_ = A / den;
    wp_t_ = B / den;
    n_rho_ = -B / (A - B);
    n_theta_ = A / (A - B);
}

double MacroBasis::wp_coefficient(double rho, double theta) const { return wp_r_ * rho + wp_t_ * theta; }

MacroFields moments(const DistributionField& f, const MacroBasis& mb) {
    if (mb.dim() != f.vgrid().dim() || mb.M().size() != f.nv())
        throw InvalidArgument("moments: basis does not match grid");
    MacroFields m(f.xgrid_ptr());
    const int d = mb.dim();
    Eigen::MatrixXd mom = f.data * mb.moment_weights();
    m.rho = mom.col(0);
    m.u = mom.middleCols(1, d);
    m.theta = mom.col(d + 1);
    return m;
}

MacroFields moments(const DistributionField& f) { return moments(f, MacroBasis(f.vgrid())); }

DistributionField project_pi(const DistributionField& f, const MacroBasis& mb) {
    return apply_velocity_matrix(mb.pi(), f);
}

DistributionField project_pi(const DistributionField& f) { return project_pi(f, MacroBasis(f.vgrid())); }

Eigen::MatrixXd leray_project(const SpatialGrid& x, const Eigen::MatrixXd& u) {
    const int n = x.size(), d = x.dim();
    if (u.rows() != n || u.cols() != d) throw InvalidArgument("leray: shape mismatch");
    std::vector<std::vector<cplx>> hat(d, std::vector<cplx>(n));
    for (int k = 0; k < d; ++k) x.forward(u.col(k).data(), hat[k].data());
    for (int j = 0; j < n; ++j) {
        auto kv = x.wave_odd(j);
        double k2 = 0;
        for (int a = 0; a < d; ++a) k2 += double(kv[a]) * kv[a];
        if (k2 == 0) continue;
        cplx dot = 0;
        for (int a = 0; a < d; ++a) dot += double(kv[a]) * hat[a][j];
        for (int a = 0; a < d; ++a) hat[a][j] -= double(kv[a]) * dot / k2;
    }
    Eigen::MatrixXd out(n, d);
    for (int k = 0; k < d; ++k) x.inverse(hat[k].data(), out.col(k).data());
    return out;
}

Eigen::VectorXd divergence(const SpatialGrid& x, const Eigen::MatrixXd& u) {
    const int n = x.size(), d = x.dim();
    std::vector<cplx> acc(n, 0.0), hat(n);
    for (int k = 0; k < d; ++k) {
        x.forward(u.col(k).data(), hat.data());
        for (int j = 0; j < n; ++j) acc[j] += cplx(0, x.wave_odd(j)[k]) * hat[j];
    }
    Eigen::VectorXd out(n);
    x.inverse(acc.data(), out.data());
    return out;
}

MacroFields well_prepared_part(const MacroFields& m, const MacroBasis& mb) {
    MacroFields w(m.x);
    for (int j = 0; j < m.nx(); ++j) {
        const double a = mb.wp_coefficient(m.rho[j], m.theta[j]);
        w.rho[j] = a;
        w.theta[j] = -a;
    }
    w.u = leray_project(*m.x, m.u);
    return w;
}

DistributionField infinitesimal_maxwellian(const MacroFields& m, std::shared_ptr<const VelocityGrid> v,
                                           const MacroBasis& mb) {
    if (!m.x) throw InvalidArgument("infinitesimal_maxwellian: empty macro fields");
    const int d = m.dim();
    if (v->dim() != d) throw InvalidArgument("infinitesimal_maxwellian: dimension mismatch");
    DistributionField f(std::move(v), m.x, Role::Fluctuation);
    Eigen::MatrixXd coef(m.nx(), d + 2);
    coef.col(0) = m.rho;
    coef.middleCols(1, d) = m.u;
    coef.col(d + 1) = m.theta;
    f.data.noalias() = coef * mb.E().transpose();
    return f;
}

DistributionField infinitesimal_maxwellian(const MacroFields& m, std::shared_ptr<const VelocityGrid> v) {
    MacroBasis mb(*v);
    return infinitesimal_maxwellian(m, std::move(v), mb);
}

SplitParts split_initial(const DistributionField& f, const MacroBasis& mb) {
    const DistributionField pf = project_pi(f, mb);
    const MacroFields m = moments(f, mb);
    DistributionField wp = infinitesimal_maxwellian(well_prepared_part(m, mb), f.vgrid_ptr(), mb);
    DistributionField ip = pf - wp;
    DistributionField perp = f - pf;
    return {std::move(wp), std::move(ip), std::move(perp)};
}

SplitParts split_initial(const DistributionField& f) { return split_initial(f, MacroBasis(f.vgrid())); }

}  // namespace kinhydro
