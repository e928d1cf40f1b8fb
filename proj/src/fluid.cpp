#include "kinhydro/fluid.hpp"

#include <cmath>

#include "kinhydro/errors.hpp"

namespace kinhydro {

namespace {

using Spec = std::vector<cplx>;

struct NsfState {
    std::vector<Spec> u;  // d components
    Spec theta;
};

class NsfRhs {
public:
    NsfRhs(const SpatialGrid& x, bool dealias) : x_(x), n_(x.size()), d_(x.dim()) {
        mask_.assign(n_, 1.0);
        if (dealias)
            for (int j = 0; j < n_; ++j) {
                const auto k = x.wave(j);
                for (int a = 0; a < d_; ++a)
                    if (3 * std::abs(k[a]) > x.n_axis()) mask_[j] = 0.0;
            }
    }

    Eigen::VectorXd to_real(const Spec& s) const {
        Eigen::VectorXd r(n_);
        x_.inverse(s.data(), r.data());
        return r;
    }

    void leray(std::vector<Spec>& u) const {
        for (int j = 0; j < n_; ++j) {
            const auto k = x_.wave_odd(j);
            double k2 = 0;
            for (int a = 0; a < d_; ++a) k2 += double(k[a]) * k[a];
            if (k2 == 0) continue;
            cplx dot = 0;
            for (int a = 0; a < d_; ++a) dot += double(k[a]) * u[a][j];
            for (int a = 0; a < d_; ++a) u[a][j] -= double(k[a]) * dot / k2;
        }
    }

    // -P div(u (x) u) and -div(u theta), dealiased
    NsfState operator()(const NsfState& s) const {
        std::vector<Eigen::VectorXd> ur(d_);
        for (int a = 0; a < d_; ++a) ur[a] = to_real(s.u[a]);
        const Eigen::VectorXd th = to_real(s.theta);
        NsfState out;
        out.u.assign(d_, Spec(n_, 0.0));
        out.theta.assign(n_, 0.0);
        Spec hat(n_);
        Eigen::VectorXd prod(n_);
        for (int b = 0; b < d_; ++b) {
            for (int a = 0; a < d_; ++a) {
                prod = ur[a].cwiseProduct(ur[b]);
                x_.forward(prod.data(), hat.data());
                for (int j = 0; j < n_; ++j) out.u[a][j] -= cplx(0.0, x_.wave_odd(j)[b]) * mask_[j] * hat[j];
            }
            prod = th.cwiseProduct(ur[b]);
            x_.forward(prod.data(), hat.data());
            for (int j = 0; j < n_; ++j) out.theta[j] -= cplx(0.0, x_.wave_odd(j)[b]) * mask_[j] * hat[j];
        }
        leray(out.u);
        return out;
    }

private:
    const SpatialGrid& x_;
    int n_, d_;
    std::vector<double> mask_;
};

NsfState to_spec(const MacroFields& m) {
    const SpatialGrid& x = *m.x;
    NsfState s;
    s.u.assign(m.dim(), Spec(x.size()));
    s.theta.resize(x.size());
    for (int a = 0; a < m.dim(); ++a) x.forward(m.u.col(a).data(), s.u[a].data());
    x.forward(m.theta.data(), s.theta.data());
    return s;
}

FluidState from_spec(const NsfState& s, const std::shared_ptr<const SpatialGrid>& x, double t) {
    FluidState f{MacroFields(x), t};
    for (std::size_t a = 0; a < s.u.size(); ++a) {
        Eigen::VectorXd col(x->size());
        x->inverse(s.u[a].data(), col.data());
        f.m.u.col(a) = col;
    }
    x->inverse(s.theta.data(), f.m.theta.data());
    f.m.rho = -f.m.theta;
    return f;
}

bool finite(const NsfState& s) {
    for (const auto& c : s.u)
        for (const auto& z : c)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    for (const auto& z : s.theta)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

}  // namespace

double fluid_invariant_violation(const FluidState& s) {
    const MacroFields& m = s.m;
    if (!m.x) throw InvalidArgument("fluid state: empty fields");
    double v = divergence(*m.x, m.u).cwiseAbs().maxCoeff();
    v = std::max(v, (m.rho + m.theta).cwiseAbs().maxCoeff());
    v = std::max(v, std::abs(m.rho.mean()));
    v = std::max(v, std::abs(m.theta.mean()));
    for (int a = 0; a < m.dim(); ++a) v = std::max(v, std::abs(m.u.col(a).mean()));
    return v;
}

std::vector<FluidState> evolve_nsf(const FluidState& init, double mu, double kappa, double t_end,
                                   const NsfOptions& opt) {
    if (!init.m.x) throw InvalidArgument("evolve_nsf: empty initial state");
    if (!(mu > 0 && kappa > 0)) throw InvalidArgument("evolve_nsf: mu and kappa must be positive");
    if (!(t_end >= 0)) throw InvalidArgument("evolve_nsf: t_end must be non-negative");
    if (!(opt.dt > 0)) throw InvalidArgument("evolve_nsf: dt must be positive");
    if (opt.stride < 1) throw InvalidArgument("evolve_nsf: stride must be positive");
    const MacroFields& m0 = init.m;
    const double scale = std::max({1.0, m0.u.cwiseAbs().maxCoeff(), m0.theta.cwiseAbs().maxCoeff()});
    if (fluid_invariant_violation(init) > 1e-8 * scale)
        throw InvalidArgument("evolve_nsf: initial state must be divergence-free, Boussinesq and mean-free");

    const auto& xp = m0.x;
    const SpatialGrid& x = *xp;
    const int n = x.size(), d = x.dim();
    const NsfRhs rhs(x, opt.dealias);
    const int steps = t_end > 0 ? static_cast<int>(std::ceil(t_end / opt.dt - 1e-9)) : 0;
    const double dt = steps > 0 ? t_end / steps : 0.0;
    std::vector<double> Eu(n), Et(n);
    for (int j = 0; j < n; ++j) {
        Eu[j] = std::exp(-mu * x.k2(j) * dt);
        Et[j] = std::exp(-kappa * x.k2(j) * dt);
    }

    NsfState y = to_spec(m0);
    rhs.leray(y.u);
    std::vector<FluidState> traj;
    traj.push_back(from_spec(y, xp, init.t));
    double t = init.t;
    for (int s = 1; s <= steps; ++s) {
        const NsfState a = rhs(y);
        NsfState y1 = y;
        for (int j = 0; j < n; ++j) {
            for (int c = 0; c < d; ++c) y1.u[c][j] = Eu[j] * (y.u[c][j] + dt * a.u[c][j]);
            y1.theta[j] = Et[j] * (y.theta[j] + dt * a.theta[j]);
        }
        const NsfState b = rhs(y1);
        for (int j = 0; j < n; ++j) {
            for (int c = 0; c < d; ++c)
                y.u[c][j] = Eu[j] * y.u[c][j] + 0.5 * dt * (Eu[j] * a.u[c][j] + b.u[c][j]);
            y.theta[j] = Et[j] * y.theta[j] + 0.5 * dt * (Et[j] * a.theta[j] + b.theta[j]);
        }
        rhs.leray(y.u);
        if (!finite(y)) throw NumericalError("evolve_nsf: non-finite state", t);
        t = init.t + s * dt;
        if (s % opt.stride == 0 || s == steps) traj.push_back(from_spec(y, xp, t));
    }
    return traj;
}

DistributionField kinetic_counterpart(const FluidState& s, std::shared_ptr<const VelocityGrid> v,
                                      const MacroBasis& mb) {
    return infinitesimal_maxwellian(s.m, std::move(v), mb);
}

std::vector<double> nsf_residual(const std::vector<FluidState>& traj, double mu, double kappa, double s) {
    if (traj.size() < 3) throw InvalidArgument("nsf_residual: need at least 3 samples");
    const auto& xp = traj[0].m.x;
    const SpatialGrid& x = *xp;
    const int n = x.size(), d = x.dim();
    const NsfRhs rhs(x, false);
    std::vector<double> out;
    for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
        const double h = traj[k + 1].t - traj[k - 1].t;
        if (!(h > 0)) throw InvalidArgument("nsf_residual: times must increase");
        const NsfState yp = to_spec(traj[k + 1].m), ym = to_spec(traj[k - 1].m), y = to_spec(traj[k].m);
        const NsfState nl = rhs(y);
        double acc = 0;
        for (int j = 0; j < n; ++j) {
            const double k2 = x.k2(j), w = std::pow(1.0 + k2, s - 1.0);
            for (int c = 0; c < d; ++c) {
                const cplx r = (yp.u[c][j] - ym.u[c][j]) / h - nl.u[c][j] + mu * k2 * y.u[c][j];
                acc += w * std::norm(r);
            }
            const cplx r = (yp.theta[j] - ym.theta[j]) / h - nl.theta[j] + kappa * k2 * y.theta[j];
            acc += w * std::norm(r);
        }
        out.push_back(std::sqrt(acc));
    }
    return out;
}

}  // namespace kinhydro
