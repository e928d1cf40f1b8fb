#include "kinhydro/evolve.hpp"

#include <cmath>

#include "kinhydro/errors.hpp"
#include "kinhydro/linalg.hpp"

namespace kinhydro {

int EvolveConfig::steps() const { return static_cast<int>(std::ceil(t_end / dt() - 1e-9)); }

void EvolveConfig::validate() const {
    if (!(epsilon > 0 && epsilon <= 1)) throw InvalidArgument("evolve: epsilon must lie in (0, 1]");
    if (!(dt_factor > 0 && dt_factor <= 0.5)) throw InvalidArgument("evolve: dt_factor must lie in (0, 0.5]");
    if (!(t_end > 0)) throw InvalidArgument("evolve: t_end must be positive");
    if (coupled) SplittingParams{delta}.validate();
}

DistributionField step_transport(const DistributionField& f, double dt, double epsilon) {
    if (!(epsilon > 0)) throw InvalidArgument("transport: epsilon must be positive");
    if (dt == 0) return f;
    const SpatialGrid& x = f.xgrid();
    const VelocityGrid& vg = f.vgrid();
    const int n = x.size(), d = x.dim();
    DistributionField out = f;
    std::vector<std::array<int, 3>> waves(n);
    for (int j = 0; j < n; ++j) waves[j] = x.wave_odd(j);
    std::vector<cplx> hat(n);
    const double s = dt / epsilon;
    for (int iv = 0; iv < vg.size(); ++iv) {
        x.forward(f.data.col(iv).data(), hat.data());
        for (int j = 0; j < n; ++j) {
            double kv = 0;
            for (int a = 0; a < d; ++a) kv += waves[j][a] * vg.coord(iv, a);
            hat[j] *= std::polar(1.0, -kv * s);
        }
        x.inverse(hat.data(), out.data.col(iv).data());
    }
    return out;
}

CollisionStepper::CollisionStepper(std::shared_ptr<const CollisionOperator> op, double dt, double epsilon,
                                   CollisionIntegrator integrator, bool conserve_fix, bool nonlinear)
    : op_(std::move(op)), dt_(dt), eps_(epsilon), nonlinear_(nonlinear) {
    if (!op_) throw InvalidArgument("collision step: null operator");
    if (!(epsilon > 0)) throw InvalidArgument("collision step: epsilon must be positive");
    if (!(dt >= 0)) throw InvalidArgument("collision step: dt must be non-negative");
    if (dt > 0.5 * epsilon * epsilon * (1 + 1e-12))
        throw InvalidArgument("collision step: dt exceeds 0.5 eps^2 (stability contract)");
    const int N = op_->vgrid().size();
    const double tau = dt / (epsilon * epsilon);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);
    const Eigen::MatrixXd& P = op_->macro().pi();
    if (integrator == CollisionIntegrator::Exponential) {
        const Eigen::MatrixXd& L = conserve_fix ? op_->L_conserving() : op_->L();
        ExpPhi ep = expm_phi1(tau * L);
        E_ = std::move(ep.exp);
        G_ = (dt / epsilon) * ep.phi1;
        if (conserve_fix) G_ = G_ - G_ * P;
    } else {
        const Profile& nu = op_->nu();
        Eigen::VectorXd a(N), b(N);
        for (int i = 0; i < N; ++i) {
            const double z = nu[i] * tau;
            a[i] = std::exp(-z);
            b[i] = (z > 0 ? -std::expm1(-z) / z : 1.0) * dt;
        }
        E_ = a.asDiagonal();
        E_ += (b / (epsilon * epsilon)).asDiagonal() * op_->K();
        G_ = (b / epsilon).asDiagonal();
        if (conserve_fix) {
            E_ = I + (E_ - I) - P * (E_ - I);
            G_ = G_ - P * G_;
        }
    }
}

DistributionField CollisionStepper::step(const DistributionField& f) const {
    if (!f.vgrid().same_as(op_->vgrid())) throw InvalidArgument("collision step: grid mismatch");
    Eigen::MatrixXd out(f.nx(), f.nv());
    out.noalias() = f.data * E_.transpose();
    if (nonlinear_ && dt_ > 0) {
        const Eigen::MatrixXd q = op_->q_raw(f.data, f.data);
        out.noalias() += q * G_.transpose();
    }
    return f.with_data(std::move(out));
}

DistributionField step_collision(const DistributionField& f, double dt, double epsilon,
                                 std::shared_ptr<const CollisionOperator> op, CollisionIntegrator integrator,
                                 bool conserve_fix) {
    return CollisionStepper(std::move(op), dt, epsilon, integrator, conserve_fix).step(f);
}

namespace {

void record(Trajectory& tr, double t, const DistributionField& f, double epsilon, const Profile& M, bool absolute) {
    tr.t.push_back(t);
    tr.f.push_back(f);
    if (!absolute) {
        tr.invariants.push_back(collision_invariants(f));
        tr.entropy.push_back(std::nan(""));
        return;
    }
    DistributionField F = f.with_data(epsilon * f.data);
    F.data.rowwise() += M.transpose();
    F.role = Role::Absolute;
    const double mn = F.data.minCoeff();
    tr.min_density = std::min(tr.min_density, mn);
    tr.invariants.push_back(collision_invariants(F));
    if (mn < -1e-10) ++tr.positivity_violations;
    if (mn < -1e-10) {
        tr.entropy.push_back(std::nan(""));
    } else {
        // round-off negatives count as vacuum
        F.data = F.data.cwiseMax(0.0);
        tr.entropy.push_back(entropy(F));
    }
}

int sample_stride(const EvolveConfig& cfg) {
    const int steps = cfg.steps();
    if (cfg.samples <= 0) return 1;
    return std::max(1, steps / cfg.samples);
}

void check_finite(const DistributionField& f, double t) {
    if (!f.finite()) throw NumericalError("evolve: non-finite values (blowup)", t);
}

}  // namespace

Trajectory evolve_boltzmann(const DistributionField& f_in, const EvolveConfig& cfg,
                            std::shared_ptr<const CollisionOperator> op) {
    cfg.validate();
    if (!op) throw InvalidArgument("evolve: null operator");
    if (!f_in.vgrid().same_as(op->vgrid())) throw InvalidArgument("evolve: grid mismatch");
    if (!f_in.finite()) throw InvalidArgument("evolve: non-finite initial data");
    const int steps = cfg.steps();
    const double dt = cfg.t_end / steps;
    const CollisionStepper C(op, dt, cfg.epsilon, cfg.integrator, cfg.conserve_fix, cfg.nonlinear);
    const int stride = sample_stride(cfg);
    Trajectory tr;
    DistributionField f = f_in;
    f.role = Role::Fluctuation;
    record(tr, 0.0, f, cfg.epsilon, op->M(), true);
    for (int s = 1; s <= steps; ++s) {
        if (cfg.scheme == Scheme::Strang) {
            f = step_transport(f, 0.5 * dt, cfg.epsilon);
            f = C.step(f);
            f = step_transport(f, 0.5 * dt, cfg.epsilon);
        } else {
            f = step_transport(f, dt, cfg.epsilon);
            f = C.step(f);
        }
        check_finite(f, (s - 1) * dt);
        if (s % stride == 0 || s == steps) record(tr, s * dt, f, cfg.epsilon, op->M(), true);
    }
    return tr;
}

DistributionField linear_propagate(const DistributionField& f, double t, double epsilon,
                                   std::shared_ptr<const CollisionOperator> op, EvolveConfig base) {
    if (t == 0) return f;
    base.epsilon = epsilon;
    base.t_end = t;
    base.nonlinear = false;
    base.samples = 1;
    return evolve_boltzmann(f, base, std::move(op)).f.back();
}

DistributionField s_eps_apply(const DistributionField& h, double t, double epsilon, const Profile& nu) {
    if (!(epsilon > 0)) throw InvalidArgument("s_eps: epsilon must be positive");
    if (nu.size() != h.nv()) throw InvalidArgument("s_eps: nu size mismatch");
    if (t == 0) return h;
    DistributionField out = step_transport(h, t, epsilon);
    for (int iv = 0; iv < h.nv(); ++iv) out.data.col(iv) *= std::exp(-nu[iv] * t / (epsilon * epsilon));
    return out;
}

CoupledTrajectory evolve_coupled(const DistributionField& f_in, const EvolveConfig& cfg,
                                 std::shared_ptr<const CollisionOperator> op) {
    cfg.validate();
    if (!op) throw InvalidArgument("evolve_coupled: null operator");
    if (!f_in.vgrid().same_as(op->vgrid())) throw InvalidArgument("evolve_coupled: grid mismatch");
    if (cfg.integrator != CollisionIntegrator::Exponential)
        throw InvalidArgument("evolve_coupled: only the exponential integrator is supported");
    const SplittingParams sp{cfg.delta};
    const int N = op->vgrid().size();
    const int steps = cfg.steps();
    const double dt = cfg.t_end / steps, eps = cfg.epsilon, tau = dt / (eps * eps);
    const Eigen::MatrixXd& P = op->macro().pi();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);

    Eigen::MatrixXd L, B, A;
    if (cfg.conserve_fix) {
        L = op->L_conserving();
        const Eigen::MatrixXd Bd = op->B_delta(sp);
        const Eigen::MatrixXd bp = Bd - Bd * P;
        B = bp - P * bp;
    } else {
        L = op->L();
        B = op->B_delta(sp);
    }
    A = L - B;
    Eigen::MatrixXd blk = Eigen::MatrixXd::Zero(2 * N, 2 * N);
    blk.topLeftCorner(N, N) = tau * B;
    blk.bottomLeftCorner(N, N) = tau * A;
    blk.bottomRightCorner(N, N) = tau * L;
    const ExpPhi ep = expm_phi1(blk);
    const Eigen::MatrixXd E11 = ep.exp.topLeftCorner(N, N), E21 = ep.exp.bottomLeftCorner(N, N),
                          E22 = ep.exp.bottomRightCorner(N, N);
    const Eigen::MatrixXd Q = cfg.conserve_fix ? Eigen::MatrixXd(I - P) : I;
    const double g = dt / eps;
    const Eigen::MatrixXd G11 = g * ep.phi1.topLeftCorner(N, N) * Q, G21 = g * ep.phi1.bottomLeftCorner(N, N) * Q,
                          G22 = g * ep.phi1.bottomRightCorner(N, N) * Q;

    DistributionField f = f_in;
    f.role = Role::Fluctuation;
    const DistributionField pf = apply_velocity_matrix(P, f);
    DistributionField h = f - pf, e = pf;
    const int stride = sample_stride(cfg);
    CoupledTrajectory ct;
    record(ct.h, 0.0, h, eps, op->M(), false);
    record(ct.e, 0.0, e, eps, op->M(), false);
    for (int s = 1; s <= steps; ++s) {
        const double tt = cfg.scheme == Scheme::Strang ? 0.5 * dt : dt;
        h = step_transport(h, tt, eps);
        e = step_transport(e, tt, eps);
        Eigen::MatrixXd hn = h.data * E11.transpose();
        Eigen::MatrixXd en = h.data * E21.transpose() + e.data * E22.transpose();
        if (cfg.nonlinear) {
            const Eigen::MatrixXd qh = op->q_raw(h.data, h.data) + 2.0 * op->q_raw(h.data, e.data);
            const Eigen::MatrixXd qe = op->q_raw(e.data, e.data);
            hn.noalias() += qh * G11.transpose();
            en.noalias() += qh * G21.transpose() + qe * G22.transpose();
        }
        h.data = std::move(hn);
        e.data = std::move(en);
        if (cfg.scheme == Scheme::Strang) {
            h = step_transport(h, 0.5 * dt, eps);
            e = step_transport(e, 0.5 * dt, eps);
        }
        check_finite(h, (s - 1) * dt);
        check_finite(e, (s - 1) * dt);
        if (s % stride == 0 || s == steps) {
            record(ct.h, s * dt, h, eps, op->M(), false);
            record(ct.e, s * dt, e, eps, op->M(), false);
        }
    }
    return ct;
}

}  // namespace kinhydro
