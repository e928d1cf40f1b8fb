#include <cmath>
#include <random>

#include "doctest.h"
#include "kinhydro/errors.hpp"
#include "kinhydro/evolve.hpp"
#include "kinhydro/experiments.hpp"
#include "kinhydro/initial_data.hpp"
#include "kinhydro/spectral.hpp"

using namespace kinhydro;

namespace {

using VPtr = std::shared_ptr<const VelocityGrid>;
using XPtr = std::shared_ptr<const SpatialGrid>;
using OpPtr = std::shared_ptr<const CollisionOperator>;

struct Setup {
    VPtr v;
    XPtr x;
    OpPtr op;
    Setup(int nv, int nx) {
        v = std::make_shared<const VelocityGrid>(2, 6.0, nv);
        x = std::make_shared<const SpatialGrid>(2, nx);
        op = std::make_shared<const CollisionOperator>(v);
    }
};

const Setup& small() {
    static const Setup s(16, 4);
    return s;
}

DistributionField data(const Setup& s, InitialKind k, double a = 0.1) {
    InitialParams p;
    p.amplitude = a;
    return make_initial_data(k, p, s.v, s.x, s.op->macro());
}

// L^2_v(M^{-1}) H^s_x norm
double l2_minv(const DistributionField& f, const Profile& M, double s = 2.0) {
    const Profile hs = hs_norms(f, s);
    return std::sqrt((hs.array().square() / M.array()).sum() * f.vgrid().weight());
}

double rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff() / std::max(1e-300, b.cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("transport substep") {
    const Setup& s = small();
    const DistributionField f = data(s, InitialKind::Mixed);
    CHECK(step_transport(f, 0.0, 0.3).data == f.data);
    for (int iv = 0; iv < s.v->size(); ++iv) {
        const Eigen::VectorXd a = f.data.col(iv), b = step_transport(f, 0.07, 0.3).data.col(iv);
        CHECK(std::abs(a.norm() - b.norm()) <= 1e-12 * std::max(1.0, a.norm()));
    }
    // one spatial mode, one velocity node
    auto x = std::make_shared<const SpatialGrid>(2, 8);
    DistributionField g(s.v, x);
    const int iv = 37;
    for (int j = 0; j < x->size(); ++j) g(j, iv) = std::cos(x->coord(j, 0) + 2 * x->coord(j, 1));
    const double dt = 0.013, eps = 0.2;
    const double shift = (s.v->coord(iv, 0) + 2 * s.v->coord(iv, 1)) * dt / eps;
    const DistributionField h = step_transport(g, dt, eps);
    double worst = 0;
    for (int j = 0; j < x->size(); ++j)
        worst = std::max(worst, std::abs(h(j, iv) - std::cos(x->coord(j, 0) + 2 * x->coord(j, 1) - shift)));
    CHECK(worst <= 1e-14);
}

TEST_CASE("collision substep: zero, equilibrium and stability bound") {
    const Setup& s = small();
    const double eps = 0.2, dt = 0.25 * eps * eps;
    const DistributionField z(s.v, s.x);
    CHECK(step_collision(z, dt, eps, s.op).data.cwiseAbs().maxCoeff() == 0.0);
    // a multiple of M is an equilibrium fluctuation; on the grid only up to quadrature
    const DistributionField m = DistributionField::from_profile(s.v, s.x, 0.01 * s.op->M());
    for (auto integ : {CollisionIntegrator::Exponential, CollisionIntegrator::NuIntegratingFactor}) {
        const double e = rel(step_collision(m, dt, eps, s.op, integ).data, m.data);
        MESSAGE("equilibrium drift " << e);
        CHECK(e <= 1e-5);
    }
    // its projection lies exactly in the kernel of the projected linear generator
    const DistributionField pm = project_pi(m, s.op->macro());
    const CollisionStepper lin(s.op, dt, eps, CollisionIntegrator::Exponential, true, false);
    CHECK(rel(lin.step(pm).data, pm.data) <= 1e-12);
    CHECK_THROWS_AS(CollisionStepper(s.op, 0.6 * eps * eps, eps), InvalidArgument);
}

TEST_CASE("linear decay of a microscopic mode follows the spectral gap") {
    const Setup s(24, 1);
    const GalerkinBasis basis(s.op, 8);
    // slowest non-hydrodynamic Galerkin eigenvector, on the grid
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(basis.L());
    const Eigen::VectorXd& ev = es.eigenvalues();
    int idx = -1;
    for (int i = 0; i < ev.size(); ++i)
        if (ev[i] < -1e-6 * ev.cwiseAbs().maxCoeff() && (idx < 0 || ev[i] > ev[idx])) idx = i;
    REQUIRE(idx >= 0);
    const Profile g = basis.values(es.eigenvectors().col(idx));
    const DistributionField f = DistributionField::from_profile(s.v, s.x, g);
    const double eps = 0.2;
    EvolveConfig cfg;
    cfg.epsilon = eps;
    cfg.nonlinear = false;
    cfg.t_end = 5 * eps * eps;
    cfg.samples = 0;
    const Trajectory tr = evolve_boltzmann(f, cfg, s.op);
    std::vector<double> t, y;
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        t.push_back(tr.t[k] / (eps * eps));
        y.push_back(l2_minv(tr.f[k], s.op->M()));
    }
    const FitResult r = fit_decay_rate(t, y);
    MESSAGE("decay rate " << r.value << " vs gap " << basis.gap());
    CHECK(r.value == doctest::Approx(basis.gap()).epsilon(0.2));
}

TEST_CASE("conservation and positivity over t = 1") {
    const Setup& s = small();
    EvolveConfig cfg;
    cfg.epsilon = 0.2;
    cfg.t_end = 1.0;
    // small enough that M + eps f starts non-negative
    const Trajectory tr = evolve_boltzmann(data(s, InitialKind::Mixed, 0.02), cfg, s.op);
    const Invariants& a = tr.invariants.front();
    double drift = 0;
    for (const auto& inv : tr.invariants) {
        drift = std::max(drift, std::abs(inv.mass - a.mass));
        drift = std::max(drift, std::abs(inv.energy - a.energy));
        drift = std::max(drift, (inv.momentum - a.momentum).cwiseAbs().maxCoeff());
    }
    MESSAGE("invariant drift " << drift << ", min density " << tr.min_density);
    CHECK(drift <= 1e-8);
    CHECK(tr.positivity_violations == 0);
    CHECK(tr.min_density >= -1e-10);
    CHECK(tr.t.back() == doctest::Approx(1.0));
    for (double h : tr.entropy) CHECK(std::isfinite(h));
}

TEST_CASE("relaxation of small well-prepared data at eps = 1") {
    const Setup& s = small();
    EvolveConfig cfg;
    cfg.epsilon = 1.0;
    cfg.t_end = 6.0;
    cfg.samples = 24;
    const Trajectory tr = evolve_boltzmann(data(s, InitialKind::Mixed), cfg, s.op);
    const NormSpec n = NormSpec::polynomial(1, 4);
    std::vector<double> y;
    for (const auto& f : tr.f) y.push_back(weighted_norm(f, n));
    for (std::size_t k = y.size() / 2 + 1; k < y.size(); ++k) CHECK(y[k] <= y[k - 1] * (1 + 1e-10));
    CHECK(y.back() < 0.5 * y.front());
}

TEST_CASE("H-theorem on a homogeneous relaxation") {
    const Setup s(24, 1);
    // energy-matched two-beam mixture along axis 0
    const double sh = 0.8, T = 1 - sh * sh;
    Profile F(s.v->size());
    for (int i = 0; i < s.v->size(); ++i) {
        const double a = s.v->coord(i, 0), b = s.v->coord(i, 1);
        const double g = std::exp(-0.5 * (a - sh) * (a - sh) / T) + std::exp(-0.5 * (a + sh) * (a + sh) / T);
        F[i] = 0.5 * g / std::sqrt(2 * M_PI * T) * std::exp(-0.5 * b * b) / std::sqrt(2 * M_PI);
    }
    // make the discrete invariants match those of M exactly
    const DistributionField d = DistributionField::from_profile(s.v, s.x, F - s.op->M());
    const DistributionField f0 = d - project_pi(d, s.op->macro());
    CHECK((s.op->M() + f0.data.row(0).transpose()).minCoeff() >= -1e-12);
    EvolveConfig cfg;
    cfg.epsilon = 1.0;
    cfg.t_end = 3.0;
    cfg.samples = 0;
    const Trajectory tr = evolve_boltzmann(f0, cfg, s.op);
    double worst = -1e300;
    for (std::size_t k = 1; k < tr.entropy.size(); ++k) worst = std::max(worst, tr.entropy[k] - tr.entropy[k - 1]);
    MESSAGE("largest per-step entropy change " << worst);
    CHECK(worst <= 1e-10);
    CHECK(tr.entropy.back() < tr.entropy.front());
    CHECK(tr.positivity_violations == 0);
}

TEST_CASE("linear propagator: identity, contraction and hydrodynamic prediction") {
    const Setup& s = small();
    const DistributionField f = data(s, InitialKind::Mixed);
    CHECK(linear_propagate(f, 0.0, 0.2, s.op).data == f.data);
    const double n0 = l2_minv(f, s.op->M());
    for (double t : {0.05, 0.2, 0.5}) CHECK(l2_minv(linear_propagate(f, t, 0.2, s.op), s.op->M()) <= n0 * (1 + 1e-8));

    // macroscopic single mode: U^eps ~ U^0 + U^eps_disp
    const Setup m(24, 4);
    const HydroCoefficients hc = chapman_enskog_grid(*m.op).coefficients();
    const MacroBasis& mb = m.op->macro();
    MacroFields mf(m.x);
    for (int j = 0; j < m.x->size(); ++j) {
        const double c = std::cos(m.x->coord(j, 0));
        mf.rho[j] = 0.1 * c;
        mf.u(j, 1) = 0.1 * c;
    }
    const DistributionField g = infinitesimal_maxwellian(mf, m.v, mb);
    const double eps = 0.1;
    for (double t : {0.5, 1.0}) {
        const DistributionField got = project_pi(linear_propagate(g, t, eps, m.op), mb);
        const DistributionField want = u0_apply(g, t, hc, mb) + acoustic_propagate(g, t, eps, hc, mb);
        const double err = l2_minv(got - want, m.op->M()) / l2_minv(g, m.op->M());
        MESSAGE("t = " << t << ": relative deviation " << err);
        CHECK(err <= 0.05);
    }
}

TEST_CASE("free transport with collision-frequency damping") {
    const Setup& s = small();
    const DistributionField h = data(s, InitialKind::Mixed);
    const Profile& nu = s.op->nu();
    CHECK(s_eps_apply(h, 0.0, 0.2, nu).data == h.data);
    const auto [nu0, nu1] = nu_bounds(nu, *s.v);
    (void)nu1;
    const double t = 0.01, eps = 0.2;
    const DistributionField out = s_eps_apply(h, t, eps, nu);
    const NormSpec sup = NormSpec::polynomial(NormSpec::inf, 0);
    CHECK(weighted_norm(out, sup) <= std::exp(-nu0 * t / (eps * eps)) * weighted_norm(h, sup) * (1 + 1e-10));
    DistributionField ref = step_transport(h, t, eps);
    for (int iv = 0; iv < s.v->size(); ++iv) ref.data.col(iv) *= std::exp(-nu[iv] * t / (eps * eps));
    CHECK(rel(out.data, ref.data) <= 1e-12);
}

TEST_CASE("Strang splitting is second order on a nonstiff linear run") {
    const Setup& s = small();
    const DistributionField f = data(s, InitialKind::Mixed);
    auto run = [&](double factor) {
        EvolveConfig cfg;
        cfg.epsilon = 1.0;
        cfg.dt_factor = factor;
        cfg.t_end = 1.0;
        cfg.nonlinear = false;
        cfg.samples = 1;
        return evolve_boltzmann(f, cfg, s.op).f.back().data;
    };
    const Eigen::MatrixXd a = run(0.5), b = run(0.25), c = run(0.125), r = run(0.03125);
    const double e1 = (a - r).cwiseAbs().maxCoeff(), e2 = (b - r).cwiseAbs().maxCoeff(), e3 = (c - r).cwiseAbs().maxCoeff();
    MESSAGE("splitting errors " << e1 << ", " << e2 << ", " << e3);
    CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.15));
    CHECK(std::log2(e2 / e3) == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("norms stay bounded uniformly in epsilon") {
    const Setup& s = small();
    const DistributionField f = data(s, InitialKind::WellPreparedTaylorGreen);
    const double n0 = weighted_norm(f, NormSpec::polynomial(1, 4));
    for (double eps : {0.4, 0.2, 0.1}) {
        EvolveConfig cfg;
        cfg.epsilon = eps;
        cfg.t_end = 0.5;
        cfg.samples = 16;
        const Trajectory tr = evolve_boltzmann(f, cfg, s.op);
        double sup = 0;
        for (const auto& g : tr.f) sup = std::max(sup, weighted_norm(g, NormSpec::polynomial(1, 4)));
        MESSAGE("eps " << eps << ": sup norm / initial " << sup / n0);
        CHECK(sup <= 2 * n0);
    }
}

TEST_CASE("coupled system") {
    const Setup& s = small();
    EvolveConfig cfg;
    cfg.epsilon = 0.2;
    cfg.t_end = 0.5;
    cfg.coupled = true;
    cfg.samples = 10;
    SUBCASE("macroscopic data keep h at zero") {
        MacroFields m(s.x);
        for (int j = 0; j < s.x->size(); ++j) m.rho[j] = 0.1 * std::cos(s.x->coord(j, 1));
        const DistributionField f = infinitesimal_maxwellian(m, s.v, s.op->macro());
        const CoupledTrajectory ct = evolve_coupled(f, cfg, s.op);
        EvolveConfig direct = cfg;
        direct.coupled = false;
        const Trajectory tr = evolve_boltzmann(f, direct, s.op);
        for (std::size_t k = 0; k < ct.h.f.size(); ++k) {
            CHECK(ct.h.f[k].data.cwiseAbs().maxCoeff() <= 1e-12);
            CHECK(rel(ct.e.f[k].data, tr.f[k].data) <= 1e-6);
        }
    }
    SUBCASE("h + e reproduces the direct solution") {
        const DistributionField f = data(s, InitialKind::Mixed);
        const CoupledTrajectory ct = evolve_coupled(f, cfg, s.op);
        EvolveConfig direct = cfg;
        direct.coupled = false;
        const Trajectory tr = evolve_boltzmann(f, direct, s.op);
        REQUIRE(ct.h.t.size() == tr.t.size());
        double worst = 0;
        for (std::size_t k = 0; k < tr.f.size(); ++k) {
            CHECK(ct.h.t[k] == tr.t[k]);
            worst = std::max(worst, rel(ct.h.f[k].data + ct.e.f[k].data, tr.f[k].data));
        }
        MESSAGE("coupled mismatch " << worst);
        CHECK(worst <= 1e-6);
    }
    SUBCASE("microscopic part decays exponentially") {
        const DistributionField f = data(s, InitialKind::MicroscopicBump);
        cfg.t_end = 0.2;
        cfg.samples = 20;
        const CoupledTrajectory ct = evolve_coupled(f, cfg, s.op);
        std::vector<double> t, y;
        for (std::size_t k = 0; k < ct.h.f.size(); ++k) {
            t.push_back(ct.h.t[k] / (cfg.epsilon * cfg.epsilon));
            y.push_back(weighted_norm(ct.h.f[k], NormSpec::polynomial(1, 4)));
        }
        const FitResult r = fit_decay_rate(std::vector<double>(t.begin(), t.begin() + 6), std::vector<double>(y.begin(), y.begin() + 6));
        MESSAGE("fitted sigma " << r.value);
        CHECK(r.value > 0);
        CHECK(y[5] < y[0]);
    }
}

TEST_CASE("configuration checks") {
    EvolveConfig c;
    c.epsilon = 0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c.epsilon = 0.2;
    c.dt_factor = 0.6;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c.dt_factor = 0.25;
    c.t_end = 1.0;
    CHECK(c.steps() == 100);
}
