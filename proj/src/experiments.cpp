#include "kinhydro/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "kinhydro/errors.hpp"
#include "kinhydro/fluid.hpp"
#include "kinhydro/initial_data.hpp"

namespace kinhydro {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

FitResult linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    FitResult r;
    r.count = n;
    if (n < 2) {
        r.value = r.residual = kNaN;
        return r;
    }
    double mx = 0, my = 0;
    for (int i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (int i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0) throw InvalidArgument("fit: abscissae coincide");
    r.value = sxy / sxx;
    double ss = 0;
    for (int i = 0; i < n; ++i) {
        const double e = y[i] - (my + r.value * (x[i] - mx));
        ss += e * e;
    }
    r.residual = std::sqrt(ss / n);
    return r;
}

double max_invariant_change(const Invariants& a, const Invariants& b) {
    double m = std::max(std::abs(a.mass - b.mass), std::abs(a.energy - b.energy));
    for (int k = 0; k < a.momentum.size(); ++k) m = std::max(m, std::abs(a.momentum[k] - b.momentum[k]));
    return m;
}

double max_mean_invariant(const DistributionField& f, const MacroBasis& mb) {
    const Eigen::VectorXd avg = f.data.colwise().mean().transpose();
    return (mb.moment_weights().transpose() * avg).cwiseAbs().maxCoeff();
}

// Fourier coefficient of rho + theta at the strongest mode of the first sample.
std::vector<cplx> acoustic_signal(const Trajectory& tr, const MacroBasis& mb, int& mode_index) {
    std::vector<cplx> out;
    const SpatialGrid& x = tr.f[0].xgrid();
    std::vector<cplx> hat(x.size());
    for (std::size_t k = 0; k < tr.f.size(); ++k) {
        const MacroFields m = moments(tr.f[k], mb);
        const Eigen::VectorXd s = m.rho + m.theta;
        x.forward(s.data(), hat.data());
        if (k == 0) {
            mode_index = 0;
            double best = -1;
            for (int j = 1; j < x.size(); ++j)
                if (std::abs(hat[j]) > best) {
                    best = std::abs(hat[j]);
                    mode_index = j;
                }
        }
        out.push_back(hat[mode_index]);
    }
    return out;
}

}  // namespace

FitResult fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw InvalidArgument("fit: size mismatch");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0 && y[i] > 0)) throw InvalidArgument("fit: log-log fit needs positive data");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return linear_fit(lx, ly);
}

FitResult fit_decay_rate(const std::vector<double>& t, const std::vector<double>& y) {
    if (t.size() != y.size()) throw InvalidArgument("fit: size mismatch");
    std::vector<double> ly;
    for (double v : y) {
        if (!(v > 0)) throw InvalidArgument("fit: decay fit needs positive data");
        ly.push_back(std::log(v));
    }
    FitResult r = linear_fit(t, ly);
    r.value = -r.value;
    return r;
}

double half_life(const std::vector<double>& t, const std::vector<double>& y) {
    if (t.size() != y.size() || y.empty()) throw InvalidArgument("half_life: bad series");
    const double target = 0.5 * y[0];
    if (!(target > 0)) return kNaN;
    for (std::size_t k = 1; k < y.size(); ++k)
        if (y[k] <= target) {
            if (!(y[k] > 0)) return t[k];
            const double a = std::log(y[k - 1]), b = std::log(y[k]), g = std::log(target);
            return t[k - 1] + (t[k] - t[k - 1]) * (a - g) / (a - b);
        }
    return kNaN;
}

double dominant_frequency(const std::vector<double>& t, const std::vector<cplx>& s) {
    const int n = static_cast<int>(t.size());
    if (n < 8 || static_cast<int>(s.size()) != n) throw InvalidArgument("dominant_frequency: need >= 8 samples");
    const double dt = t[1] - t[0];
    for (int k = 1; k < n; ++k)
        if (std::abs(t[k] - t[k - 1] - dt) > 1e-9 * std::max(1.0, dt))
            throw InvalidArgument("dominant_frequency: samples must be uniform");
    cplx mean = 0;
    for (const auto& z : s) mean += z;
    mean /= double(n);
    std::vector<cplx> w(n);
    for (int k = 0; k < n; ++k) w[k] = (s[k] - mean) * (0.5 - 0.5 * std::cos(2 * M_PI * k / (n - 1)));
    auto power = [&](double om) {
        cplx acc = 0;
        for (int k = 0; k < n; ++k) acc += w[k] * std::polar(1.0, -om * k * dt);
        cplx acc2 = 0;
        for (int k = 0; k < n; ++k) acc2 += w[k] * std::polar(1.0, om * k * dt);
        return std::norm(acc) + std::norm(acc2);
    };
    const double om_max = M_PI / dt;
    const int scan = std::max(256, 8 * n);
    int best = 1;
    double bp = -1;
    for (int i = 1; i <= scan; ++i) {
        const double p = power(om_max * i / scan);
        if (p > bp) {
            bp = p;
            best = i;
        }
    }
    const double h = om_max / scan;
    const double lo = std::max(1e-12, om_max * best / scan - h), hi = om_max * best / scan + h;
    const auto r = boost::math::tools::brent_find_minima([&](double om) { return -power(om); }, lo, hi, 40);
    return r.first;
}

Decomposition decompose_trajectory(const FieldSeries& fe, const FieldSeries& f0, const FieldSeries& ua,
                                   const MacroBasis& mb, const NormSpec& norm) {
    const std::size_t n = fe.t.size();
    if (fe.f.size() != n || f0.t.size() != n || f0.f.size() != n || ua.t.size() != n || ua.f.size() != n)
        throw InvalidArgument("decompose: series lengths differ");
    Decomposition d;
    for (std::size_t k = 0; k < n; ++k) {
        const double tol = 1e-12 * std::max(1.0, std::abs(fe.t[k]));
        if (std::abs(fe.t[k] - f0.t[k]) > tol || std::abs(fe.t[k] - ua.t[k]) > tol)
            throw InvalidArgument("decompose: time grids are not aligned");
        const DistributionField r = fe.f[k] - f0.f[k] - ua.f[k];
        const DistributionField pr = project_pi(r, mb);
        d.t.push_back(fe.t[k]);
        d.total.push_back(weighted_norm(r, norm));
        d.macro.push_back(weighted_norm(pr, norm));
        d.micro.push_back(weighted_norm(r - pr, norm));
    }
    return d;
}

SweepContext make_context(const SimConfig& cfg) {
    cfg.validate();
    SweepContext c;
    c.cfg = cfg;
    c.v = std::make_shared<const VelocityGrid>(cfg.dim, cfg.v_max, cfg.n_v);
    c.x = std::make_shared<const SpatialGrid>(cfg.dim, cfg.n_x);
    c.op = std::make_shared<const CollisionOperator>(c.v);
    const ChapmanEnskog ce = chapman_enskog_grid(*c.op);
    c.hc = ce.coefficients();
    c.gap = GalerkinBasis(c.op, cfg.galerkin_degree).gap();
    InitialParams ip;
    ip.amplitude = cfg.amplitude;
    ip.theta_ratio = cfg.theta_ratio;
    ip.mode = cfg.mode;
    c.f_in = make_initial_data(parse_initial_kind(cfg.initial), ip, c.v, c.x, c.op->macro());
    c.split = split_initial(c.f_in, c.op->macro());
    return c;
}

FieldSeries limit_reference(const SweepContext& ctx, const std::vector<double>& times, double* truncated_at) {
    if (truncated_at) *truncated_at = kNaN;
    FieldSeries out;
    const MacroBasis& mb = ctx.op->macro();
    FluidState s{moments(ctx.split.wp, mb), 0.0};
    s.m.rho = -s.m.theta;
    for (double t : times) {
        const double span = t - s.t;
        if (span < -1e-12) throw InvalidArgument("limit_reference: times must increase");
        if (span > 1e-14) {
            NsfOptions opt;
            const int n = std::max(1, static_cast<int>(std::ceil(span / ctx.cfg.nsf_dt - 1e-9)));
            opt.dt = span / n;
            opt.stride = n;
            try {
                FluidState next = evolve_nsf(s, ctx.hc.mu, ctx.hc.kappa, span, opt).back();
                next.t = t;
                s = std::move(next);
            } catch (const NumericalError& e) {
                if (truncated_at) *truncated_at = e.last_valid_time;
                return out;
            }
        }
        out.t.push_back(t);
        out.f.push_back(kinetic_counterpart(s, ctx.v, mb));
    }
    return out;
}

SweepRow run_single(const SweepContext& ctx, double eps, Trajectory* traj_out, FieldSeries* f0_out,
                    FieldSeries* uac_out) {
    const auto start = std::chrono::steady_clock::now();
    const SimConfig& cfg = ctx.cfg;
    const MacroBasis& mb = ctx.op->macro();
    const EvolveConfig ec = cfg.evolve_config(eps);
    SweepRow row;
    row.epsilon = eps;
    row.t0 = cfg.layer_window * eps * eps;
    row.t_end = ec.t_end;
    row.steps = ec.steps();
    row.coupled_mismatch = kNaN;

    Trajectory tr = evolve_boltzmann(ctx.f_in, ec, ctx.op);
    row.samples = static_cast<int>(tr.t.size());
    row.min_density = tr.min_density;
    row.positivity_violations = tr.positivity_violations;
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        row.conservation_drift = std::max(row.conservation_drift, max_invariant_change(tr.invariants[k], tr.invariants[0]));
        row.mean_free_drift = std::max(row.mean_free_drift, max_mean_invariant(tr.f[k], mb));
    }

    FieldSeries f0 = limit_reference(ctx, tr.t, &row.nsf_truncated_at);
    FieldSeries uac;
    const bool has_ip = ctx.split.ip.data.cwiseAbs().maxCoeff() > 0;
    for (std::size_t k = 0; k < f0.t.size(); ++k) {
        uac.t.push_back(tr.t[k]);
        uac.f.push_back(has_ip ? acoustic_propagate(ctx.split.ip, tr.t[k], eps, ctx.hc, mb) : ctx.split.ip.zeros_like());
    }

    const NormSpec gauss = NormSpec::gaussian(cfg.beta, cfg.s_sobolev);
    const NormSpec poly = NormSpec::polynomial(cfg.p, cfg.alpha, cfg.s_sobolev);
    for (std::size_t k = 0; k < f0.t.size(); ++k) {
        if (tr.t[k] < row.t0 - 1e-12) continue;
        const DistributionField r = tr.f[k] - f0.f[k] - uac.f[k];
        row.err_gaussian = std::max(row.err_gaussian, weighted_norm(r, gauss));
        row.err_polynomial = std::max(row.err_polynomial, weighted_norm(r, poly));
        row.err_macro = std::max(row.err_macro, weighted_norm(project_pi(r, mb), gauss));
    }

    std::vector<double> micro, tau;
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        micro.push_back(weighted_norm(tr.f[k] - project_pi(tr.f[k], mb), gauss));
        tau.push_back(tr.t[k] / (eps * eps));
    }
    row.micro_initial = micro[0];
    row.half_life = kNaN;
    row.gamma = FitResult{kNaN, kNaN, 0};
    if (micro[0] > 0) {
        row.half_life = half_life(tr.t, micro);
        // initial decay only: stop once the layer reaches 5% or stops falling
        std::vector<double> ft, fy;
        for (std::size_t k = 0; k < micro.size(); ++k) {
            if (micro[k] < 0.05 * micro[0] || (k > 0 && micro[k] >= micro[k - 1])) break;
            ft.push_back(tau[k]);
            fy.push_back(micro[k]);
        }
        if (ft.size() >= 2) row.gamma = fit_decay_rate(ft, fy);
    }

    row.acoustic_freq = row.acoustic_pred = kNaN;
    if (has_ip && tr.t.size() >= 8) {
        int j = 0;
        const std::vector<cplx> sig = acoustic_signal(tr, mb, j);
        std::vector<double> tt(tr.t.begin(), tr.t.end());
        // drop a short final interval so the samples stay uniform
        std::vector<cplx> ss = sig;
        if (tt.size() > 2 && std::abs((tt.back() - tt[tt.size() - 2]) - (tt[1] - tt[0])) > 1e-9) {
            tt.pop_back();
            ss.pop_back();
        }
        row.acoustic_freq = dominant_frequency(tt, ss);
        const auto k = ctx.x->wave(j);
        double k2 = 0;
        for (int a = 0; a < cfg.dim; ++a) k2 += double(k[a]) * k[a];
        row.acoustic_pred = ctx.hc.c * std::sqrt(k2) / eps;
    }

    if (cfg.coupled) {
        EvolveConfig cc = ec;
        cc.coupled = true;
        const CoupledTrajectory ct = evolve_coupled(ctx.f_in, cc, ctx.op);
        double m = 0;
        for (std::size_t k = 0; k < tr.f.size() && k < ct.h.f.size(); ++k) {
            const double scale = std::max(tr.f[k].data.cwiseAbs().maxCoeff(), 1e-300);
            m = std::max(m, (ct.h.f[k].data + ct.e.f[k].data - tr.f[k].data).cwiseAbs().maxCoeff() / scale);
        }
        row.coupled_mismatch = m;
    }

    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (traj_out) *traj_out = std::move(tr);
    if (f0_out) *f0_out = std::move(f0);
    if (uac_out) *uac_out = std::move(uac);
    return row;
}

SweepReport run_limit_sweep(const SimConfig& cfg) { return run_limit_sweep(make_context(cfg)); }

SweepReport run_limit_sweep(const SweepContext& ctx) {
    std::vector<double> eps = ctx.cfg.epsilon;
    std::sort(eps.begin(), eps.end(), std::greater<>());
    if (eps.size() < 3) throw InvalidArgument("sweep: need at least 3 epsilon values");
    for (std::size_t i = 1; i < eps.size(); ++i)
        if (std::abs(eps[i - 1] / eps[i] - 2.0) > 1e-9)
            throw InvalidArgument("sweep: consecutive epsilon values must differ by a factor 2");
    SweepReport rep;
    rep.config_hash = ctx.cfg.hash();
    rep.initial = ctx.cfg.initial;
    rep.hc = ctx.hc;
    rep.gap = ctx.gap;
    rep.layer_window = ctx.cfg.layer_window;
    for (double e : eps) {
        rep.rows.push_back(run_single(ctx, e));
        if (!std::isnan(rep.rows.back().nsf_truncated_at))
            rep.notes.push_back("eps = " + std::to_string(e) + ": fluid solve stopped at t = " +
                                std::to_string(rep.rows.back().nsf_truncated_at) + ", window truncated");
    }
    std::vector<double> ev, err;
    for (const auto& r : rep.rows)
        if (r.err_gaussian > 0) {
            ev.push_back(r.epsilon);
            err.push_back(r.err_gaussian);
        }
    rep.order = ev.size() >= 2 ? fit_loglog_slope(ev, err) : FitResult{kNaN, kNaN, static_cast<int>(ev.size())};
    rep.monotone = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        const SweepRow &a = rep.rows[i - 1], &b = rep.rows[i];
        rep.monotone = rep.monotone && a.err_gaussian > b.err_gaussian;
        rep.pair_orders.push_back(b.err_gaussian > 0 ? std::log2(a.err_gaussian / b.err_gaussian) : kNaN);
        rep.half_life_ratios.push_back(a.half_life / b.half_life);
    }
    return rep;
}

}  // namespace kinhydro
