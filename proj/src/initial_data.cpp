#include "kinhydro/initial_data.hpp"

#include <cmath>

#include "kinhydro/errors.hpp"

namespace kinhydro {

InitialKind parse_initial_kind(const std::string& s) {
    if (s == "well-prepared-taylor-green") return InitialKind::WellPreparedTaylorGreen;
    if (s == "ill-prepared-mode") return InitialKind::IllPreparedMode;
    if (s == "microscopic-bump") return InitialKind::MicroscopicBump;
    if (s == "mixed") return InitialKind::Mixed;
    throw InvalidArgument("unknown initial data kind '" + s + "'");
}

const char* to_string(InitialKind k) {
    switch (k) {
        case InitialKind::WellPreparedTaylorGreen: return "well-prepared-taylor-green";
        case InitialKind::IllPreparedMode: return "ill-prepared-mode";
        case InitialKind::MicroscopicBump: return "microscopic-bump";
        case InitialKind::Mixed: return "mixed";
    }
    return "?";
}

namespace {

double phase(const SpatialGrid& x, int j, const std::array<int, 3>& k) {
    double s = 0;
    for (int a = 0; a < x.dim(); ++a) s += k[a] * x.coord(j, a);
    return s;
}

MacroFields taylor_green(const std::shared_ptr<const SpatialGrid>& x, const InitialParams& p) {
    MacroFields m(x);
    const int d = x->dim();
    const double a = p.amplitude;
    for (int j = 0; j < x->size(); ++j) {
        const double X = x->coord(j, 0), Y = x->coord(j, 1), cz = d == 3 ? std::cos(x->coord(j, 2)) : 1.0;
        m.u(j, 0) = a * std::sin(X) * std::cos(Y) * cz;
        m.u(j, 1) = -a * std::cos(X) * std::sin(Y) * cz;
        if (d == 3) m.u(j, 2) = 0;
        m.theta[j] = p.theta_ratio * a * std::cos(X) * std::cos(Y) * cz;
        m.rho[j] = -m.theta[j];
    }
    return m;
}

MacroFields acoustic_mode(const std::shared_ptr<const SpatialGrid>& x, const InitialParams& p,
                          const MacroBasis& mb) {
    bool zero = true;
    for (int a = 0; a < x->dim(); ++a) zero = zero && p.mode[a] == 0;
    if (zero) throw InvalidArgument("initial data: ill-prepared mode needs a nonzero wavevector (mean-free)");
    MacroFields m(x);
    const auto n = mb.acoustic_direction();
    for (int j = 0; j < x->size(); ++j) {
        const double c = p.amplitude * std::cos(phase(*x, j, p.mode));
        m.rho[j] = n[0] * c;
        m.theta[j] = n[1] * c;
    }
    return m;
}

DistributionField micro_bump(const std::shared_ptr<const VelocityGrid>& v, const std::shared_ptr<const SpatialGrid>& x,
                             const InitialParams& p, const MacroBasis& mb) {
    const int d = v->dim();
    Profile g(v->size());
    for (int i = 0; i < v->size(); ++i) {
        double r2 = 0;
        for (int a = 0; a < d; ++a) {
            const double c = v->coord(i, a) - (a == 0 ? 1.0 : 0.5);
            r2 += c * c;
        }
        g[i] = std::exp(-r2);
    }
    g -= mb.pi() * g;
    g /= g.cwiseAbs().maxCoeff();
    DistributionField f(v, x);
    for (int j = 0; j < x->size(); ++j)
        f.data.row(j) = (p.amplitude * (1.0 + 0.5 * std::cos(phase(*x, j, p.mode)))) * g.transpose();
    return f;
}

}  // namespace

double mean_free_violation(const DistributionField& f, const MacroBasis& mb) {
    const Eigen::VectorXd avg = f.data.colwise().mean().transpose();
    const double scale = std::max(f.data.cwiseAbs().maxCoeff(), 1e-300);
    return (mb.moment_weights().transpose() * avg).cwiseAbs().maxCoeff() / scale;
}

DistributionField make_initial_data(InitialKind kind, const InitialParams& p, std::shared_ptr<const VelocityGrid> v,
                                    std::shared_ptr<const SpatialGrid> x, const MacroBasis& mb) {
    if (!v || !x) throw InvalidArgument("initial data: null grid");
    if (v->dim() != x->dim()) throw InvalidArgument("initial data: grid dimensions differ");
    if (!std::isfinite(p.amplitude) || !std::isfinite(p.theta_ratio))
        throw InvalidArgument("initial data: non-finite parameters");
    DistributionField f(v, x);
    switch (kind) {
        case InitialKind::WellPreparedTaylorGreen:
            f = infinitesimal_maxwellian(taylor_green(x, p), v, mb);
            break;
        case InitialKind::IllPreparedMode:
            f = infinitesimal_maxwellian(acoustic_mode(x, p, mb), v, mb);
            break;
        case InitialKind::MicroscopicBump:
            f = micro_bump(v, x, p, mb);
            break;
        case InitialKind::Mixed:
            f = infinitesimal_maxwellian(taylor_green(x, p), v, mb) +
                infinitesimal_maxwellian(acoustic_mode(x, p, mb), v, mb) + micro_bump(v, x, p, mb);
            break;
    }
    if (mean_free_violation(f, mb) > 1e-12) throw InvalidArgument("initial data: parameters violate mean-freeness");
    return f;
}

}  // namespace kinhydro
