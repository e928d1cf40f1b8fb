#include "kinhydro/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "kinhydro/errors.hpp"

namespace kinhydro {

namespace {

std::vector<std::array<int, 3>> multi_indices(int d, int K) {
    std::vector<std::array<int, 3>> out;
    for (int tot = 0; tot <= K; ++tot) {
        if (d == 2) {
            for (int a = tot; a >= 0; --a) out.push_back({a, tot - a, 0});
        } else {
            for (int a = tot; a >= 0; --a)
                for (int b = tot - a; b >= 0; --b) out.push_back({a, b, tot - a - b});
        }
    }
    return out;
}

// Normalized probabilists' Hermite polynomials He_n / sqrt(n!).
void hermite_table(double x, int K, double* h) {
    h[0] = 1.0;
    if (K >= 1) h[1] = x;
    for (int n = 1; n < K; ++n) h[n + 1] = (x * h[n] - std::sqrt(double(n)) * h[n - 1]) / std::sqrt(n + 1.0);
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& P, const Eigen::VectorXd& W) {
    Eigen::MatrixXd B = P;
    for (int pass = 0; pass < 2; ++pass) {
        const Eigen::MatrixXd G = B.transpose() * W.asDiagonal() * B;
        Eigen::LLT<Eigen::MatrixXd> llt(G);
        if (llt.info() != Eigen::Success) throw InvalidArgument("galerkin: ill-conditioned Gram matrix");
        const Eigen::MatrixXd R = llt.matrixU();
        const double dmin = R.diagonal().cwiseAbs().minCoeff(), dmax = R.diagonal().cwiseAbs().maxCoeff();
        if (dmin < 1e-7 * dmax) throw InvalidArgument("galerkin: ill-conditioned Gram matrix");
        B = R.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(B);
    }
    return B;
}

Eigen::VectorXd fourier_scale(const SpatialGrid& x, const Eigen::VectorXd& f,
                              const std::function<double(int)>& factor) {
    const int n = x.size();
    std::vector<cplx> hat(n);
    x.forward(f.data(), hat.data());
    for (int j = 0; j < n; ++j) hat[j] *= factor(j);
    Eigen::VectorXd out(n);
    x.inverse(hat.data(), out.data());
    return out;
}

// Heat flow on the Boussinesq part and Stokes flow on the velocity.
MacroFields u0_macro(const MacroFields& wp, double t, const HydroCoefficients& hc) {
    const SpatialGrid& x = *wp.x;
    MacroFields out(wp.x);
    auto heat = [&](int j) { return std::exp(-hc.kappa * x.k2(j) * t); };
    auto visc = [&](int j) { return std::exp(-hc.mu * x.k2(j) * t); };
    out.rho = fourier_scale(x, wp.rho, heat);
    out.theta = fourier_scale(x, wp.theta, heat);
    for (int k = 0; k < wp.dim(); ++k) out.u.col(k) = fourier_scale(x, wp.u.col(k), visc);
    return out;
}

}  // namespace

GalerkinBasis::GalerkinBasis(std::shared_ptr<const CollisionOperator> op, int K) : op_(std::move(op)), K_(K) {
    if (!op_) throw InvalidArgument("galerkin: null operator");
    if (K < 2) throw InvalidArgument("galerkin: degree must be at least 2");
    const VelocityGrid& g = op_->vgrid();
    const int d = g.dim(), N = g.size();
    const auto idx = multi_indices(d, K);
    const int nb = static_cast<int>(idx.size());
    if (nb > N / 2) throw InvalidArgument("galerkin: basis too large for the velocity grid");
    const Profile& M = op_->M();
    Eigen::MatrixXd P(N, nb);
    std::vector<double> h(3 * (K + 1));
    for (int i = 0; i < N; ++i) {
        for (int a = 0; a < d; ++a) hermite_table(g.coord(i, a), K, h.data() + a * (K + 1));
        for (int c = 0; c < nb; ++c) {
            double p = 1.0;
            for (int a = 0; a < d; ++a) p *= h[a * (K + 1) + idx[c][a]];
            P(i, c) = p;
        }
    }
    // polynomial part orthonormal under M w, i.e. P M orthonormal under w / M
    const Eigen::VectorXd Mw = M * g.weight();
    const Eigen::MatrixXd B = orthonormalize(P, Mw);
    phi_ = M.asDiagonal() * B;

    const Eigen::VectorXd W = (g.weight() / M.array()).matrix();
    const Eigen::MatrixXd WPhi = W.asDiagonal() * phi_;
    {
        const Eigen::MatrixXd raw = WPhi.transpose() * op_->L() * phi_;
        asym_ = (raw - raw.transpose()).norm() / raw.norm();
    }
    const Eigen::MatrixXd G = WPhi.transpose() * op_->L_conserving() * phi_;
    L_ = 0.5 * (G + G.transpose());
    V_.resize(d);
    for (int k = 0; k < d; ++k) {
        const Eigen::MatrixXd Vk = WPhi.transpose() * g.coords().col(k).asDiagonal() * phi_;
        V_[k] = 0.5 * (Vk + Vk.transpose());
    }
    E0_ = WPhi.transpose() * op_->macro().E();
    Q0_ = Eigen::HouseholderQR<Eigen::MatrixXd>(E0_).householderQ() * Eigen::MatrixXd::Identity(nb, d + 2);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L_);
    evals_ = es.eigenvalues();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(nb);
    for (int k = 0; k < nb - (d + 2); ++k) inv[k] = 1.0 / evals_[k];
    Lp_ = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::VectorXd GalerkinBasis::coords(const Profile& f) const {
    const VelocityGrid& g = op_->vgrid();
    if (f.size() != g.size()) throw InvalidArgument("galerkin: profile size mismatch");
    return phi_.transpose() * (f.array() * g.weight() / op_->M().array()).matrix();
}

double GalerkinBasis::gap() const { return -evals_[size() - (dim() + 2) - 1]; }

Eigen::MatrixXcd assemble_operator(const Eigen::VectorXd& xi, const GalerkinBasis& basis) {
    if (xi.size() != basis.dim()) throw InvalidArgument("assemble_operator: wave vector dimension mismatch");
    Eigen::MatrixXcd A = basis.L().cast<cplx>();
    for (int k = 0; k < basis.dim(); ++k) A += cplx(0.0, xi[k]) * basis.V(k).cast<cplx>();
    return A;
}

const SpectralBranch& BranchSet::branch(int j) const {
    for (const auto& b : branches)
        if (b.j == j) return b;
    throw InvalidArgument("branch set: no branch " + std::to_string(j));
}

namespace {

int branch_slot(int j) { return j == -1 ? 0 : j == 0 ? 1 : j == 1 ? 2 : 3; }

struct Eig {
    Eigen::VectorXcd values;
    Eigen::MatrixXcd vectors, inverse;
    std::vector<int> hydro;  // indices of the d+2 rightmost eigenvalues
};

Eig hydro_eigen(const Eigen::MatrixXcd& A, int r, double xi) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A);
    if (es.info() != Eigen::Success) throw NumericalError("eigen_branches: eigensolver failed");
    Eig e;
    e.values = es.eigenvalues();
    e.vectors = es.eigenvectors();
    std::vector<int> order(e.values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return e.values[a].real() > e.values[b].real(); });
    e.hydro.assign(order.begin(), order.begin() + r);
    const double lo = e.values[order[r - 1]].real(), next = e.values[order[r]].real();
    if (!(next < lo - 1e-3 * std::abs(next)))
        throw NumericalError("eigen_branches: hydrodynamic eigenvalues not separated at |xi| = " + std::to_string(xi));
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(e.vectors);
    e.inverse = lu.inverse();
    return e;
}

Eigen::MatrixXcd orthonormal_columns(const Eigen::MatrixXcd& X) {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(X);
    return qr.householderQ() * Eigen::MatrixXcd::Identity(X.rows(), X.cols());
}

}  // namespace

BranchSet eigen_branches(const Eigen::VectorXd& direction, const std::vector<double>& xi_mags,
                         const GalerkinBasis& basis) {
    const int d = basis.dim(), r = d + 2, nb = basis.size();
    if (direction.size() != d || !(direction.norm() > 0)) throw InvalidArgument("eigen_branches: bad direction");
    if (xi_mags.empty()) throw InvalidArgument("eigen_branches: no samples");
    for (std::size_t k = 0; k < xi_mags.size(); ++k)
        if (!(xi_mags[k] > 0) || (k > 0 && !(xi_mags[k] > xi_mags[k - 1])))
            throw InvalidArgument("eigen_branches: |xi| samples must be positive and increasing");
    BranchSet bs;
    bs.direction = direction / direction.norm();
    bs.gap = basis.gap();
    const int js[4] = {-1, 0, 1, 2};
    bs.branches.resize(4);
    for (int s = 0; s < 4; ++s) {
        bs.branches[s].j = js[s];
        bs.branches[s].multiplicity = (js[s] == 2) ? d - 1 : 1;
    }

    // macroscopic subspaces in coordinates: heat (1, -1), shear u_T, acoustic (n, u_L)
    const MacroBasis& mb = basis.op().macro();
    const Eigen::MatrixXd& E0 = basis.kernel_coords();
    const auto n = mb.acoustic_direction();
    Eigen::MatrixXd heat = E0.col(0) - E0.col(d + 1);
    Eigen::MatrixXd acou(nb, 2);
    acou.col(0) = n[0] * E0.col(0) + n[1] * E0.col(d + 1);
    acou.col(1) = E0.middleCols(1, d) * bs.direction;
    Eigen::MatrixXd tang(d, d - 1);
    {
        Eigen::MatrixXd T = Eigen::MatrixXd::Identity(d, d) - bs.direction * bs.direction.transpose();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(T, Eigen::ComputeFullU);
        tang = svd.matrixU().leftCols(d - 1);
    }
    Eigen::MatrixXd shear = E0.middleCols(1, d) * tang;
    std::array<Eigen::MatrixXcd, 3> sub = {orthonormal_columns(heat.cast<cplx>()),
                                           orthonormal_columns(shear.cast<cplx>()),
                                           orthonormal_columns(acou.cast<cplx>())};

    std::array<Eigen::MatrixXcd, 4> prev;
    for (std::size_t s = 0; s < xi_mags.size(); ++s) {
        const double xm = xi_mags[s];
        const Eig e = hydro_eigen(assemble_operator(xm * bs.direction, basis), r, xm);
        std::array<std::vector<int>, 4> members;
        if (s == 0) {
            for (int idx : e.hydro) {
                const Eigen::VectorXcd v = e.vectors.col(idx).normalized();
                const double sh = (sub[0].adjoint() * v).squaredNorm();
                const double ss = (sub[1].adjoint() * v).squaredNorm();
                const double sa = (sub[2].adjoint() * v).squaredNorm();
                int slot;
                if (sh >= ss && sh >= sa) slot = branch_slot(0);
                else if (ss >= sa) slot = branch_slot(2);
                else slot = branch_slot(e.values[idx].imag() > 0 ? 1 : -1);
                members[slot].push_back(idx);
            }
        } else {
            // greedy assignment by overlap with the previous branch subspaces
            std::vector<std::array<double, 4>> score;
            for (int idx : e.hydro) {
                const Eigen::VectorXcd v = e.vectors.col(idx).normalized();
                std::array<double, 4> sc;
                for (int b = 0; b < 4; ++b) sc[b] = (prev[b].adjoint() * v).squaredNorm();
                score.push_back(sc);
            }
            std::vector<bool> used(r, false);
            for (int round = 0; round < r; ++round) {
                double best = -1;
                int bi = -1, bb = -1;
                for (int i = 0; i < r; ++i) {
                    if (used[i]) continue;
                    for (int b = 0; b < 4; ++b) {
                        if (static_cast<int>(members[b].size()) >= bs.branches[b].multiplicity) continue;
                        if (score[i][b] > best) {
                            best = score[i][b];
                            bi = i;
                            bb = b;
                        }
                    }
                }
                if (best < 0.5)
                    throw NumericalError("eigen_branches: ambiguous branch tracking at |xi| = " + std::to_string(xm));
                used[bi] = true;
                members[bb].push_back(e.hydro[bi]);
            }
        }
        for (int b = 0; b < 4; ++b) {
            if (static_cast<int>(members[b].size()) != bs.branches[b].multiplicity)
                throw NumericalError("eigen_branches: could not classify hydrodynamic eigenvalues at |xi| = " +
                                     std::to_string(xm));
            Eigen::MatrixXcd Vb(nb, members[b].size());
            cplx lam = 0;
            Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(nb, nb);
            for (std::size_t m = 0; m < members[b].size(); ++m) {
                const int idx = members[b][m];
                Vb.col(m) = e.vectors.col(idx);
                lam += e.values[idx];
                P += e.vectors.col(idx) * e.inverse.row(idx);
            }
            prev[b] = orthonormal_columns(Vb);
            auto& br = bs.branches[b];
            br.xi.push_back(xm);
            br.lambda.push_back(lam / double(members[b].size()));
            br.projector.push_back(std::move(P));
        }
    }
    if (xi_mags.size() >= 4) {
        for (auto& br : bs.branches) {
            const DispersionFit f = fit_dispersion(br);
            br.lambda1 = f.lambda1;
            br.lambda2 = f.lambda2;
            br.fit_residual = f.residual;
            br.flagged = f.flagged;
        }
    }
    return bs;
}

DispersionFit fit_dispersion(const std::vector<double>& xi, const std::vector<cplx>& lambda) {
    if (xi.size() != lambda.size()) throw InvalidArgument("fit_dispersion: size mismatch");
    if (xi.size() < 4) throw InvalidArgument("fit_dispersion: need at least 4 samples");
    const int n = static_cast<int>(xi.size());
    // cubic and quartic terms soak up the remainder when there are enough samples
    const int m = n >= 6 ? 4 : 2;
    Eigen::MatrixXd A(n, m);
    Eigen::VectorXd re(n), im(n);
    double xmax = 0;
    for (int k = 0; k < n; ++k) {
        for (int c = 0; c < m; ++c) A(k, c) = std::pow(xi[k], c + 1);
        re[k] = lambda[k].real();
        im[k] = lambda[k].imag();
        xmax = std::max(xmax, std::abs(xi[k]));
    }
    const auto qr = A.colPivHouseholderQr();
    const Eigen::VectorXd cr = qr.solve(re), ci = qr.solve(im);
    DispersionFit f;
    f.c1 = cplx(cr[0], ci[0]);
    f.c2 = cplx(cr[1], ci[1]);
    f.lambda1 = cplx(0.0, ci[0]);
    f.lambda2 = cr[1];
    for (int k = 0; k < n; ++k) {
        cplx fit = 0;
        for (int c = 0; c < m; ++c) fit += cplx(cr[c], ci[c]) * std::pow(xi[k], c + 1);
        f.residual = std::max(f.residual, std::abs(lambda[k] - fit));
    }
    f.flagged = f.residual > 0.1 * std::abs(f.c2) * xmax * xmax;
    return f;
}

DispersionFit fit_dispersion(const SpectralBranch& b) { return fit_dispersion(b.xi, b.lambda); }

namespace {

// Relative kernel component tolerated in the right-hand sides; the v_max = 6
// truncation alone leaves about 8e-7 in the heat flux.
constexpr double kCeOrthoTol = 1e-5;

struct CERhs {
    std::vector<Profile> tensor;  // d^2 entries, index a*d+b
    std::vector<Profile> vector;  // d entries
};

CERhs ce_rhs(const VelocityGrid& g, const Profile& M) {
    const int d = g.dim(), N = g.size();
    CERhs r;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            Profile p(N);
            for (int i = 0; i < N; ++i)
                p[i] = ((a == b ? g.speed2()[i] / d : 0.0) - g.coord(i, a) * g.coord(i, b)) * M[i];
            r.tensor.push_back(std::move(p));
        }
    for (int a = 0; a < d; ++a) {
        Profile p(N);
        for (int i = 0; i < N; ++i) p[i] = g.coord(i, a) * (0.5 * (d + 2) - 0.5 * g.speed2()[i]) * M[i];
        r.vector.push_back(std::move(p));
    }
    return r;
}

}  // namespace

ChapmanEnskog chapman_enskog(const GalerkinBasis& basis) {
    if (basis.degree() < 6) throw InvalidArgument("chapman_enskog: basis degree must be at least 6");
    const CollisionOperator& op = basis.op();
    const VelocityGrid& g = op.vgrid();
    const int d = g.dim();
    const CERhs rhs = ce_rhs(g, op.M());
    const Eigen::MatrixXd& Q0 = basis.kernel();
    ChapmanEnskog ce;
    ce.Phi.resize(g.size(), d * d);
    ce.phi.resize(g.size(), d);
    auto solve = [&](const Profile& p, Eigen::VectorXd& x) {
        Eigen::VectorXd b = basis.coords(p);
        if ((Q0.transpose() * b).norm() > kCeOrthoTol * b.norm())
            throw InvalidArgument("chapman_enskog: right-hand side not orthogonal to the kernel (quadrature inadequate)");
        b -= Q0 * (Q0.transpose() * b);
        x = basis.L_pinv() * b;
        ce.ortho_residual = std::max(ce.ortho_residual, (Q0.transpose() * x).cwiseAbs().maxCoeff());
        return -x.dot(basis.L() * x);
    };
    double smu = 0, skap = 0;
    Eigen::VectorXd x;
    for (int k = 0; k < d * d; ++k) {
        smu += solve(rhs.tensor[k], x);
        ce.Phi.col(k) = basis.values(x);
    }
    for (int k = 0; k < d; ++k) {
        skap += solve(rhs.vector[k], x);
        ce.phi.col(k) = basis.values(x);
    }
    ce.mu = smu / ((d - 1.0) * (d + 2.0));
    ce.kappa = 2.0 * skap / (d * (d + 2.0));
    std::vector<double> xs;
    for (int k = 1; k <= 8; ++k) xs.push_back(0.005 * k);
    Eigen::VectorXd dir = Eigen::VectorXd::Unit(d, 0);
    const BranchSet bs = eigen_branches(dir, xs, basis);
    ce.c = bs.branch(1).lambda1.imag();
    ce.gamma = ((d - 1) * ce.mu + ce.kappa) / d;
    return ce;
}

Eigen::MatrixXd grid_l_pinv(const CollisionOperator& op) {
    const Eigen::MatrixXd& P = op.macro().pi();
    const int N = static_cast<int>(P.rows());
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(op.L_conserving() - P);
    return lu.solve(Eigen::MatrixXd::Identity(N, N) - P);
}

ChapmanEnskog chapman_enskog_grid(const CollisionOperator& op) {
    const VelocityGrid& g = op.vgrid();
    const int d = g.dim();
    const CERhs rhs = ce_rhs(g, op.M());
    const Eigen::MatrixXd Lp = grid_l_pinv(op);
    const Eigen::MatrixXd& P = op.macro().pi();
    const Eigen::VectorXd W = (g.weight() / op.M().array()).matrix();
    ChapmanEnskog ce;
    ce.Phi.resize(g.size(), d * d);
    ce.phi.resize(g.size(), d);
    auto solve = [&](const Profile& raw, Eigen::VectorXd& x) {
        const double bn = std::sqrt(raw.dot(W.cwiseProduct(raw)));
        const Eigen::VectorXd pb = P * raw;
        if (std::sqrt(pb.dot(W.cwiseProduct(pb))) > kCeOrthoTol * bn)
            throw InvalidArgument("chapman_enskog: right-hand side not orthogonal to the kernel (quadrature inadequate)");
        const Eigen::VectorXd b = raw - pb;
        x = Lp * b;
        const Eigen::VectorXd px = P * x;
        ce.ortho_residual = std::max(ce.ortho_residual, px.cwiseAbs().maxCoeff());
        return -x.dot(W.cwiseProduct(b));
    };
    double smu = 0, skap = 0;
    Eigen::VectorXd x;
    for (int k = 0; k < d * d; ++k) {
        smu += solve(rhs.tensor[k], x);
        ce.Phi.col(k) = x;
    }
    for (int k = 0; k < d; ++k) {
        skap += solve(rhs.vector[k], x);
        ce.phi.col(k) = x;
    }
    ce.mu = smu / ((d - 1.0) * (d + 2.0));
    ce.kappa = 2.0 * skap / (d * (d + 2.0));
    ce.c = std::sqrt((d + 2.0) / d);
    ce.gamma = ((d - 1) * ce.mu + ce.kappa) / d;
    return ce;
}

HydroProjector hydro_projector(const Eigen::VectorXd& xi, const GalerkinBasis& basis) {
    const double m = xi.norm();
    if (!(m > 0)) throw InvalidArgument("hydro_projector: xi must be nonzero");
    if (xi.size() != basis.dim()) throw InvalidArgument("hydro_projector: wave vector dimension mismatch");
    const BranchSet bs = eigen_branches(xi, {0.5 * m, m}, basis);
    const int nb = basis.size(), d = basis.dim();
    const Eigen::VectorXd dir = xi / m;

    // zeroth-order projectors from the macroscopic subspaces
    const Eigen::MatrixXd& E0 = basis.kernel_coords();
    const auto nd = basis.op().macro().acoustic_direction();
    Eigen::VectorXd qh = E0.col(0) - E0.col(d + 1);
    qh.normalize();
    Eigen::VectorXd qs = nd[0] * E0.col(0) + nd[1] * E0.col(d + 1);
    qs.normalize();
    Eigen::VectorXd ql = E0.middleCols(1, d) * dir;
    ql.normalize();
    Eigen::MatrixXd Vd = Eigen::MatrixXd::Zero(nb, nb);
    for (int k = 0; k < d; ++k) Vd += dir[k] * basis.V(k);
    const double beta = qs.dot(Vd * ql);
    const double sg = beta > 0 ? 1.0 : -1.0;
    const Eigen::VectorXd qp = (qs + sg * ql) / std::sqrt(2.0);
    const Eigen::VectorXd qm = (qs - sg * ql) / std::sqrt(2.0);
    const Eigen::MatrixXd& Q0 = basis.kernel();
    const Eigen::MatrixXd Pker = Q0 * Q0.transpose();
    std::array<Eigen::MatrixXd, 4> P0;
    P0[0] = qm * qm.transpose();
    P0[1] = qh * qh.transpose();
    P0[2] = qp * qp.transpose();
    P0[3] = Pker - P0[0] - P0[1] - P0[2];

    HydroProjector hp;
    hp.P0 = Pker.cast<cplx>();
    hp.flat = Eigen::MatrixXcd::Zero(nb, nb);
    hp.P1 = Eigen::MatrixXcd::Zero(nb, nb);
    for (int b = 0; b < 4; ++b) {
        const auto& br = bs.branches[b];
        const Eigen::MatrixXcd& Ph = br.projector[0];
        const Eigen::MatrixXcd& Pf = br.projector[1];
        hp.P0_j[b] = P0[b].cast<cplx>();
        hp.flat_j[b] = Pf;
        // P(s) = P0 + s P1 + s^2 P2 through s = m/2 and s = m
        hp.P1_j[b] = (4.0 * Ph - Pf - 3.0 * hp.P0_j[b]) / m;
        hp.flat += Pf;
        hp.P1 += hp.P1_j[b];
    }
    return hp;
}

DistributionField u0_apply(const MacroFields& m, double t, const HydroCoefficients& hc,
                           std::shared_ptr<const VelocityGrid> v, const MacroBasis& mb) {
    if (t < 0) throw InvalidArgument("u0_apply: negative time");
    return infinitesimal_maxwellian(u0_macro(well_prepared_part(m, mb), t, hc), std::move(v), mb);
}

DistributionField u0_apply(const DistributionField& f, double t, const HydroCoefficients& hc,
                           const MacroBasis& mb) {
    return u0_apply(moments(f, mb), t, hc, f.vgrid_ptr(), mb);
}

DistributionField acoustic_propagate(const DistributionField& f, double t, double epsilon,
                                     const HydroCoefficients& hc, const MacroBasis& mb) {
    if (t < 0) throw InvalidArgument("acoustic_propagate: negative time");
    if (!(epsilon > 0)) throw InvalidArgument("acoustic_propagate: epsilon must be positive");
    const MacroFields m = moments(f, mb);
    const SpatialGrid& x = f.xgrid();
    const int n = x.size(), d = x.dim();
    const auto nd = mb.acoustic_direction();
    std::vector<cplx> s(n), tmp(n);
    std::vector<std::vector<cplx>> u(d, std::vector<cplx>(n));
    const Eigen::VectorXd sx = m.rho + m.theta;
    x.forward(sx.data(), s.data());
    for (int k = 0; k < d; ++k) x.forward(m.u.col(k).data(), u[k].data());
    std::vector<cplx> s_out(n, 0.0);
    std::vector<std::vector<cplx>> u_out(d, std::vector<cplx>(n, 0.0));
    for (int j = 0; j < n; ++j) {
        const auto kv = x.wave_odd(j);
        double kn = 0;
        for (int a = 0; a < d; ++a) kn += double(kv[a]) * kv[a];
        kn = std::sqrt(kn);
        if (kn == 0) {
            // no resolved wave: the density-temperature sum does not move
            s_out[j] = s[j];
            continue;
        }
        cplx ul = 0;
        for (int a = 0; a < d; ++a) ul += (kv[a] / kn) * u[a][j];
        const double ph = hc.c * kn * t / epsilon;
        const double damp = std::exp(-hc.gamma * kn * kn * t);
        const cplx I(0.0, 1.0);
        const cplx st = (s[j] * std::cos(ph) - I * hc.c * ul * std::sin(ph)) * damp;
        const cplx ut = (ul * std::cos(ph) - I * s[j] * std::sin(ph) / hc.c) * damp;
        s_out[j] = st;
        for (int a = 0; a < d; ++a) u_out[a][j] = (kv[a] / kn) * ut;
    }
    MacroFields out(f.xgrid_ptr());
    Eigen::VectorXd sr(n);
    x.inverse(s_out.data(), sr.data());
    out.rho = nd[0] * sr;
    out.theta = nd[1] * sr;
    for (int a = 0; a < d; ++a) {
        Eigen::VectorXd col(n);
        x.inverse(u_out[a].data(), col.data());
        out.u.col(a) = col;
    }
    return infinitesimal_maxwellian(out, f.vgrid_ptr(), mb);
}

MacroFields psi0_source(const DistributionField& q, const CollisionOperator& op, const Eigen::MatrixXd& L_pinv) {
    const DistributionField g = apply_velocity_matrix(L_pinv, q);
    const SpatialGrid& x = q.xgrid();
    const VelocityGrid& vg = q.vgrid();
    const int n = x.size(), d = x.dim();
    DistributionField h = q.zeros_like();
    std::vector<cplx> hat(n);
    for (int iv = 0; iv < vg.size(); ++iv) {
        x.forward(g.data.col(iv).data(), hat.data());
        for (int j = 0; j < n; ++j) {
            const auto kv = x.wave_odd(j);
            double kd = 0;
            for (int a = 0; a < d; ++a) kd += kv[a] * vg.coord(iv, a);
            hat[j] *= cplx(0.0, kd);
        }
        x.inverse(hat.data(), h.data.col(iv).data());
    }
    return well_prepared_part(moments(h, op.macro()), op.macro());
}

Psi0Result psi0_apply(const std::vector<DistributionField>& q_history, double dt, const HydroCoefficients& hc,
                      const CollisionOperator& op, const Eigen::MatrixXd& L_pinv) {
    if (q_history.empty()) throw InvalidArgument("psi0_apply: empty history");
    if (!(dt > 0) && q_history.size() > 1) throw InvalidArgument("psi0_apply: dt must be positive");
    const int n = static_cast<int>(q_history.size());
    const double t = (n - 1) * dt;
    const auto& x = q_history[0].xgrid_ptr();
    MacroFields acc(x);
    Psi0Result res;
    double kmax2 = 0;
    for (int k = 0; k < n; ++k) {
        if (n == 1) break;
        const double w = (k == 0 || k == n - 1) ? 0.5 * dt : dt;
        const MacroFields src = psi0_source(q_history[k], op, L_pinv);
        const MacroFields ev = u0_macro(src, t - k * dt, hc);
        acc.rho += w * ev.rho;
        acc.theta += w * ev.theta;
        acc.u += w * ev.u;
        // resolved wavenumbers of the source
        for (int c = 0; c < src.dim(); ++c) {
            std::vector<cplx> hat(src.nx());
            x->forward(src.u.col(c).data(), hat.data());
            double tot = 0;
            for (auto& z : hat) tot += std::norm(z);
            for (int j = 0; j < src.nx(); ++j)
                if (std::norm(hat[j]) > 1e-24 * std::max(tot, 1e-300)) kmax2 = std::max(kmax2, x->k2(j));
        }
    }
    const double dmax = std::max(hc.mu, hc.kappa);
    if (n > 1 && kmax2 > 0 && dmax > 0) {
        const double tau = 1.0 / (dmax * kmax2);
        res.flagged = dt > tau / 8.0;
    }
    res.value = infinitesimal_maxwellian(acc, q_history[0].vgrid_ptr(), op.macro());
    return res;
}

}  // namespace kinhydro
