#include "kinhydro/collision.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/tools/roots.hpp>

#include "kinhydro/errors.hpp"

namespace kinhydro {

void SplittingParams::validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("splitting: delta must lie in (0, 1)");
}

double smoothstep5(double t) {
    if (t <= 0) return 0;
    if (t >= 1) return 1;
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double theta_delta(const double* v, const double* vs, const double* sigma, int d, const SplittingParams& p) {
    const double del = p.delta;
    double vn2 = 0, g2 = 0, dot = 0;
    for (int k = 0; k < d; ++k) {
        vn2 += v[k] * v[k];
        const double r = v[k] - vs[k];
        g2 += r * r;
        dot += sigma[k] * r;
    }
    const double vn = std::sqrt(vn2), g = std::sqrt(g2);
    if (g == 0) return 0;
    const double c = std::abs(dot) / g;
    const double inv = 1.0 / del;
    const double r_speed = 1.0 - smoothstep5((vn - inv) / inv);
    const double r_low = smoothstep5((g - del) / del);
    const double r_high = 1.0 - smoothstep5((g - inv) / inv);
    const double r_cos = 1.0 - smoothstep5((c - (1.0 - 2.0 * del)) / del);
    return r_speed * r_low * r_high * r_cos;
}

CollisionOperator::CollisionOperator(std::shared_ptr<const VelocityGrid> v, CollisionOptions opt)
    : v_(std::move(v)), opt_(opt) {
    if (!v_) throw InvalidArgument("collision: null grid");
    const int d = v_->dim();
    if (opt_.n_sigma == 0) opt_.n_sigma = (d == 2) ? 16 : 4;
    quad_ = build_angle_quadrature(d, opt_.n_sigma);
    for (int k = 0; k < quad_.size(); ++k)
        if (!quad_.antipodal() || k < quad_.antipode[k]) half_.push_back(k);
    M_ = maxwellian(*v_);
    nu_ = collision_frequency(*v_, quad_);
    const int N = v_->size();
    loss_.resize(N, N);
    const auto& X = v_->coords();
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            double r2 = 0;
            for (int k = 0; k < d; ++k) {
                const double t = X(i, k) - X(j, k);
                r2 += t * t;
            }
            loss_(i, j) = std::sqrt(r2) * v_->weight();
        }
    macro_ = std::make_shared<MacroBasis>(*v_);
}

bool CollisionOperator::stencil(const double* y, Stencil& s) const {
    const VelocityGrid& g = *v_;
    const int d = g.dim(), n = g.n_axis();
    const double h = g.spacing(), x0 = g.axis_node(0);
    int base[3] = {0, 0, 0};
    double w[3][3];
    int np = (opt_.interp == Interpolation::Quadratic) ? 3 : 2;
    for (int k = 0; k < d; ++k) {
        const double t = (y[k] - x0) / h;
        if (t < 0.0 || t > n - 1) return false;
        if (np == 3) {
            int m = static_cast<int>(std::lround(t));
            m = std::clamp(m, 1, n - 2);
            const double u = t - m;
            base[k] = m - 1;
            w[k][0] = 0.5 * u * (u - 1.0);
            w[k][1] = 1.0 - u * u;
            w[k][2] = 0.5 * u * (u + 1.0);
        } else {
            int m = static_cast<int>(std::floor(t));
            m = std::clamp(m, 0, n - 2);
            const double u = t - m;
            base[k] = m;
            w[k][0] = 1.0 - u;
            w[k][1] = u;
        }
    }
    s.n = 0;
    if (d == 2) {
        for (int b = 0; b < np; ++b)
            for (int a = 0; a < np; ++a) {
                const int idx = (base[0] + a) + n * (base[1] + b);
                s.idx[s.n] = idx;
                s.w[s.n++] = w[0][a] * w[1][b];
            }
    } else {
        for (int c = 0; c < np; ++c)
            for (int b = 0; b < np; ++b)
                for (int a = 0; a < np; ++a) {
                    const int idx = (base[0] + a) + n * ((base[1] + b) + n * (base[2] + c));
                    s.idx[s.n] = idx;
                    s.w[s.n++] = w[0][a] * w[1][b] * w[2][c];
                }
    }
    if (opt_.maxwell_weighted)
        for (int c = 0; c < s.n; ++c) s.w[c] /= M_[s.idx[c]];
    return true;
}

// visit(j, k, s_prime, s_prime_star, coef): coef carries w_v |v - v_*| w_sigma,
// the antipodal doubling, and M(v)M(v_*) for the weighted scheme.
template <class Visit>
void CollisionOperator::for_each_collision(int i, Visit&& visit) const {
    const VelocityGrid& g = *v_;
    const int d = g.dim(), N = g.size();
    const auto& X = g.coords();
    const double dbl = quad_.antipodal() ? 2.0 : 1.0;
    double vi[3], vj[3], c[3], r[3], y1[3], y2[3];
    for (int k = 0; k < d; ++k) vi[k] = X(i, k);
    Stencil s1, s2;
    for (int j = 0; j < N; ++j) {
        if (j == i) continue;
        double g2 = 0;
        for (int k = 0; k < d; ++k) {
            vj[k] = X(j, k);
            c[k] = 0.5 * (vi[k] + vj[k]);
            r[k] = vi[k] - vj[k];
            g2 += r[k] * r[k];
        }
        const double gm = std::sqrt(g2);
        double base = g.weight() * gm * dbl;
        if (opt_.maxwell_weighted) base *= M_[i] * M_[j];
        for (int k : half_) {
            for (int a = 0; a < d; ++a) {
                const double t = 0.5 * gm * quad_.nodes(k, a);
                y1[a] = c[a] + t;
                y2[a] = c[a] - t;
            }
            if (!stencil(y1, s1) || !stencil(y2, s2)) continue;
            visit(j, k, s1, s2, base * quad_.weights[k], vi, vj);
        }
    }
}

namespace {
inline void interp(const double* F, int nx, const Stencil& s, double* out) {
    const double* p = F + static_cast<std::ptrdiff_t>(s.idx[0]) * nx;
    double w = s.w[0];
    for (int x = 0; x < nx; ++x) out[x] = w * p[x];
    for (int c = 1; c < s.n; ++c) {
        p = F + static_cast<std::ptrdiff_t>(s.idx[c]) * nx;
        w = s.w[c];
        for (int x = 0; x < nx; ++x) out[x] += w * p[x];
    }
}
}  // namespace

Eigen::MatrixXd CollisionOperator::q_raw(const Eigen::MatrixXd& F, const Eigen::MatrixXd& G) const {
    const int N = v_->size();
    if (F.cols() != N || G.cols() != N || F.rows() != G.rows())
        throw InvalidArgument("q_bilinear: array shape mismatch");
    const int nx = static_cast<int>(F.rows());
    const bool same = (F.data() == G.data()) || F == G;
    const Eigen::MatrixXd AG = G * loss_;
    const Eigen::MatrixXd AF = same ? AG : Eigen::MatrixXd(F * loss_);
    Eigen::MatrixXd out(nx, N);
#pragma omp parallel for schedule(dynamic, 4)
    for (int i = 0; i < N; ++i) {
        std::vector<double> acc(nx, 0.0), a1(nx), a2(nx), b1(nx), b2(nx);
        for_each_collision(i, [&](int, int, const Stencil& s1, const Stencil& s2, double coef,
                                  const double*, const double*) {
            interp(F.data(), nx, s1, a1.data());
            interp(F.data(), nx, s2, a2.data());
            if (same) {
                for (int x = 0; x < nx; ++x) acc[x] += coef * (a1[x] * a2[x]);
            } else {
                interp(G.data(), nx, s1, b1.data());
                interp(G.data(), nx, s2, b2.data());
                const double hc = 0.5 * coef;
                for (int x = 0; x < nx; ++x) acc[x] += hc * (a1[x] * b2[x] + b1[x] * a2[x]);
            }
        });
        for (int x = 0; x < nx; ++x)
            out(x, i) = acc[x] - 0.5 * (F(x, i) * AG(x, i) + G(x, i) * AF(x, i));
    }
    return out;
}

Eigen::MatrixXd CollisionOperator::conserve_rows(const Eigen::MatrixXd& Q) const {
    return Q - Q * macro_->pi().transpose();
}

DistributionField CollisionOperator::q_bilinear(const DistributionField& f, const DistributionField& g,
                                                bool conserve_fix) const {
    f.require_same_grids(g, "q_bilinear");
    if (!f.vgrid().same_as(*v_)) throw InvalidArgument("q_bilinear: field grid differs from operator grid");
    Eigen::MatrixXd q = q_raw(f.data, g.data);
    if (conserve_fix) q = conserve_rows(q);
    DistributionField out = f.with_data(std::move(q));
    out.role = Role::Fluctuation;
    return out;
}

const Eigen::MatrixXd& CollisionOperator::K() const {
    std::lock_guard<std::mutex> lock(mu_);
    if (K_.size() == 0) {
        const int N = v_->size();
        // assemble the transpose: column i holds row i
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(N, N);
#pragma omp parallel for schedule(dynamic, 4)
        for (int i = 0; i < N; ++i) {
            double* row = T.col(i).data();
            for_each_collision(i, [&](int, int, const Stencil& s1, const Stencil& s2, double coef,
                                      const double*, const double*) {
                double im1 = 0, im2 = 0;
                for (int c = 0; c < s1.n; ++c) im1 += s1.w[c] * M_[s1.idx[c]];
                for (int c = 0; c < s2.n; ++c) im2 += s2.w[c] * M_[s2.idx[c]];
                for (int c = 0; c < s2.n; ++c) row[s2.idx[c]] += coef * im1 * s2.w[c];
                for (int c = 0; c < s1.n; ++c) row[s1.idx[c]] += coef * im2 * s1.w[c];
            });
            for (int j = 0; j < N; ++j) row[j] -= M_[i] * loss_(i, j);
        }
        K_ = T.transpose();
    }
    return K_;
}

const Eigen::MatrixXd& CollisionOperator::L() const {
    const Eigen::MatrixXd& k = K();
    std::lock_guard<std::mutex> lock(mu_);
    if (L_.size() == 0) {
        L_ = k;
        L_.diagonal() -= nu_;
    }
    return L_;
}

const Eigen::MatrixXd& CollisionOperator::L_conserving() const {
    const Eigen::MatrixXd& l = L();
    std::lock_guard<std::mutex> lock(mu_);
    if (Lc_.size() == 0) {
        const Eigen::MatrixXd& P = macro_->pi();
        const Eigen::MatrixXd lp = l - l * P;
        Lc_ = lp - P * lp;
    }
    return Lc_;
}

const CollisionOperator::DeltaMats& CollisionOperator::delta_mats(const SplittingParams& p) const {
    p.validate();
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = delta_cache_.find(p.delta);
        if (it != delta_cache_.end()) return it->second;
    }
    const int N = v_->size(), d = v_->dim();
    const auto& X = v_->coords();
    const double inv = 1.0 / p.delta;
    Eigen::MatrixXd TA = Eigen::MatrixXd::Zero(N, N), TB = TA, TT = TA;
    const double dbl = quad_.antipodal() ? 2.0 : 1.0;
#pragma omp parallel for schedule(dynamic, 4)
    for (int i = 0; i < N; ++i) {
        double* ra = TA.col(i).data();
        double* rb = TB.col(i).data();
        double* rt = TT.col(i).data();
        const double speed = std::sqrt(v_->speed2()[i]);
        // Theta-weighted sphere mass for the M f_* term, over all sigma
        double vi[3], vj[3];
        for (int k = 0; k < d; ++k) vi[k] = X(i, k);
        for (int j = 0; j < N; ++j) {
            if (j == i) continue;
            double th = 0;
            if (speed <= 2.0 * inv) {
                for (int k = 0; k < d; ++k) vj[k] = X(j, k);
                for (int k : half_) {
                    double sg[3];
                    for (int a = 0; a < d; ++a) sg[a] = quad_.nodes(k, a);
                    th += dbl * quad_.weights[k] * theta_delta(vi, vj, sg, d, p);
                }
            }
            const double l = M_[i] * loss_(i, j);
            ra[j] -= l * th;
            rb[j] -= l * (1.0 - th);
            rt[j] += l * (1.0 - th);
        }
        for_each_collision(i, [&](int, int k, const Stencil& s1, const Stencil& s2, double coef,
                                  const double* a, const double* b) {
            double th = 0.0;
            if (speed <= 2.0 * inv) {
                double sg[3];
                for (int q = 0; q < d; ++q) sg[q] = quad_.nodes(k, q);
                th = theta_delta(a, b, sg, d, p);
            }
            double im1 = 0, im2 = 0;
            for (int c = 0; c < s1.n; ++c) im1 += s1.w[c] * M_[s1.idx[c]];
            for (int c = 0; c < s2.n; ++c) im2 += s2.w[c] * M_[s2.idx[c]];
            for (int c = 0; c < s2.n; ++c) {
                const double t = coef * im1 * s2.w[c];
                ra[s2.idx[c]] += th * t;
                rb[s2.idx[c]] += (1.0 - th) * t;
                rt[s2.idx[c]] += (1.0 - th) * std::abs(t);
            }
            for (int c = 0; c < s1.n; ++c) {
                const double t = coef * im2 * s1.w[c];
                ra[s1.idx[c]] += th * t;
                rb[s1.idx[c]] += (1.0 - th) * t;
                rt[s1.idx[c]] += (1.0 - th) * std::abs(t);
            }
        });
    }
    DeltaMats m{TA.transpose(), TB.transpose(), TT.transpose()};
    std::lock_guard<std::mutex> lock(mu_);
    auto [it, inserted] = delta_cache_.emplace(p.delta, std::move(m));
    return it->second;
}

const Eigen::MatrixXd& CollisionOperator::A_delta(const SplittingParams& p) const { return delta_mats(p).A; }
const Eigen::MatrixXd& CollisionOperator::B_bar(const SplittingParams& p) const { return delta_mats(p).Bbar; }
const Eigen::MatrixXd& CollisionOperator::B_tilde(const SplittingParams& p) const { return delta_mats(p).Btilde; }

Eigen::MatrixXd CollisionOperator::B_delta(const SplittingParams& p) const {
    Eigen::MatrixXd B = B_bar(p);
    B.diagonal() -= nu_;
    return B;
}

DistributionField CollisionOperator::linearized_l(const DistributionField& h) const {
    return apply_velocity_matrix(L(), h);
}

DistributionField CollisionOperator::k_apply(const DistributionField& h) const {
    return apply_velocity_matrix(K(), h);
}

DistributionField CollisionOperator::a_delta_apply(const DistributionField& f, const SplittingParams& p) const {
    return apply_velocity_matrix(A_delta(p), f);
}

DistributionField CollisionOperator::b_delta_apply(const DistributionField& f, const SplittingParams& p) const {
    return apply_velocity_matrix(B_delta(p), f);
}

DistributionField CollisionOperator::b_tilde_apply(const DistributionField& f, const SplittingParams& p) const {
    return apply_velocity_matrix(B_tilde(p), f);
}

double entropy(const DistributionField& F) {
    if ((F.data.array() < 0).any()) throw InvalidArgument("entropy: negative density");
    double acc = 0;
    for (int iv = 0; iv < F.nv(); ++iv)
        for (int ix = 0; ix < F.nx(); ++ix) {
            const double v = F.data(ix, iv);
            acc += v * std::log(std::max(v, 1e-300));
        }
    return acc * F.vgrid().weight() * F.xgrid().cell_volume();
}

Invariants collision_invariants(const DistributionField& F) {
    const VelocityGrid& g = F.vgrid();
    const int d = g.dim();
    const Eigen::RowVectorXd colsum = F.data.colwise().sum() / F.nx();
    Invariants inv;
    inv.mass = colsum.sum() * g.weight();
    inv.momentum = (colsum * g.coords()).transpose() * g.weight();
    inv.energy = colsum.dot(g.speed2()) * g.weight();
    (void)d;
    return inv;
}

double phi_p(double p, double alpha) {
    const double ip = std::isinf(p) ? 0.0 : 1.0 / p;
    const double ipc = 1.0 - ip;
    return 4.0 / (std::pow(alpha + 2.0, ip) * std::pow(alpha - 1.0, ipc));
}

RegimeConstants regime_constants(double p, double alpha, int d, double nu0, double nu1) {
    if (!(p >= 1.0)) throw InvalidArgument("regime constants: p must lie in [1, inf]");
    if (!(alpha > 1.0)) throw InvalidArgument("regime constants: alpha must exceed 1");
    if (!(nu0 > 0 && nu1 >= nu0)) throw InvalidArgument("regime constants: need 0 < nu0 <= nu1");
    const double ipc = std::isinf(p) ? 1.0 : 1.0 - 1.0 / p;  // 1/p'
    const double ratio = std::pow(nu1 / nu0, ipc);
    auto g = [&](double a) { return ratio * phi_p(p, a + ipc) - 1.0; };
    RegimeConstants rc;
    rc.phi_p = phi_p(p, alpha);
    const double lo = 2.0 + ipc;
    if (g(lo) <= 0.0) {
        rc.alpha_B = lo;
    } else {
        double hi = 2.0 * lo;
        while (g(hi) > 0.0) hi *= 2.0;
        boost::uintmax_t it = 200;
        auto r = boost::math::tools::toms748_solve(g, lo, hi, boost::math::tools::eps_tolerance<double>(52), it);
        rc.alpha_B = 0.5 * (r.first + r.second);
    }
    rc.alpha_Q = 2.0 + d * ipc;
    rc.alpha_star = std::max(rc.alpha_Q, rc.alpha_B) + 1.0;
    rc.sigma_B = 1.0 - ratio * phi_p(p, alpha + ipc);
    rc.flagged = !(rc.sigma_B > 0.0);
    return rc;
}

CoercivityResult coercivity_check(const CollisionOperator& op, const DistributionField& h,
                                  const SplittingParams& params, double epsilon, double alpha,
                                  double s, bool include_transport) {
    if (!(epsilon > 0)) throw InvalidArgument("coercivity: epsilon must be positive");
    if (h.data.isZero(0.0)) throw InvalidArgument("coercivity: zero field");
    const VelocityGrid& vg = h.vgrid();
    const SpatialGrid& xg = h.xgrid();
    const int nx = xg.size(), N = vg.size(), d = vg.dim();
    const DistributionField bh = op.b_delta_apply(h, params);
    std::vector<double> wk(nx);
    for (int j = 0; j < nx; ++j) wk[j] = std::pow(1.0 + xg.k2(j), s);
    std::vector<cplx> hh(nx), bb(nx);
    double form_b = 0, form_t = 0, nrm = 0;
    for (int iv = 0; iv < N; ++iv) {
        xg.forward(h.data.col(iv).data(), hh.data());
        xg.forward(bh.data.col(iv).data(), bb.data());
        const double wv = std::pow(1.0 + vg.speed2()[iv], alpha) * vg.weight();
        double fb = 0, ft = 0, nn = 0;
        for (int j = 0; j < nx; ++j) {
            const auto k = xg.wave_odd(j);
            double kv = 0;
            for (int a = 0; a < d; ++a) kv += k[a] * vg.coord(iv, a);
            // transport term -eps^{-1} v.grad h has symbol -i (k.v) / eps
            const cplx th = cplx(0.0, -kv / epsilon) * hh[j];
            fb += wk[j] * std::real(bb[j] * std::conj(hh[j]));
            ft += wk[j] * std::real(th * std::conj(hh[j]));
            nn += wk[j] * std::norm(hh[j]);
        }
        form_b += fb * wv;
        form_t += ft * wv;
        nrm += op.nu()[iv] * nn * wv;
    }
    CoercivityResult r;
    r.transport_form = form_t;
    r.form = form_b / (epsilon * epsilon) + (include_transport ? form_t : 0.0);
    r.nu_norm2 = nrm;
    r.ratio = r.form / (-nrm / (epsilon * epsilon));
    return r;
}

}  // namespace kinhydro
