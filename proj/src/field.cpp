#include "kinhydro/field.hpp"

#include "kinhydro/errors.hpp"

namespace kinhydro {

DistributionField::DistributionField(std::shared_ptr<const VelocityGrid> v,
                                     std::shared_ptr<const SpatialGrid> x, Role r)
    : role(r), v_(std::move(v)), x_(std::move(x)) {
    if (!v_ || !x_) throw InvalidArgument("field: null grid");
    if (v_->dim() != x_->dim()) throw InvalidArgument("field: velocity and space dimensions differ");
    data = Eigen::MatrixXd::Zero(x_->size(), v_->size());
}

bool DistributionField::same_grids(const DistributionField& o) const {
    if (!v_ || !o.v_ || !x_ || !o.x_) return false;
    return (v_ == o.v_ || v_->same_as(*o.v_)) && (x_ == o.x_ || x_->same_as(*o.x_));
}

void DistributionField::require_same_grids(const DistributionField& o, const char* where) const {
    if (!same_grids(o)) throw InvalidArgument(std::string(where) + ": grid mismatch");
}

DistributionField DistributionField::zeros_like() const {
    DistributionField z(v_, x_, role);
    return z;
}

DistributionField DistributionField::with_data(Eigen::MatrixXd d) const {
    if (d.rows() != data.rows() || d.cols() != data.cols())
        throw InvalidArgument("field: data shape mismatch");
    DistributionField out = *this;
    out.data = std::move(d);
    return out;
}

DistributionField DistributionField::from_profile(std::shared_ptr<const VelocityGrid> v,
                                                  std::shared_ptr<const SpatialGrid> x,
                                                  const Profile& p, Role role) {
    DistributionField f(std::move(v), std::move(x), role);
    if (p.size() != f.nv()) throw InvalidArgument("field: profile size mismatch");
    f.data.rowwise() = p.transpose();
    return f;
}

DistributionField operator+(const DistributionField& a, const DistributionField& b) {
    a.require_same_grids(b, "field +");
    return a.with_data(a.data + b.data);
}

DistributionField operator-(const DistributionField& a, const DistributionField& b) {
    a.require_same_grids(b, "field -");
    return a.with_data(a.data - b.data);
}

DistributionField operator*(double s, const DistributionField& a) { return a.with_data(s * a.data); }

DistributionField apply_velocity_matrix(const Eigen::MatrixXd& A, const DistributionField& f) {
    if (A.rows() != f.nv() || A.cols() != f.nv()) throw InvalidArgument("velocity matrix: size mismatch");
    Eigen::MatrixXd out(f.nx(), f.nv());
    out.noalias() = f.data * A.transpose();
    return f.with_data(std::move(out));
}

DistributionField scale_velocity(const Profile& p, const DistributionField& f) {
    if (p.size() != f.nv()) throw InvalidArgument("scale_velocity: size mismatch");
    return f.with_data(f.data * p.asDiagonal());
}

double inner_minv(const DistributionField& a, const DistributionField& b, const Profile& M) {
    a.require_same_grids(b, "inner_minv");
    double acc = 0;
    for (int iv = 0; iv < a.nv(); ++iv) acc += a.data.col(iv).dot(b.data.col(iv)) / M[iv];
    return acc * a.vgrid().weight() / a.nx();
}

}  // namespace kinhydro
