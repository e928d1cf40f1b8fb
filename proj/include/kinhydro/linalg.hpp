#pragma once

#include <Eigen/Dense>

namespace kinhydro {

/// exp(A) and phi1(A) = A^{-1}(exp(A) - I) for a dense square matrix, by
/// scaling and squaring with a Taylor kernel.
struct ExpPhi {
    Eigen::MatrixXd exp;
    Eigen::MatrixXd phi1;
};
ExpPhi expm_phi1(const Eigen::MatrixXd& A);
Eigen::MatrixXd expm(const Eigen::MatrixXd& A);

}  // namespace kinhydro
