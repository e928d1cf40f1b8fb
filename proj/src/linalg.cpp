#include "kinhydro/linalg.hpp"

#include <cmath>

#include "kinhydro/errors.hpp"

namespace kinhydro {

ExpPhi expm_phi1(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols()) throw InvalidArgument("expm: matrix must be square");
    if (!A.allFinite()) throw NumericalError("expm: non-finite matrix");
    const int n = static_cast<int>(A.rows());
    const double norm = A.cwiseAbs().colwise().sum().maxCoeff();
    int s = 0;
    if (norm > 0.5) s = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    const Eigen::MatrixXd B = A * std::ldexp(1.0, -s);
    // phi1(B) = sum B^k / (k+1)!; with ||B|| <= 1/2, 18 terms reach roundoff
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd P = I;
    Eigen::MatrixXd term = I;
    for (int k = 1; k <= 18; ++k) {
        term = B * term / double(k + 1);
        P += term;
    }
    Eigen::MatrixXd E = I + B * P;
    for (int j = 0; j < s; ++j) {
        P = 0.5 * P * (E + I);
        E = E * E;
    }
    return {std::move(E), std::move(P)};
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& A) { return expm_phi1(A).exp; }

}  // namespace kinhydro
