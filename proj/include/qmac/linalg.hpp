#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace qmac {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXcd;

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline double herm_deviation(const Matrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// Sorted ascending eigenvalues/vectors of a Hermitian matrix.
struct HermEig {
    Eigen::VectorXd values;
    Matrix vectors;
};

inline HermEig herm_eig(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    return {es.eigenvalues(), es.eigenvectors()};
}

// log base 2
inline double log2_(double x) { return std::log2(x); }

// Shannon entropy in bits of a (sub)distribution; zero terms skipped.
inline double shannon_entropy(const std::vector<double>& p) {
    double h = 0.0;
    for (double x : p)
        if (x > 0.0) h -= x * std::log2(x);
    return h;
}

} // namespace qmac
