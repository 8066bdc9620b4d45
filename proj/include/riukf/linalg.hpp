#pragma once

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "riukf/error.hpp"

namespace riukf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline double asymmetry(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return (m - m.transpose()).cwiseAbs().maxCoeff();
}

inline double min_eigenvalue(const Matrix& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

inline Vector eigenvalues(const Matrix& m) {
    if (m.rows() == 0) return Vector();
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

/// Symmetric within `tol` (absolute, scaled by the largest entry when that exceeds 1).
inline bool is_symmetric(const Matrix& m, double tol = 1e-12) {
    if (m.rows() != m.cols()) return false;
    if (m.size() == 0) return true;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return asymmetry(m) <= tol * scale;
}

inline bool is_psd(const Matrix& m, double floor = -1e-10) {
    return is_symmetric(m, 1e-9) && min_eigenvalue(m) >= floor;
}

inline void require_square(const Matrix& m, Eigen::Index n, std::string_view what) {
    if (m.rows() != n || m.cols() != n) {
        fail(ErrorKind::ContractViolation,
             std::string(what) + ": expected " + std::to_string(n) + "x" + std::to_string(n) +
                 " matrix, got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

/// L with L*L^T = P (up to jitter). Plain Cholesky first, then P + j*I with
/// j = 1e-12*tr(P)/n and one retry at 1e-9*tr(P)/n, both lower triangular. If those
/// fail, the symmetric root V*sqrt(max(lambda, 0)) is used.
/// Covariances whose trace is not positive are treated as the zero matrix.
inline Matrix psd_sqrt(const Matrix& P) {
    const Eigen::Index n = P.rows();
    require_square(P, n, "psd_sqrt");
    if (n == 0) return Matrix(0, 0);
    if (!P.allFinite()) fail(ErrorKind::Factorization, "covariance has non-finite entries");
    const double lambda_min = min_eigenvalue(P);
    if (lambda_min < -1e-10) {
        fail(ErrorKind::NotPsd,
             "covariance has eigenvalue " + std::to_string(lambda_min) + " below -1e-10");
    }
    const Matrix S = symmetrize(P);
    const double trace = S.trace();
    if (!(trace > 0.0)) return Matrix::Zero(n, n);

    Eigen::LLT<Matrix> llt(S);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    for (double rel : {1e-12, 1e-9}) {
        const double jitter = rel * trace / static_cast<double>(n);
        llt.compute(S + jitter * Matrix::Identity(n, n));
        if (llt.info() == Eigen::Success) return llt.matrixL();
    }
    // rank-deficient or badly scaled: symmetric root with clipped eigenvalues
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
    if (eig.info() != Eigen::Success) fail(ErrorKind::Factorization, "eigendecomposition failed");
    return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

/// Spectral condition number of a symmetric matrix; infinity when it is not
/// positive definite.
inline double spd_condition(const Matrix& m) {
    if (m.rows() == 0) return 1.0;
    const Vector ev = eigenvalues(m);
    if (!(ev(0) > 0.0)) return std::numeric_limits<double>::infinity();
    return ev(ev.size() - 1) / ev(0);
}

inline Matrix block_diag(const Matrix& a, const Matrix& b) {
    Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    out.topLeftCorner(a.rows(), a.cols()) = a;
    out.bottomRightCorner(b.rows(), b.cols()) = b;
    return out;
}

}  // namespace riukf
