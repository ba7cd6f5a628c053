#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "brainval/errors.hpp"
#include "brainval/rng.hpp"

namespace brainval {

/// Systems whose estimated condition number exceeds this are treated as singular.
inline constexpr double kConditionLimit = 1e12;

/// Solves S X = B for symmetric positive-definite S.
///
/// Throws SingularDesignError when the Cholesky factorization fails or its
/// reciprocal condition estimate falls below 1 / kConditionLimit.
template <typename Rhs>
Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& s, const Eigen::MatrixBase<Rhs>& b, const std::string& what) {
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success || !(llt.rcond() * kConditionLimit >= 1.0)) {
        throw SingularDesignError(what + ": matrix is singular at condition limit 1e12");
    }
    return llt.solve(b);
}

/// Thin-QR orthonormal basis of the column space of a full-column-rank matrix.
inline Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& m) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
    // Fix the sign ambiguity so the basis is a deterministic function of m.
    const Eigen::MatrixXd r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    return q;
}

/// Orthogonal projector onto the span of an orthonormal basis.
inline Eigen::MatrixXd projector(const Eigen::MatrixXd& basis) {
    return basis * basis.transpose();
}

/// Haar-distributed d x k frame with orthonormal columns.
inline Eigen::MatrixXd random_orthonormal_frame(Eigen::Index d, Eigen::Index k, Engine& rng) {
    return orthonormal_columns(standard_normal(d, k, rng));
}

/// Symmetric square root and inverse square root of an SPD matrix.
struct SymmetricRoots {
    Eigen::MatrixXd sqrt;
    Eigen::MatrixXd inv_sqrt;
};

inline SymmetricRoots symmetric_roots(const Eigen::MatrixXd& s, const std::string& what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    if (eig.info() != Eigen::Success || !(ev.minCoeff() > 0.0) || ev.maxCoeff() > kConditionLimit * ev.minCoeff()) {
        throw SingularDesignError(what + ": matrix is singular at condition limit 1e12");
    }
    const Eigen::MatrixXd& v = eig.eigenvectors();
    const Eigen::VectorXd root = ev.cwiseSqrt();
    return {v * root.asDiagonal() * v.transpose(), v * root.cwiseInverse().asDiagonal() * v.transpose()};
}

/// Largest singular value.
inline double operator_norm(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

}  // namespace brainval
