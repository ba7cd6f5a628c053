#pragma once

// Task-only student (OLS), the two stages of the brain-encoding student, and
// closed-form population risk of any linear predictor.

#include <cmath>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "brainval/errors.hpp"
#include "brainval/linalg.hpp"
#include "brainval/linmodel.hpp"

namespace brainval {

/// Stage-1 fit: R ~ X A H with A an orthonormal d_x x k basis.
struct EncodingModel {
    Eigen::MatrixXd A_hat;    // d_x x k, orthonormal columns
    Eigen::MatrixXd H_hat;    // k x d_r
    Eigen::MatrixXd P_A_hat;  // projector onto col(A_hat)
};

enum class EstimatorKind { tos, soft, hard };

struct Provenance {
    std::string config_hash;
    std::uint64_t seed = 0;
};

struct TaskPredictor {
    Eigen::VectorXd beta_hat;
    EstimatorKind kind = EstimatorKind::tos;
    double lambda = 0.0;  // unused for the hard constraint
    Provenance provenance;

    bool is_hard() const { return kind == EstimatorKind::hard; }
};

/// OLS from the sufficient statistics X^T X and X^T y.
inline TaskPredictor fit_tos(const TaskMoments& data) {
    const Eigen::Index d_x = data.gram.rows();
    if (data.n <= d_x) {
        throw SingularDesignError("fit_tos: n_T = " + std::to_string(data.n) + " must exceed d_x = " + std::to_string(d_x));
    }
    TaskPredictor out;
    out.kind = EstimatorKind::tos;
    out.beta_hat = spd_solve(data.gram, data.cross, "fit_tos: X^T X");
    return out;
}

inline TaskPredictor fit_tos(const TaskDataset& data) { return fit_tos(moments(data)); }

/// Global minimizer of (1/n_B) ||R - X A H||_F^2 over rank-k factorizations.
///
/// With S = X^T X / n_B and Q = (X^T X)^{-1} X^T R, the minimizer is
/// S^{-1/2} trunc_k(S^{1/2} Q), where trunc_k keeps the top k singular
/// triplets. A_hat is then re-orthonormalized; the product A_hat H_hat and
/// the projector are unchanged by that change of basis.
inline EncodingModel fit_encoding(const BrainMoments& data, Eigen::Index k) {
    const Eigen::Index d_x = data.gram.rows();
    const Eigen::Index d_r = data.cross.cols();
    if (k < 1 || k > std::min(d_x, d_r)) {
        throw RankError("fit_encoding: rank " + std::to_string(k) + " exceeds min(d_x, d_r)");
    }
    if (data.n <= d_x) {
        throw SingularDesignError("fit_encoding: n_B = " + std::to_string(data.n) + " must exceed d_x = " + std::to_string(d_x));
    }
    const double n = static_cast<double>(data.n);
    const Eigen::MatrixXd q_ols = spd_solve(data.gram, data.cross, "fit_encoding: X^T X");
    const SymmetricRoots roots = symmetric_roots(data.gram / n, "fit_encoding: sample covariance");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(roots.sqrt * q_ols, Eigen::ComputeThinU | Eigen::ComputeThinV);
    // Singular values come sorted descending; ties at the cut keep the lower index.
    const Eigen::MatrixXd u_k = svd.matrixU().leftCols(k);
    const Eigen::MatrixXd h_raw = svd.singularValues().head(k).asDiagonal() * svd.matrixV().leftCols(k).transpose();
    const Eigen::MatrixXd a_raw = roots.inv_sqrt * u_k;

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a_raw);
    Eigen::MatrixXd basis = qr.householderQ() * Eigen::MatrixXd::Identity(d_x, k);
    Eigen::MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < k; ++j) {
        if (r(j, j) < 0.0) {
            basis.col(j) = -basis.col(j);
            r.row(j) = -r.row(j);
        }
    }
    EncodingModel enc;
    enc.A_hat = std::move(basis);
    enc.H_hat = r * h_raw;
    enc.P_A_hat = projector(enc.A_hat);
    return enc;
}

inline EncodingModel fit_encoding(const BrainDataset& data, Eigen::Index k) { return fit_encoding(moments(data), k); }

/// (1/n_B) ||R - X A H||_F^2.
inline double encoding_objective(const BrainDataset& data, const Eigen::MatrixXd& a, const Eigen::MatrixXd& h) {
    return (data.R - data.X * a * h).squaredNorm() / static_cast<double>(data.n());
}

/// Generalized ridge: argmin (1/n)||y - X b||^2 + lambda ||(I - P_A_hat) b||^2.
inline TaskPredictor fit_befs_soft(const TaskMoments& data, const EncodingModel& enc, double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw RegimeError("fit_befs_soft: lambda must be finite and >= 0");
    const Eigen::Index d_x = data.gram.rows();
    const double n = static_cast<double>(data.n);
    Eigen::MatrixXd system = data.gram / n;
    system.noalias() += lambda * (Eigen::MatrixXd::Identity(d_x, d_x) - enc.P_A_hat);
    TaskPredictor out;
    out.kind = EstimatorKind::soft;
    out.lambda = lambda;
    out.beta_hat = spd_solve(system, data.cross / n, "fit_befs_soft: penalized normal equations");
    return out;
}

inline TaskPredictor fit_befs_soft(const TaskDataset& data, const EncodingModel& enc, double lambda) {
    return fit_befs_soft(moments(data), enc, lambda);
}

/// OLS restricted to col(A_hat): beta = A_hat w with w the OLS fit on Z = X A_hat.
inline TaskPredictor fit_befs_hard(const TaskMoments& data, const EncodingModel& enc) {
    const Eigen::Index k = enc.A_hat.cols();
    if (data.n <= k) {
        throw SingularDesignError("fit_befs_hard: n_T = " + std::to_string(data.n) + " must exceed d_l = " + std::to_string(k));
    }
    const Eigen::MatrixXd zz = enc.A_hat.transpose() * data.gram * enc.A_hat;
    const Eigen::VectorXd zy = enc.A_hat.transpose() * data.cross;
    TaskPredictor out;
    out.kind = EstimatorKind::hard;
    out.beta_hat = enc.A_hat * spd_solve(zz, zy, "fit_befs_hard: Z^T Z");
    return out;
}

inline TaskPredictor fit_befs_hard(const TaskDataset& data, const EncodingModel& enc) {
    return fit_befs_hard(moments(data), enc);
}

/// E[(y_test - x_test^T beta_hat)^2] = (beta_hat - beta*)^T Sigma_test (beta_hat - beta*) + sigma_test2.
inline double exact_risk(const Eigen::VectorXd& beta_hat, const ModelParams& p, const TestSpec& test) {
    if (beta_hat.size() != p.d_x) throw DimensionError("exact_risk: predictor dimension disagrees with d_x");
    const Eigen::VectorXd diff = beta_hat - p.beta_star;
    const Eigen::VectorXd coords = p.A_star.transpose() * diff;
    const double on = coords.squaredNorm();
    const double off = (diff - p.A_star * coords).squaredNorm();
    return test.c_on * on + test.c_off * off + test.sigma_test2;
}

inline double exact_risk(const TaskPredictor& pred, const ModelParams& p, const TestSpec& test) {
    return exact_risk(pred.beta_hat, p, test);
}

}  // namespace brainval
