#pragma once

// Closed-form risk laws, the optimal ridge schedule and brain-data values.
// Every formula keeps its leading order only; remainder terms are dropped.

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "brainval/errors.hpp"
#include "brainval/estimators.hpp"
#include "brainval/linalg.hpp"
#include "brainval/linmodel.hpp"

namespace brainval {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Constants of a model that every scaling law is written in.
///
/// The estimation-noise covariance Sigma_est = A* M A*^T with
/// M = sigma_r2 (H* H*^T)^{-1} + Sigma_l lives in col(A*), so it is stored
/// through its d_l x d_l latent block M.
struct TheoryQuantities {
    Eigen::Index d_x = 0;
    Eigen::Index d_l = 0;
    double sigma_y2 = 0.0;
    double m2 = 0.0;               // ||(I - P_{A*}) beta*||^2
    double beta_Sigma_beta = 0.0;  // beta*^T Sigma_est beta*
    double tr_Sigma_est = 0.0;
    double delta = 0.0;
    Eigen::MatrixXd latent_est_cov;  // M
    Eigen::MatrixXd A_star;

    double off_dim() const { return static_cast<double>(d_x - d_l); }

    Eigen::MatrixXd Sigma_est() const { return A_star * latent_est_cov * A_star.transpose(); }

    /// Expected squared off-subspace task mass after an n_B-sample encoding fit.
    double gamma_I(double n_b) const { return m2 + off_dim() * delta / n_b; }

    /// Expected test-weighted off-subspace task mass for a block test covariance.
    double gamma_test(double n_b, const TestSpec& test) const {
        const double tr_on_est = test.c_on * tr_Sigma_est;  // Tr(Sigma_{A*} Sigma_est)
        const double first = m2 * tr_on_est - 2.0 * test.c_off * m2 * tr_Sigma_est +
                             beta_Sigma_beta * test.trace_off(d_x, d_l);
        return test.c_off * m2 + first / n_b;
    }

    /// Tr(Sigma_{A*perp}) Tr(Sigma_est) - Tr(Sigma_{A*} Sigma_est) (d_x - d_l).
    double shift_imbalance(const TestSpec& test) const {
        return test.trace_off(d_x, d_l) * tr_Sigma_est - test.c_on * tr_Sigma_est * off_dim();
    }
};

inline TheoryQuantities derive_quantities(const ModelParams& p) {
    TheoryQuantities q;
    q.d_x = p.d_x;
    q.d_l = p.d_l;
    q.sigma_y2 = p.sigma_y2;
    q.A_star = p.A_star;

    Eigen::MatrixXd hh = Eigen::MatrixXd::Zero(p.d_l, p.d_l);
    hh.selfadjointView<Eigen::Lower>().rankUpdate(p.H_star);
    hh = hh.selfadjointView<Eigen::Lower>();
    Eigen::MatrixXd hh_inv;
    try {
        hh_inv = spd_solve(hh, Eigen::MatrixXd::Identity(p.d_l, p.d_l), "H* H*^T");
    } catch (const SingularDesignError&) {
        throw RankError("derive_quantities: H* H*^T is singular; H* must have rank d_l");
    }
    q.latent_est_cov = p.sigma_r2 * hh_inv + p.Sigma_l;

    const Eigen::VectorXd w = p.A_star.transpose() * p.beta_star;
    q.m2 = (p.beta_star - p.A_star * w).squaredNorm();
    q.beta_Sigma_beta = w.dot(q.latent_est_cov * w);
    q.tr_Sigma_est = q.latent_est_cov.trace();
    q.delta = q.beta_Sigma_beta - q.m2 * q.tr_Sigma_est / q.off_dim();
    return q;
}

namespace detail {

inline void require_task_regime(const TheoryQuantities& q, double n_t, const char* what) {
    if (!(n_t > static_cast<double>(q.d_x) + 1.0)) {
        throw RegimeError(std::string(what) + ": n_T must exceed d_x + 1 (inverse-Wishart mean undefined)");
    }
}

inline double positive_gamma(const TheoryQuantities& q, double n_b, const char* what) {
    if (!(n_b >= 1.0)) throw RegimeError(std::string(what) + ": n_B must be >= 1");
    const double g = q.gamma_I(n_b);
    if (!(g > 0.0)) throw DegenerateError(std::string(what) + ": gamma_I(n_B) <= 0");
    return g;
}

}  // namespace detail

/// Excess OLS risk sigma_y2 Tr(Sigma_test) / (n_T - d_x - 1).
inline double tos_excess_risk(const TheoryQuantities& q, const TestSpec& test, double n_t) {
    detail::require_task_regime(q, n_t, "tos_risk");
    const double tr = test.trace_on(q.d_l) + test.trace_off(q.d_x, q.d_l);
    return q.sigma_y2 / (n_t - static_cast<double>(q.d_x) - 1.0) * tr;
}

inline double tos_risk(const TheoryQuantities& q, const TestSpec& test, double n_t) {
    return test.sigma_test2 + tos_excess_risk(q, test, n_t);
}

/// Excess BEFS soft risk (over sigma_test2) at ridge strength lambda.
inline double befs_excess_risk(const TheoryQuantities& q, const TestSpec& test, double n_b, double n_t,
                               double lambda) {
    detail::require_task_regime(q, n_t, "befs_finite_risk");
    if (!(n_b >= 1.0)) throw RegimeError("befs_finite_risk: n_B must be >= 1");
    if (!(lambda >= 0.0)) throw RegimeError("befs_finite_risk: lambda must be >= 0");

    const double alpha = std::isinf(lambda) ? 0.0 : 1.0 / (1.0 + lambda);
    const double shrink = 1.0 - alpha;  // 1 - alpha
    const double shrink2 = shrink * shrink;
    const double keep2 = 1.0 - alpha * alpha;  // 1 - alpha^2
    const double d_l = static_cast<double>(q.d_l);
    const double tr_on = test.trace_on(q.d_l);
    const double tr_off = test.trace_off(q.d_x, q.d_l);
    const double imbalance = q.shift_imbalance(test);
    const double eff_trace = tr_on + alpha * alpha * tr_off;

    const double bias = shrink2 * q.gamma_test(n_b, test) *
                        (1.0 + (2.0 * alpha * (d_l + alpha * q.off_dim()) + 3.0 * alpha * alpha) / n_t);
    const double variance =
        q.sigma_y2 / (n_t - static_cast<double>(q.d_x) - 1.0) * (eff_trace + keep2 / n_b * imbalance);
    const double leak = shrink2 * q.gamma_I(n_b) / n_t * eff_trace;
    const double cross = keep2 * shrink2 * q.m2 / (n_b * n_t) * imbalance;
    return bias + variance + leak + cross;
}

inline double befs_finite_risk(const TheoryQuantities& q, const TestSpec& test, double n_b, double n_t,
                               double lambda) {
    return test.sigma_test2 + befs_excess_risk(q, test, n_b, n_t, lambda);
}

/// lambda_opt = sigma_y2 (d_x - d_l) / (n_T gamma_I(n_B)).
inline double optimal_lambda(const TheoryQuantities& q, double n_b, double n_t) {
    const double g = detail::positive_gamma(q, n_b, "optimal_lambda");
    if (!(n_t > 0.0)) throw RegimeError("optimal_lambda: n_T must be positive");
    return q.sigma_y2 * q.off_dim() / (n_t * g);
}

/// Risk of the hard-constrained estimator conditional on a fitted encoding.
inline double befs_hard_risk(const ModelParams& p, const TestSpec& test, const EncodingModel& enc, double n_t) {
    const auto k = static_cast<double>(enc.A_hat.cols());
    if (!(n_t > k + 1.0)) throw RegimeError("befs_hard_risk: n_T must exceed d_l + 1");
    const Eigen::VectorXd w = enc.A_hat.transpose() * p.beta_star;
    const Eigen::VectorXd beta_off = p.beta_star - enc.A_hat * w;

    // Block test covariance applied to beta_off and traced against P_A_hat.
    const Eigen::VectorXd beta_off_on = p.A_star * (p.A_star.transpose() * beta_off);
    const double bias = test.c_on * beta_off_on.squaredNorm() + test.c_off * (beta_off - beta_off_on).squaredNorm();
    const double overlap = (p.A_star.transpose() * enc.A_hat).squaredNorm();  // Tr(P_{A*} P_A_hat)
    const double tr_test_p = test.c_on * overlap + test.c_off * (k - overlap);
    return test.sigma_test2 + bias + (p.sigma_y2 + beta_off.squaredNorm()) / (n_t - k - 1.0) * tr_test_p;
}

struct AsymptoticValue {
    double rho = 0.0;      // task samples per brain sample
    double v_T = 0.0;      // equivalent extra task samples
    double v_T_inf = 0.0;  // n_B -> infinity limit; +infinity when m = 0
};

inline AsymptoticValue asymptotic_value(const TheoryQuantities& q, double n_b) {
    const double g = detail::positive_gamma(q, n_b, "asymptotic_value");
    const double scale = q.sigma_y2 * q.off_dim() * q.off_dim() / static_cast<double>(q.d_x);
    AsymptoticValue out;
    out.v_T = scale / g;
    out.rho = out.v_T / n_b;
    out.v_T_inf = q.m2 > 0.0 ? scale / q.m2 : kInfinity;
    return out;
}

/// Large-n_T value of n_B brain samples under a shifted block test covariance,
/// with lambda tuned for an isotropic test. Negative under adversarial shifts.
inline double robustness_value(const TheoryQuantities& q, const TestSpec& test, double n_b) {
    const double g = detail::positive_gamma(q, n_b, "robustness_value");
    const double tr = test.trace(q.d_x, q.d_l);
    if (!(tr > 0.0)) throw DegenerateError("robustness_value: Tr(Sigma_test) must be positive");
    const double v_iso = asymptotic_value(q, n_b).v_T;
    const double off_mass = test.trace_off(q.d_x, q.d_l) - q.shift_imbalance(test) / n_b;
    const double bracket = 2.0 * off_mass / q.off_dim() - q.gamma_test(n_b, test) / g;
    return static_cast<double>(q.d_x) / tr * v_iso * bracket;
}

}  // namespace brainval
