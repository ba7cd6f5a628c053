#pragma once

// Linear-Gaussian generative model of inputs, brain recordings and task labels.
//
//   x ~ N(0, I_dx)
//   latent = A*^T x + eta_l,           eta_l ~ N(0, Sigma_l)
//   r      = H*^T latent + eta_r,      eta_r ~ N(0, sigma_r2 I)
//   y      = beta*^T x + eta_y,        eta_y ~ N(0, sigma_y2)
//
// A* has orthonormal columns, so only col(A*) carries meaning.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "brainval/errors.hpp"
#include "brainval/linalg.hpp"
#include "brainval/rng.hpp"

namespace brainval {

struct ModelParams {
    Eigen::Index d_x = 0;
    Eigen::Index d_l = 0;
    Eigen::Index d_r = 0;
    Eigen::MatrixXd A_star;   // d_x x d_l, orthonormal columns
    Eigen::MatrixXd H_star;   // d_l x d_r, rank d_l
    Eigen::VectorXd beta_star;
    Eigen::MatrixXd Sigma_l;  // d_l x d_l, PSD
    double sigma_r2 = 0.0;
    double sigma_y2 = 0.0;
};

struct BrainDataset {
    Eigen::MatrixXd X;  // n_B x d_x
    Eigen::MatrixXd R;  // n_B x d_r
    Eigen::Index n() const { return X.rows(); }
};

struct TaskDataset {
    Eigen::MatrixXd X;  // n_T x d_x
    Eigen::VectorXd y;
    Eigen::Index n() const { return X.rows(); }
};

/// Block test covariance c_on * P_{A*} + c_off * P_{A*perp} plus test label noise.
struct TestSpec {
    double c_on = 1.0;
    double c_off = 1.0;
    double sigma_test2 = 1.0;

    static TestSpec isotropic(double sigma_test2) { return {1.0, 1.0, sigma_test2}; }

    /// Sigma_shift(tau) = (1 - tau) P_{A*} + tau P_{A*perp}.
    static TestSpec shift(double tau, double sigma_test2) { return {1.0 - tau, tau, sigma_test2}; }

    double trace_on(Eigen::Index d_l) const { return c_on * static_cast<double>(d_l); }
    double trace_off(Eigen::Index d_x, Eigen::Index d_l) const { return c_off * static_cast<double>(d_x - d_l); }
    double trace(Eigen::Index d_x, Eigen::Index d_l) const { return trace_on(d_l) + trace_off(d_x, d_l); }
};

inline void validate(const TestSpec& test, Eigen::Index d_x, Eigen::Index d_l) {
    if (!(test.c_on >= 0.0) || !(test.c_off >= 0.0)) {
        throw DimensionError("test covariance weights must be nonnegative");
    }
    if (!(test.sigma_test2 >= 0.0)) throw DimensionError("test label noise must be nonnegative");
    if (!(test.trace(d_x, d_l) > 0.0)) throw DimensionError("test covariance has zero trace");
}

/// Dense test covariance; only needed by samplers and tests.
inline Eigen::MatrixXd test_covariance(const TestSpec& test, const Eigen::MatrixXd& A_star) {
    const Eigen::MatrixXd p_on = projector(A_star);
    const Eigen::MatrixXd p_off = Eigen::MatrixXd::Identity(A_star.rows(), A_star.rows()) - p_on;
    return test.c_on * p_on + test.c_off * p_off;
}

/// Pooling measurement map with weight `weight`. Channel j sums the
/// `pool_width` consecutive latents ending at latent d_l - 1 - (j mod d_l),
/// truncated at latent 0, so latent 0 is the only one with a dedicated
/// single-latent channel. The first d_l channels form a triangular block (up
/// to column order) with a nonzero diagonal, so the map always has rank d_l.
inline Eigen::MatrixXd pooling_matrix(Eigen::Index d_l, Eigen::Index d_r, Eigen::Index pool_width, double weight) {
    if (d_l < 1 || d_r < d_l || pool_width < 1) {
        throw DimensionError("pooling requires 1 <= d_l <= d_r and pool_width >= 1");
    }
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d_l, d_r);
    for (Eigen::Index j = 0; j < d_r; ++j) {
        const Eigen::Index last = d_l - 1 - j % d_l;
        const Eigen::Index first = std::max<Eigen::Index>(last - pool_width + 1, 0);
        for (Eigen::Index i = first; i <= last; ++i) h(i, j) = weight;
    }
    return h;
}

/// Checks the structural invariants of a model; throws on violation.
inline void validate(const ModelParams& p) {
    if (p.d_l < 1 || p.d_l >= p.d_x || p.d_r < p.d_l) {
        throw DimensionError("model dimensions must satisfy 1 <= d_l < d_x and d_l <= d_r");
    }
    if (p.A_star.rows() != p.d_x || p.A_star.cols() != p.d_l || p.H_star.rows() != p.d_l ||
        p.H_star.cols() != p.d_r || p.beta_star.size() != p.d_x || p.Sigma_l.rows() != p.d_l ||
        p.Sigma_l.cols() != p.d_l) {
        throw DimensionError("model matrix shapes disagree with (d_x, d_l, d_r)");
    }
    const Eigen::MatrixXd gram = p.A_star.transpose() * p.A_star;
    if ((gram - Eigen::MatrixXd::Identity(p.d_l, p.d_l)).cwiseAbs().maxCoeff() > 1e-10) {
        throw DimensionError("A_star columns are not orthonormal");
    }
    Eigen::MatrixXd hh = Eigen::MatrixXd::Zero(p.d_l, p.d_l);
    hh.selfadjointView<Eigen::Lower>().rankUpdate(p.H_star);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(hh.selfadjointView<Eigen::Lower>(), Eigen::EigenvaluesOnly).eigenvalues();
    // Singular values of H* are sqrt(eigenvalues of H* H*^T).
    const double smax = std::sqrt(std::max(ev.maxCoeff(), 0.0));
    const double smin = std::sqrt(std::max(ev.minCoeff(), 0.0));
    if (!(smin > 1e-10 * smax)) throw RankError("H_star does not have rank d_l");
    if ((p.Sigma_l - p.Sigma_l.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw DimensionError("Sigma_l is not symmetric");
    }
    const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(p.Sigma_l, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    if (lmin < -1e-12 * std::max(1.0, p.Sigma_l.cwiseAbs().maxCoeff())) {
        throw DimensionError("Sigma_l is not positive semidefinite");
    }
    if (!(p.sigma_r2 >= 0.0) || !(p.sigma_y2 >= 0.0)) throw DimensionError("noise variances must be nonnegative");
}

struct RandomModelSpec {
    Eigen::Index d_x = 8;
    Eigen::Index d_l = 5;
    Eigen::Index d_r = 8;
    double m = 0.05;
    double snr_task = 1.0;
    double latent_var = 0.5;                     // Sigma_l = latent_var * I unless latent_cov is set
    std::optional<Eigen::MatrixXd> latent_cov;
    double sigma_r2 = 0.4;
    Eigen::Index pool_width = 4;
    double pool_weight = 1.0;
    std::uint64_t seed = 0;
};

/// ||(I - P_{A*}) beta*||.
inline double misalignment(const ModelParams& p) {
    const Eigen::VectorXd on = p.A_star * (p.A_star.transpose() * p.beta_star);
    return (p.beta_star - on).norm();
}

inline double snr_task(const ModelParams& p) {
    if (!(p.sigma_y2 > 0.0)) throw DivideByZeroError("snr_task: task label noise variance is zero");
    return p.beta_star.squaredNorm() / p.sigma_y2;
}

/// Average per-channel signal-to-noise ratio of the recordings.
inline double snr_brain(const ModelParams& p) {
    const Eigen::VectorXd signal = p.H_star.colwise().squaredNorm().transpose();
    const Eigen::VectorXd neural = (p.Sigma_l * p.H_star).cwiseProduct(p.H_star).colwise().sum().transpose();
    double total = 0.0;
    for (Eigen::Index i = 0; i < p.d_r; ++i) {
        const double noise = neural(i) + p.sigma_r2;
        if (!(noise > 0.0)) throw DivideByZeroError("snr_brain: channel noise variance is zero");
        total += signal(i) / noise;
    }
    return total / static_cast<double>(p.d_r);
}

/// Unit task vector sqrt(1 - m^2) * A* e_1 + m * u_off, with u_off a unit
/// vector in the complement of col(A*) drawn from the seed's off-space stream.
inline Eigen::VectorXd aligned_task_vector(const Eigen::MatrixXd& A_star, double m, std::uint64_t seed) {
    if (!(m >= 0.0) || m > 1.0) {
        throw MisalignmentError("misalignment must lie in [0, ||beta*||] = [0, 1]");
    }
    const Eigen::Index d_x = A_star.rows();
    auto rng = make_engine(seed, Stream::model_offspace);
    Eigen::VectorXd u_off = standard_normal(d_x, rng);
    u_off -= A_star * (A_star.transpose() * u_off);
    u_off.normalize();
    const Eigen::VectorXd u_on = A_star.col(0);
    return std::sqrt(1.0 - m * m) * u_on + m * u_off;
}

inline ModelParams build_random_model(const RandomModelSpec& spec) {
    if (spec.d_l < 1 || spec.d_l >= spec.d_x || spec.d_r < spec.d_l) {
        throw DimensionError("build_random_model requires 1 <= d_l < d_x and d_l <= d_r");
    }
    if (spec.pool_width < 1) throw DimensionError("pool_width must be positive");
    if (!(spec.m >= 0.0) || spec.m > 1.0) {
        throw MisalignmentError("misalignment must lie in [0, ||beta*||] = [0, 1]");
    }
    if (!(spec.snr_task > 0.0)) throw DimensionError("snr_task must be positive");

    ModelParams p;
    p.d_x = spec.d_x;
    p.d_l = spec.d_l;
    p.d_r = spec.d_r;
    auto rng = make_engine(spec.seed, Stream::model_frame);
    p.A_star = random_orthonormal_frame(spec.d_x, spec.d_l, rng);
    p.H_star = pooling_matrix(spec.d_l, spec.d_r, spec.pool_width, spec.pool_weight);
    p.beta_star = aligned_task_vector(p.A_star, spec.m, spec.seed);
    p.Sigma_l = spec.latent_cov ? *spec.latent_cov
                                : Eigen::MatrixXd(spec.latent_var * Eigen::MatrixXd::Identity(spec.d_l, spec.d_l));
    p.sigma_r2 = spec.sigma_r2;
    // ||beta*|| = 1, so sigma_y2 = 1 / snr_task (zero when snr_task is infinite).
    p.sigma_y2 = p.beta_star.squaredNorm() / spec.snr_task;
    validate(p);
    return p;
}

/// Linear fMRI calibration: Sigma_l = 0.5 I, sigma_r2 = 0.4 and four latents
/// per voxel. The pooling weight makes a full voxel's stimulus variance equal
/// its measurement variance, giving a 40/40/20 stimulus/measurement/neural split.
struct FmriSpec {
    Eigen::Index d_x = 4096;
    Eigen::Index d_l = 410;
    Eigen::Index d_r = 10000;
    double snr_ratio = 0.1;  // SNR_T / SNR_B
    double m = 0.05;
    std::uint64_t seed = 0;
};

inline constexpr double kFmriLatentVar = 0.5;
inline constexpr double kFmriRecordingVar = 0.4;
inline constexpr Eigen::Index kFmriPoolWidth = 4;
inline constexpr double kFmriSamplesPerHour = 1800.0;

inline double fmri_pool_weight() { return std::sqrt(kFmriRecordingVar / static_cast<double>(kFmriPoolWidth)); }

inline ModelParams build_fmri_model(const FmriSpec& spec) {
    if (!(spec.snr_ratio > 0.0)) throw DimensionError("snr_ratio must be positive");
    RandomModelSpec r;
    r.d_x = spec.d_x;
    r.d_l = spec.d_l;
    r.d_r = spec.d_r;
    r.m = spec.m;
    r.snr_task = 1.0;
    r.latent_var = kFmriLatentVar;
    r.sigma_r2 = kFmriRecordingVar;
    r.pool_width = kFmriPoolWidth;
    r.pool_weight = fmri_pool_weight();
    r.seed = spec.seed;
    ModelParams p = build_random_model(r);
    const double snr_t = spec.snr_ratio * snr_brain(p);
    p.sigma_y2 = p.beta_star.squaredNorm() / snr_t;
    return p;
}

/// Brain samples recorded in `hours` at one stimulus every two seconds.
inline Eigen::Index fmri_brain_samples(double hours) {
    if (!(hours >= 0.0)) throw RegimeError("recording hours must be nonnegative");
    return static_cast<Eigen::Index>(std::floor(kFmriSamplesPerHour * hours));
}

/// The 4096 / 410 / 10000 linear fMRI preset and the brain sample count for `hours`.
inline std::pair<ModelParams, Eigen::Index> build_fmri_preset(double snr_ratio, double m, double hours,
                                                              std::uint64_t seed) {
    const Eigen::Index n_b = fmri_brain_samples(hours);
    FmriSpec spec;
    spec.snr_ratio = snr_ratio;
    spec.m = m;
    spec.seed = seed;
    return {build_fmri_model(spec), n_b};
}

/// PSD square-root factor C with C C^T = S; tolerates singular S.
inline Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal();
}

inline BrainDataset sample_brain_dataset(const ModelParams& p, Eigen::Index n_b, std::uint64_t seed) {
    if (n_b < 1) throw RegimeError("sample_brain_dataset requires n_B >= 1");
    auto rng = make_engine(seed, Stream::brain);
    BrainDataset d;
    d.X = standard_normal(n_b, p.d_x, rng);
    const Eigen::MatrixXd latent_noise = standard_normal(n_b, p.d_l, rng) * psd_factor(p.Sigma_l).transpose();
    const Eigen::MatrixXd latent = d.X * p.A_star + latent_noise;
    d.R = latent * p.H_star + std::sqrt(p.sigma_r2) * standard_normal(n_b, p.d_r, rng);
    return d;
}

inline TaskDataset sample_task_dataset(const ModelParams& p, Eigen::Index n_t, std::uint64_t seed) {
    if (n_t < 1) throw RegimeError("sample_task_dataset requires n_T >= 1");
    auto rng = make_engine(seed, Stream::task);
    TaskDataset d;
    d.X = standard_normal(n_t, p.d_x, rng);
    d.y = d.X * p.beta_star + std::sqrt(p.sigma_y2) * standard_normal(n_t, rng);
    return d;
}

/// Second-moment summaries X^T X and X^T Y of a dataset; every estimator in
/// this library depends on the data only through them.
struct BrainMoments {
    Eigen::MatrixXd gram;   // X^T X
    Eigen::MatrixXd cross;  // X^T R
    Eigen::Index n = 0;
};

struct TaskMoments {
    Eigen::MatrixXd gram;   // X^T X
    Eigen::VectorXd cross;  // X^T y
    Eigen::Index n = 0;
};

inline BrainMoments moments(const BrainDataset& d) {
    return {d.X.transpose() * d.X, d.X.transpose() * d.R, d.n()};
}

inline TaskMoments moments(const TaskDataset& d) {
    return {d.X.transpose() * d.X, d.X.transpose() * d.y, d.n()};
}

/// Draws dataset moments directly from their exact joint law.
///
/// X^T X ~ Wishart(I, n) via the Bartlett factor L; given X, the noise cross
/// term X^T E is matrix normal with row covariance L L^T, so it equals
/// L Z C^T for a standard normal Z and a factor C of the per-row noise
/// covariance. Costs O(d_x * d_r) normals per draw instead of O(n * d_r).
class MomentSampler {
public:
    explicit MomentSampler(const ModelParams& p)
        : params_(&p),
          signal_(p.A_star * p.H_star),
          brain_noise_factor_(psd_factor(p.H_star.transpose() * p.Sigma_l * p.H_star +
                                         p.sigma_r2 * Eigen::MatrixXd::Identity(p.d_r, p.d_r))) {}

    BrainMoments brain(Eigen::Index n_b, Engine& rng) const {
        const auto& p = *params_;
        Eigen::MatrixXd factor = gram_factor(n_b, rng);
        BrainMoments out;
        out.n = n_b;
        out.gram = factor * factor.transpose();
        out.cross = out.gram * signal_ +
                    factor * standard_normal(factor.cols(), p.d_r, rng) * brain_noise_factor_.transpose();
        return out;
    }

    TaskMoments task(Eigen::Index n_t, Engine& rng) const {
        const auto& p = *params_;
        Eigen::MatrixXd factor = gram_factor(n_t, rng);
        TaskMoments out;
        out.n = n_t;
        out.gram = factor * factor.transpose();
        out.cross = out.gram * p.beta_star + std::sqrt(p.sigma_y2) * (factor * standard_normal(factor.cols(), rng));
        return out;
    }

private:
    // Returns F with F F^T distributed as X^T X for an n x d_x standard normal X.
    Eigen::MatrixXd gram_factor(Eigen::Index n, Engine& rng) const {
        const Eigen::Index d = params_->d_x;
        if (n < 1) throw RegimeError("moment sampler requires n >= 1");
        if (n < d) return standard_normal(n, d, rng).transpose();
        Eigen::MatrixXd l = Eigen::MatrixXd::Zero(d, d);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Eigen::Index i = 0; i < d; ++i) {
            std::chi_squared_distribution<double> chi2(static_cast<double>(n - i));
            l(i, i) = std::sqrt(chi2(rng));
            for (Eigen::Index j = 0; j < i; ++j) l(i, j) = normal(rng);
        }
        return l;
    }

    const ModelParams* params_;
    Eigen::MatrixXd signal_;
    Eigen::MatrixXd brain_noise_factor_;
};

}  // namespace brainval
