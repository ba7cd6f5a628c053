#pragma once

// Monte Carlo risk estimation: per-trial fresh datasets, exact population risk
// of each fit, replicate means and percentile-bootstrap confidence intervals.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "brainval/errors.hpp"
#include "brainval/estimators.hpp"
#include "brainval/hash.hpp"
#include "brainval/linmodel.hpp"
#include "brainval/rng.hpp"
#include "brainval/theory.hpp"

namespace brainval {

/// How each trial draws its data. `moments` draws X^T X and X^T Y from their
/// exact joint law; `full_data` materializes the n x d design matrices.
enum class SamplingMode { moments, full_data };

struct MonteCarloConfig {
    std::size_t trials = 1000;      // per replicate
    std::size_t replicates = 10;
    std::uint64_t seed = 0;
    unsigned threads = 0;           // 0: hardware concurrency
    SamplingMode sampling = SamplingMode::moments;
    std::size_t bootstrap_resamples = 10000;
    double ci_level = 0.95;
};

enum class PolicyKind { fixed, theory_optimal, hard, tos };

struct LambdaPolicy {
    PolicyKind kind = PolicyKind::theory_optimal;
    double lambda = 0.0;

    static LambdaPolicy fixed(double lambda) { return {PolicyKind::fixed, lambda}; }
    static LambdaPolicy theory_optimal() { return {PolicyKind::theory_optimal, 0.0}; }
    static LambdaPolicy hard() { return {PolicyKind::hard, 0.0}; }
    static LambdaPolicy tos() { return {PolicyKind::tos, 0.0}; }
};

inline const char* policy_name(PolicyKind k) {
    switch (k) {
        case PolicyKind::fixed: return "fixed";
        case PolicyKind::theory_optimal: return "theory_optimal";
        case PolicyKind::hard: return "hard";
        case PolicyKind::tos: return "tos";
    }
    return "unknown";
}

struct RiskEstimate {
    double mean = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t trials = 0;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::vector<double> replicate_means;

    bool covers(double value) const { return ci_low <= value && value <= ci_high; }
};

struct LambdaGridSpec {
    double min = 1e-3;
    double max = 1e3;
    std::size_t points = 64;

    /// Geometric grid min, min * ratio, ..., with `points` entries.
    static LambdaGridSpec from_ratio(double min, double ratio, std::size_t points) {
        return {min, min * std::pow(ratio, static_cast<double>(points - 1)), points};
    }
};

struct LambdaCurve {
    std::vector<double> grid;
    std::vector<RiskEstimate> risks;
    double best_lambda = 0.0;
    std::size_t best_index = 0;
};

/// Raised when a trial fails; carries the global trial index.
class TrialError : public Error {
public:
    TrialError(std::size_t trial, const std::string& what)
        : Error(what + " (trial " + std::to_string(trial) + ")"), trial_(trial) {}
    std::size_t trial() const { return trial_; }

private:
    std::size_t trial_;
};

inline std::vector<double> log_grid(const LambdaGridSpec& spec) {
    if (spec.points < 1 || !(spec.min > 0.0) || !(spec.max >= spec.min) || (spec.points > 1 && !(spec.max > spec.min))) {
        throw RegimeError("lambda grid requires 0 < min < max and points >= 1");
    }
    std::vector<double> grid(spec.points);
    if (spec.points == 1) {
        grid[0] = spec.min;
        return grid;
    }
    const double step = std::log(spec.max / spec.min) / static_cast<double>(spec.points - 1);
    for (std::size_t i = 0; i < spec.points; ++i) grid[i] = spec.min * std::exp(step * static_cast<double>(i));
    grid.back() = spec.max;
    return grid;
}

/// Percentile-bootstrap confidence interval for the mean of `values`.
inline std::pair<double, double> bootstrap_mean_ci(const std::vector<double>& values, std::size_t resamples,
                                                   double level, Engine& rng) {
    if (values.empty()) throw RegimeError("bootstrap requires at least one value");
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (values.size() == 1 || resamples == 0) return {mean, mean};
    std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
    std::vector<double> means(resamples);
    for (auto& m : means) {
        double s = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) s += values[pick(rng)];
        m = s / static_cast<double>(values.size());
    }
    std::sort(means.begin(), means.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(means.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, means.size() - 1);
        return means[lo] + (pos - static_cast<double>(lo)) * (means[hi] - means[lo]);
    };
    const double tail = (1.0 - level) / 2.0;
    return {std::min(quantile(tail), mean), std::max(quantile(1.0 - tail), mean)};
}

namespace detail {

inline unsigned worker_count(unsigned requested, std::size_t work) {
    unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(work, 1)));
}

/// Runs fn(t) for t in [0, total) over contiguous index ranges. Results are
/// stored by index, so the output never depends on the thread count. The
/// failure with the lowest trial index is rethrown as a TrialError.
template <typename Fn>
auto run_trials(std::size_t total, unsigned threads, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using Result = decltype(fn(std::size_t{}));
    std::vector<Result> out(total);
    const unsigned workers = worker_count(threads, total);
    std::vector<std::size_t> failed_at(workers, total);
    std::vector<std::string> failure(workers);

    auto body = [&](unsigned w) {
        const std::size_t lo = total * w / workers;
        const std::size_t hi = total * (w + 1) / workers;
        for (std::size_t t = lo; t < hi; ++t) {
            try {
                out[t] = fn(t);
            } catch (const std::exception& e) {
                failed_at[w] = t;
                failure[w] = e.what();
                return;
            }
        }
    };
    if (workers == 1) {
        body(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body, w);
        for (auto& th : pool) th.join();
    }
    for (unsigned w = 0; w < workers; ++w) {
        if (failed_at[w] < total) throw TrialError(failed_at[w], failure[w]);
    }
    return out;
}

struct TrialData {
    TaskMoments task;
    std::optional<EncodingModel> encoding;
};

inline TrialData draw_trial(const ModelParams& p, const MomentSampler& sampler, Eigen::Index n_b, Eigen::Index n_t,
                            bool need_brain, std::uint64_t seed, std::size_t t, SamplingMode mode) {
    TrialData d;
    if (mode == SamplingMode::moments) {
        if (need_brain) {
            auto brain_rng = make_engine(seed, Stream::brain, t);
            d.encoding = fit_encoding(sampler.brain(n_b, brain_rng), p.d_l);
        }
        auto task_rng = make_engine(seed, Stream::task, t);
        d.task = sampler.task(n_t, task_rng);
    } else {
        if (need_brain) d.encoding = fit_encoding(sample_brain_dataset(p, n_b, derive_seed(seed, Stream::brain, t)), p.d_l);
        d.task = moments(sample_task_dataset(p, n_t, derive_seed(seed, Stream::task, t)));
    }
    return d;
}

inline void validate_mc(const MonteCarloConfig& cfg) {
    if (cfg.trials < 1 || cfg.replicates < 1) throw RegimeError("Monte Carlo requires trials >= 1 and replicates >= 1");
    if (!(cfg.ci_level > 0.0 && cfg.ci_level < 1.0)) throw RegimeError("ci_level must lie in (0, 1)");
}

inline ConfigHasher hash_inputs(const ModelParams& p, const TestSpec& test, Eigen::Index n_b, Eigen::Index n_t,
                                const MonteCarloConfig& cfg) {
    ConfigHasher h;
    h.add(p.A_star).add(p.H_star).add(p.beta_star).add(p.Sigma_l).add(p.sigma_r2).add(p.sigma_y2);
    h.add(test.c_on).add(test.c_off).add(test.sigma_test2);
    h.add(static_cast<std::int64_t>(n_b)).add(static_cast<std::int64_t>(n_t));
    h.add(static_cast<std::uint64_t>(cfg.trials)).add(static_cast<std::uint64_t>(cfg.replicates)).add(cfg.seed);
    h.add(static_cast<std::uint64_t>(cfg.sampling)).add(static_cast<std::uint64_t>(cfg.bootstrap_resamples)).add(cfg.ci_level);
    return h;
}

/// Folds per-trial risks (replicate-major) into a RiskEstimate.
inline RiskEstimate summarize(const std::vector<double>& risks, const MonteCarloConfig& cfg, std::uint64_t ci_stream,
                              std::string hash) {
    RiskEstimate est;
    est.trials = cfg.trials;
    est.replicates = cfg.replicates;
    est.seed = cfg.seed;
    est.config_hash = std::move(hash);
    est.replicate_means.resize(cfg.replicates);
    for (std::size_t r = 0; r < cfg.replicates; ++r) {
        double s = 0.0;
        for (std::size_t i = 0; i < cfg.trials; ++i) s += risks[r * cfg.trials + i];
        est.replicate_means[r] = s / static_cast<double>(cfg.trials);
    }
    est.mean = std::accumulate(est.replicate_means.begin(), est.replicate_means.end(), 0.0) /
               static_cast<double>(cfg.replicates);
    auto rng = make_engine(cfg.seed, Stream::bootstrap, ci_stream);
    auto [lo, hi] = bootstrap_mean_ci(est.replicate_means, cfg.bootstrap_resamples, cfg.ci_level, rng);
    est.ci_low = std::min(lo, est.mean);
    est.ci_high = std::max(hi, est.mean);
    return est;
}

}  // namespace detail

/// Monte Carlo estimate of the population risk of one estimator.
inline RiskEstimate estimate_risk(const ModelParams& p, const TestSpec& test, Eigen::Index n_b, Eigen::Index n_t,
                                  const LambdaPolicy& policy, const MonteCarloConfig& cfg) {
    detail::validate_mc(cfg);
    validate(test, p.d_x, p.d_l);
    double lambda = policy.lambda;
    if (policy.kind == PolicyKind::theory_optimal) {
        lambda = optimal_lambda(derive_quantities(p), static_cast<double>(n_b), static_cast<double>(n_t));
    }
    if (policy.kind == PolicyKind::fixed && !(lambda >= 0.0)) throw RegimeError("fixed lambda must be >= 0");
    const bool need_brain = policy.kind != PolicyKind::tos;

    const MomentSampler sampler(p);
    const std::size_t total = cfg.trials * cfg.replicates;
    auto risks = detail::run_trials(total, cfg.threads, [&](std::size_t t) {
        const auto d = detail::draw_trial(p, sampler, n_b, n_t, need_brain, cfg.seed, t, cfg.sampling);
        switch (policy.kind) {
            case PolicyKind::tos: return exact_risk(fit_tos(d.task), p, test);
            case PolicyKind::hard: return exact_risk(fit_befs_hard(d.task, *d.encoding), p, test);
            default: return exact_risk(fit_befs_soft(d.task, *d.encoding, lambda), p, test);
        }
    });

    auto h = detail::hash_inputs(p, test, n_b, n_t, cfg);
    h.add(static_cast<std::uint64_t>(policy.kind)).add(lambda);
    return detail::summarize(risks, cfg, 0, h.hex());
}

/// Soft-estimator risk over a log-spaced lambda grid. Each trial's datasets
/// and encoding fit are shared by every grid point.
inline LambdaCurve grid_search_lambda(const ModelParams& p, const TestSpec& test, Eigen::Index n_b, Eigen::Index n_t,
                                      const LambdaGridSpec& grid_spec, const MonteCarloConfig& cfg) {
    detail::validate_mc(cfg);
    validate(test, p.d_x, p.d_l);
    LambdaCurve curve;
    curve.grid = log_grid(grid_spec);
    const std::size_t points = curve.grid.size();

    const MomentSampler sampler(p);
    const std::size_t total = cfg.trials * cfg.replicates;
    auto per_trial = detail::run_trials(total, cfg.threads, [&](std::size_t t) {
        const auto d = detail::draw_trial(p, sampler, n_b, n_t, true, cfg.seed, t, cfg.sampling);
        std::vector<double> r(points);
        for (std::size_t g = 0; g < points; ++g) r[g] = exact_risk(fit_befs_soft(d.task, *d.encoding, curve.grid[g]), p, test);
        return r;
    });

    auto base = detail::hash_inputs(p, test, n_b, n_t, cfg);
    std::vector<double> column(total);
    for (std::size_t g = 0; g < points; ++g) {
        for (std::size_t t = 0; t < total; ++t) column[t] = per_trial[t][g];
        auto h = base;
        h.add(static_cast<std::uint64_t>(PolicyKind::fixed)).add(curve.grid[g]);
        curve.risks.push_back(detail::summarize(column, cfg, g, h.hex()));
    }
    for (std::size_t g = 1; g < points; ++g) {
        // Strict comparison: ties keep the smaller lambda.
        if (curve.risks[g].mean < curve.risks[curve.best_index].mean) curve.best_index = g;
    }
    curve.best_lambda = curve.grid[curve.best_index];
    return curve;
}

struct EmpiricalValue {
    double v_T = 0.0;
    double ci_low = 0.0;   // may be -inf/+inf when the CI touches the noise floor
    double ci_high = 0.0;
    RiskEstimate risk;
};

/// Equivalent extra task samples implied by an empirical BEFS risk, by
/// inverting the exact OLS law sigma_test2 + sigma_y2 Tr / (n - d_x - 1).
inline EmpiricalValue empirical_value(const ModelParams& p, const TestSpec& test, Eigen::Index n_b, Eigen::Index n_t,
                                      const MonteCarloConfig& cfg,
                                      const LambdaPolicy& policy = LambdaPolicy::theory_optimal()) {
    EmpiricalValue out;
    out.risk = estimate_risk(p, test, n_b, n_t, policy, cfg);
    const double scale = p.sigma_y2 * test.trace(p.d_x, p.d_l);
    const double offset = static_cast<double>(p.d_x) + 1.0 - static_cast<double>(n_t);
    auto invert = [&](double risk) {
        const double excess = risk - test.sigma_test2;
        return excess > 0.0 ? scale / excess + offset : kInfinity;
    };
    if (!(out.risk.mean > test.sigma_test2)) {
        throw InversionError("empirical_value: BEFS risk estimate is at or below the noise floor");
    }
    out.v_T = invert(out.risk.mean);
    // The inversion is decreasing in risk, so the CI endpoints swap.
    out.ci_low = invert(out.risk.ci_high);
    out.ci_high = invert(out.risk.ci_low);
    return out;
}

inline std::string risk_csv_header() {
    return "config_hash,n_B,n_T,lambda_policy,lambda,mean,ci_low,ci_high,trials,replicates,seed";
}

inline std::string risk_csv_row(const RiskEstimate& e, Eigen::Index n_b, Eigen::Index n_t, PolicyKind policy,
                                double lambda) {
    std::string row = e.config_hash;
    row += ',' + std::to_string(n_b) + ',' + std::to_string(n_t) + ',' + policy_name(policy) + ',';
    row += (policy == PolicyKind::hard || policy == PolicyKind::tos) ? std::string() : format_double(lambda);
    row += ',' + format_double(e.mean) + ',' + format_double(e.ci_low) + ',' + format_double(e.ci_high);
    row += ',' + std::to_string(e.trials) + ',' + std::to_string(e.replicates) + ',' + std::to_string(e.seed);
    return row;
}

}  // namespace brainval
