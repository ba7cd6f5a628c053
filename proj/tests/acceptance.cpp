// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Usage: brainval_acceptance [criterion numbers...]   (default: all)

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "brainval/brainval.hpp"

using namespace brainval;

namespace {

// Tolerances and sizes.
constexpr std::size_t kC1Trials = 10000;
constexpr std::size_t kC1Replicates = 10;
constexpr std::size_t kC2Trials = 10000;
constexpr std::size_t kC2Replicates = 10;
constexpr double kC2GridRatio = 1.25;
constexpr double kIdentityTol = 1e-8;
constexpr double kHardRelTol = 1e-4;
constexpr double kRoundTripTol = 1e-8;
constexpr double kLimitRelTol = 0.01;
constexpr double kDecompositionTol = 1e-8;
constexpr double kBudgetRelTol = 0.10;
constexpr double kProjectorTol = 1e-8;
constexpr int kCandidates = 1000;

void note(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void note(const char* fmt, ...) {
    std::va_list args;
    va_start(args, fmt);
    std::printf("    ");
    std::vprintf(fmt, args);
    std::printf("\n");
    va_end(args);
}

/// d_x=8, d_l=5, d_r=8, SNR_T=1, m=0.05 with pooling readout.
ModelParams small_model() {
    RandomModelSpec s;
    s.d_x = 8;
    s.d_l = 5;
    s.d_r = 8;
    s.m = 0.05;
    s.snr_task = 1.0;
    s.pool_weight = fmri_pool_weight();
    s.seed = 0;
    return build_random_model(s);
}

// 1. Monte Carlo risk inside the CI of the closed-form laws.
bool criterion1() {
    const auto p = small_model();
    const auto q = derive_quantities(p);
    const auto test = TestSpec::isotropic(p.sigma_y2);
    MonteCarloConfig cfg;
    cfg.trials = kC1Trials;
    cfg.replicates = kC1Replicates;
    cfg.seed = 7;
    bool ok = true;
    for (Eigen::Index n_t : {50, 100, 400}) {
        const double nt = static_cast<double>(n_t);
        const double lambda = optimal_lambda(q, 1e4, nt);
        const auto befs = estimate_risk(p, test, 10000, n_t, LambdaPolicy::fixed(lambda), cfg);
        const auto tos = estimate_risk(p, test, 10000, n_t, LambdaPolicy::tos(), cfg);
        const double befs_law = befs_finite_risk(q, test, 1e4, nt, lambda);
        const double tos_law = tos_risk(q, test, nt);
        const bool b = befs.covers(befs_law);
        const bool t = tos.covers(tos_law);
        note("n_T=%-4lld BEFS %.6f [%.6f, %.6f] law %.6f %s | TOS %.6f [%.6f, %.6f] law %.6f %s", static_cast<long long>(n_t),
             befs.mean, befs.ci_low, befs.ci_high, befs_law, b ? "in" : "OUT", tos.mean, tos.ci_low, tos.ci_high,
             tos_law, t ? "in" : "OUT");
        ok = ok && b && t;
    }
    return ok;
}

// 2. Empirical best lambda within one grid step of the schedule.
bool criterion2() {
    const auto p = small_model();
    const auto q = derive_quantities(p);
    const auto test = TestSpec::isotropic(p.sigma_y2);
    MonteCarloConfig cfg;
    cfg.trials = kC2Trials;
    cfg.replicates = kC2Replicates;
    cfg.seed = 11;
    const auto grid = LambdaGridSpec::from_ratio(0.01, kC2GridRatio, 60);
    bool ok = true;
    for (Eigen::Index n_t : {200, 400, 800}) {
        const auto curve = grid_search_lambda(p, test, 10000, n_t, grid, cfg);
        const double lambda = optimal_lambda(q, 1e4, static_cast<double>(n_t));
        const double steps = std::abs(std::log(curve.best_lambda / lambda) / std::log(kC2GridRatio));
        note("n_T=%-4lld best %.5f optimal %.5f (%.2f steps)", static_cast<long long>(n_t), curve.best_lambda, lambda, steps);
        ok = ok && steps <= 1.0;
    }
    return ok;
}

// 3. Limits of the soft estimator and of the finite-sample law.
bool criterion3() {
    const auto p = small_model();
    const auto q = derive_quantities(p);
    const auto test = TestSpec::isotropic(p.sigma_y2);
    bool ok = true;
    double worst_tos = 0.0, worst_hard = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto enc = fit_encoding(sample_brain_dataset(p, 200, s), p.d_l);
        const auto d = sample_task_dataset(p, 40, s);
        const auto tos = fit_tos(d);
        const auto hard = fit_befs_hard(d, enc);
        worst_tos = std::max(worst_tos, (fit_befs_soft(d, enc, 0.0).beta_hat - tos.beta_hat).cwiseAbs().maxCoeff());
        worst_hard = std::max(worst_hard, (fit_befs_soft(d, enc, 1e8).beta_hat - hard.beta_hat).norm() / hard.beta_hat.norm());
    }
    bool exact = true;
    for (double n_t : {20.0, 50.0, 400.0, 1e5}) {
        for (double n_b : {1e2, 1e4, 1e6}) exact = exact && befs_finite_risk(q, test, n_b, n_t, 0.0) == tos_risk(q, test, n_t);
    }
    note("soft(0) vs OLS max abs %.2e; soft(1e8) vs hard max rel %.2e; finite law at lambda=0 equals OLS law: %s",
         worst_tos, worst_hard, exact ? "yes" : "no");
    ok = worst_tos <= kIdentityTol && worst_hard <= kHardRelTol && exact;
    return ok;
}

// 4. Value inversion, large-sample limit and isotropic decomposition.
bool criterion4() {
    const auto p = small_model();
    const auto q = derive_quantities(p);
    const auto test = TestSpec::isotropic(p.sigma_y2);
    // Through the excess risk for every n_T; through the full risk only where
    // sigma_test2 + excess keeps enough digits (at n_T = 1e6 the excess is 8e-6).
    double worst = 0.0;
    for (double n_t : {20.0, 100.0, 1e4, 1e6}) {
        for (double w : {0.0, 1.0, 17.0, 1e3, 1e5}) {
            const double v = value_from_excess(q, test, n_t, tos_excess_risk(q, test, n_t + w));
            worst = std::max(worst, std::abs(v - w) / std::max(1.0, w));
            if (n_t <= 1e4) {
                const double u = value_from_risks(q, test, n_t, tos_risk(q, test, n_t + w)).v_T;
                worst = std::max(worst, std::abs(u - w) / std::max(1.0, w));
            }
        }
    }
    const double v_inf = p.sigma_y2 * 9.0 / (8.0 * q.m2);
    const double v_lib = asymptotic_value(q, 1e8).v_T_inf;
    const double finite = finite_value(q, test, 1e8, 1e6).v_T;
    const double limit_gap = std::abs(finite - v_inf) / v_inf;

    double worst_dec = 0.0;
    for (double n_b : {1e3, 1e4, 1e6}) {
        const double iso = robustness_value(q, test, n_b);
        const double on = robustness_value(q, {1.0, 0.0, p.sigma_y2}, n_b);
        const double off = robustness_value(q, {0.0, 1.0, p.sigma_y2}, n_b);
        worst_dec = std::max(worst_dec, std::abs(iso - (5.0 / 8.0 * on + 3.0 / 8.0 * off)) / std::abs(iso));
    }
    note("round trip max rel error %.2e", worst);
    note("v_inf %.4f (library %.4f) vs finite value at n_T=1e6, n_B=1e8: %.4f (gap %.3f%%)", v_inf, v_lib, finite,
         100.0 * limit_gap);
    note("isotropic decomposition max rel error %.2e", worst_dec);
    return worst <= kRoundTripTol && std::abs(v_lib - v_inf) <= 1e-12 * v_inf && limit_gap <= kLimitRelTol &&
           worst_dec <= kDecompositionTol;
}

// 5. Shape of the savings, robustness and budget curves on the fMRI preset.
/// +1 increasing, -1 decreasing (strict), 0 for nonincreasing allowing ties.
bool monotone(const std::vector<double>& y, int direction) {
    for (std::size_t i = 1; i < y.size(); ++i) {
        if (direction > 0 && !(y[i] > y[i - 1])) return false;
        if (direction < 0 && !(y[i] < y[i - 1])) return false;
        if (direction == 0 && !(y[i] <= y[i - 1])) return false;
    }
    return true;
}

std::string join(const std::vector<double>& v, const char* fmt) {
    std::string s;
    char buf[64];
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, fmt, v[i]);
        s += (i ? " " : "") + std::string(buf);
    }
    return s;
}

bool criterion5() {
    const std::vector<double> n_ts{1e4, 3e4, 1e5, 3e5, 1e6, 3e6, 1e7};
    bool ok = true;

    // One panel: percent saved as one factor varies, for each n_T, under both laws.
    auto panel = [&](const char* name, const std::vector<double>& values, int direction,
                     const std::function<std::pair<ModelParams, double>(double)>& make) {
        std::vector<std::vector<double>> fin(n_ts.size()), asy(n_ts.size());
        for (double v : values) {
            const auto [p, n_b] = make(v);
            const auto q = derive_quantities(p);
            const auto test = TestSpec::isotropic(p.sigma_y2);
            for (std::size_t k = 0; k < n_ts.size(); ++k) {
                fin[k].push_back(finite_value(q, test, n_b, n_ts[k]).percent_saved);
                asy[k].push_back(asymptotic_value_report(q, test, n_b, n_ts[k]).percent_saved);
            }
        }
        bool all = true;
        for (std::size_t k = 0; k < n_ts.size(); ++k) {
            const bool f = monotone(fin[k], direction);
            const bool a = monotone(asy[k], direction);
            all = all && f && a;
            if (!f || !a || k == 0) {
                note("%s n_T=%.0e  finite %s [%s]  asymptotic %s [%s]", name, n_ts[k], f ? "ok" : "VIOLATED",
                     join(fin[k], "%.3f").c_str(), a ? "ok" : "VIOLATED", join(asy[k], "%.3f").c_str());
            }
        }
        note("savings %s (%s): %s", name, direction > 0 ? "increasing" : "decreasing", all ? "PASS" : "FAIL");
        return all;
    };

    const auto base = build_fmri_preset(0.1, 0.05, 1000.0, 0);
    ok &= panel("hours", {10, 30, 100, 300, 1000, 3000, 10000}, +1, [&](double h) {
        return std::make_pair(base.first, static_cast<double>(fmri_brain_samples(h)));
    });
    ok &= panel("snr_ratio", {0.01, 0.03, 0.1, 0.3, 1.0, 3.0}, +1, [&](double r) {
        auto p = base.first;
        p.sigma_y2 = p.beta_star.squaredNorm() / (r * snr_brain(p));
        return std::make_pair(p, static_cast<double>(base.second));
    });
    ok &= panel("m", {0.02, 0.05, 0.1, 0.2, 0.5, 1.0}, -1, [&](double m) {
        auto fp = build_fmri_preset(0.1, m, 1000.0, 0);
        return std::make_pair(fp.first, static_cast<double>(fp.second));
    });
    ok &= panel("d_l/d_x", {0.025, 0.05, 0.1, 0.2, 0.4}, -1, [&](double ratio) {
        FmriSpec spec;
        spec.snr_ratio = 0.1;
        spec.m = 0.05;
        spec.d_l = static_cast<Eigen::Index>(std::llround(ratio * static_cast<double>(spec.d_x)));
        return std::make_pair(build_fmri_model(spec), static_cast<double>(base.second));
    });

    // n_T direction at the preset.
    {
        const auto q = derive_quantities(base.first);
        const auto test = TestSpec::isotropic(base.first.sigma_y2);
        const double n_b = static_cast<double>(base.second);
        std::vector<double> fin, asy;
        for (double n_t : n_ts) {
            fin.push_back(finite_value(q, test, n_b, n_t).percent_saved);
            asy.push_back(asymptotic_value_report(q, test, n_b, n_t).percent_saved);
        }
        const bool f = monotone(fin, -1), a = monotone(asy, -1);
        note("n_T  finite %s [%s]  asymptotic %s [%s]", f ? "ok" : "VIOLATED", join(fin, "%.3f").c_str(),
             a ? "ok" : "VIOLATED", join(asy, "%.3f").c_str());
        note("savings n_T (decreasing): %s", f && a ? "PASS" : "FAIL");
        ok &= f && a;
    }

    // Robustness: value increasing in tau.
    {
        const auto q = derive_quantities(base.first);
        std::vector<double> taus;
        for (int i = 0; i < 10; ++i) taus.push_back(0.05 + 0.1 * i);
        bool all = true;
        for (double hours : {100.0, 1000.0, 10000.0}) {
            std::vector<double> v;
            const double n_b = static_cast<double>(fmri_brain_samples(hours));
            for (double tau : taus) v.push_back(robustness_value(q, TestSpec::shift(tau, base.first.sigma_y2), n_b));
            const bool m = monotone(v, +1);
            all = all && m;
            note("hours=%-5.0f value %s [%s]", hours, m ? "ok" : "VIOLATED", join(v, "%.4g").c_str());
        }
        note("robustness tau (increasing): %s", all ? "PASS" : "FAIL");
        ok &= all;
    }

    // Budget: savings savings decreasing in cost ratio and budget; no collection at ratios 20 and 33.
    {
        const auto q = derive_quantities(base.first);
        const auto test = TestSpec::isotropic(base.first.sigma_y2);
        const std::vector<double> ratios{1, 2, 5, 10, 20, 33};
        const std::vector<double> budgets{1e3, 1e4, 1e5, 1e6, 1e7};
        std::vector<std::vector<double>> saved(ratios.size());
        std::vector<std::vector<double>> n_b(ratios.size());
        for (std::size_t i = 0; i < ratios.size(); ++i) {
            for (double b : budgets) {
                const auto r = grid_allocation(q, test, BudgetSpec::from_cost_ratio(ratios[i], b), {64, true});
                saved[i].push_back(r.percent_budget_saved);
                n_b[i].push_back(static_cast<double>(r.n_B_opt));
            }
            note("ratio %-3.0f F %.4f  percent saved [%s]  n_B [%s]", ratios[i],
                 favorability(q, BudgetSpec::from_cost_ratio(ratios[i], 1e6)).value, join(saved[i], "%.3f").c_str(),
                 join(n_b[i], "%.0f").c_str());
        }
        bool in_ratio = true, in_budget = true;
        for (std::size_t j = 0; j < budgets.size(); ++j) {
            std::vector<double> col;
            for (std::size_t i = 0; i < ratios.size(); ++i) col.push_back(saved[i][j]);
            in_ratio = in_ratio && monotone(col, 0);
        }
        for (std::size_t i = 0; i < ratios.size(); ++i) in_budget = in_budget && monotone(saved[i], 0);
        note("budget savings nonincreasing in cost ratio: %s", in_ratio ? "PASS" : "FAIL");
        note("budget savings nonincreasing in budget: %s", in_budget ? "PASS" : "FAIL");
        bool zero = true;
        for (double ratio : {20.0, 33.0}) {
            const auto spec = BudgetSpec::from_cost_ratio(ratio, 1e7);
            const auto a = asymptotic_allocation(q, spec, test);
            const auto g = grid_allocation(q, test, spec, {64, true});
            const bool z = a.n_B_opt == 0 && g.n_B_opt == 0;
            note("ratio %.0f: F %.4f, asymptotic n_B %lld, grid n_B %lld at B=1e7: %s", ratio, a.F,
                 static_cast<long long>(a.n_B_opt), static_cast<long long>(g.n_B_opt), z ? "zero" : "COLLECTS");
            zero = zero && z;
        }
        note("budget zero collection at ratios 20 and 33: %s", zero ? "PASS" : "FAIL");
        ok &= in_ratio && in_budget && zero;
    }
    return ok;
}

// 6. Grid and asymptotic allocations agree at large budget; nothing collected when F <= 1.
bool criterion6() {
    RandomModelSpec s;
    s.d_x = 16;
    s.d_l = 4;
    s.d_r = 8;
    s.m = 0.3;
    s.snr_task = 1.0;
    s.latent_var = 0.5;
    s.sigma_r2 = 0.4;
    s.pool_width = 4;
    s.pool_weight = 1.0;
    const auto p = build_random_model(s);
    const auto q = derive_quantities(p);
    const auto test = TestSpec::isotropic(p.sigma_y2);
    note("instance d_x=16 d_l=4 d_r=8 m=0.3: delta %.4f", q.delta);
    bool ok = q.delta > 0.0;
    for (double ratio : {0.5, 2.0}) {
        for (double mult : {1.0, 3.0, 10.0, 100.0, 1000.0}) {
            const auto spec = BudgetSpec::from_cost_ratio(ratio, 100.0 * 16.0 * mult, 1.0);
            const auto a = asymptotic_allocation(q, spec, test);
            const auto g = grid_allocation(q, test, spec, {64, true});
            bool good;
            double rel = 0.0;
            if (!favorability(q, spec).collect()) {
                good = a.n_B_opt == 0 && g.n_B_opt == 0;
            } else {
                rel = std::abs(static_cast<double>(g.n_B_opt - a.n_B_opt)) / static_cast<double>(a.n_B_opt);
                good = rel <= kBudgetRelTol;
            }
            note("ratio %.1f F %.4f B %-8.0f grid n_B %-5lld asymptotic n_B %-5lld diff %.1f%% %s", ratio, a.F, spec.B,
                 static_cast<long long>(g.n_B_opt), static_cast<long long>(a.n_B_opt), 100.0 * rel, good ? "ok" : "BAD");
            ok = ok && good;
        }
    }
    // Informational: the fMRI preset needs B far above c_B n_B_opt before the two agree.
    const auto base = build_fmri_preset(0.1, 0.05, 1000.0, 0);
    const auto fq = derive_quantities(base.first);
    const auto ftest = TestSpec::isotropic(base.first.sigma_y2);
    for (double b : {1e5, 1e6, 1e7}) {
        const auto spec = BudgetSpec::from_cost_ratio(2.0, b);
        try {
            const auto a = asymptotic_allocation(fq, spec, ftest);
            const auto g = grid_allocation(fq, ftest, spec, {64, true});
            note("(info) fMRI ratio 2, B=%.0e: grid n_B %lld, asymptotic n_B %lld", b, static_cast<long long>(g.n_B_opt),
                 static_cast<long long>(a.n_B_opt));
        } catch (const Error& e) {
            note("(info) fMRI ratio 2, B=%.0e: %s", b, e.what());
        }
    }
    return ok;
}

// 7. Encoding fit: exact recovery, global optimality, determinism.
bool criterion7() {
    bool ok = true;
    {
        RandomModelSpec s;
        s.d_x = 8;
        s.d_l = 5;
        s.d_r = 8;
        s.pool_weight = fmri_pool_weight();
        auto p = build_random_model(s);
        p.Sigma_l.setZero();
        p.sigma_r2 = 0.0;
        double worst = 0.0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const auto enc = fit_encoding(sample_brain_dataset(p, 40, seed), p.d_l);
            worst = std::max(worst, operator_norm(enc.P_A_hat - p.A_star * p.A_star.transpose()));
        }
        note("noiseless projector error (operator norm, 10 fits) %.2e", worst);
        ok = ok && worst <= kProjectorTol;
    }
    {
        RandomModelSpec s;
        s.d_x = 6;
        s.d_l = 3;
        s.d_r = 4;
        s.pool_width = 2;
        s.seed = 2;
        const auto p = build_random_model(s);
        const auto d = sample_brain_dataset(p, 40, 7);
        const auto enc = fit_encoding(d, 3);
        const double best = encoding_objective(d, enc.A_hat, enc.H_hat);
        std::mt19937_64 rng(123);
        std::normal_distribution<double> z;
        int beaten = 0;
        double closest = kInfinity;
        for (int c = 0; c < kCandidates; ++c) {
            Eigen::MatrixXd a(6, 3), h(3, 4);
            for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = z(rng);
            for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = z(rng);
            if (c % 2 == 0) {
                a = enc.A_hat + 0.05 * a;
                h = (d.X * a).colPivHouseholderQr().solve(d.R);
            }
            const double obj = encoding_objective(d, a, h);
            closest = std::min(closest, obj - best);
            beaten += obj < best - 1e-12;
        }
        note("6-dim instance: objective %.6f, %d of %d random rank-3 candidates lower (closest gap %.3e)", best, beaten,
             kCandidates, closest);
        ok = ok && beaten == 0;
    }
    {
        const auto p = small_model();
        const auto test = TestSpec::isotropic(p.sigma_y2);
        auto row = [&](unsigned threads) {
            MonteCarloConfig cfg;
            cfg.trials = 500;
            cfg.replicates = 4;
            cfg.seed = 5;
            cfg.threads = threads;
            const auto r = estimate_risk(p, test, 2000, 100, LambdaPolicy::theory_optimal(), cfg);
            std::ostringstream os;
            os << risk_csv_row(r, 2000, 100, PolicyKind::theory_optimal, optimal_lambda(derive_quantities(p), 2000, 100));
            const auto enc = fit_encoding(sample_brain_dataset(p, 300, 5), p.d_l);
            write_encoding(os, enc);
            write_predictor(os, fit_befs_soft(sample_task_dataset(p, 50, 5), enc, 0.3));
            return os.str();
        };
        const auto a = row(1), b = row(1), c = row(3);
        note("reruns byte-identical: %s; across thread counts: %s", a == b ? "yes" : "no", a == c ? "yes" : "no");
        ok = ok && a == b && a == c;
    }
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    struct Criterion {
        int id;
        const char* what;
        std::function<bool()> run;
    };
    const std::vector<Criterion> all{
        {1, "theory vs Monte Carlo risk (BEFS at lambda_opt and TOS inside 95% CI)", criterion1},
        {2, "lambda schedule within one grid step", criterion2},
        {3, "exact-limit identities", criterion3},
        {4, "value inversion, large-sample limit, isotropic decomposition", criterion4},
        {5, "fMRI sweep shapes", criterion5},
        {6, "budget grid vs asymptotic allocation", criterion6},
        {7, "encoding recovery, global optimality, determinism", criterion7},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    int failed = 0;
    for (const auto& c : all) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;
        std::printf("criterion %d: %s\n", c.id, c.what);
        std::fflush(stdout);
        const auto start = std::chrono::steady_clock::now();
        bool pass = false;
        try {
            pass = c.run();
        } catch (const std::exception& e) {
            note("exception: %s", e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %d (%.1fs)\n", pass ? "PASS" : "FAIL", c.id, secs);
        std::fflush(stdout);
        failed += !pass;
    }
    return failed == 0 ? 0 : 1;
}
