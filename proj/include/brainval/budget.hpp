#pragma once

// Splitting a fixed budget between brain samples (cost c_B) and task samples
// (cost c_T).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "brainval/errors.hpp"
#include "brainval/linmodel.hpp"
#include "brainval/theory.hpp"

namespace brainval {

struct BudgetSpec {
    double c_B = 1.0;
    double c_T = 1.0;
    double B = 0.0;

    /// $15 per hour of labeling at one label every two seconds.
    static constexpr double kLabelCost = 15.0 / 1800.0;

    static BudgetSpec from_cost_ratio(double ratio, double budget, double c_T = kLabelCost) {
        return {ratio * c_T, c_T, budget};
    }
};

inline void validate(const BudgetSpec& s) {
    if (!(s.c_B > 0.0) || !(s.c_T > 0.0)) throw BudgetError("costs must be positive");
    if (!(s.B >= 0.0)) throw BudgetError("budget must be nonnegative");
}

enum class AllocationMethod { grid, asymptotic };

struct Favorability {
    double value = 0.0;   // +infinity when delta == 0
    bool delta_positive = false;

    /// Brain data is worth collecting at large budget iff F > 1 and delta > 0.
    bool collect() const { return delta_positive && value > 1.0; }
};

struct BudgetReport {
    double F = 0.0;
    std::int64_t n_B_opt = 0;
    std::int64_t n_T_opt = 0;
    double risk_at_opt = 0.0;
    double extra_budget = 0.0;
    double percent_budget_saved = 0.0;
    AllocationMethod method = AllocationMethod::asymptotic;
    std::string reason;  // why no brain data is collected, when it is not
};

/// F = (c_T / c_B) ((d_x - d_l) / d_x) (sigma_y2 / delta).
inline Favorability favorability(const TheoryQuantities& q, const BudgetSpec& spec) {
    validate(spec);
    Favorability f;
    f.delta_positive = q.delta > 0.0;
    const double weight = spec.c_T / spec.c_B * q.off_dim() / static_cast<double>(q.d_x) * q.sigma_y2;
    f.value = q.delta == 0.0 ? kInfinity : weight / q.delta;
    return f;
}

namespace detail {

/// Risk with the theoretically optimal lambda; plain OLS when n_B = 0.
inline double budget_risk(const TheoryQuantities& q, const TestSpec& test, double n_b, double n_t) {
    if (n_b <= 0.0) return tos_risk(q, test, n_t);
    return befs_finite_risk(q, test, n_b, n_t, optimal_lambda(q, n_b, n_t));
}

inline double percent_of(double extra, double budget) {
    return extra > 0.0 ? 100.0 * extra / (budget + extra) : 0.0;
}

}  // namespace detail

/// Large-budget allocation: n_B_opt = max(0, (D / m^2)(sqrt(F) - 1)) with
/// D = (d_x - d_l) delta, and extra budget c_T v_T_inf (1 - sqrt(1 / F))^2.
inline BudgetReport asymptotic_allocation(const TheoryQuantities& q, const BudgetSpec& spec,
                                          const TestSpec& test) {
    validate(spec);
    BudgetReport r;
    r.method = AllocationMethod::asymptotic;
    const Favorability f = favorability(q, spec);
    r.F = f.value;
    if (!f.delta_positive) {
        r.reason = "delta <= 0: brain data does not improve the large-budget risk";
    } else if (!f.collect()) {
        r.reason = "F <= 1: task samples are the cheaper route to lower risk";
    } else if (!(q.m2 > 0.0)) {
        throw DegenerateError("asymptotic_allocation: zero misalignment, the optimal brain sample count does not saturate");
    } else {
        const double d = q.off_dim() * q.delta;
        r.n_B_opt = static_cast<std::int64_t>(std::floor(d / q.m2 * (std::sqrt(f.value) - 1.0)));
        const double v_inf = q.sigma_y2 * q.off_dim() * q.off_dim() / (static_cast<double>(q.d_x) * q.m2);
        const double gap = 1.0 - std::sqrt(1.0 / f.value);
        r.extra_budget = spec.c_T * v_inf * gap * gap;
    }
    const double remaining = spec.B - spec.c_B * static_cast<double>(r.n_B_opt);
    r.n_T_opt = static_cast<std::int64_t>(std::floor(remaining / spec.c_T));
    if (!(static_cast<double>(r.n_T_opt) > static_cast<double>(q.d_x) + 1.0)) {
        throw RegimeError("asymptotic_allocation: budget leaves n_T <= d_x + 1 task samples");
    }
    r.risk_at_opt = detail::budget_risk(q, test, static_cast<double>(r.n_B_opt), static_cast<double>(r.n_T_opt));
    r.percent_budget_saved = detail::percent_of(r.extra_budget, spec.B);
    return r;
}

inline BudgetReport asymptotic_allocation(const TheoryQuantities& q, const BudgetSpec& spec) {
    return asymptotic_allocation(q, spec, TestSpec::isotropic(q.sigma_y2));
}

struct BudgetGridSpec {
    std::size_t points = 64;  // geometric n_B values in [1, n_B_max], plus n_B = 0
    bool refine = true;       // integer golden-section search around the best grid point
};

/// Feasible brain-sample grid: 0 plus `points` geometric values in [1, n_B_max].
inline std::vector<std::int64_t> budget_grid(const TheoryQuantities& q, const BudgetSpec& spec, std::size_t points) {
    validate(spec);
    const double min_task_cost = spec.c_T * (static_cast<double>(q.d_x) + 2.0);
    if (spec.B < min_task_cost) throw BudgetError("budget cannot buy d_x + 2 task samples");
    const auto n_b_max = static_cast<std::int64_t>(std::floor((spec.B - min_task_cost) / spec.c_B));
    std::vector<std::int64_t> grid{0};
    if (n_b_max >= 1 && points > 0) {
        const double top = std::log(static_cast<double>(n_b_max));
        for (std::size_t i = 0; i < points; ++i) {
            const double frac = points == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(points - 1);
            const auto v = static_cast<std::int64_t>(std::llround(std::exp(top * frac)));
            grid.push_back(std::clamp<std::int64_t>(v, 1, n_b_max));
        }
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

/// Minimizes risk(n_B, n_T) over budget-feasible allocations where n_T takes
/// the whole remaining budget. Ties keep the smaller n_B. `risk` may throw
/// brainval::Error for points it cannot evaluate; those points are skipped.
template <typename RiskFn>
BudgetReport grid_allocation(const TheoryQuantities& q, const TestSpec& test, const BudgetSpec& spec,
                             const BudgetGridSpec& grid_spec, RiskFn&& risk) {
    const auto grid = budget_grid(q, spec, grid_spec.points);
    auto n_t_for = [&](std::int64_t n_b) {
        return static_cast<std::int64_t>(std::floor((spec.B - spec.c_B * static_cast<double>(n_b)) / spec.c_T));
    };
    auto eval = [&](std::int64_t n_b) {
        try {
            return static_cast<double>(risk(n_b, n_t_for(n_b)));
        } catch (const Error&) {
            return kInfinity;
        }
    };

    std::vector<double> risks(grid.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        risks[i] = eval(grid[i]);
        if (risks[i] < risks[best]) best = i;
    }
    std::int64_t best_n_b = grid[best];
    double best_risk = risks[best];

    if (grid_spec.refine && grid.size() > 2) {
        // Golden-section search on integers between the neighbouring grid points.
        std::int64_t lo = grid[best == 0 ? 0 : best - 1];
        std::int64_t hi = grid[std::min(best + 1, grid.size() - 1)];
        constexpr double kInvPhi = 0.6180339887498949;
        while (hi - lo > 3) {
            const auto a = hi - static_cast<std::int64_t>(std::llround(kInvPhi * static_cast<double>(hi - lo)));
            auto b = lo + static_cast<std::int64_t>(std::llround(kInvPhi * static_cast<double>(hi - lo)));
            if (b <= a) b = a + 1;  // rounding can merge the probes on short brackets
            if (eval(a) <= eval(b)) {
                hi = b;
            } else {
                lo = a;
            }
        }
        for (std::int64_t n_b = lo; n_b <= hi; ++n_b) {
            const double r = eval(n_b);
            if (r < best_risk || (r == best_risk && n_b < best_n_b)) {
                best_risk = r;
                best_n_b = n_b;
            }
        }
    }
    if (!std::isfinite(best_risk)) throw BudgetError("grid_allocation: no allocation could be evaluated");

    BudgetReport r;
    r.method = AllocationMethod::grid;
    r.F = favorability(q, spec).value;
    r.n_B_opt = best_n_b;
    r.n_T_opt = n_t_for(best_n_b);
    r.risk_at_opt = best_risk;
    if (best_n_b == 0) {
        r.reason = "no brain allocation beats spending the whole budget on task samples";
    } else {
        // Task-only budget reaching the same risk under the continuous OLS law.
        const double excess = best_risk - test.sigma_test2;
        const double tr = test.trace(q.d_x, q.d_l);
        const double equivalent_n_t = q.sigma_y2 * tr / excess + static_cast<double>(q.d_x) + 1.0;
        r.extra_budget = std::max(0.0, spec.c_T * equivalent_n_t - spec.B);
    }
    r.percent_budget_saved = detail::percent_of(r.extra_budget, spec.B);
    return r;
}

/// Grid allocation scored by the finite-sample law at the optimal lambda.
inline BudgetReport grid_allocation(const TheoryQuantities& q, const TestSpec& test, const BudgetSpec& spec,
                                    const BudgetGridSpec& grid_spec = {}) {
    return grid_allocation(q, test, spec, grid_spec, [&](std::int64_t n_b, std::int64_t n_t) {
        return detail::budget_risk(q, test, static_cast<double>(n_b), static_cast<double>(n_t));
    });
}

inline const char* method_name(AllocationMethod m) { return m == AllocationMethod::grid ? "grid" : "asymptotic"; }

inline std::string budget_csv_header() {
    return "B,c_B,c_T,F,n_B_opt,n_T_opt,risk,extra_budget,percent_budget_saved,method";
}

}  // namespace brainval
