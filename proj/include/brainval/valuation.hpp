#pragma once

// Turns risks into equivalent task-sample values, exchange rates and percent
// of task data saved.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "brainval/errors.hpp"
#include "brainval/linmodel.hpp"
#include "brainval/theory.hpp"

namespace brainval {

enum class ValueSource { asymptotic, finite_theory, empirical };

inline const char* source_name(ValueSource s) {
    switch (s) {
        case ValueSource::asymptotic: return "asymptotic";
        case ValueSource::finite_theory: return "finite";
        case ValueSource::empirical: return "empirical";
    }
    return "unknown";
}

struct ValueReport {
    double n_B = 0.0;
    double n_T = 0.0;
    double v_T = 0.0;            // +infinity when unbounded
    double rho = 0.0;            // v_T / n_B
    double percent_saved = 0.0;  // 100 (1 - n_T / (n_T + v_T))
    ValueSource source = ValueSource::finite_theory;

    bool infinite() const { return std::isinf(v_T); }
};

inline double percent_saved(double n_t, double v_t) {
    if (std::isinf(v_t) && v_t > 0.0) return 100.0;
    return 100.0 * v_t / (n_t + v_t);
}

inline ValueReport make_report(double n_b, double n_t, double v_t, ValueSource source) {
    ValueReport r;
    r.n_B = n_b;
    r.n_T = n_t;
    r.v_T = v_t;
    r.rho = n_b > 0.0 ? v_t / n_b : 0.0;
    r.percent_saved = percent_saved(n_t, v_t);
    r.source = source;
    return r;
}

/// Solves sigma_y2 Tr(Sigma_test) / (n_T + v - d_x - 1) = excess for v.
inline double value_from_excess(const TheoryQuantities& q, const TestSpec& test, double n_t, double excess) {
    if (!(n_t > static_cast<double>(q.d_x) + 1.0)) throw RegimeError("value: n_T must exceed d_x + 1");
    if (!(excess > 0.0)) throw InversionError("value: risk is at or below the noise floor sigma_test2");
    const double tr = test.trace_on(q.d_l) + test.trace_off(q.d_x, q.d_l);
    return q.sigma_y2 * tr / excess - (n_t - static_cast<double>(q.d_x) - 1.0);
}

/// Extra task samples v_T with tos_risk(n_T + v_T) == risk_befs. Negative when
/// the brain-regularized risk is worse than TOS.
inline ValueReport value_from_risks(const TheoryQuantities& q, const TestSpec& test, double n_t, double risk_befs,
                                    double n_b = 0.0, ValueSource source = ValueSource::finite_theory) {
    const double v = value_from_excess(q, test, n_t, risk_befs - test.sigma_test2);
    return make_report(n_b, n_t, v, source);
}

enum class CurveMode { finite_theory, asymptotic };

struct CurvePoint {
    double n_T = 0.0;
    std::optional<ValueReport> report;
    std::string error;  // set when the point is out of regime
};

/// Finite-theory value of n_B brain samples at n_T, using the isotropic lambda schedule.
inline ValueReport finite_value(const TheoryQuantities& q, const TestSpec& test, double n_b, double n_t) {
    const double lambda = optimal_lambda(q, n_b, n_t);
    const double excess = befs_excess_risk(q, test, n_b, n_t, lambda);
    return make_report(n_b, n_t, value_from_excess(q, test, n_t, excess), ValueSource::finite_theory);
}

/// Large-n_T value; the isotropic exchange rate when the test covariance is
/// a multiple of the identity, the shifted-test value otherwise.
inline ValueReport asymptotic_value_report(const TheoryQuantities& q, const TestSpec& test, double n_b, double n_t) {
    const double v = test.c_on == test.c_off ? asymptotic_value(q, n_b).v_T : robustness_value(q, test, n_b);
    return make_report(n_b, n_t, v, ValueSource::asymptotic);
}

inline std::vector<CurvePoint> savings_curve(const TheoryQuantities& q, const TestSpec& test, double n_b,
                                             const std::vector<double>& n_t_grid, CurveMode mode) {
    std::vector<CurvePoint> out;
    out.reserve(n_t_grid.size());
    for (double n_t : n_t_grid) {
        CurvePoint pt;
        pt.n_T = n_t;
        try {
            if (!(n_t > static_cast<double>(q.d_x) + 1.0)) throw RegimeError("n_T must exceed d_x + 1");
            pt.report = mode == CurveMode::finite_theory ? finite_value(q, test, n_b, n_t)
                                                         : asymptotic_value_report(q, test, n_b, n_t);
        } catch (const Error& e) {
            pt.error = e.what();
        }
        out.push_back(std::move(pt));
    }
    return out;
}

inline std::string value_csv_header() { return "n_B,n_T,tau_or_test_id,v_T,rho,percent_saved,source"; }

}  // namespace brainval
