#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace brainval;

namespace {

const TestSpec kIso = TestSpec::isotropic(1.0);

}  // namespace

TEST(Valuation, InversionRoundTrip) {
    const auto q = derive_quantities(oracle::small_model());
    for (double n_t : {50.0, 400.0, 1e4}) {
        for (double w : {0.0, 17.0, 1e3}) {
            const double risk = tos_risk(q, kIso, n_t + w);
            EXPECT_NEAR(value_from_risks(q, kIso, n_t, risk).v_T, w, 1e-8 * std::max(1.0, w)) << n_t << " " << w;
        }
    }
}

TEST(Valuation, DoublingGivesHalfSaved) {
    const auto q = derive_quantities(oracle::small_model());
    const auto r = value_from_risks(q, kIso, 500, tos_risk(q, kIso, 1000));
    EXPECT_NEAR(r.v_T, 500.0, 1e-8);
    EXPECT_NEAR(r.percent_saved, 50.0, 1e-9);
}

TEST(Valuation, WorseThanTosIsNegative) {
    const auto q = derive_quantities(oracle::small_model());
    EXPECT_NEAR(value_from_risks(q, kIso, 500, tos_risk(q, kIso, 400)).v_T, -100.0, 1e-8);
}

TEST(Valuation, BelowFloorRaises) {
    const auto q = derive_quantities(oracle::small_model());
    EXPECT_THROW(value_from_risks(q, kIso, 100, 1.0), InversionError);
    EXPECT_THROW(value_from_risks(q, kIso, 100, 0.9), InversionError);
    EXPECT_THROW(value_from_risks(q, kIso, 9, 1.1), RegimeError);
}

TEST(Valuation, FiniteApproachesAsymptotic) {
    const auto q = derive_quantities(oracle::small_model());
    auto gap = [&](double n_b, double n_t) {
        const double f = finite_value(q, kIso, n_b, n_t).v_T;
        const double a = asymptotic_value_report(q, kIso, n_b, n_t).v_T;
        return std::abs(f - a) / a;
    };
    // Within 5% at n_T = 100 d_x while v_T stays about 1% of n_T.
    EXPECT_LT(gap(100, 800), 0.05);
    // With more brain data v_T / n_T grows and the gap at 100 d_x widens
    // (0.15 at n_B = 1e3, 0.39 at 1e4); it still closes as n_T grows.
    for (double n_b : {1e2, 1e3, 1e4, 1e5}) {
        double prev = gap(n_b, 800);
        for (double n_t : {8e3, 8e4, 8e5}) {
            const double g = gap(n_b, n_t);
            EXPECT_LT(g, prev) << n_b << " " << n_t;
            prev = g;
        }
        EXPECT_LT(prev, 2e-3) << n_b;
    }
}

TEST(Valuation, ExchangeRateIdentity) {
    const auto q = derive_quantities(oracle::small_model());
    const auto r = asymptotic_value_report(q, kIso, 2500, 1e4);
    EXPECT_NEAR(r.rho * r.n_B, r.v_T, 1e-12 * r.v_T);
    EXPECT_NEAR(r.percent_saved, 100.0 * r.v_T / (1e4 + r.v_T), 1e-12);
}

TEST(Valuation, InfiniteValueSavesEverything) {
    auto q = derive_quantities(oracle::small_model());
    q.m2 = 0.0;
    const auto a = asymptotic_value(q, 1e4);
    EXPECT_TRUE(std::isinf(a.v_T_inf));
    const auto r = make_report(1e4, 100, a.v_T_inf, ValueSource::asymptotic);
    EXPECT_TRUE(r.infinite());
    EXPECT_EQ(r.percent_saved, 100.0);
}

TEST(Valuation, FmriSavingsFallWithTaskSamples) {
    const auto [p, n_b] = build_fmri_preset(0.1, 0.05, 1000.0, 0);
    const auto q = derive_quantities(p);
    const auto test = TestSpec::isotropic(q.sigma_y2);
    const auto curve = savings_curve(q, test, static_cast<double>(n_b), {1e4, 3e4, 1e5, 3e5, 1e6}, CurveMode::asymptotic);
    for (std::size_t i = 1; i < curve.size(); ++i) {
        ASSERT_TRUE(curve[i].report && curve[i - 1].report);
        EXPECT_LT(curve[i].report->percent_saved, curve[i - 1].report->percent_saved);
    }
}

TEST(Valuation, SavingsCurveFlagsOutOfRegime) {
    const auto q = derive_quantities(oracle::small_model());
    const auto curve = savings_curve(q, kIso, 1e4, {5.0, 9.0, 100.0}, CurveMode::finite_theory);
    ASSERT_EQ(curve.size(), 3u);
    EXPECT_FALSE(curve[0].report);
    EXPECT_FALSE(curve[0].error.empty());
    EXPECT_FALSE(curve[1].report);
    ASSERT_TRUE(curve[2].report);
    EXPECT_EQ(curve[2].report->source, ValueSource::finite_theory);
}

TEST(Valuation, CsvHeader) {
    EXPECT_EQ(value_csv_header(), "n_B,n_T,tau_or_test_id,v_T,rho,percent_saved,source");
    EXPECT_STREQ(source_name(ValueSource::empirical), "empirical");
}
