#include "gridgbm/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace gridgbm;

TEST(Kolmogorov, ReferenceValues) {
    // Classical critical values of the limiting distribution.
    EXPECT_NEAR(kolmogorovSurvival(1.0), 1.0 - 0.7300003283, 1e-9);
    EXPECT_NEAR(kolmogorovSurvival(1.3581), 0.05, 1e-4);
    EXPECT_NEAR(kolmogorovSurvival(1.6276), 0.01, 1e-4);
    EXPECT_EQ(kolmogorovSurvival(0.0), 1.0);
}

TEST(Kolmogorov, SeriesAgreeAndDecrease) {
    double prev = 1.0;
    for (double l = 0.05; l < 3.0; l += 0.01) {
        const double q = kolmogorovSurvival(l);
        EXPECT_LE(q, prev + 1e-15);
        prev = q;
    }
    EXPECT_NEAR(kolmogorovSurvival(1.0 - 1e-12), kolmogorovSurvival(1.0 + 1e-12), 1e-10);
}

TEST(KSTest, MidpointSampleHasHalfStepStatistic) {
    const std::size_t n = 200;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = (double(i) + 0.5) / double(n);
    const auto r = ksTest(x, [](double v) { return std::clamp(v, 0.0, 1.0); });
    EXPECT_NEAR(r.statistic, 0.5 / double(n), 1e-15);
    EXPECT_GT(r.pValue, 0.999);
}

TEST(KSTest, DetectsShiftAndAcceptsTruth) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> z;
    std::vector<double> x(5000);
    for (auto& v : x) v = 1.0 + 2.0 * z(rng);
    EXPECT_GT(ksTestNormal(x, 1.0, 4.0).pValue, 0.01);
    EXPECT_LT(ksTestNormal(x, 1.3, 4.0).pValue, 1e-6);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::exp(x[i]);
    EXPECT_NEAR(ksTestLognormal(y, 1.0, 4.0).statistic, ksTestNormal(x, 1.0, 4.0).statistic, 1e-15);
}

TEST(KSTest, InputErrors) {
    std::vector<double> small(50, 1.0);
    EXPECT_THROW(ksTestLognormal(small, 0.0, 1.0), InputError);
    std::vector<double> neg(200, 1.0);
    neg[7] = -1.0;
    EXPECT_THROW(ksTestLognormal(neg, 0.0, 1.0), InputError);
    EXPECT_THROW(ksTestNormal(std::vector<double>{}, 0.0, 1.0), InputError);
}

TEST(KSTwoSample, ExtremeCases) {
    std::vector<double> a{1, 2, 3, 4}, b{5, 6, 7};
    EXPECT_DOUBLE_EQ(ksTwoSample(a, a).statistic, 0.0);
    EXPECT_DOUBLE_EQ(ksTwoSample(a, b).statistic, 1.0);
    std::vector<double> c{1, 2, 5, 6};
    EXPECT_DOUBLE_EQ(ksTwoSample(a, c).statistic, 0.5);
}

TEST(GridDiagnostics, GbmPassesAndWrongMarketFails) {
    const MarketParams m;
    const GridSpec g;
    const auto ps = simulateGBM(m, g, 4000, 77);
    auto rep = gridMarginalChecks(ps, m, g);
    rep.append(gridReturnDiagnostics(ps, m, g));
    EXPECT_EQ(rep.entries.size(), 12u + 12u * 3u + 11u + 11u);
    EXPECT_GE(rep.entries.size() - rep.failures(), rep.entries.size() - 2);
    MarketParams wrong = m;
    wrong.mu = 0.5;
    EXPECT_GT(gridReturnDiagnostics(ps, wrong, g).failures(), 6u);
}

TEST(GridDiagnostics, FixedAnchorBreaksGridLaw) {
    // Restarting every interval at s0 instead of the current price is a negative control.
    const MarketParams m;
    GridSpec g;
    g.N = 6;
    g.subSteps = 40;
    g.epsilon = 0.02 * g.delta();
    SimOptions opts;
    opts.anchor = AnchorMode::FixedInitial;
    const auto ps = simulateEuler(m, g, VolatilitySpec::proportional(0.1), 3000, 9, opts);
    EXPECT_GT(gridMarginalChecks(ps, m, g).failures(), 0u);
}

TEST(GridDiagnostics, MissingGridTimes) {
    const MarketParams m;
    GridSpec g;
    const auto ps = simulateGBM(m, g, 200, 1);
    GridSpec other = g;
    other.N = 24;
    EXPECT_THROW(gridReturnDiagnostics(ps, m, other), InputError);
}

TEST(Fingerprint, SeparatesLimitProcessFromGbm) {
    const MarketParams m;
    GridSpec g;
    g.subSteps = 4;
    const auto prop = simulateExactProportional(m, g, 0.4, 20000, 31);
    const auto f = offGridFingerprint(prop, m, g, 0.4);
    EXPECT_LT(f.zBeta, 4.0);
    EXPECT_GT(f.zGbm, 5.0);
    ASSERT_EQ(f.varianceZ.size(), 3u);
    for (double z : f.varianceZ) EXPECT_LT(z, 4.0);
    const auto gbm = simulateGBM(m, g, 20000, 31);
    const auto fg = offGridFingerprint(gbm, m, g, m.sigmaBar);
    EXPECT_DOUBLE_EQ(fg.betaFormula, fg.gbmValue);
    EXPECT_LT(fg.zBeta, 4.0);
}

TEST(Fingerprint, Preconditions) {
    const MarketParams m;
    GridSpec g;
    g.subSteps = 4;
    g.epsilon = 0.1 * g.delta();
    const auto ps = simulateExactProportional(m, g, 0.4, 100, 1);
    EXPECT_THROW(offGridFingerprint(ps, m, g, 0.4), InputError);
    GridSpec coarse;
    const auto pc = simulateExactProportional(m, coarse, 0.4, 100, 1);
    EXPECT_THROW(offGridFingerprint(pc, m, coarse, 0.4), InputError);
}

TEST(FokkerPlanck, BaselineConvergesAtStencilOrder) {
    const MarketParams m;
    const auto bs = VolatilitySpec::blackScholes(m.sigmaBar);
    FPOptions o2;
    o2.order = 2;
    const auto coarse = fpResidualLognormal(m, bs, linspace(0.2, 1.0, 81), linspace(50.0, 200.0, 81), o2);
    const auto fine = fpResidualLognormal(m, bs, linspace(0.2, 1.0, 161), linspace(50.0, 200.0, 161), o2);
    EXPECT_GT(coarse.maxResidual / fine.maxResidual, 3.0);
    EXPECT_LT(coarse.maxResidual / fine.maxResidual, 5.0);
}

TEST(FokkerPlanck, ClosedFormDriftsSolveTransport) {
    const MarketParams m;
    const auto t = linspace(0.2, 1.0, 81), x = linspace(50.0, 200.0, 81);
    const double base = fpResidualLognormal(m, VolatilitySpec::blackScholes(m.sigmaBar), t, x).maxResidual;
    for (const auto& v : {VolatilitySpec::proportional(0.3), VolatilitySpec::sqrtProportional(2.0),
                          VolatilitySpec::constant(20.0)}) {
        const double r = fpResidualLognormal(m, v, t, x).maxResidual;
        EXPECT_LT(r, 1e-4);
        EXPECT_LT(r, 100.0 * base + 1e-6);
    }
    const double perturbed =
        fpResidualLognormal(m, VolatilitySpec::blackScholes(m.sigmaBar), t, x, {}, 0.01).maxResidual;
    EXPECT_GT(perturbed, 20.0 * base);
}

TEST(FokkerPlanck, MeshErrors) {
    const MarketParams m;
    const auto bs = VolatilitySpec::blackScholes(m.sigmaBar);
    EXPECT_THROW(fpResidualLognormal(m, bs, linspace(0.0, 1.0, 20), linspace(50.0, 150.0, 20)), InputError);
    EXPECT_THROW(fpResidualLognormal(m, bs, linspace(0.2, 1.0, 20), linspace(1.0, 150.0, 20)), InputError);
    FPOptions bad;
    bad.order = 3;
    EXPECT_THROW(fpResidualLognormal(m, bs, linspace(0.2, 1.0, 20), linspace(50.0, 150.0, 20), bad), InputError);
    std::vector<double> uneven{0.3, 0.4, 0.6, 0.7};
    EXPECT_THROW(fpResidualLognormal(m, bs, uneven, linspace(50.0, 150.0, 20)), InputError);
}

TEST(Appendix, ClosedFormNegativeProbability) {
    // r -> 0 reduces to Brownian motion: P = Phi(-s0 / (nu sqrt T)).
    EXPECT_NEAR(linearSdeNegativeProbability(100.0, 1e-12, 30.0, 1.0),
                0.5 * std::erfc(100.0 / 30.0 / std::sqrt(2.0)), 1e-12);
    EXPECT_NEAR(linearSdeNegativeProbability(100.0, 0.05, 30.0, 1.0), 3.166e-4, 1e-6);
}

TEST(Appendix, SmallRun) {
    const MarketParams m;
    GridSpec g;
    g.epsilon = 0.01 * g.delta();
    g.subSteps = 20;
    AppendixOptions opts;
    opts.objectivePaths = 500;
    opts.riskNeutralPaths = 200000;
    const auto a = appendixDemo(m, g, 30.0, opts);
    EXPECT_LT(a.riskNeutralZ, 4.0);
    EXPECT_LT(a.objectiveClampFraction, 1e-3);
    EXPECT_GT(a.riskNeutralClosedForm, 0.0);
    EXPECT_FALSE(a.summary.empty());
    EXPECT_THROW(appendixDemo(m, GridSpec{}, 30.0, opts), DomainError);
}
