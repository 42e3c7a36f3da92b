#include "gridgbm/hedging.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace gridgbm;

namespace {

double cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

struct BsOracle {
    double price, delta;
};

BsOracle bsOracle(double s, double k, double r, double v, double tau) {
    const double d1 = (std::log(s / k) + (r + 0.5 * v * v) * tau) / (v * std::sqrt(tau));
    return {s * cdf(d1) - k * std::exp(-r * tau) * cdf(d1 - v * std::sqrt(tau)), cdf(d1)};
}

}  // namespace

TEST(DeltaStrategy, Limits) {
    const MarketParams m;
    const GridSpec g;
    const OptionSpec o;
    EXPECT_NEAR(deltaStrategy(m, g, 0.2, 0.0, 10.0 * o.strike, o).shares, 1.0, 1e-10);
    EXPECT_NEAR(deltaStrategy(m, g, 0.2, 0.0, o.strike / 10.0, o).shares, 0.0, 1e-10);
    EXPECT_THROW(deltaStrategy(m, g, 0.2, g.T, 100.0, o), DomainError);
}

TEST(DeltaStrategy, ValueIdentity) {
    const MarketParams m;
    const GridSpec g;
    const OptionSpec o;
    for (double t : {0.0, 0.3, 0.9}) {
        for (double s : {80.0, 100.0, 130.0}) {
            const auto p = deltaStrategy(m, g, m.sigmaBar, t, s, o);
            const auto oracle = bsOracle(s, o.strike, m.r, m.sigmaBar, g.T - t);
            EXPECT_NEAR(p.shares * s + p.cash * std::exp(m.r * t), oracle.price, 1e-12);
            EXPECT_NEAR(p.shares, oracle.delta, 1e-14);
        }
    }
}

TEST(ReplicationError, DeterministicForwardPathMatchesDirectSummation) {
    const MarketParams m;
    const GridSpec g;  // N = 12, eps = 0: U is Black-Scholes at nu
    OptionSpec o;
    o.strike = m.s0 * std::exp(m.r * g.T);
    const double nu = 0.3;
    const std::size_t n = 12;
    std::vector<double> path(n + 1);
    for (std::size_t j = 0; j <= n; ++j) path[j] = m.s0 * std::exp(m.r * g.gridTime(j));

    double err = std::max(path[n] - o.strike, 0.0) - bsOracle(path[0], o.strike, m.r, nu, g.T).price;
    for (std::size_t j = 0; j < n; ++j) {
        const double t0 = g.gridTime(j), t1 = g.gridTime(j + 1);
        const auto b = bsOracle(path[j], o.strike, m.r, nu, g.T - t0);
        const double cash = (b.price - b.delta * path[j]) / std::exp(m.r * t0);
        err -= b.delta * (path[j + 1] - path[j]) + cash * (std::exp(m.r * t1) - std::exp(m.r * t0));
    }
    EXPECT_NEAR(replicationError(path, m, g, nu, o), err, 1e-10);
}

TEST(ReplicationError, ZeroVolatilityDeterministicHedgeIsExact) {
    const MarketParams m;
    const GridSpec g;
    for (double k : {60.0, 160.0}) {
        OptionSpec o;
        o.strike = k;
        std::vector<double> path(g.N + 1);
        for (std::size_t j = 0; j <= g.N; ++j) path[j] = m.s0 * std::exp(m.r * g.gridTime(j));
        EXPECT_NEAR(replicationError(path, m, g, 1e-8, o), 0.0, 1e-10);
    }
}

TEST(HedgeLedger, SelfFinancingAndJumpSum) {
    const MarketParams m;
    GridSpec g;
    g.N = 24;
    g.epsilon = 0.2 * g.delta();
    const OptionSpec o;
    const auto ps = simulateExactProportional(m, g, 0.35, 5, 12);
    const auto idx = rebalanceSamples(ps, 12);
    for (std::size_t p = 0; p < ps.nPaths; ++p) {
        std::vector<double> obs;
        for (auto k : idx) obs.push_back(ps.at(p, k));
        const auto ledger = hedgeLedger(obs, m, g, 0.25, o);
        double jumps = 0.0;
        for (std::size_t j = 0; j < ledger.steps.size(); ++j) {
            const auto& s = ledger.steps[j];
            // Between rebalances the value moves only through the gain.
            EXPECT_NEAR(s.carried, s.value + s.gain, 1e-12 * (1.0 + std::abs(s.value)));
            // After rebalancing the portfolio is worth the model price again.
            if (j > 0) EXPECT_NEAR(s.value, ledger.steps[j - 1].target, 1e-10 * (1.0 + s.value));
            jumps += s.jump;
        }
        EXPECT_NEAR(ledger.steps.front().value, ledger.initialPrice, 1e-12 * ledger.initialPrice);
        EXPECT_NEAR(jumps, ledger.error, 1e-10);
        EXPECT_NEAR(replicationError(obs, m, g, 0.25, o), ledger.error, 1e-10);
    }
}

TEST(ReplicationError, InputErrors) {
    const MarketParams m;
    const GridSpec g;
    const OptionSpec o;
    EXPECT_THROW(rebalanceTimes(g, 5), InputError);
    EXPECT_THROW(replicationError(std::vector<double>(6, 100.0), m, g, 0.2, o), InputError);
    EXPECT_THROW(replicationError(std::vector<double>{100.0}, m, g, 0.2, o), InputError);
    std::vector<double> bad(13, 100.0);
    bad[3] = -1.0;
    EXPECT_THROW(replicationError(bad, m, g, 0.2, o), InputError);
}

TEST(HedgeExperiment, MatchedAndMismatched) {
    const MarketParams m;
    GridSpec g;
    g.N = 200;
    const OptionSpec o;
    const auto gbm = simulateGBM(m, g, 3000, 41);
    const auto h100 = hedgeExperiment(gbm, m.sigmaBar, o, 100);
    const auto h200 = hedgeExperiment(gbm, m.sigmaBar, o, 200, 2);
    EXPECT_LT(std::abs(h200.mean), 3.0 * h200.standardError);
    EXPECT_NEAR(h100.stdev / h200.stdev, std::sqrt(2.0), 0.15);
    const auto prop = simulateExactProportional(m, g, 0.4, 3000, 42);
    const auto mis = hedgeExperiment(prop, 0.1, o, 100);
    EXPECT_GT(std::abs(mis.mean), 3.0 * mis.standardError);
    EXPECT_EQ(mis.errors.size(), 3000u);
    EXPECT_LE(mis.q05, mis.q50);
    EXPECT_LE(mis.q50, mis.q95);
}

TEST(HedgeExperiment, VarianceDecreasesWithRebalancing) {
    const MarketParams m;
    GridSpec g;
    g.N = 1000;
    const OptionSpec o;
    const auto gbm = simulateGBM(m, g, 1000, 43);
    double prev = INFINITY;
    for (std::size_t n : {125, 250, 500, 1000}) {
        const double v = hedgeExperiment(gbm, m.sigmaBar, o, n).stdev;
        EXPECT_LT(v, prev);
        prev = v;
    }
}

TEST(Quantile, LinearInterpolation) {
    const std::vector<double> v{4.0, 1.0, 3.0, 2.0};
    EXPECT_DOUBLE_EQ(empiricalQuantile(v, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(empiricalQuantile(v, 1.0), 4.0);
    EXPECT_DOUBLE_EQ(empiricalQuantile(v, 0.5), 2.5);
    EXPECT_THROW(empiricalQuantile(v, 1.5), InputError);
}

TEST(SelectNu, PicksSigmaBarForGbm) {
    const MarketParams m;
    GridSpec g;
    g.N = 50;
    const OptionSpec o;
    const std::vector<double> grid{0.1, 0.15, 0.2, 0.25, 0.3};
    GeneratorConfig gen;
    const auto a = selectNu(gen, m, g, o, HedgeCriterion::meanSquare(), grid, 2000, 50, 5);
    EXPECT_DOUBLE_EQ(a.bestNu, 0.2);
    const auto b = selectNu(gen, m, g, o, HedgeCriterion::meanSquare(), grid, 2000, 50, 5);
    EXPECT_EQ(a.scores, b.scores);
    const std::vector<double> single{0.37};
    EXPECT_DOUBLE_EQ(selectNu(gen, m, g, o, HedgeCriterion::meanAbsolute(), single, 100, 50, 5).bestNu, 0.37);
    EXPECT_THROW(selectNu(gen, m, g, o, HedgeCriterion::meanSquare(), std::vector<double>{}, 100, 50, 5),
                 InputError);
}

TEST(SelectNu, MedianAndMeanAbsoluteAgreeOnSymmetricFixture) {
    // errors for nu are +/- |nu - 0.3| scaled copies of a symmetric base sample
    const std::vector<double> base{-2.0, -1.0, -0.5, 0.5, 1.0, 2.0};
    auto errorsFor = [&](double nu) {
        std::vector<double> e(base);
        for (auto& x : e) x *= 0.1 + std::abs(nu - 0.3);
        return e;
    };
    const std::vector<double> grid{0.1, 0.2, 0.28, 0.35, 0.5};
    const auto med = selectNuFromErrors(grid, HedgeCriterion::quantile(0.5), errorsFor);
    const auto mad = selectNuFromErrors(grid, HedgeCriterion::meanAbsolute(), errorsFor);
    EXPECT_DOUBLE_EQ(med.bestNu, mad.bestNu);
    EXPECT_DOUBLE_EQ(med.bestNu, 0.28);
}

TEST(Criterion, Parse) {
    EXPECT_EQ(parseCriterion("mean-square").name, "mean-square");
    EXPECT_EQ(parseCriterion("mean-absolute").name, "mean-absolute");
    const std::vector<double> e{-3.0, 1.0, 2.0};
    EXPECT_DOUBLE_EQ(parseCriterion("quantile:1").eval(e), 3.0);
    EXPECT_THROW(parseCriterion("quantile:x"), InputError);
    EXPECT_THROW(parseCriterion("max"), InputError);
}
