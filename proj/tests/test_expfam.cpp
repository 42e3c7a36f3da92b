#include "gridgbm/expfam.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace gridgbm;

namespace {

// Composite Simpson over [a, b] with n (even) panels.
template <class F>
double simpson(F&& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

double lognormalPdf(double x, double s0, double m, double v) {
    const double z = std::log(x / s0) - m;
    return std::exp(-z * z / (2.0 * v)) / (x * std::sqrt(2.0 * std::numbers::pi * v));
}

}  // namespace

TEST(LogPartition, MatchesSimpsonInLogSpace) {
    const double zeta = 1.0, rho = -25.0, s0 = 100.0;
    // In y = ln(x/s0): integral of exp(zeta y + rho y^2) s0 e^y dy.
    const double oracle = std::log(
        simpson([&](double y) { return s0 * std::exp((zeta + 1.0) * y + rho * y * y); }, -3.0, 3.0, 20000));
    EXPECT_NEAR(logPartitionLognormal(zeta, rho, s0), oracle, 1e-10);
}

TEST(LogPartition, RejectsNonNegativeRho) {
    EXPECT_THROW(logPartitionLognormal(1.0, 0.0, 100.0), DomainError);
    EXPECT_THROW(logPartitionLognormal(1.0, 0.5, 100.0), DomainError);
}

TEST(LognormalCurve, DensityIsGbmLaw) {
    const MarketParams m;
    const LognormalCurve curve(m);
    EXPECT_NEAR(curve.zeta(), m.mu / (m.sigmaBar * m.sigmaBar) - 1.5, 1e-15);
    for (double t : {0.1, 0.5, 1.0, 3.0}) {
        for (double x : {40.0, 90.0, 100.0, 130.0, 250.0}) {
            const double v = m.sigmaBar * m.sigmaBar * t;
            const double oracle = lognormalPdf(x, m.s0, m.logDrift() * t, v);
            EXPECT_NEAR(curve.density(t, x), oracle, 1e-13 * oracle + 1e-300) << t << " " << x;
            EXPECT_NEAR(density(curve.family(), curve.thetaAt(t), x), oracle, 1e-12 * oracle);
        }
    }
}

TEST(LognormalCurve, ThetaDotIsDerivative) {
    const LognormalCurve curve(MarketParams{});
    for (double t : {0.05, 0.4, 2.0}) {
        const double h = 1e-6 * t;
        const double fd = (curve.rho(t + h) - curve.rho(t - h)) / (2.0 * h);
        EXPECT_NEAR(curve.thetaDot(t)[1], fd, 1e-6 * std::abs(fd));
        EXPECT_EQ(curve.thetaDot(t)[0], 0.0);
    }
    EXPECT_THROW(curve.rho(0.0), DomainError);
}

TEST(ExpFamily, NormalizationIsOne) {
    const LognormalCurve curve(MarketParams{});
    const auto fam = curve.family();
    for (double t : {0.01, 0.5, 5.0}) EXPECT_NEAR(normalization(fam, curve.thetaAt(t)), 1.0, 1e-10);
    const auto g = gaussianFixtureFamily();
    EXPECT_NEAR(normalization(g, Vector{3.0, -0.5}), 1.0, 1e-10);
}

TEST(ExpFamily, MomentsEqualGradLogPartition) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> zeta(-3.0, 3.0), rho(-60.0, -0.5);
    const auto fam = lognormalFamily(100.0);
    const auto gauss = gaussianFixtureFamily();
    for (int i = 0; i < 8; ++i) {
        const Vector th{zeta(rng), rho(rng)};
        for (const auto* f : {&fam, &gauss}) {
            const auto moments = statisticMoments(*f, th);
            const auto grad = f->gradLogPartition(th);
            for (std::size_t k = 0; k < 2; ++k)
                EXPECT_NEAR(moments[k], grad[k], 1e-9 * (1.0 + std::abs(grad[k])));
        }
    }
}

TEST(ExpFamily, GradLogPartitionMatchesFiniteDifference) {
    const auto fam = lognormalFamily(100.0);
    const Vector th{0.7, -12.0};
    const auto grad = fam.gradLogPartition(th);
    for (std::size_t k = 0; k < 2; ++k) {
        Vector up = th, dn = th;
        const double h = 1e-5;
        up[k] += h;
        dn[k] -= h;
        EXPECT_NEAR(grad[k], (fam.logPartition(up) - fam.logPartition(dn)) / (2.0 * h), 1e-7);
    }
}

TEST(ExpFamily, MeanLogPriceIsLinearInTime) {
    const MarketParams m;
    const LognormalCurve curve(m);
    const auto fam = curve.family();
    for (double t : {0.25, 1.0, 2.0}) {
        const double mean = expectation(fam, curve.thetaAt(t), [&](double x) { return std::log(x / m.s0); });
        EXPECT_NEAR(mean, m.logDrift() * t, 1e-11);
    }
}

TEST(ExpFamily, DomainAndSupportErrors) {
    const auto fam = lognormalFamily(100.0);
    EXPECT_THROW(density(fam, Vector{1.0, -1.0}, -2.0), SupportError);
    EXPECT_THROW(density(fam, Vector{1.0, -1.0}, 0.0), SupportError);
    EXPECT_THROW(density(fam, Vector{1.0, 1.0}, 50.0), DomainError);
    EXPECT_THROW(density(fam, Vector{1.0}, 50.0), DomainError);
    EXPECT_THROW(lognormalFamily(0.0), DomainError);
}
