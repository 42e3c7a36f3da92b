#include "gridgbm/drift.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace gridgbm;

namespace {

// Gaussian curve N(m t, t): Brownian motion with drift m.
ParameterCurve brownianCurve(double m) {
    return {[m](double t) { return Vector{m, -0.5 / t}; },
            [](double t) { return Vector{0.0, 0.5 / (t * t)}; }};
}

}  // namespace

TEST(GenericDrift, BrownianMotionWithDrift) {
    const auto fam = gaussianFixtureFamily();
    const auto unit = VolatilitySpec::constant(1.0);
    for (double m : {0.0, 0.7, -1.3}) {
        for (double t : {0.2, 1.0, 4.0}) {
            for (double x : {-3.0, 0.0, 0.5, 6.0}) {
                EXPECT_NEAR(genericDrift(fam, brownianCurve(m), unit, t, x), m, 1e-9)
                    << m << " " << t << " " << x;
            }
        }
    }
}

TEST(GenericDrift, BlackScholesRecoversMuX) {
    const MarketParams m;
    const LognormalCurve curve(m);
    const auto vol = VolatilitySpec::blackScholes(m.sigmaBar);
    for (double t : {0.05, 0.5, 1.0})
        for (double x : {30.0, 100.0, 300.0})
            EXPECT_NEAR(genericDrift(curve.family(), curve.curve(), vol, t, x), m.mu * x, 1e-9 * x);
}

TEST(ClosedFormDrift, AgreesWithQuadratureForAllRows) {
    const MarketParams m;
    const VolatilitySpec rows[] = {VolatilitySpec::constant(15.0), VolatilitySpec::sqrtProportional(1.5),
                                   VolatilitySpec::proportional(0.35), VolatilitySpec::blackScholes(0.2)};
    const auto unanchored = driftCheckGrid(0.05, 1.0, 5, 50.0, 200.0, 5, 100.0, 0.0);
    const auto anchored = driftCheckGrid(0.01, 0.08, 4, 80.0, 140.0, 4, 110.0, 0.25);
    for (const auto& v : rows) {
        EXPECT_LT(driftConsistencyReport(m, v, unanchored).maxDiscrepancy, 1e-8);
        EXPECT_LT(driftConsistencyReport(m, v, anchored).maxDiscrepancy, 1e-8);
    }
}

TEST(ClosedFormDrift, ProportionalAtSigmaBarIsBlackScholes) {
    const MarketParams m;
    const auto prop = closedFormDrift(m, VolatilitySpec::proportional(m.sigmaBar));
    for (double x : {50.0, 100.0, 170.0}) EXPECT_NEAR(prop(0.3, x, 100.0, 0.0), m.mu * x, 1e-12 * x);
}

TEST(ClosedFormDrift, AnchorShiftIsTimeTranslation) {
    const MarketParams m;
    const auto u = closedFormDrift(m, VolatilitySpec::sqrtProportional(1.0));
    EXPECT_DOUBLE_EQ(u(0.75, 120.0, 90.0, 0.5), u(0.25, 120.0, 90.0, 0.0));
}

TEST(ClosedFormDrift, Errors) {
    const MarketParams m;
    const auto u = closedFormDrift(m, VolatilitySpec::constant(10.0));
    EXPECT_THROW(u(0.5, 100.0, 100.0, 0.5), DomainError);
    EXPECT_THROW(u(0.4, 100.0, 100.0, 0.5), DomainError);
    EXPECT_THROW(closedFormDrift(m, VolatilitySpec::custom([](double, double) { return 1.0; })),
                 UnsupportedError);
    EXPECT_THROW(closedFormDrift(m, VolatilitySpec::proportional(-0.1)), DomainError);
}

TEST(DriftReport, CsvHasHeaderAndRows) {
    const MarketParams m;
    const auto pts = driftCheckGrid(0.1, 1.0, 2, 80.0, 120.0, 3, 100.0, 0.0);
    const auto rep = driftConsistencyReport(m, VolatilitySpec::proportional(0.3), pts);
    std::ostringstream os;
    rep.writeCsv(os);
    const std::string s = os.str();
    EXPECT_EQ(s.rfind("t,x,y,alpha,closed_form,generic,rel_err\n", 0), 0u);
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 7);
}
