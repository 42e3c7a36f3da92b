#pragma once

// Drifts that make a diffusion with a prescribed coefficient sigma_t(x) keep its
// marginal density on a given exponential-family curve.

#include "gridgbm/errors.hpp"
#include "gridgbm/expfam.hpp"
#include "gridgbm/market.hpp"
#include "gridgbm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace gridgbm {

/// Generic drift for density curve theta_t of `fam` and diffusion `vol`:
///
///   u_t(x) = a'(x)/2 + a(x) theta_t' c'(x) / 2
///            - thetaDot_t' * int_{lower}^{x} (c(xi) - grad psi(theta_t)) exp[theta_t'(c(xi) - c(x))] dxi
///
/// The integral is taken in the family's integration coordinate; components
/// with zero thetaDot are skipped. Because (c - grad psi) p integrates to zero
/// over the support, points right of the density center use minus the upper
/// tail integral, which avoids cancellation between exponentially large terms.
inline double genericDrift(const ExpFamily& fam, const ParameterCurve& curve,
                           const VolatilitySpec& vol, double t, double x) {
    if (!(t > 0.0)) throw DomainError("genericDrift needs t > 0");
    if (!fam.support.contains(x)) throw SupportError(fam.name + ": drift point outside support");
    const Vector theta = curve.theta(t);
    const Vector thetaDot = curve.thetaDot(t);
    fam.requireAdmissible(theta);

    const double a = vol.diffusion(t, x);
    const double dadx = vol.diffusionSlope(t, x);
    double slope = 0.0;
    for (std::size_t i = 0; i < fam.dimension(); ++i)
        slope += theta[i] * fam.statisticDerivatives[i](x);

    const Vector grad = fam.gradLogPartition(theta);
    const double pairingAtX = naturalPairing(fam, theta, x);
    const double yx = fam.coordinate.fromSupport(x);
    const double yLower = fam.coordinate.fromSupport(fam.support.lower);
    const double yUpper = fam.coordinate.fromSupport(fam.support.upper);
    const auto [center, scale] = fam.location(theta);
    const bool useUpperTail = yx > center;

    quad::Options opts;
    opts.relTol = 1e-11;
    opts.massRelTol = 1e-13;

    double transport = 0.0;
    for (std::size_t i = 0; i < fam.dimension(); ++i) {
        if (thetaDot[i] == 0.0) continue;
        auto integrand = [&](double y) {
            const double xi = fam.coordinate.toSupport(y);
            if (!fam.support.contains(xi)) return 0.0;
            const double exponent = naturalPairing(fam, theta, xi) - pairingAtX;
            return (fam.statistics[i](xi) - grad[i]) * std::exp(exponent) *
                   fam.coordinate.jacobian(y);
        };
        double integral = 0.0;
        try {
            if (useUpperTail) {
                integral = -(std::isfinite(yUpper)
                                 ? quad::integrate(integrand, yx, yUpper, opts).value
                                 : quad::integrateUpperTail(integrand, yx, scale, opts).value);
            } else {
                integral = std::isfinite(yLower)
                               ? quad::integrate(integrand, yLower, yx, opts).value
                               : quad::integrateLowerTail(integrand, yx, scale, opts).value;
            }
        } catch (const NumericError& e) {
            throw NumericError("genericDrift: transport integral failed at t=" +
                                   std::to_string(t) + ", x=" + std::to_string(x),
                               e.residual());
        }
        transport += thetaDot[i] * integral;
    }
    return 0.5 * dadx + 0.5 * a * slope - transport;
}

/// Anchored drift u_t(x, y, alpha): the process restarts its lognormal curve at
/// anchor price y and anchor time alpha. Undefined at t = alpha.
struct DriftFn {
    std::function<double(double, double, double, double)> eval;
    std::string provenance;

    double operator()(double t, double x, double y, double alpha) const {
        return eval(t, x, y, alpha);
    }
};

namespace detail {

inline double elapsedSinceAnchor(double t, double alpha) {
    const double tau = t - alpha;
    if (!(tau > 0.0)) throw DomainError("anchored drift is singular at t <= alpha");
    return tau;
}

}  // namespace detail

/// Closed-form anchored drift for the four tabulated volatility shapes.
inline DriftFn closedFormDrift(const MarketParams& market, const VolatilitySpec& volIn) {
    market.validate();
    const VolatilitySpec vol = volIn.resolvedFor(market);
    vol.validate();
    const double mu = market.mu;
    const double s2 = market.sigmaBar * market.sigmaBar;
    const double zeta = mu / s2 - 1.5;
    const double nu = vol.nu;
    const double nu2 = nu * nu;

    switch (vol.kind) {
        case VolKind::BlackScholes:
            return {[mu](double, double x, double, double) { return mu * x; }, "black-scholes: mu x"};
        case VolKind::Constant:
            return {[=](double t, double x, double y, double alpha) {
                        const double tau = detail::elapsedSinceAnchor(t, alpha);
                        const double rho = -1.0 / (2.0 * s2 * tau);
                        const double logm = std::log(x / y);
                        return 0.5 * (nu2 / x) * (zeta + 2.0 * rho * logm) +
                               x / (2.0 * tau) * (logm - (zeta + 1.0) / (2.0 * rho));
                    },
                    "constant nu"};
        case VolKind::SqrtProportional:
            return {[=](double t, double x, double y, double alpha) {
                        const double tau = detail::elapsedSinceAnchor(t, alpha);
                        const double logm = std::log(x / y);
                        return 0.5 * nu2 * (mu / s2 - 0.5) - nu2 / (2.0 * tau * s2) * logm +
                               0.5 * x * (mu - 0.5 * s2) + x / (2.0 * tau) * logm;
                    },
                    "nu sqrt(x)"};
        case VolKind::Proportional: {
            const double level = 0.25 * (nu2 - s2) + 0.5 * mu * (nu2 / s2 + 1.0);
            const double beta = 1.0 - nu2 / s2;
            return {[=](double t, double x, double y, double alpha) {
                        const double tau = detail::elapsedSinceAnchor(t, alpha);
                        return x * level + x / (2.0 * tau) * beta * std::log(x / y);
                    },
                    "nu x"};
        }
        case VolKind::NumericCustom:
            throw UnsupportedError("custom volatility has no closed-form drift; use genericDrift");
    }
    throw UnsupportedError("unknown volatility kind");
}

/// Quadrature drift for the lognormal curve restarted at (y, alpha), as a DriftFn.
inline DriftFn genericLognormalDrift(const MarketParams& market, const VolatilitySpec& volIn) {
    const VolatilitySpec vol = volIn.resolvedFor(market);
    return {[market, vol](double t, double x, double y, double alpha) {
                MarketParams anchored = market;
                anchored.s0 = y;
                const LognormalCurve curve(anchored);
                const double tau = detail::elapsedSinceAnchor(t, alpha);
                // Time-homogeneous coefficients: shifting the clock by alpha is exact.
                return genericDrift(curve.family(), curve.curve(), vol, tau, x);
            },
            "generic quadrature"};
}

struct DriftCheckPoint {
    double t;
    double x;
    double y;
    double alpha;
};

struct DriftCheckRow {
    DriftCheckPoint point;
    double closedForm;
    double generic;
    double relErr;
};

struct DriftConsistencyReport {
    std::vector<DriftCheckRow> rows;
    double maxDiscrepancy = 0.0;

    void writeCsv(std::ostream& os) const {
        os << "t,x,y,alpha,closed_form,generic,rel_err\n";
        char buf[512];
        for (const auto& r : rows) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.point.t,
                          r.point.x, r.point.y, r.point.alpha, r.closedForm, r.generic, r.relErr);
            os << buf;
        }
    }
};

/// max |closed - generic| / (1 + |closed|) over the supplied points.
inline DriftConsistencyReport driftConsistencyReport(const MarketParams& market,
                                                     const VolatilitySpec& vol,
                                                     std::span<const DriftCheckPoint> points) {
    const DriftFn closed = closedFormDrift(market, vol);
    const DriftFn generic = genericLognormalDrift(market, vol);
    DriftConsistencyReport report;
    report.rows.reserve(points.size());
    for (const auto& p : points) {
        const double c = closed(p.t, p.x, p.y, p.alpha);
        const double g = generic(p.t, p.x, p.y, p.alpha);
        const double err = std::abs(c - g) / (1.0 + std::abs(c));
        report.rows.push_back({p, c, g, err});
        report.maxDiscrepancy = std::max(report.maxDiscrepancy, err);
    }
    return report;
}

/// nT x nX grid: elapsed time t - alpha in [tMin, tMax], x log-spaced in [xMin, xMax].
inline std::vector<DriftCheckPoint> driftCheckGrid(double tMin, double tMax, std::size_t nT,
                                                   double xMin, double xMax, std::size_t nX,
                                                   double y, double alpha) {
    std::vector<DriftCheckPoint> pts;
    pts.reserve(nT * nX);
    for (std::size_t i = 0; i < nT; ++i) {
        const double t = nT == 1 ? tMin : tMin + (tMax - tMin) * double(i) / double(nT - 1);
        for (std::size_t k = 0; k < nX; ++k) {
            const double f = nX == 1 ? 0.0 : double(k) / double(nX - 1);
            const double x = xMin * std::pow(xMax / xMin, f);
            pts.push_back({alpha + t, x, y, alpha});
        }
    }
    return pts;
}

}  // namespace gridgbm
