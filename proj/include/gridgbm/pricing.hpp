#pragma once

// European call prices for the proportional-volatility family: a Black-Scholes
// formula evaluated at the effective volatility sigma^eps(t).

#include "gridgbm/errors.hpp"
#include "gridgbm/market.hpp"
#include "gridgbm/normal.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace gridgbm {

/// Black-Scholes call price. tau = 0 returns the intrinsic value.
inline double bsPrice(double spot, double strike, double r, double vol, double tau) {
    if (!(spot > 0.0)) throw DomainError("bsPrice: spot must be positive");
    if (!(strike >= 0.0)) throw DomainError("bsPrice: strike must be non-negative");
    if (!(tau >= 0.0)) throw DomainError("bsPrice: tau must be non-negative");
    const double discount = std::exp(-r * tau);
    if (tau == 0.0) return std::max(spot - strike, 0.0);
    if (strike == 0.0) return spot;
    if (!(vol > 0.0)) throw DomainError("bsPrice: vol must be positive");
    const double sd = vol * std::sqrt(tau);
    const double d1 = (std::log(spot / strike) + (r + 0.5 * vol * vol) * tau) / sd;
    const double d2 = d1 - sd;
    return spot * normalCdf(d1) - strike * discount * normalCdf(d2);
}

/// d1 of the Black-Scholes formula; +/-inf at the degenerate ends.
inline double bsD1(double spot, double strike, double r, double vol, double tau) {
    if (strike == 0.0) return INFINITY;
    const double sd = vol * std::sqrt(tau);
    return (std::log(spot / strike) + (r + 0.5 * vol * vol) * tau) / sd;
}

enum class VolBranch { Window, PostWindow };

inline const char* toString(VolBranch b) { return b == VolBranch::Window ? "window" : "post-window"; }

struct EffectiveVol {
    double value;
    VolBranch branch;
};

/// sigma^eps(t): constant volatility that reproduces the risk-neutral variance of
/// ln(Y_T / Y_t) when the diffusion is sigmaBar on eps-windows and nu elsewhere.
inline EffectiveVol effectiveVol(const MarketParams& market, const GridSpec& grid, double nu,
                                 double t) {
    market.validate();
    grid.validate();
    if (!(nu > 0.0)) throw DomainError("effectiveVol: nu must be positive");
    if (!(t >= 0.0) || !(t < grid.T)) throw DomainError("effectiveVol: need 0 <= t < T");
    const double T = grid.T;
    const double delta = grid.delta();
    const double frac = grid.epsilon / delta;
    const double s2 = market.sigmaBar * market.sigmaBar;
    const double n2 = nu * nu;
    const double alpha = grid.alpha(t);
    double variance = 0.0;  // sigma^eps(t)^2 (T - t)
    VolBranch branch;
    if (t < alpha + grid.epsilon) {
        branch = VolBranch::Window;
        variance = frac * (s2 - n2) * (T - alpha) + n2 * (T - alpha) + s2 * (alpha - t);
    } else {
        branch = VolBranch::PostWindow;
        variance = frac * (s2 - n2) * (T - alpha - delta) + n2 * (T - t);
    }
    return {std::sqrt(variance / (T - t)), branch};
}

struct PriceBounds {
    double lower;  // (spot - K e^{-r tau})^+
    double upper;  // spot
};

/// No-arbitrage bounds of a call at time 0, attained in the limit of the family.
inline PriceBounds priceBounds(const MarketParams& market, const OptionSpec& option) {
    market.validate();
    option.validate();
    const double lower = std::max(market.s0 - option.strike * std::exp(-market.r * option.maturity), 0.0);
    return {lower, market.s0};
}

struct PriceQuote {
    double nu;
    double epsilonOverDelta;
    double t;
    double value;
    double effectiveVol;
    VolBranch branch;
    PriceBounds bounds;
};

/// No-arbitrage call price U^eps(t, nu) given Y_t = spot.
inline PriceQuote priceU(const MarketParams& market, const GridSpec& grid, double nu, double t,
                         double spot, const OptionSpec& option) {
    option.validate();
    if (std::abs(option.maturity - grid.T) > 1e-12 * grid.T)
        throw DomainError("priceU: option maturity must equal the grid horizon T");
    if (!(spot > 0.0)) throw DomainError("priceU: spot must be positive");
    const EffectiveVol ev = effectiveVol(market, grid, nu, t);
    const double tau = grid.T - t;
    double value = bsPrice(spot, option.strike, market.r, ev.value, tau);
    const PriceBounds bounds{std::max(spot - option.strike * std::exp(-market.r * tau), 0.0), spot};
    const double slack = 1e-12 * spot;
    if (value < bounds.lower - slack || value > bounds.upper + slack)
        throw NumericError("priceU: price escaped the no-arbitrage bounds", value);
    value = std::clamp(value, bounds.lower, bounds.upper);
    return {nu, grid.epsilonOverDelta(), t, value, ev.value, ev.branch, bounds};
}

/// nu with U^eps(0, nu) = target, by geometric bracketing and bisection in ln nu.
/// For eps > 0 the smallest attainable price is the limit nu -> 0, which sits
/// strictly above the lower bound; targets below it raise BoundsError.
inline double invertNuForPrice(const MarketParams& market, const GridSpec& grid,
                               const OptionSpec& option, double target) {
    const PriceBounds b = priceBounds(market, option);
    if (!(target > b.lower) || !(target < b.upper)) {
        throw BoundsError("target price " + std::to_string(target) + " outside (" +
                              std::to_string(b.lower) + ", " + std::to_string(b.upper) + ")",
                          b.lower, b.upper);
    }
    auto price = [&](double nu) { return priceU(market, grid, nu, 0.0, market.s0, option).value; };
    double lo = 1e-6, hi = 5.0;
    while (price(lo) > target) {
        lo *= 0.1;
        if (lo < 1e-300)
            throw BoundsError("target price is below what this epsilon can reach; reduce epsilon",
                              price(1e-300), b.upper);
    }
    while (price(hi) < target) {
        hi *= 2.0;
        if (hi > 1e12) throw BoundsError("target price too close to the upper bound", b.lower, b.upper);
    }
    const double tol = 1e-10 * market.s0;
    double logLo = std::log(lo), logHi = std::log(hi);
    double mid = 0.5 * (logLo + logHi);
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (logLo + logHi);
        const double diff = price(std::exp(mid)) - target;
        if (std::abs(diff) < tol) break;
        if (diff < 0.0)
            logLo = mid;
        else
            logHi = mid;
    }
    return std::exp(mid);
}

}  // namespace gridgbm
