#pragma once

// Value types shared by every module: the Black-Scholes market, the trading
// grid, the option and the diffusion-coefficient choice.

#include "gridgbm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace gridgbm {

struct MarketParams {
    double mu = 0.1;        // objective drift rate
    double sigmaBar = 0.2;  // Black-Scholes volatility
    double s0 = 100.0;      // initial price
    double r = 0.05;        // money-market rate

    void validate() const {
        if (!(sigmaBar > 0.0)) throw DomainError("sigmaBar must be positive");
        if (!(s0 > 0.0)) throw DomainError("s0 must be positive");
        if (!(r >= 0.0)) throw DomainError("r must be non-negative");
        if (!std::isfinite(mu)) throw DomainError("mu must be finite");
    }

    /// Drift of ln S per unit time under the objective measure.
    double logDrift() const { return mu - 0.5 * sigmaBar * sigmaBar; }
};

/// Trading grid {0, Delta, ..., N Delta} with the GBM window [i Delta, i Delta + epsilon)
/// at the start of each interval. epsilon = 0 selects the limit dynamics.
struct GridSpec {
    double T = 1.0;
    std::size_t N = 12;
    double epsilon = 0.0;
    std::size_t subSteps = 1;

    double delta() const { return T / static_cast<double>(N); }
    double epsilonOverDelta() const { return epsilon / delta(); }

    void validate() const {
        if (!(T > 0.0)) throw DomainError("grid horizon T must be positive");
        if (N == 0) throw DomainError("grid needs N >= 1 intervals");
        if (subSteps == 0) throw DomainError("subSteps must be >= 1");
        if (!(epsilon >= 0.0) || !(epsilon < delta()))
            throw DomainError("epsilon must lie in [0, Delta)");
    }

    /// i * T / N, computed so that grid times are reproduced exactly.
    double gridTime(std::size_t i) const {
        return static_cast<double>(i) * T / static_cast<double>(N);
    }

    /// Index j of the interval [j Delta, (j+1) Delta) containing t, clamped to [0, N-1].
    std::size_t intervalIndex(double t) const {
        if (t <= 0.0) return 0;
        auto j = static_cast<std::size_t>(std::floor(t / delta()));
        if (j >= N) j = N - 1;
        // Undo floor() round-off on either side of a grid point.
        if (j + 1 < N && t >= gridTime(j + 1)) ++j;
        if (j > 0 && t < gridTime(j)) --j;
        return j;
    }

    /// alpha(t): start of the grid interval containing t.
    double alpha(double t) const { return gridTime(intervalIndex(t)); }

    /// Number of recorded sample times per path.
    std::size_t sampleCount() const { return N * subSteps + 1; }

    /// Recorded sample time k; exact grid time when k is a multiple of subSteps.
    double sampleTime(std::size_t k) const {
        const std::size_t i = k / subSteps;
        const std::size_t rem = k % subSteps;
        if (rem == 0) return gridTime(i);
        return gridTime(i) + localOffset(rem);
    }

    /// Offset from the interval start of sub-sample rem in [0, subSteps].
    double localOffset(std::size_t rem) const {
        return static_cast<double>(rem) * delta() / static_cast<double>(subSteps);
    }
};

struct OptionSpec {
    double strike = 100.0;
    double maturity = 1.0;

    void validate() const {
        if (!(strike >= 0.0)) throw DomainError("strike must be non-negative");
        if (!(maturity > 0.0)) throw DomainError("maturity must be positive");
    }

    double payoff(double spot) const { return spot > strike ? spot - strike : 0.0; }
};

enum class VolKind { Constant, SqrtProportional, Proportional, BlackScholes, NumericCustom };

inline std::string_view toString(VolKind kind) {
    switch (kind) {
        case VolKind::Constant: return "constant";
        case VolKind::SqrtProportional: return "sqrt-proportional";
        case VolKind::Proportional: return "proportional";
        case VolKind::BlackScholes: return "black-scholes";
        case VolKind::NumericCustom: return "custom";
    }
    return "unknown";
}

inline std::optional<VolKind> parseVolKind(std::string_view s) {
    for (auto k : {VolKind::Constant, VolKind::SqrtProportional, VolKind::Proportional,
                   VolKind::BlackScholes, VolKind::NumericCustom}) {
        if (toString(k) == s) return k;
    }
    return std::nullopt;
}

/// Diffusion coefficient sigma_t(x) of the alternative stock dynamics.
struct VolatilitySpec {
    VolKind kind = VolKind::BlackScholes;
    double nu = 0.2;
    std::function<double(double, double)> customSigma;  // (t, x) -> sigma, NumericCustom only

    static VolatilitySpec constant(double nu) { return {VolKind::Constant, nu, {}}; }
    static VolatilitySpec sqrtProportional(double nu) { return {VolKind::SqrtProportional, nu, {}}; }
    static VolatilitySpec proportional(double nu) { return {VolKind::Proportional, nu, {}}; }
    static VolatilitySpec blackScholes(double sigmaBar) { return {VolKind::BlackScholes, sigmaBar, {}}; }
    static VolatilitySpec custom(std::function<double(double, double)> sigma) {
        return {VolKind::NumericCustom, 1.0, std::move(sigma)};
    }

    /// BlackScholes always runs with nu = sigmaBar of the market.
    VolatilitySpec resolvedFor(const MarketParams& market) const {
        VolatilitySpec out = *this;
        if (kind == VolKind::BlackScholes) out.nu = market.sigmaBar;
        return out;
    }

    void validate() const {
        if (!(nu > 0.0)) throw DomainError("volatility coefficient nu must be positive");
        if (kind == VolKind::NumericCustom && !customSigma)
            throw DomainError("custom volatility needs a sigma function");
    }

    double sigma(double t, double x) const {
        switch (kind) {
            case VolKind::Constant: return nu;
            case VolKind::SqrtProportional: return nu * std::sqrt(x);
            case VolKind::Proportional:
            case VolKind::BlackScholes: return nu * x;
            case VolKind::NumericCustom: return customSigma(t, x);
        }
        return nu;
    }

    /// a_t(x) = sigma_t(x)^2
    double diffusion(double t, double x) const {
        const double s = sigma(t, x);
        return s * s;
    }

    /// d a_t / dx; central difference for custom coefficients.
    double diffusionSlope(double t, double x) const {
        switch (kind) {
            case VolKind::Constant: return 0.0;
            case VolKind::SqrtProportional: return nu * nu;
            case VolKind::Proportional:
            case VolKind::BlackScholes: return 2.0 * nu * nu * x;
            case VolKind::NumericCustom: {
                const double h = 1e-5 * std::max(1.0, std::abs(x));
                return (diffusion(t, x + h) - diffusion(t, x - h)) / (2.0 * h);
            }
        }
        return 0.0;
    }
};

}  // namespace gridgbm
