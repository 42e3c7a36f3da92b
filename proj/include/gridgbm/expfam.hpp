#pragma once

// Exponential families p(x, theta) = exp[theta' c(x) - psi(theta)] and the
// lognormal curve traced by geometric Brownian motion.

#include "gridgbm/errors.hpp"
#include "gridgbm/market.hpp"
#include "gridgbm/quadrature.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gridgbm {

using Vector = std::vector<double>;
using ScalarFn = std::function<double(double)>;

/// Open interval (lower, upper) of the real line.
struct Support {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();

    bool contains(double x) const { return x > lower && x < upper; }
};

/// Variable in which densities are integrated. Log maps (0, inf) onto R via
/// x = anchor * exp(y), which makes lognormal-type integrands Gaussian.
struct IntegrationCoordinate {
    enum class Kind { Linear, Log } kind = Kind::Linear;
    double anchor = 1.0;

    double toSupport(double y) const { return kind == Kind::Log ? anchor * std::exp(y) : y; }
    double fromSupport(double x) const { return kind == Kind::Log ? std::log(x / anchor) : x; }
    /// dx/dy at y.
    double jacobian(double y) const { return kind == Kind::Log ? anchor * std::exp(y) : 1.0; }
};

struct ExpFamily {
    std::string name;
    std::vector<ScalarFn> statistics;            // c_i(x)
    std::vector<ScalarFn> statisticDerivatives;  // dc_i/dx
    Support support;
    std::function<double(std::span<const double>)> logPartition;
    std::function<Vector(std::span<const double>)> gradLogPartition;
    std::function<bool(std::span<const double>)> paramDomain;
    IntegrationCoordinate coordinate;
    /// Rough (center, scale) of the density in the integration coordinate.
    std::function<std::pair<double, double>(std::span<const double>)> locate;

    std::size_t dimension() const { return statistics.size(); }

    void requireAdmissible(std::span<const double> theta) const {
        if (theta.size() != dimension())
            throw DomainError(name + ": parameter has wrong dimension");
        if (!paramDomain(theta)) throw DomainError(name + ": parameter outside the family domain");
    }

    std::pair<double, double> location(std::span<const double> theta) const {
        if (locate) return locate(theta);
        return {0.0, 1.0};
    }
};

/// theta' c(x)
inline double naturalPairing(const ExpFamily& fam, std::span<const double> theta, double x) {
    double s = 0.0;
    for (std::size_t i = 0; i < fam.dimension(); ++i) s += theta[i] * fam.statistics[i](x);
    return s;
}

inline double logDensity(const ExpFamily& fam, std::span<const double> theta, double x) {
    fam.requireAdmissible(theta);
    if (!fam.support.contains(x)) throw SupportError(fam.name + ": point outside support");
    return naturalPairing(fam, theta, x) - fam.logPartition(theta);
}

inline double density(const ExpFamily& fam, std::span<const double> theta, double x) {
    return std::exp(logDensity(fam, theta, x));
}

/// Integral of g(x) p(x, theta) over the support.
template <class G>
double expectation(const ExpFamily& fam, std::span<const double> theta, G&& g,
                   const quad::Options& opts = {}) {
    fam.requireAdmissible(theta);
    const double psi = fam.logPartition(theta);
    const auto [center, scale] = fam.location(theta);
    auto integrand = [&](double y) {
        const double x = fam.coordinate.toSupport(y);
        if (!fam.support.contains(x)) return 0.0;
        return g(x) * std::exp(naturalPairing(fam, theta, x) - psi) * fam.coordinate.jacobian(y);
    };
    return quad::integrateReal(integrand, center, scale, opts).value;
}

/// Integral of p(x, theta); equals 1 for an admissible theta with the right psi.
inline double normalization(const ExpFamily& fam, std::span<const double> theta) {
    return expectation(fam, theta, [](double) { return 1.0; });
}

/// E[c(X)] by quadrature; the exponential-family identity says this is grad psi.
inline Vector statisticMoments(const ExpFamily& fam, std::span<const double> theta) {
    Vector out(fam.dimension());
    quad::Options opts;
    opts.massRelTol = 1e-12;
    for (std::size_t i = 0; i < fam.dimension(); ++i)
        out[i] = expectation(fam, theta, fam.statistics[i], opts);
    return out;
}

/// psi of the lognormal family with statistics ln(x/s0), ln^2(x/s0).
inline double logPartitionLognormal(double zeta, double rho, double s0) {
    if (!(rho < 0.0)) throw DomainError("lognormal family requires rho < 0");
    if (!(s0 > 0.0)) throw DomainError("lognormal family requires s0 > 0");
    return -(zeta + 1.0) * (zeta + 1.0) / (4.0 * rho) + 0.5 * std::log(-std::numbers::pi / rho) +
           std::log(s0);
}

/// Lognormal exponential family anchored at s0, natural parameter (zeta, rho).
inline ExpFamily lognormalFamily(double s0) {
    if (!(s0 > 0.0)) throw DomainError("lognormal family requires s0 > 0");
    ExpFamily fam;
    fam.name = "lognormal";
    fam.statistics = {[s0](double x) { return std::log(x / s0); },
                      [s0](double x) {
                          const double y = std::log(x / s0);
                          return y * y;
                      }};
    fam.statisticDerivatives = {[](double x) { return 1.0 / x; },
                                [s0](double x) { return 2.0 * std::log(x / s0) / x; }};
    fam.support = {0.0, std::numeric_limits<double>::infinity()};
    fam.logPartition = [s0](std::span<const double> th) {
        return logPartitionLognormal(th[0], th[1], s0);
    };
    fam.gradLogPartition = [](std::span<const double> th) {
        const double z1 = th[0] + 1.0;
        const double rho = th[1];
        return Vector{-z1 / (2.0 * rho), z1 * z1 / (4.0 * rho * rho) - 1.0 / (2.0 * rho)};
    };
    fam.paramDomain = [](std::span<const double> th) {
        return th.size() == 2 && std::isfinite(th[0]) && th[1] < 0.0;
    };
    fam.coordinate = {IntegrationCoordinate::Kind::Log, s0};
    // In y = ln(x/s0) the density is N(-(zeta+1)/(2 rho), -1/(2 rho)).
    fam.locate = [](std::span<const double> th) {
        return std::pair{-(th[0] + 1.0) / (2.0 * th[1]), std::sqrt(-0.5 / th[1])};
    };
    return fam;
}

/// Gaussian family with statistics (x, x^2) on R; exercises the generic code paths.
inline ExpFamily gaussianFixtureFamily() {
    ExpFamily fam;
    fam.name = "gaussian";
    fam.statistics = {[](double x) { return x; }, [](double x) { return x * x; }};
    fam.statisticDerivatives = {[](double) { return 1.0; }, [](double x) { return 2.0 * x; }};
    fam.logPartition = [](std::span<const double> th) {
        if (!(th[1] < 0.0)) throw DomainError("gaussian family requires theta2 < 0");
        return -th[0] * th[0] / (4.0 * th[1]) + 0.5 * std::log(-std::numbers::pi / th[1]);
    };
    fam.gradLogPartition = [](std::span<const double> th) {
        return Vector{-th[0] / (2.0 * th[1]),
                      th[0] * th[0] / (4.0 * th[1] * th[1]) - 1.0 / (2.0 * th[1])};
    };
    fam.paramDomain = [](std::span<const double> th) {
        return th.size() == 2 && std::isfinite(th[0]) && th[1] < 0.0;
    };
    fam.locate = [](std::span<const double> th) {
        return std::pair{-th[0] / (2.0 * th[1]), std::sqrt(-0.5 / th[1])};
    };
    return fam;
}

/// C^1 curve t -> theta_t in a family's parameter space.
struct ParameterCurve {
    std::function<Vector(double)> theta;
    std::function<Vector(double)> thetaDot;
};

/// The curve theta_t = (zeta, rho(t)) followed by the law of S_t for the
/// Black-Scholes market, zeta = mu/sigma^2 - 3/2, rho(t) = -1/(2 sigma^2 t).
class LognormalCurve {
public:
    explicit LognormalCurve(const MarketParams& market)
        : zeta_(market.mu / (market.sigmaBar * market.sigmaBar) - 1.5),
          variance_(market.sigmaBar * market.sigmaBar),
          s0_(market.s0) {
        market.validate();
    }

    double zeta() const { return zeta_; }
    double s0() const { return s0_; }

    double rho(double t) const {
        if (!(t > 0.0)) throw DomainError("rho(t) needs t > 0");
        return -1.0 / (2.0 * variance_ * t);
    }

    double rhoDot(double t) const {
        if (!(t > 0.0)) throw DomainError("rho(t) needs t > 0");
        return 1.0 / (2.0 * variance_ * t * t);
    }

    Vector thetaAt(double t) const { return {zeta_, rho(t)}; }
    Vector thetaDot(double t) const { return {0.0, rhoDot(t)}; }

    double logPartition(double t) const { return logPartitionLognormal(zeta_, rho(t), s0_); }

    ExpFamily family() const { return lognormalFamily(s0_); }

    ParameterCurve curve() const {
        return {[*this](double t) { return thetaAt(t); }, [*this](double t) { return thetaDot(t); }};
    }

    /// Density of S_t in closed exponential form, evaluated in log space.
    double density(double t, double x) const {
        if (!(x > 0.0)) throw SupportError("lognormal density needs x > 0");
        const double y = std::log(x / s0_);
        return std::exp(zeta_ * y + rho(t) * y * y - logPartition(t));
    }

private:
    double zeta_;
    double variance_;
    double s0_;
};

}  // namespace gridgbm
