#pragma once

// Path generators: geometric Brownian motion, the grid-mimicking process with
// proportional volatility sampled exactly, and sub-stepped Euler for the other
// tabulated volatility shapes.

#include "gridgbm/drift.hpp"
#include "gridgbm/errors.hpp"
#include "gridgbm/market.hpp"
#include "gridgbm/parallel.hpp"
#include "gridgbm/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gridgbm {

enum class Measure { Objective, RiskNeutral };

inline const char* toString(Measure m) {
    return m == Measure::Objective ? "objective" : "risk-neutral";
}

/// Where the anchored drift restarts in each interval. FixedInitial keeps
/// y = s0 in every interval; it breaks the grid law and serves as a negative control.
enum class AnchorMode { Rolling, FixedInitial };

struct GeneratorInfo {
    enum class Kind { GBM, ExactProportional, Euler } kind = Kind::GBM;
    double nu = 0.0;
    VolKind vol = VolKind::BlackScholes;
    AnchorMode anchor = AnchorMode::Rolling;

    std::string describe() const {
        char buf[128];
        switch (kind) {
            case Kind::GBM: return "gbm";
            case Kind::ExactProportional:
                std::snprintf(buf, sizeof buf, "exact-proportional(nu=%.17g)", nu);
                return buf;
            case Kind::Euler:
                std::snprintf(buf, sizeof buf, "euler(%s, nu=%.17g%s)",
                              std::string(toString(vol)).c_str(), nu,
                              anchor == AnchorMode::FixedInitial ? ", fixed-anchor" : "");
                return buf;
        }
        return "unknown";
    }
};

struct SimOptions {
    std::size_t threads = 1;  // 0 = hardware concurrency
    AnchorMode anchor = AnchorMode::Rolling;
};

/// Simulated trajectories, one row per path, sampled at `times`.
struct PathSet {
    std::vector<double> times;
    std::size_t nPaths = 0;
    std::vector<double> values;  // row-major nPaths x times.size()
    Measure measure = Measure::Objective;
    GeneratorInfo generator;
    std::uint64_t seed = 0;
    MarketParams market;
    GridSpec grid;
    std::size_t invalidPaths = 0;  // excluded after a non-finite Euler step
    std::size_t clampedSteps = 0;  // Euler steps floored at 1e-12 s0
    std::size_t eulerSteps = 0;

    std::size_t sampleCount() const { return times.size(); }

    std::span<const double> path(std::size_t i) const {
        return {values.data() + i * times.size(), times.size()};
    }

    double at(std::size_t path, std::size_t sample) const {
        return values[path * times.size() + sample];
    }

    /// Sample index of grid time i Delta.
    std::size_t gridSample(std::size_t i) const { return i * grid.subSteps; }

    std::vector<double> column(std::size_t sample) const {
        std::vector<double> out(nPaths);
        for (std::size_t p = 0; p < nPaths; ++p) out[p] = at(p, sample);
        return out;
    }

    double clampFraction() const {
        return eulerSteps == 0 ? 0.0 : double(clampedSteps) / double(eulerSteps);
    }

    /// CSV dump: '#' header lines with the configuration, then path_id,t,value rows.
    void writeCsv(std::ostream& os) const {
        char buf[256];
        os << "# generator=" << generator.describe() << " measure=" << toString(measure)
           << " seed=" << seed << "\n";
        std::snprintf(buf, sizeof buf, "# mu=%.17g sigma_bar=%.17g s0=%.17g r=%.17g\n", market.mu,
                      market.sigmaBar, market.s0, market.r);
        os << buf;
        std::snprintf(buf, sizeof buf, "# T=%.17g N=%zu epsilon=%.17g sub_steps=%zu\n", grid.T,
                      grid.N, grid.epsilon, grid.subSteps);
        os << buf;
        os << "# n_paths=" << nPaths << " invalid_paths=" << invalidPaths
           << " clamped_steps=" << clampedSteps << "\n";
        os << "path_id,t,value\n";
        for (std::size_t p = 0; p < nPaths; ++p) {
            for (std::size_t k = 0; k < times.size(); ++k) {
                std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", p, times[k], at(p, k));
                os << buf;
            }
        }
    }
};

namespace detail {

/// Offsets from the interval start at which a path is advanced: every recorded
/// sub-sample plus, when 0 < epsilon, the end of the GBM window.
struct LocalSkeleton {
    std::vector<double> offsets;   // increasing, last = Delta
    std::vector<bool> recorded;    // offset is a stored sample
    std::vector<bool> inWindow;    // step (offsets[k-1], offsets[k]] lies in [0, epsilon]
};

inline LocalSkeleton makeSkeleton(const GridSpec& grid) {
    LocalSkeleton sk;
    const double eps = grid.epsilon;
    bool epsInserted = !(eps > 0.0);
    for (std::size_t r = 1; r <= grid.subSteps; ++r) {
        const double off = grid.localOffset(r);
        if (!epsInserted && eps <= off) {
            if (eps < off) {
                sk.offsets.push_back(eps);
                sk.recorded.push_back(false);
            }
            epsInserted = true;
        }
        sk.offsets.push_back(off);
        sk.recorded.push_back(true);
    }
    double prev = 0.0;
    for (double off : sk.offsets) {
        sk.inWindow.push_back(eps > 0.0 && off <= eps && prev < eps);
        prev = off;
    }
    return sk;
}

inline PathSet emptyPathSet(const MarketParams& market, const GridSpec& grid, std::size_t nPaths,
                            std::uint64_t seed, Measure measure, GeneratorInfo gen) {
    PathSet ps;
    ps.times.resize(grid.sampleCount());
    for (std::size_t k = 0; k < ps.times.size(); ++k) ps.times[k] = grid.sampleTime(k);
    ps.nPaths = nPaths;
    ps.values.assign(nPaths * ps.times.size(), 0.0);
    ps.measure = measure;
    ps.generator = gen;
    ps.seed = seed;
    ps.market = market;
    ps.grid = grid;
    return ps;
}

inline void validateRun(const MarketParams& market, const GridSpec& grid, std::size_t nPaths) {
    market.validate();
    grid.validate();
    if (nPaths == 0) throw InputError("nPaths must be >= 1");
}

/// (b^{1-beta} - a^{1-beta}) / (1 - beta): variance of int_a^b u^{-beta/2} dW_u.
inline double kernelVariance(double oneMinusBeta, double a, double b) {
    return (std::pow(b, oneMinusBeta) - std::pow(a, oneMinusBeta)) / oneMinusBeta;
}

}  // namespace detail

/// Kernel of the exact proportional scheme: beta = 1 - nu^2/sigmaBar^2 and the
/// closed-form variance of int u^{-beta/2} dW over [s', t'].
struct LogBridgeKernel {
    double beta;

    LogBridgeKernel(double nu, double sigmaBar) : beta(1.0 - (nu * nu) / (sigmaBar * sigmaBar)) {
        if (!(nu > 0.0) || !(sigmaBar > 0.0)) throw DomainError("kernel needs nu, sigmaBar > 0");
    }

    double varIncrement(double from, double to) const {
        if (!(from >= 0.0) || !(to > from)) throw DomainError("varIncrement needs 0 <= s' < t'");
        return detail::kernelVariance(1.0 - beta, from, to);
    }
};

/// Exact lognormal sampling of dS = m S dt + sigmaBar S dW, m = mu (objective) or r.
inline PathSet simulateGBM(const MarketParams& market, const GridSpec& grid, std::size_t nPaths,
                           std::uint64_t seed, Measure measure = Measure::Objective,
                           const SimOptions& opts = {}) {
    detail::validateRun(market, grid, nPaths);
    PathSet ps = detail::emptyPathSet(market, grid, nPaths, seed, measure, {});
    const auto sk = detail::makeSkeleton(grid);
    const double sigma = market.sigmaBar;
    const double m = (measure == Measure::Objective ? market.mu : market.r) - 0.5 * sigma * sigma;
    const std::size_t width = ps.times.size();

    parallelFor(nPaths, opts.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            PathRng rng(seed, p);
            double* row = ps.values.data() + p * width;
            row[0] = market.s0;
            double zStart = std::log(market.s0);
            std::size_t k = 1;
            for (std::size_t j = 0; j < grid.N; ++j) {
                double brownian = 0.0, prev = 0.0, z = zStart;
                for (std::size_t q = 0; q < sk.offsets.size(); ++q) {
                    const double s = sk.offsets[q];
                    brownian += std::sqrt(s - prev) * rng.normal();
                    z = zStart + m * s + sigma * brownian;
                    if (sk.recorded[q]) row[k++] = std::exp(z);
                    prev = s;
                }
                zStart = z;
            }
        }
    });
    return ps;
}

/// Exact sampling of the proportional-volatility mimicking process. Within
/// [j Delta, (j+1) Delta), with local time s = t - j Delta and
/// beta = 1 - nu^2 / sigmaBar^2:
///
///   ln Y_t = ln Y_{j Delta} + (mu - sigmaBar^2/2) s + sigmaBar B_s                                  s < eps
///   ln Y_t = ln Y_{j Delta} + (mu - sigmaBar^2/2) s + (s/eps)^{beta/2} sigmaBar B_eps + s^{beta/2} nu M_s   s >= eps
///
/// where M_s = int_eps^s u^{-beta/2} dW_u is sampled from its exact Gaussian
/// increments. eps = 0 gives the limit process with M_s = int_0^s u^{-beta/2} dW_u.
inline PathSet simulateExactProportional(const MarketParams& market, const GridSpec& grid,
                                         double nu, std::size_t nPaths, std::uint64_t seed,
                                         Measure measure = Measure::Objective,
                                         const SimOptions& opts = {}) {
    if (measure == Measure::RiskNeutral)
        throw UnsupportedError(
            "risk-neutral proportional dynamics are lognormal with piecewise volatility; "
            "use riskNeutralDynamics");
    detail::validateRun(market, grid, nPaths);
    const LogBridgeKernel kernel(nu, market.sigmaBar);
    GeneratorInfo gen{GeneratorInfo::Kind::ExactProportional, nu, VolKind::Proportional};
    PathSet ps = detail::emptyPathSet(market, grid, nPaths, seed, measure, gen);
    const auto sk = detail::makeSkeleton(grid);
    const double sigma = market.sigmaBar;
    const double m = market.logDrift();
    const double eps = grid.epsilon;
    const double oneMinusBeta = 1.0 - kernel.beta;
    const double halfBeta = 0.5 * kernel.beta;
    const std::size_t width = ps.times.size();

    parallelFor(nPaths, opts.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            PathRng rng(seed, p);
            double* row = ps.values.data() + p * width;
            row[0] = market.s0;
            double zStart = std::log(market.s0);
            std::size_t k = 1;
            for (std::size_t j = 0; j < grid.N; ++j) {
                double windowBm = 0.0, kernelSum = 0.0, prev = 0.0, z = zStart;
                for (std::size_t q = 0; q < sk.offsets.size(); ++q) {
                    const double s = sk.offsets[q];
                    const double xi = rng.normal();
                    if (sk.inWindow[q]) {
                        windowBm += std::sqrt(s - prev) * xi;
                        z = zStart + m * s + sigma * windowBm;
                    } else {
                        kernelSum += std::sqrt(detail::kernelVariance(oneMinusBeta, prev, s)) * xi;
                        const double windowPart =
                            eps > 0.0 ? std::pow(s / eps, halfBeta) * sigma * windowBm : 0.0;
                        z = zStart + m * s + windowPart + std::pow(s, halfBeta) * nu * kernelSum;
                    }
                    if (sk.recorded[q]) row[k++] = std::exp(z);
                    prev = s;
                }
                zStart = z;
            }
        }
    });
    return ps;
}

namespace detail {

// Shared Euler driver: exact GBM on every eps-window, Euler-Maruyama afterwards.
template <class DriftAt>
PathSet runEuler(const MarketParams& market, const GridSpec& grid, const VolatilitySpec& vol,
                 std::size_t nPaths, std::uint64_t seed, Measure measure, const SimOptions& opts,
                 DriftAt&& driftAt) {
    if (!(grid.epsilon > 0.0))
        throw DomainError("Euler simulation needs epsilon > 0 (drift is singular at t = alpha)");
    const auto sk = makeSkeleton(grid);
    const double sigma = market.sigmaBar;
    const double m = (measure == Measure::Objective ? market.mu : market.r) - 0.5 * sigma * sigma;
    const double floor = 1e-12 * market.s0;
    GeneratorInfo gen{GeneratorInfo::Kind::Euler, vol.nu, vol.kind, opts.anchor};
    PathSet full = emptyPathSet(market, grid, nPaths, seed, measure, gen);
    const std::size_t width = full.times.size();
    std::vector<char> valid(nPaths, 1);
    std::atomic<std::size_t> clamped{0};

    parallelFor(nPaths, opts.threads, [&](std::size_t begin, std::size_t end) {
        std::size_t localClamped = 0;
        for (std::size_t p = begin; p < end; ++p) {
            PathRng rng(seed, p);
            double* row = full.values.data() + p * width;
            row[0] = market.s0;
            double x = market.s0;
            std::size_t k = 1;
            for (std::size_t j = 0; j < grid.N && valid[p]; ++j) {
                const double alpha = grid.gridTime(j);
                const double anchor = opts.anchor == AnchorMode::Rolling ? x : market.s0;
                const double zStart = std::log(x);
                double windowBm = 0.0, prev = 0.0;
                for (std::size_t q = 0; q < sk.offsets.size(); ++q) {
                    const double s = sk.offsets[q];
                    const double dt = s - prev;
                    const double xi = rng.normal();
                    if (sk.inWindow[q]) {
                        windowBm += std::sqrt(dt) * xi;
                        x = std::exp(zStart + m * s + sigma * windowBm);
                    } else {
                        const double t = alpha + prev;
                        x += driftAt(t, x, anchor, alpha) * dt + vol.sigma(t, x) * std::sqrt(dt) * xi;
                        if (!std::isfinite(x)) {
                            valid[p] = 0;
                            break;
                        }
                        if (x < floor) {
                            x = floor;
                            ++localClamped;
                        }
                    }
                    if (sk.recorded[q]) row[k++] = x;
                    prev = s;
                }
            }
        }
        clamped += localClamped;
    });

    std::size_t stepsPerInterval = 0;
    for (std::size_t q = 0; q < sk.offsets.size(); ++q) stepsPerInterval += sk.inWindow[q] ? 0 : 1;

    std::vector<double> compact;
    compact.reserve(full.values.size());
    std::size_t kept = 0;
    for (std::size_t p = 0; p < nPaths; ++p) {
        if (!valid[p]) continue;
        auto row = full.path(p);
        compact.insert(compact.end(), row.begin(), row.end());
        ++kept;
    }
    full.values = std::move(compact);
    full.nPaths = kept;
    full.invalidPaths = nPaths - kept;
    full.clampedSteps = clamped.load();
    full.eulerSteps = nPaths * grid.N * stepsPerInterval;
    return full;
}

}  // namespace detail

/// The grid-mimicking process for a tabulated volatility: GBM on each
/// [i Delta, i Delta + eps), Euler-Maruyama with the anchored closed-form drift
/// on [i Delta + eps, (i+1) Delta). Values below 1e-12 s0 are floored and counted.
inline PathSet simulateEuler(const MarketParams& market, const GridSpec& grid,
                             const VolatilitySpec& volIn, std::size_t nPaths, std::uint64_t seed,
                             const SimOptions& opts = {}) {
    detail::validateRun(market, grid, nPaths);
    const VolatilitySpec vol = volIn.resolvedFor(market);
    vol.validate();
    if (vol.kind == VolKind::NumericCustom)
        throw UnsupportedError("simulateEuler supports the tabulated volatility shapes only");
    const DriftFn drift = closedFormDrift(market, vol);
    return detail::runEuler(market, grid, vol, nPaths, seed, Measure::Objective, opts,
                            [&](double t, double x, double y, double alpha) {
                                return drift(t, x, y, alpha);
                            });
}

/// Dynamics under the martingale measure: drift r Y everywhere, sigmaBar Y on the
/// eps-windows and sigma_t(Y) elsewhere. Proportional volatility is sampled
/// exactly as a lognormal with piecewise-constant volatility.
inline PathSet riskNeutralDynamics(const MarketParams& market, const GridSpec& grid,
                                   const VolatilitySpec& volIn, std::size_t nPaths,
                                   std::uint64_t seed, const SimOptions& opts = {}) {
    detail::validateRun(market, grid, nPaths);
    const VolatilitySpec vol = volIn.resolvedFor(market);
    vol.validate();
    if (vol.kind == VolKind::Proportional || vol.kind == VolKind::BlackScholes) {
        GeneratorInfo gen{GeneratorInfo::Kind::ExactProportional, vol.nu, vol.kind};
        PathSet ps = detail::emptyPathSet(market, grid, nPaths, seed, Measure::RiskNeutral, gen);
        const auto sk = detail::makeSkeleton(grid);
        const double r = market.r;
        const std::size_t width = ps.times.size();
        parallelFor(nPaths, opts.threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t p = begin; p < end; ++p) {
                PathRng rng(seed, p);
                double* row = ps.values.data() + p * width;
                row[0] = market.s0;
                double z = std::log(market.s0);
                std::size_t k = 1;
                for (std::size_t j = 0; j < grid.N; ++j) {
                    double prev = 0.0;
                    for (std::size_t q = 0; q < sk.offsets.size(); ++q) {
                        const double s = sk.offsets[q];
                        const double dt = s - prev;
                        const double v = sk.inWindow[q] ? market.sigmaBar : vol.nu;
                        z += (r - 0.5 * v * v) * dt + v * std::sqrt(dt) * rng.normal();
                        if (sk.recorded[q]) row[k++] = std::exp(z);
                        prev = s;
                    }
                }
            }
        });
        return ps;
    }
    if (vol.kind == VolKind::NumericCustom)
        throw UnsupportedError("riskNeutralDynamics supports the tabulated volatility shapes only");
    const double r = market.r;
    return detail::runEuler(market, grid, vol, nPaths, seed, Measure::RiskNeutral, opts,
                            [r](double, double x, double, double) { return r * x; });
}

}  // namespace gridgbm
