#pragma once

// Validation harness: Kolmogorov-Smirnov tests, grid-return diagnostics,
// the off-grid covariance fingerprint, Fokker-Planck residuals and the
// constant-volatility counterexample.

#include "gridgbm/drift.hpp"
#include "gridgbm/errors.hpp"
#include "gridgbm/expfam.hpp"
#include "gridgbm/market.hpp"
#include "gridgbm/normal.hpp"
#include "gridgbm/rng.hpp"
#include "gridgbm/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gridgbm {

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

struct KSResult {
    double statistic = 0.0;  // sup |F_n - F|
    double pValue = 1.0;     // asymptotic Kolmogorov
    std::size_t n = 0;
};

/// P(K > lambda) for the Kolmogorov distribution. Two series are used so that
/// both converge fast: the theta-function form below lambda = 1 and the
/// alternating series above it. 100 terms leave an error far below 1e-10.
inline double kolmogorovSurvival(double lambda) {
    if (!(lambda > 0.0)) return 1.0;
    if (lambda < 1.0) {
        if (lambda < 0.04) return 1.0;
        const double pi2 = std::numbers::pi * std::numbers::pi;
        double cdf = 0.0;
        for (int k = 1; k <= 100; ++k) {
            const double m = 2.0 * k - 1.0;
            cdf += std::exp(-m * m * pi2 / (8.0 * lambda * lambda));
        }
        cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-300) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

/// One-sample KS test of `samples` against a continuous CDF.
template <class Cdf>
KSResult ksTest(std::span<const double> samples, Cdf&& cdf) {
    if (samples.empty()) throw InputError("ksTest: empty sample");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max({d, double(i + 1) / n - f, f - double(i) / n});
    }
    return {d, kolmogorovSurvival(std::sqrt(n) * d), sorted.size()};
}

inline KSResult ksTestNormal(std::span<const double> samples, double mean, double variance) {
    if (!(variance > 0.0)) throw InputError("ksTestNormal: variance must be positive");
    const double sd = std::sqrt(variance);
    return ksTest(samples, [&](double x) { return normalCdf((x - mean) / sd); });
}

/// KS test of ln(samples) against Normal(logMean, logVar).
inline KSResult ksTestLognormal(std::span<const double> samples, double logMean, double logVar) {
    if (samples.size() < 100) throw InputError("ksTestLognormal: need at least 100 samples");
    std::vector<double> logs(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!(samples[i] > 0.0)) throw InputError("ksTestLognormal: non-positive sample");
        logs[i] = std::log(samples[i]);
    }
    return ksTestNormal(logs, logMean, logVar);
}

/// Two-sample KS test with the asymptotic p-value at effective size nm/(n+m).
inline KSResult ksTwoSample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw InputError("ksTwoSample: empty sample");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double n = double(x.size()), m = double(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= v) ++i;
        while (j < y.size() && y[j] <= v) ++j;
        d = std::max(d, std::abs(double(i) / n - double(j) / m));
    }
    const double ne = n * m / (n + m);
    return {d, kolmogorovSurvival(std::sqrt(ne) * d), x.size() + y.size()};
}

// ---------------------------------------------------------------------------
// Sample moments

inline double sampleMean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / double(v.size());
}

inline double sampleVariance(std::span<const double> v) {
    const double m = sampleMean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / double(v.size() - 1);
}

inline double sampleCovariance(std::span<const double> a, std::span<const double> b) {
    const double ma = sampleMean(a), mb = sampleMean(b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
    return s / double(a.size() - 1);
}

inline double sampleCorrelation(std::span<const double> a, std::span<const double> b) {
    const double va = sampleVariance(a), vb = sampleVariance(b);
    if (va == 0.0 || vb == 0.0) return 0.0;
    return sampleCovariance(a, b) / std::sqrt(va * vb);
}

// ---------------------------------------------------------------------------
// Validation records

/// One line of a machine-readable validation report. Exactly one of pValue /
/// residual is set; `threshold` is the acceptance level applied to it (or to
/// the statistic when neither is set).
struct CheckEntry {
    std::string name;
    double statistic = 0.0;
    std::optional<double> pValue;
    std::optional<double> residual;
    double threshold = 0.0;
    bool pass = false;
};

struct ValidationReport {
    std::vector<CheckEntry> entries;

    bool allPass() const {
        return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass; });
    }

    std::size_t failures() const {
        return std::size_t(std::count_if(entries.begin(), entries.end(),
                                         [](const auto& e) { return !e.pass; }));
    }

    void append(const ValidationReport& other) {
        entries.insert(entries.end(), other.entries.begin(), other.entries.end());
    }
};

namespace detail {

inline CheckEntry ksEntry(std::string name, const KSResult& ks, double level = 0.01) {
    CheckEntry e;
    e.name = std::move(name);
    e.statistic = ks.statistic;
    e.pValue = ks.pValue;
    e.threshold = level;
    e.pass = ks.pValue > level;
    return e;
}

/// |value - expected| <= bands * se; residual holds the z-score.
inline CheckEntry bandEntry(std::string name, double value, double expected, double se,
                            double bands = 3.0) {
    CheckEntry e;
    e.name = std::move(name);
    e.statistic = value;
    e.residual = se > 0.0 ? std::abs(value - expected) / se : 0.0;
    e.threshold = bands;
    e.pass = *e.residual <= bands;
    return e;
}

inline void requireGridTimes(const PathSet& paths, const GridSpec& grid) {
    if (paths.grid.N != grid.N || paths.times.size() != grid.N * paths.grid.subSteps + 1)
        throw InputError("path set does not cover the trading grid");
    for (std::size_t i = 0; i <= grid.N; ++i) {
        const double t = paths.times[paths.gridSample(i)];
        if (std::abs(t - grid.gridTime(i)) > 1e-12 * grid.T)
            throw InputError("path set is missing grid time " + std::to_string(grid.gridTime(i)));
    }
}

inline std::vector<double> logRatio(const PathSet& paths, std::size_t to, std::size_t from) {
    std::vector<double> out(paths.nPaths);
    for (std::size_t p = 0; p < paths.nPaths; ++p)
        out[p] = std::log(paths.at(p, to) / paths.at(p, from));
    return out;
}

}  // namespace detail

/// Marginal law at every grid time: ln(Y_{i Delta}/s0) ~ N(m i Delta, sigmaBar^2 i Delta).
inline ValidationReport gridMarginalChecks(const PathSet& paths, const MarketParams& market,
                                           const GridSpec& grid, double level = 0.01) {
    detail::requireGridTimes(paths, grid);
    ValidationReport rep;
    const double s2 = market.sigmaBar * market.sigmaBar;
    for (std::size_t i = 1; i <= grid.N; ++i) {
        const double t = grid.gridTime(i);
        const auto col = paths.column(paths.gridSample(i));
        const auto ks = ksTestLognormal(col, std::log(market.s0) + market.logDrift() * t, s2 * t);
        rep.entries.push_back(detail::ksEntry("marginal_ks_" + std::to_string(i), ks, level));
    }
    return rep;
}

/// Grid log-returns: per-interval KS normality, 3-SE bands on mean and variance,
/// and 3/sqrt(n) bands on correlations between successive returns and between
/// each return and the preceding grid level.
inline ValidationReport gridReturnDiagnostics(const PathSet& paths, const MarketParams& market,
                                              const GridSpec& grid, double level = 0.01) {
    detail::requireGridTimes(paths, grid);
    if (paths.nPaths < 100) throw InputError("gridReturnDiagnostics: need at least 100 paths");
    ValidationReport rep;
    const double delta = grid.delta();
    const double mean = market.logDrift() * delta;
    const double var = market.sigmaBar * market.sigmaBar * delta;
    const double n = double(paths.nPaths);
    const double corrBand = 3.0 / std::sqrt(n);

    std::vector<std::vector<double>> returns(grid.N);
    for (std::size_t i = 0; i < grid.N; ++i)
        returns[i] = detail::logRatio(paths, paths.gridSample(i + 1), paths.gridSample(i));

    for (std::size_t i = 0; i < grid.N; ++i) {
        const std::string tag = std::to_string(i);
        rep.entries.push_back(detail::ksEntry("return_ks_" + tag, ksTestNormal(returns[i], mean, var), level));
        rep.entries.push_back(detail::bandEntry("return_mean_" + tag, sampleMean(returns[i]), mean,
                                                std::sqrt(var / n)));
        rep.entries.push_back(detail::bandEntry("return_var_" + tag, sampleVariance(returns[i]), var,
                                                var * std::sqrt(2.0 / (n - 1.0))));
    }
    auto corrEntry = [&](std::string name, double c) {
        CheckEntry e;
        e.name = std::move(name);
        e.statistic = c;
        e.residual = std::abs(c);
        e.threshold = corrBand;
        e.pass = std::abs(c) <= corrBand;
        return e;
    };
    for (std::size_t i = 0; i + 1 < grid.N; ++i) {
        rep.entries.push_back(corrEntry("return_corr_" + std::to_string(i) + "_" + std::to_string(i + 1),
                                        sampleCorrelation(returns[i], returns[i + 1])));
    }
    for (std::size_t i = 1; i < grid.N; ++i) {
        std::vector<double> level(paths.nPaths);
        for (std::size_t p = 0; p < paths.nPaths; ++p)
            level[p] = std::log(paths.at(p, paths.gridSample(i)));
        rep.entries.push_back(corrEntry("return_level_corr_" + std::to_string(i),
                                        sampleCorrelation(returns[i], level)));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Off-grid fingerprint

struct MomentEstimate {
    double estimate;
    double standardError;
};

struct FingerprintReport {
    double sOffset;  // s' = s - j Delta
    double tOffset;  // t' = t - j Delta
    MomentEstimate covariance;
    double betaFormula;  // sigmaBar^2 s'^{1 - beta/2} t'^{beta/2}
    double gbmValue;     // sigmaBar^2 s'
    double zBeta;
    double zGbm;
    bool matchesBeta;       // zBeta <= 3
    bool distinguishable;   // zGbm > 5
    std::vector<double> varianceOffsets;
    std::vector<MomentEstimate> conditionalVariance;  // expected sigmaBar^2 t'
    std::vector<double> varianceZ;
};

namespace detail {

/// Pooled over all intervals: increments of ln Y from the interval start.
inline std::vector<double> pooledIncrements(const PathSet& paths, std::size_t subIndex) {
    std::vector<double> out;
    out.reserve(paths.nPaths * paths.grid.N);
    for (std::size_t j = 0; j < paths.grid.N; ++j) {
        const std::size_t k0 = paths.gridSample(j);
        for (std::size_t p = 0; p < paths.nPaths; ++p)
            out.push_back(std::log(paths.at(p, k0 + subIndex) / paths.at(p, k0)));
    }
    return out;
}

inline MomentEstimate covarianceWithError(std::span<const double> a, std::span<const double> b) {
    const double ma = sampleMean(a), mb = sampleMean(b);
    const std::size_t n = a.size();
    std::vector<double> prod(n);
    for (std::size_t i = 0; i < n; ++i) prod[i] = (a[i] - ma) * (b[i] - mb);
    const double cov = sampleMean(prod) * double(n) / double(n - 1);
    return {cov, std::sqrt(sampleVariance(prod) / double(n))};
}

inline std::size_t subIndexFor(const PathSet& paths, double offset) {
    const double steps = offset / paths.grid.delta() * double(paths.grid.subSteps);
    const auto k = static_cast<std::size_t>(std::llround(steps));
    if (k == 0 || k >= paths.grid.subSteps || std::abs(steps - double(k)) > 1e-9)
        throw InputError("path set has no sub-grid sample at the requested offset");
    return k;
}

}  // namespace detail

/// Conditional covariance Cov(ln Y_s, ln Y_t | ln Y_{j Delta}) inside grid
/// intervals. For the limit process it equals sigmaBar^2 s'^{1-beta/2} t'^{beta/2};
/// GBM gives sigmaBar^2 s'. Estimates pool all N intervals (each interval restarts
/// the same conditional law) and subtract the observed interval-start level.
inline FingerprintReport offGridFingerprint(const PathSet& paths, const MarketParams& market,
                                            const GridSpec& grid, double nu,
                                            double sFraction = 0.25, double tFraction = 0.5) {
    if (grid.epsilon != 0.0) throw InputError("offGridFingerprint: needs the epsilon = 0 process");
    detail::requireGridTimes(paths, grid);
    const double delta = grid.delta();
    const double s = sFraction * delta, t = tFraction * delta;
    const double s2 = market.sigmaBar * market.sigmaBar;
    const double beta = 1.0 - nu * nu / s2;

    FingerprintReport rep{};
    rep.sOffset = s;
    rep.tOffset = t;
    const auto xs = detail::pooledIncrements(paths, detail::subIndexFor(paths, s));
    const auto xt = detail::pooledIncrements(paths, detail::subIndexFor(paths, t));
    rep.covariance = detail::covarianceWithError(xs, xt);
    rep.betaFormula = s2 * std::pow(s, 1.0 - 0.5 * beta) * std::pow(t, 0.5 * beta);
    rep.gbmValue = s2 * s;
    const double se = rep.covariance.standardError;
    rep.zBeta = std::abs(rep.covariance.estimate - rep.betaFormula) / se;
    rep.zGbm = std::abs(rep.covariance.estimate - rep.gbmValue) / se;
    rep.matchesBeta = rep.zBeta <= 3.0;
    rep.distinguishable = rep.zGbm > 5.0;

    for (double frac : {0.25, 0.5, 0.75}) {
        const double off = frac * delta;
        std::size_t k = 0;
        try {
            k = detail::subIndexFor(paths, off);
        } catch (const InputError&) {
            continue;
        }
        const auto x = detail::pooledIncrements(paths, k);
        const auto est = detail::covarianceWithError(x, x);
        rep.varianceOffsets.push_back(off);
        rep.conditionalVariance.push_back(est);
        rep.varianceZ.push_back(std::abs(est.estimate - s2 * off) / est.standardError);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Fokker-Planck residual

struct FPResidualReport {
    std::vector<double> tGrid;
    std::vector<double> xGrid;
    std::vector<double> residual;  // row-major tGrid.size() x xGrid.size(), normalized
    double normalizer = 0.0;       // max |dp/dt| on the mesh
    double maxResidual = 0.0;
    int order = 6;
};

struct FPOptions {
    int order = 6;  // central-difference order: 2, 4 or 6
};

namespace detail {

struct Stencil {
    std::vector<double> first;   // weights for offsets 1..m of the odd first-derivative stencil
    double secondCenter;
    std::vector<double> second;  // weights for offsets 1..m of the second-derivative stencil
};

inline Stencil centralStencil(int order) {
    switch (order) {
        case 2: return {{0.5}, -2.0, {1.0}};
        case 4: return {{2.0 / 3.0, -1.0 / 12.0}, -2.5, {4.0 / 3.0, -1.0 / 12.0}};
        case 6:
            return {{0.75, -0.15, 1.0 / 60.0}, -49.0 / 18.0, {1.5, -0.15, 1.0 / 90.0}};
        default: throw InputError("fpResidual: stencil order must be 2, 4 or 6");
    }
}

template <class F>
double firstDerivative(const Stencil& st, F&& f, double h) {
    double s = 0.0;
    for (std::size_t j = 0; j < st.first.size(); ++j) {
        const double d = double(j + 1) * h;
        s += st.first[j] * (f(d) - f(-d));
    }
    return s / h;
}

template <class F>
double secondDerivative(const Stencil& st, F&& f, double h) {
    double s = st.secondCenter * f(0.0);
    for (std::size_t j = 0; j < st.second.size(); ++j) {
        const double d = double(j + 1) * h;
        s += st.second[j] * (f(d) + f(-d));
    }
    return s / (h * h);
}

inline double uniformSpacing(std::span<const double> g, const char* what) {
    if (g.size() < 3) throw InputError(std::string("fpResidual: ") + what + " mesh needs >= 3 points");
    const double h = (g.back() - g.front()) / double(g.size() - 1);
    if (!(h > 0.0)) throw InputError(std::string("fpResidual: ") + what + " mesh must increase");
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (std::abs(g[i] - (g.front() + h * double(i))) > 1e-9 * std::abs(h) * double(g.size()))
            throw InputError(std::string("fpResidual: ") + what + " mesh must be uniform");
    }
    return h;
}

}  // namespace detail

inline std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = n == 1 ? a : a + (b - a) * double(i) / double(n - 1);
    return out;
}

/// Residual of the Fokker-Planck equation
///   dp/dt + d/dx (u p) - 1/2 d^2/dx^2 (a p)
/// for the density curve p(., theta_t), drift u(t, x) and a = sigma^2, by central
/// differences whose step equals the mesh spacing, normalized by max |dp/dt|.
inline FPResidualReport fpResidual(const ExpFamily& fam, const ParameterCurve& curve,
                                   const VolatilitySpec& vol,
                                   const std::function<double(double, double)>& drift,
                                   std::span<const double> tGrid, std::span<const double> xGrid,
                                   const FPOptions& opts = {}) {
    const auto st = detail::centralStencil(opts.order);
    const double ht = detail::uniformSpacing(tGrid, "t");
    const double hx = detail::uniformSpacing(xGrid, "x");
    const double reach = double(st.first.size());
    if (!(tGrid.front() - reach * ht > 0.0))
        throw InputError("fpResidual: time stencil reaches t <= 0");
    if (!fam.support.contains(xGrid.front() - reach * hx) ||
        !fam.support.contains(xGrid.back() + reach * hx))
        throw InputError("fpResidual: space stencil touches the support boundary");

    auto p = [&](double t, double x) { return density(fam, curve.theta(t), x); };

    FPResidualReport rep;
    rep.tGrid.assign(tGrid.begin(), tGrid.end());
    rep.xGrid.assign(xGrid.begin(), xGrid.end());
    rep.order = opts.order;
    rep.residual.resize(tGrid.size() * xGrid.size());
    for (std::size_t i = 0; i < tGrid.size(); ++i) {
        const double t = tGrid[i];
        for (std::size_t k = 0; k < xGrid.size(); ++k) {
            const double x = xGrid[k];
            const double dpdt = detail::firstDerivative(st, [&](double d) { return p(t + d, x); }, ht);
            const double flux = detail::firstDerivative(
                st, [&](double d) { return drift(t, x + d) * p(t, x + d); }, hx);
            const double diffusion = detail::secondDerivative(
                st, [&](double d) { return vol.diffusion(t, x + d) * p(t, x + d); }, hx);
            rep.residual[i * xGrid.size() + k] = std::abs(dpdt + flux - 0.5 * diffusion);
            rep.normalizer = std::max(rep.normalizer, std::abs(dpdt));
        }
    }
    if (!(rep.normalizer > 0.0)) throw NumericError("fpResidual: density does not move on the mesh", 0.0);
    for (double& r : rep.residual) {
        r /= rep.normalizer;
        rep.maxResidual = std::max(rep.maxResidual, r);
    }
    return rep;
}

/// Lognormal-curve convenience: closed-form drift anchored at (s0, 0).
inline FPResidualReport fpResidualLognormal(const MarketParams& market, const VolatilitySpec& volIn,
                                            std::span<const double> tGrid,
                                            std::span<const double> xGrid,
                                            const FPOptions& opts = {},
                                            double driftPerturbation = 0.0) {
    const VolatilitySpec vol = volIn.resolvedFor(market);
    const LognormalCurve curve(market);
    const DriftFn u = closedFormDrift(market, vol);
    const double s0 = market.s0, mu = market.mu;
    return fpResidual(
        curve.family(), curve.curve(), vol,
        [&](double t, double x) { return u(t, x, s0, 0.0) + driftPerturbation * mu * x; }, tGrid,
        xGrid, opts);
}

// ---------------------------------------------------------------------------
// Constant-volatility counterexample

struct AppendixReport {
    double nu = 0.0;
    // objective side: Euler simulation of the constant-nu candidate from t = eps
    std::size_t objectivePaths = 0;
    double objectiveClampFraction = 0.0;
    double objectiveNonPositiveFraction = 0.0;
    double objectiveMinValue = 0.0;
    std::size_t objectiveInvalidPaths = 0;
    // risk-neutral side: exact Gaussian law of dY = r Y dt + nu dW
    std::size_t riskNeutralPaths = 0;
    double riskNeutralNegativeFraction = 0.0;
    double riskNeutralStandardError = 0.0;
    double riskNeutralClosedForm = 0.0;
    double riskNeutralZ = 0.0;
    std::string summary;
};

/// P(Y_T <= 0) for dY = r Y dt + nu dW, Y_0 = s0.
inline double linearSdeNegativeProbability(double s0, double r, double nu, double T) {
    const double mean = s0 * std::exp(r * T);
    const double var = r > 0.0 ? nu * nu * std::expm1(2.0 * r * T) / (2.0 * r) : nu * nu * T;
    return normalCdf(-mean / std::sqrt(var));
}

struct AppendixOptions {
    std::size_t objectivePaths = 10000;
    std::size_t riskNeutralPaths = 1000000;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
};

/// (a) simulates the constant-nu candidate under the objective measure with a
/// single anchor (s0, 0) on [eps, T]; (b) samples the would-be risk-neutral
/// linear SDE exactly on the grid and compares P(Y_T <= 0) with its closed form.
inline AppendixReport appendixDemo(const MarketParams& market, const GridSpec& grid, double nu,
                                   const AppendixOptions& opts = {}) {
    market.validate();
    grid.validate();
    if (!(nu > 0.0)) throw DomainError("appendixDemo: nu must be positive");
    if (!(grid.epsilon > 0.0)) throw DomainError("appendixDemo: needs epsilon > 0");
    AppendixReport rep;
    rep.nu = nu;

    GridSpec single;
    single.T = grid.T;
    single.N = 1;
    single.epsilon = grid.epsilon;
    single.subSteps = grid.N * grid.subSteps;
    const PathSet obj = simulateEuler(market, single, VolatilitySpec::constant(nu),
                                      opts.objectivePaths, opts.seed, {opts.threads});
    rep.objectivePaths = obj.nPaths;
    rep.objectiveClampFraction = obj.clampFraction();
    rep.objectiveInvalidPaths = obj.invalidPaths;
    std::size_t nonPositive = 0, samples = 0;
    double minValue = INFINITY;
    for (double v : obj.values) {
        ++samples;
        minValue = std::min(minValue, v);
        if (v <= 1e-12 * market.s0) ++nonPositive;
    }
    rep.objectiveNonPositiveFraction = samples ? double(nonPositive) / double(samples) : 0.0;
    rep.objectiveMinValue = minValue;

    const double h = grid.delta();
    const double growth = std::exp(market.r * h);
    const double stepSd = market.r > 0.0
                              ? nu * std::sqrt(std::expm1(2.0 * market.r * h) / (2.0 * market.r))
                              : nu * std::sqrt(h);
    std::size_t negative = 0;
    for (std::size_t p = 0; p < opts.riskNeutralPaths; ++p) {
        PathRng rng(opts.seed, p, /*stream=*/1);
        double y = market.s0;
        for (std::size_t j = 0; j < grid.N; ++j) y = y * growth + stepSd * rng.normal();
        if (y <= 0.0) ++negative;
    }
    const double n = double(opts.riskNeutralPaths);
    rep.riskNeutralPaths = opts.riskNeutralPaths;
    rep.riskNeutralNegativeFraction = double(negative) / n;
    rep.riskNeutralClosedForm = linearSdeNegativeProbability(market.s0, market.r, nu, grid.T);
    rep.riskNeutralStandardError =
        std::sqrt(rep.riskNeutralClosedForm * (1.0 - rep.riskNeutralClosedForm) / n);
    rep.riskNeutralZ = rep.riskNeutralStandardError > 0.0
                           ? std::abs(rep.riskNeutralNegativeFraction - rep.riskNeutralClosedForm) /
                                 rep.riskNeutralStandardError
                           : 0.0;
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "objective law keeps Y_T > 0 (clamped steps %.3g, min value %.6g); the linear "
                  "risk-neutral SDE has P(Y_T <= 0) = %.6g > 0, so no equivalent martingale "
                  "measure exists for constant nu = %.6g",
                  rep.objectiveClampFraction, rep.objectiveMinValue, rep.riskNeutralClosedForm, nu);
    rep.summary = buf;
    return rep;
}

}  // namespace gridgbm
