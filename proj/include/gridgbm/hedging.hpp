#pragma once

// Discrete delta hedging of a call with the strategy implied by a model nu,
// evaluated on observed (simulated) prices.

#include "gridgbm/errors.hpp"
#include "gridgbm/market.hpp"
#include "gridgbm/normal.hpp"
#include "gridgbm/parallel.hpp"
#include "gridgbm/pricing.hpp"
#include "gridgbm/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace gridgbm {

struct StrategyPosition {
    double shares;  // xi, stock units
    double cash;    // eta, money-market units (B_t = e^{rt})
    double value;   // U^eps(t, nu)
};

/// Delta strategy at (t, spot): xi = Phi(d1) at sigma^eps(t), eta = (U - xi spot) e^{-rt}.
inline StrategyPosition deltaStrategy(const MarketParams& market, const GridSpec& grid, double nu,
                                      double t, double spot, const OptionSpec& option) {
    if (!(t < grid.T)) throw DomainError("deltaStrategy: needs t < T");
    const PriceQuote q = priceU(market, grid, nu, t, spot, option);
    const double d1 = bsD1(spot, option.strike, market.r, q.effectiveVol, grid.T - t);
    const double shares = normalCdf(d1);
    const double cash = (q.value - shares * spot) * std::exp(-market.r * t);
    return {shares, cash, q.value};
}

/// tau_j = j T / n. Each tau_j must be a trading-grid time, so n has to divide N.
inline std::vector<double> rebalanceTimes(const GridSpec& grid, std::size_t n) {
    grid.validate();
    if (n == 0 || grid.N % n != 0)
        throw InputError("rebalance count must divide the number of grid intervals");
    const std::size_t k = grid.N / n;
    std::vector<double> out(n + 1);
    for (std::size_t j = 0; j <= n; ++j) out[j] = grid.gridTime(j * k);
    return out;
}

/// Strategy held over [tau_j, tau_{j+1}) along one observed path.
struct HedgePlan {
    std::vector<double> rebalanceTimes;  // n + 1 entries, last = T
    double hedgerNu = 0.0;
    std::vector<double> shares;  // n entries
    std::vector<double> cash;    // n entries
};

/// One rebalancing step of the hedge ledger.
struct HedgeStep {
    double t;
    double spot;
    double shares;
    double cash;
    double value;        // xi S + eta B at tau_j, equals U(tau_j)
    double gain;         // xi (S_{j+1} - S_j) + eta (B_{j+1} - B_j)
    double carried;      // xi S_{j+1} + eta B_{j+1}: value just before the next rebalance
    double target;       // U(tau_{j+1}); the payoff at T
    double jump;         // target - carried
};

struct HedgeLedger {
    std::vector<HedgeStep> steps;
    double initialPrice = 0.0;
    double payoff = 0.0;
    double error = 0.0;  // payoff - U(0) - sum of gains
};

namespace detail {

inline void requireObservations(std::span<const double> observed, std::size_t n) {
    if (observed.size() != n + 1)
        throw InputError("observed prices must cover every rebalance time (n + 1 values)");
    for (double s : observed)
        if (!(s > 0.0) || !std::isfinite(s)) throw InputError("observed prices must be positive");
}

}  // namespace detail

inline HedgePlan hedgePlan(std::span<const double> observed, const MarketParams& market,
                           const GridSpec& grid, double nu, const OptionSpec& option) {
    HedgePlan plan;
    const std::size_t n = observed.size() - (observed.empty() ? 0 : 1);
    plan.rebalanceTimes = rebalanceTimes(grid, n);
    detail::requireObservations(observed, n);
    plan.hedgerNu = nu;
    plan.shares.resize(n);
    plan.cash.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto pos = deltaStrategy(market, grid, nu, plan.rebalanceTimes[j], observed[j], option);
        plan.shares[j] = pos.shares;
        plan.cash[j] = pos.cash;
    }
    return plan;
}

/// Full per-step ledger. The error equals the sum of the jumps because the
/// portfolio value only moves through gains between rebalances.
inline HedgeLedger hedgeLedger(std::span<const double> observed, const MarketParams& market,
                               const GridSpec& grid, double nu, const OptionSpec& option) {
    const HedgePlan plan = hedgePlan(observed, market, grid, nu, option);
    const std::size_t n = plan.shares.size();
    HedgeLedger ledger;
    ledger.payoff = option.payoff(observed[n]);
    ledger.steps.reserve(n);
    double gains = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double t0 = plan.rebalanceTimes[j], t1 = plan.rebalanceTimes[j + 1];
        const double b0 = std::exp(market.r * t0), b1 = std::exp(market.r * t1);
        HedgeStep s;
        s.t = t0;
        s.spot = observed[j];
        s.shares = plan.shares[j];
        s.cash = plan.cash[j];
        s.value = s.shares * s.spot + s.cash * b0;
        s.gain = s.shares * (observed[j + 1] - observed[j]) + s.cash * (b1 - b0);
        s.carried = s.shares * observed[j + 1] + s.cash * b1;
        s.target = j + 1 == n ? ledger.payoff
                              : priceU(market, grid, nu, t1, observed[j + 1], option).value;
        s.jump = s.target - s.carried;
        if (j == 0) ledger.initialPrice = priceU(market, grid, nu, t0, observed[0], option).value;
        gains += s.gain;
        ledger.steps.push_back(s);
    }
    ledger.error = ledger.payoff - ledger.initialPrice - gains;
    return ledger;
}

/// epsilon(nu) = (S_T - K)^+ - U(0) - sum xi_j (S_{j+1} - S_j) - sum eta_j (B_{j+1} - B_j)
/// for prices observed at the n + 1 rebalance times.
inline double replicationError(std::span<const double> observed, const MarketParams& market,
                               const GridSpec& grid, double nu, const OptionSpec& option) {
    if (observed.size() < 2) throw InputError("replicationError: need at least one rebalance");
    const std::size_t n = observed.size() - 1;
    const auto times = rebalanceTimes(grid, n);
    detail::requireObservations(observed, n);
    double err = option.payoff(observed[n]);
    double bPrev = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
        const auto pos = deltaStrategy(market, grid, nu, times[j], observed[j], option);
        if (j == 0) err -= pos.value;
        const double bNext = std::exp(market.r * times[j + 1]);
        if (j == 0) bPrev = std::exp(market.r * times[0]);
        err -= pos.shares * (observed[j + 1] - observed[j]) + pos.cash * (bNext - bPrev);
        bPrev = bNext;
    }
    return err;
}

/// Sample indices of the rebalance times inside a path set; InputError if one is missing.
inline std::vector<std::size_t> rebalanceSamples(const PathSet& paths, std::size_t n) {
    const auto times = rebalanceTimes(paths.grid, n);
    std::vector<std::size_t> idx(times.size());
    const std::size_t k = paths.grid.N / n;
    for (std::size_t j = 0; j < times.size(); ++j) {
        idx[j] = paths.gridSample(j * k);
        if (idx[j] >= paths.times.size() ||
            std::abs(paths.times[idx[j]] - times[j]) > 1e-12 * paths.grid.T)
            throw InputError("path set has no sample at rebalance time " + std::to_string(times[j]));
    }
    return idx;
}

/// Empirical quantile with linear interpolation between order statistics.
inline double empiricalQuantile(std::span<const double> v, double q) {
    if (v.empty()) throw InputError("quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw InputError("quantile level must lie in [0, 1]");
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    const double h = q * double(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (h - double(lo)) * (s[hi] - s[lo]);
}

struct HedgeReport {
    std::vector<double> errors;
    double hedgerNu = 0.0;
    double epsilon = 0.0;
    std::size_t nRebalances = 0;
    double mean = 0.0;
    double stdev = 0.0;
    double meanSquare = 0.0;
    double standardError = 0.0;
    double q05 = 0.0;
    double q50 = 0.0;
    double q95 = 0.0;
    std::string trueGenerator;
};

inline HedgeReport summarizeErrors(std::vector<double> errors, double nu, double epsilon,
                                   std::size_t n, std::string generator) {
    if (errors.empty()) throw InputError("no replication errors to summarize");
    HedgeReport rep;
    rep.hedgerNu = nu;
    rep.epsilon = epsilon;
    rep.nRebalances = n;
    rep.trueGenerator = std::move(generator);
    const double m = double(errors.size());
    double sum = 0.0, sq = 0.0;
    for (double e : errors) {
        sum += e;
        sq += e * e;
    }
    rep.mean = sum / m;
    rep.meanSquare = sq / m;
    double dev = 0.0;
    for (double e : errors) dev += (e - rep.mean) * (e - rep.mean);
    rep.stdev = errors.size() > 1 ? std::sqrt(dev / (m - 1.0)) : 0.0;
    rep.standardError = rep.stdev / std::sqrt(m);
    rep.q05 = empiricalQuantile(errors, 0.05);
    rep.q50 = empiricalQuantile(errors, 0.5);
    rep.q95 = empiricalQuantile(errors, 0.95);
    rep.errors = std::move(errors);
    return rep;
}

/// Hedges every path of `paths` with model nu and n rebalances.
inline HedgeReport hedgeExperiment(const PathSet& paths, double nu, const OptionSpec& option,
                                   std::size_t nRebalances, std::size_t threads = 1) {
    if (paths.nPaths == 0) throw InputError("hedgeExperiment: empty path set");
    const auto idx = rebalanceSamples(paths, nRebalances);
    std::vector<double> errors(paths.nPaths);
    parallelFor(paths.nPaths, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> obs(idx.size());
        for (std::size_t p = begin; p < end; ++p) {
            for (std::size_t j = 0; j < idx.size(); ++j) obs[j] = paths.at(p, idx[j]);
            errors[p] = replicationError(obs, paths.market, paths.grid, nu, option);
        }
    });
    return summarizeErrors(std::move(errors), nu, paths.grid.epsilon, nRebalances,
                           paths.generator.describe());
}

// ---------------------------------------------------------------------------
// nu selection

/// Scalar loss over a sample of replication errors; smaller is better.
struct HedgeCriterion {
    std::string name;
    std::function<double(std::span<const double>)> eval;

    static HedgeCriterion meanSquare() {
        return {"mean-square", [](std::span<const double> e) {
                    double s = 0.0;
                    for (double x : e) s += x * x;
                    return s / double(e.size());
                }};
    }

    static HedgeCriterion meanAbsolute() {
        return {"mean-absolute", [](std::span<const double> e) {
                    double s = 0.0;
                    for (double x : e) s += std::abs(x);
                    return s / double(e.size());
                }};
    }

    /// q-quantile of |epsilon|.
    static HedgeCriterion quantile(double q) {
        if (!(q >= 0.0 && q <= 1.0)) throw InputError("quantile level must lie in [0, 1]");
        char buf[64];
        std::snprintf(buf, sizeof buf, "quantile(%.17g)", q);
        return {buf, [q](std::span<const double> e) {
                    std::vector<double> a(e.size());
                    for (std::size_t i = 0; i < e.size(); ++i) a[i] = std::abs(e[i]);
                    return empiricalQuantile(a, q);
                }};
    }
};

/// Parses "mean-square", "mean-absolute" or "quantile:<q>".
inline HedgeCriterion parseCriterion(const std::string& s) {
    if (s == "mean-square") return HedgeCriterion::meanSquare();
    if (s == "mean-absolute") return HedgeCriterion::meanAbsolute();
    if (s.rfind("quantile:", 0) == 0) {
        try {
            std::size_t used = 0;
            const double q = std::stod(s.substr(9), &used);
            if (used == s.size() - 9) return HedgeCriterion::quantile(q);
        } catch (const std::logic_error&) {
        }
    }
    throw InputError("unknown hedge criterion '" + s + "'");
}

/// Process that produces the observed prices.
struct GeneratorConfig {
    GeneratorInfo::Kind kind = GeneratorInfo::Kind::GBM;
    VolatilitySpec vol = VolatilitySpec::blackScholes(0.2);

    PathSet generate(const MarketParams& market, const GridSpec& grid, std::size_t nPaths,
                     std::uint64_t seed, const SimOptions& opts = {}) const {
        switch (kind) {
            case GeneratorInfo::Kind::GBM:
                return simulateGBM(market, grid, nPaths, seed, Measure::Objective, opts);
            case GeneratorInfo::Kind::ExactProportional:
                return simulateExactProportional(market, grid, vol.resolvedFor(market).nu, nPaths,
                                                 seed, Measure::Objective, opts);
            case GeneratorInfo::Kind::Euler:
                return simulateEuler(market, grid, vol, nPaths, seed, opts);
        }
        throw UnsupportedError("unknown generator kind");
    }
};

struct NuSelection {
    double bestNu = 0.0;
    std::vector<double> nuGrid;
    std::vector<double> scores;
    std::string criterion;
};

/// argmin over nuGrid of criterion(errorsFor(nu)); ties keep the first grid point.
inline NuSelection selectNuFromErrors(std::span<const double> nuGrid, const HedgeCriterion& criterion,
                                      const std::function<std::vector<double>(double)>& errorsFor) {
    if (nuGrid.empty()) throw InputError("selectNu: empty nu grid");
    NuSelection sel;
    sel.criterion = criterion.name;
    sel.nuGrid.assign(nuGrid.begin(), nuGrid.end());
    double best = std::numeric_limits<double>::infinity();
    for (double nu : nuGrid) {
        const auto errs = errorsFor(nu);
        const double score = criterion.eval(errs);
        sel.scores.push_back(score);
        if (score < best) {
            best = score;
            sel.bestNu = nu;
        }
    }
    return sel;
}

/// Simulates one path set from `generator` and scores every nu on the same paths.
inline NuSelection selectNu(const GeneratorConfig& generator, const MarketParams& market,
                            const GridSpec& grid, const OptionSpec& option,
                            const HedgeCriterion& criterion, std::span<const double> nuGrid,
                            std::size_t nPaths, std::size_t nRebalances, std::uint64_t seed,
                            std::size_t threads = 1) {
    if (nuGrid.empty()) throw InputError("selectNu: empty nu grid");
    const PathSet paths = generator.generate(market, grid, nPaths, seed, {threads});
    return selectNuFromErrors(nuGrid, criterion, [&](double nu) {
        return hedgeExperiment(paths, nu, option, nRebalances, threads).errors;
    });
}

}  // namespace gridgbm
