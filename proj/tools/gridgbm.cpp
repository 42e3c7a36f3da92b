// Command-line experiment runner.
//
//   gridgbm <subcommand> [--config FILE] [--set section.key=value]... [--out DIR] [--threads N]
//
// Exit codes: 0 pass, 1 threshold failure, 2 usage or config error, 3 numeric failure.

#include "gridgbm/config.hpp"
#include "gridgbm/drift.hpp"
#include "gridgbm/hedging.hpp"
#include "gridgbm/pricing.hpp"
#include "gridgbm/report.hpp"
#include "gridgbm/sim.hpp"
#include "gridgbm/stats.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace gridgbm;

namespace {

enum Exit { kPass = 0, kThreshold = 1, kUsage = 2, kNumeric = 3 };

struct CommonArgs {
    std::string configPath;
    std::vector<std::string> overrides;
    std::string outDir;
    std::optional<std::size_t> threads;
};

ExperimentConfig resolveConfig(const CommonArgs& args) {
    ExperimentConfig cfg;
    if (!args.configPath.empty()) {
        std::ifstream is(args.configPath);
        if (!is) throw ConfigError("cannot open config file " + args.configPath, 0, "--config");
        cfg = parseConfig(is);
    }
    for (const auto& o : args.overrides) applyOverride(cfg, o);
    if (args.threads) cfg.run.threads = *args.threads;
    if (!args.outDir.empty()) {
        cfg.run.outputDir = args.outDir;
    } else if (cfg.run.outputDir.empty()) {
        const char* env = std::getenv("GRIDGBM_OUTPUT_DIR");
        cfg.run.outputDir = env && *env ? env : ".";
    }
    return cfg;
}

fs::path outPath(const ExperimentConfig& cfg, const std::string& name) {
    return fs::path(cfg.run.outputDir) / name;
}

void writeResolvedConfig(const ExperimentConfig& cfg) {
    writeFileAtomic(outPath(cfg, "config.ini"), [&](std::ostream& os) { writeConfig(os, cfg); });
}

int finish(bool pass, const char* what) {
    std::cout << what << ": " << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? kPass : kThreshold;
}

PathSet generatePaths(const ExperimentConfig& cfg) {
    const MarketParams market = cfg.marketParams();
    const GridSpec grid = cfg.gridSpec();
    const GeneratorConfig gen = cfg.generatorConfig();
    if (cfg.measureKind() == Measure::RiskNeutral) {
        if (gen.kind == GeneratorInfo::Kind::GBM)
            return simulateGBM(market, grid, cfg.run.nPaths, cfg.run.seed, Measure::RiskNeutral,
                               cfg.simOptions());
        return riskNeutralDynamics(market, grid, gen.vol, cfg.run.nPaths, cfg.run.seed,
                                   cfg.simOptions());
    }
    return gen.generate(market, grid, cfg.run.nPaths, cfg.run.seed, cfg.simOptions());
}

int cmdSimulate(const ExperimentConfig& cfg) {
    const PathSet ps = generatePaths(cfg);
    writeFileAtomic(outPath(cfg, "paths.csv"), [&](std::ostream& os) { ps.writeCsv(os); });
    const Json summary{{"generator", ps.generator.describe()},
                       {"measure", toString(ps.measure)},
                       {"n_paths", ps.nPaths},
                       {"invalid_paths", ps.invalidPaths},
                       {"clamped_steps", ps.clampedSteps},
                       {"euler_steps", ps.eulerSteps}};
    writeJsonAtomic(outPath(cfg, "simulate.json"), summary);
    std::cout << summary.dump(2) << "\n";
    return kPass;
}

int cmdValidate(const ExperimentConfig& cfg) {
    const MarketParams market = cfg.marketParams();
    const GridSpec grid = cfg.gridSpec();
    const PathSet ps = generatePaths(cfg);
    ValidationReport rep = gridMarginalChecks(ps, market, grid, cfg.validate.level);
    rep.append(gridReturnDiagnostics(ps, market, grid, cfg.validate.level));
    Json out = toJson(rep);
    if (cfg.validate.fingerprint) {
        const double nu = cfg.volatilitySpec().resolvedFor(market).nu;
        const auto f = offGridFingerprint(ps, market, grid, nu);
        CheckEntry e;
        e.name = "fingerprint_beta";
        e.statistic = f.covariance.estimate;
        e.residual = f.zBeta;
        e.threshold = 3.0;
        e.pass = f.matchesBeta;
        rep.entries.push_back(e);
        out = toJson(rep);
        out["fingerprint"] = toJson(f);
    }
    out["generator"] = ps.generator.describe();
    writeJsonAtomic(outPath(cfg, "validation.json"), out);
    for (const auto& e : rep.entries)
        if (!e.pass) std::cout << "failed check: " << e.name << "\n";
    std::cout << rep.entries.size() - rep.failures() << "/" << rep.entries.size()
              << " checks passed\n";
    return finish(rep.allPass(), "validate");
}

int cmdPrice(const ExperimentConfig& cfg) {
    const MarketParams market = cfg.marketParams();
    const double spot = cfg.pricing.spot > 0.0 ? cfg.pricing.spot : market.s0;
    const double nu = cfg.volatilitySpec().resolvedFor(market).nu;
    const PriceQuote q = priceU(market, cfg.gridSpec(), nu, cfg.pricing.t, spot, cfg.optionSpec());
    const Json j = toJson(q);
    writeJsonAtomic(outPath(cfg, "quote.json"), j);
    std::cout << j.dump(2) << "\n";
    return kPass;
}

int cmdInvert(const ExperimentConfig& cfg) {
    const MarketParams market = cfg.marketParams();
    const GridSpec grid = cfg.gridSpec();
    const OptionSpec option = cfg.optionSpec();
    const double nu = invertNuForPrice(market, grid, option, cfg.pricing.target);
    const PriceQuote q = priceU(market, grid, nu, 0.0, market.s0, option);
    Json j = toJson(q);
    j["target"] = cfg.pricing.target;
    writeJsonAtomic(outPath(cfg, "invert.json"), j);
    std::cout << j.dump(2) << "\n";
    return kPass;
}

int cmdBounds(const ExperimentConfig& cfg) {
    const PriceBounds b = priceBounds(cfg.marketParams(), cfg.optionSpec());
    const Json j{{"lower_bound", b.lower}, {"upper_bound", b.upper}};
    writeJsonAtomic(outPath(cfg, "bounds.json"), j);
    std::cout << j.dump(2) << "\n";
    return kPass;
}

int cmdHedge(const ExperimentConfig& cfg) {
    const PathSet ps = generatePaths(cfg);
    const HedgeReport rep =
        hedgeExperiment(ps, cfg.hedge.nu, cfg.optionSpec(), cfg.hedge.rebalances, cfg.run.threads);
    writeFileAtomic(outPath(cfg, "hedge.csv"), [&](std::ostream& os) { writeHedgeCsv(os, rep); });
    const Json j = toJson(rep);
    writeJsonAtomic(outPath(cfg, "hedge.json"), j);
    std::cout << j.dump(2) << "\n";
    return kPass;
}

int cmdSelectNu(const ExperimentConfig& cfg) {
    const NuSelection sel =
        selectNu(cfg.generatorConfig(), cfg.marketParams(), cfg.gridSpec(), cfg.optionSpec(),
                 parseCriterion(cfg.hedge.criterion), cfg.hedge.nuGrid, cfg.run.nPaths,
                 cfg.hedge.rebalances, cfg.run.seed, cfg.run.threads);
    const Json j = toJson(sel);
    writeJsonAtomic(outPath(cfg, "select_nu.json"), j);
    std::cout << j.dump(2) << "\n";
    return kPass;
}

int cmdFpResidual(const ExperimentConfig& cfg) {
    const auto t = linspace(cfg.fp.tMin, cfg.fp.tMax, cfg.fp.nt);
    const auto x = linspace(cfg.fp.xMin, cfg.fp.xMax, cfg.fp.nx);
    FPOptions opts;
    opts.order = static_cast<int>(cfg.fp.order);
    const auto rep = fpResidualLognormal(cfg.marketParams(), cfg.volatilitySpec(), t, x, opts,
                                         cfg.fp.perturbation);
    writeFileAtomic(outPath(cfg, "fp_residual.csv"), [&](std::ostream& os) { writeFpCsv(os, rep); });
    const bool pass = rep.maxResidual < cfg.fp.threshold;
    const Json j{{"max_residual", rep.maxResidual}, {"normalizer", rep.normalizer},
                 {"order", rep.order},              {"threshold", cfg.fp.threshold},
                 {"pass", pass}};
    writeJsonAtomic(outPath(cfg, "fp_residual.json"), j);
    std::cout << j.dump(2) << "\n";
    return finish(pass, "fp-residual");
}

int cmdAppendix(const ExperimentConfig& cfg) {
    GridSpec grid = cfg.gridSpec();
    grid.epsilon = cfg.appendix.epsilonOverDelta * grid.delta();
    grid.subSteps = cfg.appendix.subSteps;
    AppendixOptions opts;
    opts.objectivePaths = cfg.appendix.objectivePaths;
    opts.riskNeutralPaths = cfg.appendix.riskNeutralPaths;
    opts.seed = cfg.run.seed;
    opts.threads = cfg.run.threads;
    const AppendixReport a = appendixDemo(cfg.marketParams(), grid, cfg.appendix.nu, opts);
    const bool pass = a.objectiveClampFraction < 1e-3 && a.riskNeutralZ <= 3.0;
    Json j = toJson(a);
    j["pass"] = pass;
    writeJsonAtomic(outPath(cfg, "appendix.json"), j);
    std::cout << a.summary << "\n";
    return finish(pass, "appendix-demo");
}

int cmdDriftCheck(const ExperimentConfig& cfg) {
    const auto& d = cfg.drift;
    const auto pts = driftCheckGrid(d.tMin, d.tMax, d.nt, d.xMin, d.xMax, d.nx, d.y, d.alpha);
    const auto rep = driftConsistencyReport(cfg.marketParams(), cfg.volatilitySpec(), pts);
    writeFileAtomic(outPath(cfg, "drift_check.csv"), [&](std::ostream& os) { rep.writeCsv(os); });
    const bool pass = rep.maxDiscrepancy < d.threshold;
    const Json j{{"vol_kind", cfg.vol.kind},
                 {"max_discrepancy", rep.maxDiscrepancy},
                 {"threshold", d.threshold},
                 {"pass", pass}};
    writeJsonAtomic(outPath(cfg, "drift_check.json"), j);
    std::cout << j.dump(2) << "\n";
    return finish(pass, "drift-check");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grid-indistinguishable GBM alternatives: simulation, pricing and hedging"};
    app.require_subcommand(1);
    CommonArgs args;
    std::optional<double> target;

    struct Sub {
        const char* name;
        const char* help;
        int (*run)(const ExperimentConfig&);
    };
    const std::vector<Sub> subs{
        {"simulate", "simulate paths and write them as CSV", cmdSimulate},
        {"validate", "check grid-law equivalence with GBM", cmdValidate},
        {"price", "price a call with U^eps(t, nu)", cmdPrice},
        {"invert-nu", "find nu reproducing a target price", cmdInvert},
        {"bounds", "no-arbitrage price bounds", cmdBounds},
        {"hedge", "delta-hedging replication error", cmdHedge},
        {"select-nu", "choose nu by a hedging criterion", cmdSelectNu},
        {"fp-residual", "Fokker-Planck residual of the closed-form drift", cmdFpResidual},
        {"appendix-demo", "constant-volatility counterexample", cmdAppendix},
        {"drift-check", "closed-form versus quadrature drift", cmdDriftCheck},
    };
    std::vector<CLI::App*> handles;
    for (const auto& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("--config", args.configPath, "INI config file");
        sub->add_option("--set", args.overrides, "override section.key=value (repeatable)");
        sub->add_option("--out", args.outDir, "output directory");
        sub->add_option("--threads", args.threads, "worker thread cap (0 = all cores)");
        if (std::string(s.name) == "invert-nu") sub->add_option("--target", target, "target price");
        handles.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kUsage;
    }

    try {
        ExperimentConfig cfg = resolveConfig(args);
        if (target) cfg.pricing.target = *target;
        for (std::size_t i = 0; i < subs.size(); ++i) {
            if (!handles[i]->parsed()) continue;
            writeResolvedConfig(cfg);
            return subs[i].run(cfg);
        }
        return kUsage;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
}
