#pragma once

// JSON and CSV serializers for quotes, validation reports and hedge results,
// plus an atomic file writer.

#include "gridgbm/drift.hpp"
#include "gridgbm/errors.hpp"
#include "gridgbm/hedging.hpp"
#include "gridgbm/pricing.hpp"
#include "gridgbm/stats.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <string>

namespace gridgbm {

using Json = nlohmann::ordered_json;

inline Json toJson(const PriceQuote& q) {
    return Json{{"nu", q.nu},
                {"epsilon_over_delta", q.epsilonOverDelta},
                {"t", q.t},
                {"effective_vol", q.effectiveVol},
                {"branch", toString(q.branch)},
                {"price", q.value},
                {"lower_bound", q.bounds.lower},
                {"upper_bound", q.bounds.upper}};
}

inline Json toJson(const CheckEntry& e) {
    Json j{{"name", e.name}, {"statistic", e.statistic}};
    if (e.pValue) j["p_value"] = *e.pValue;
    if (e.residual) j["residual"] = *e.residual;
    j["threshold"] = e.threshold;
    j["pass"] = e.pass;
    return j;
}

inline Json toJson(const ValidationReport& r) {
    Json checks = Json::array();
    for (const auto& e : r.entries) checks.push_back(toJson(e));
    return Json{{"pass", r.allPass()}, {"failures", r.failures()}, {"checks", checks}};
}

inline Json toJson(const HedgeReport& r) {
    return Json{{"nu", r.hedgerNu},
                {"mean", r.mean},
                {"stdev", r.stdev},
                {"mse", r.meanSquare},
                {"q05", r.q05},
                {"q95", r.q95},
                {"n_paths", r.errors.size()},
                {"n_rebalances", r.nRebalances},
                {"standard_error", r.standardError},
                {"true_generator", r.trueGenerator}};
}

inline Json toJson(const NuSelection& s) {
    Json scores = Json::array();
    for (std::size_t i = 0; i < s.nuGrid.size(); ++i)
        scores.push_back(Json{{"nu", s.nuGrid[i]}, {"score", s.scores[i]}});
    return Json{{"criterion", s.criterion}, {"best_nu", s.bestNu}, {"scores", scores}};
}

inline Json toJson(const FingerprintReport& f) {
    Json vars = Json::array();
    for (std::size_t i = 0; i < f.varianceOffsets.size(); ++i)
        vars.push_back(Json{{"offset", f.varianceOffsets[i]},
                            {"estimate", f.conditionalVariance[i].estimate},
                            {"standard_error", f.conditionalVariance[i].standardError},
                            {"z", f.varianceZ[i]}});
    return Json{{"s_offset", f.sOffset},
                {"t_offset", f.tOffset},
                {"covariance", f.covariance.estimate},
                {"standard_error", f.covariance.standardError},
                {"beta_formula", f.betaFormula},
                {"gbm_value", f.gbmValue},
                {"z_beta", f.zBeta},
                {"z_gbm", f.zGbm},
                {"matches_beta", f.matchesBeta},
                {"distinguishable", f.distinguishable},
                {"conditional_variance", vars}};
}

inline Json toJson(const AppendixReport& a) {
    return Json{{"nu", a.nu},
                {"objective_paths", a.objectivePaths},
                {"objective_clamp_fraction", a.objectiveClampFraction},
                {"objective_non_positive_fraction", a.objectiveNonPositiveFraction},
                {"objective_min_value", a.objectiveMinValue},
                {"objective_invalid_paths", a.objectiveInvalidPaths},
                {"risk_neutral_paths", a.riskNeutralPaths},
                {"risk_neutral_negative_fraction", a.riskNeutralNegativeFraction},
                {"risk_neutral_closed_form", a.riskNeutralClosedForm},
                {"risk_neutral_standard_error", a.riskNeutralStandardError},
                {"risk_neutral_z", a.riskNeutralZ},
                {"summary", a.summary}};
}

/// Per-path CSV: path_id,hedger_nu,epsilon.
inline void writeHedgeCsv(std::ostream& os, const HedgeReport& r) {
    os << "path_id,hedger_nu,epsilon\n";
    char buf[128];
    for (std::size_t p = 0; p < r.errors.size(); ++p) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", p, r.hedgerNu, r.errors[p]);
        os << buf;
    }
}

/// Residual grid CSV: t,x,residual.
inline void writeFpCsv(std::ostream& os, const FPResidualReport& r) {
    os << "t,x,residual\n";
    char buf[128];
    for (std::size_t i = 0; i < r.tGrid.size(); ++i)
        for (std::size_t k = 0; k < r.xGrid.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", r.tGrid[i], r.xGrid[k],
                          r.residual[i * r.xGrid.size() + k]);
            os << buf;
        }
}

/// Writes through a sibling temporary file and renames it into place.
inline void writeFileAtomic(const std::filesystem::path& path,
                            const std::function<void(std::ostream&)>& fill) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw InputError("cannot open " + tmp.string() + " for writing");
        fill(os);
        os.flush();
        if (!os) throw InputError("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline void writeJsonAtomic(const std::filesystem::path& path, const Json& j) {
    writeFileAtomic(path, [&](std::ostream& os) { os << j.dump(2) << "\n"; });
}

}  // namespace gridgbm
