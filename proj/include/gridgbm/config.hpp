#pragma once

// INI-style experiment configuration: [section] headers, key = value lines,
// '#' or ';' comments. Serialization is deterministic and lossless.

#include "gridgbm/errors.hpp"
#include "gridgbm/hedging.hpp"
#include "gridgbm/market.hpp"
#include "gridgbm/sim.hpp"

#include <cerrno>
#include <concepts>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace gridgbm {

/// Parse or validation failure tied to a config line (0 when it came from an override).
class ConfigError : public InputError {
public:
    ConfigError(const std::string& what, std::size_t line, std::string field)
        : InputError(line ? "config line " + std::to_string(line) + ": " + what : what),
          line_(line),
          field_(std::move(field)) {}

    std::size_t line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

struct ExperimentConfig {
    struct Market {
        double mu = 0.1;
        double sigmaBar = 0.2;
        double s0 = 100.0;
        double r = 0.05;
        bool operator==(const Market&) const = default;
    } market;
    struct Grid {
        double T = 1.0;
        std::size_t N = 12;
        double epsilon = 0.0;
        std::size_t subSteps = 1;
        bool operator==(const Grid&) const = default;
    } grid;
    struct Vol {
        std::string kind = "proportional";
        double nu = 0.4;
        bool operator==(const Vol&) const = default;
    } vol;
    struct Option {
        double strike = 100.0;
        double maturity = 1.0;
        bool operator==(const Option&) const = default;
    } option;
    struct Run {
        std::string generator = "exact-proportional";  // gbm | exact-proportional | euler
        std::string anchor = "rolling";                // rolling | fixed-initial
        std::string measure = "objective";             // objective | risk-neutral
        std::size_t nPaths = 10000;
        std::uint64_t seed = 1;
        std::size_t threads = 1;
        std::string outputDir;
        bool operator==(const Run&) const = default;
    } run;
    struct Validate {
        double level = 0.01;
        bool fingerprint = false;
        bool operator==(const Validate&) const = default;
    } validate;
    struct Pricing {
        double t = 0.0;
        double spot = 0.0;  // 0 means s0
        double target = 10.0;
        bool operator==(const Pricing&) const = default;
    } pricing;
    struct Hedge {
        double nu = 0.2;
        std::size_t rebalances = 12;
        std::string criterion = "mean-square";
        std::vector<double> nuGrid{0.1, 0.15, 0.2, 0.25, 0.3};
        bool operator==(const Hedge&) const = default;
    } hedge;
    struct FP {
        double tMin = 0.1;
        double tMax = 1.0;
        std::size_t nt = 200;
        double xMin = 100.0 / 3.0;
        double xMax = 300.0;
        std::size_t nx = 200;
        std::size_t order = 6;
        double threshold = 1e-4;
        double perturbation = 0.0;
        bool operator==(const FP&) const = default;
    } fp;
    struct Drift {
        double tMin = 0.05;
        double tMax = 1.0;
        std::size_t nt = 10;
        double xMin = 50.0;
        double xMax = 200.0;
        std::size_t nx = 10;
        double y = 100.0;
        double alpha = 0.0;
        double threshold = 1e-6;
        bool operator==(const Drift&) const = default;
    } drift;
    struct Appendix {
        double nu = 30.0;
        std::size_t objectivePaths = 10000;
        std::size_t riskNeutralPaths = 1000000;
        double epsilonOverDelta = 0.01;
        std::size_t subSteps = 100;
        bool operator==(const Appendix&) const = default;
    } appendix;

    bool operator==(const ExperimentConfig&) const = default;

    MarketParams marketParams() const { return {market.mu, market.sigmaBar, market.s0, market.r}; }

    GridSpec gridSpec() const { return {grid.T, grid.N, grid.epsilon, grid.subSteps}; }

    OptionSpec optionSpec() const { return {option.strike, option.maturity}; }

    VolatilitySpec volatilitySpec() const {
        const auto k = parseVolKind(vol.kind);
        if (!k) throw ConfigError("unknown volatility kind '" + vol.kind + "'", 0, "vol.kind");
        if (*k == VolKind::NumericCustom)
            throw ConfigError("custom volatility cannot be set from a config file", 0, "vol.kind");
        return {*k, vol.nu, {}};
    }

    GeneratorConfig generatorConfig() const {
        GeneratorConfig g;
        if (run.generator == "gbm")
            g.kind = GeneratorInfo::Kind::GBM;
        else if (run.generator == "exact-proportional")
            g.kind = GeneratorInfo::Kind::ExactProportional;
        else if (run.generator == "euler")
            g.kind = GeneratorInfo::Kind::Euler;
        else
            throw ConfigError("unknown generator '" + run.generator + "'", 0, "run.generator");
        g.vol = volatilitySpec();
        return g;
    }

    SimOptions simOptions() const {
        SimOptions o;
        o.threads = run.threads;
        if (run.anchor == "rolling")
            o.anchor = AnchorMode::Rolling;
        else if (run.anchor == "fixed-initial")
            o.anchor = AnchorMode::FixedInitial;
        else
            throw ConfigError("unknown anchor mode '" + run.anchor + "'", 0, "run.anchor");
        return o;
    }

    Measure measureKind() const {
        if (run.measure == "objective") return Measure::Objective;
        if (run.measure == "risk-neutral") return Measure::RiskNeutral;
        throw ConfigError("unknown measure '" + run.measure + "'", 0, "run.measure");
    }
};

namespace detail {

/// Calls v(section, key, field&) for every config field in serialization order.
template <class Cfg, class V>
void forEachField(Cfg& c, V&& v) {
    v("market", "mu", c.market.mu);
    v("market", "sigma_bar", c.market.sigmaBar);
    v("market", "s0", c.market.s0);
    v("market", "r", c.market.r);
    v("grid", "T", c.grid.T);
    v("grid", "N", c.grid.N);
    v("grid", "epsilon", c.grid.epsilon);
    v("grid", "sub_steps", c.grid.subSteps);
    v("vol", "kind", c.vol.kind);
    v("vol", "nu", c.vol.nu);
    v("option", "strike", c.option.strike);
    v("option", "maturity", c.option.maturity);
    v("run", "generator", c.run.generator);
    v("run", "anchor", c.run.anchor);
    v("run", "measure", c.run.measure);
    v("run", "n_paths", c.run.nPaths);
    v("run", "seed", c.run.seed);
    v("run", "threads", c.run.threads);
    v("run", "output_dir", c.run.outputDir);
    v("validate", "level", c.validate.level);
    v("validate", "fingerprint", c.validate.fingerprint);
    v("pricing", "t", c.pricing.t);
    v("pricing", "spot", c.pricing.spot);
    v("pricing", "target", c.pricing.target);
    v("hedge", "nu", c.hedge.nu);
    v("hedge", "rebalances", c.hedge.rebalances);
    v("hedge", "criterion", c.hedge.criterion);
    v("hedge", "nu_grid", c.hedge.nuGrid);
    v("fp", "t_min", c.fp.tMin);
    v("fp", "t_max", c.fp.tMax);
    v("fp", "nt", c.fp.nt);
    v("fp", "x_min", c.fp.xMin);
    v("fp", "x_max", c.fp.xMax);
    v("fp", "nx", c.fp.nx);
    v("fp", "order", c.fp.order);
    v("fp", "threshold", c.fp.threshold);
    v("fp", "perturbation", c.fp.perturbation);
    v("drift", "t_min", c.drift.tMin);
    v("drift", "t_max", c.drift.tMax);
    v("drift", "nt", c.drift.nt);
    v("drift", "x_min", c.drift.xMin);
    v("drift", "x_max", c.drift.xMax);
    v("drift", "nx", c.drift.nx);
    v("drift", "y", c.drift.y);
    v("drift", "alpha", c.drift.alpha);
    v("drift", "threshold", c.drift.threshold);
    v("appendix", "nu", c.appendix.nu);
    v("appendix", "objective_paths", c.appendix.objectivePaths);
    v("appendix", "risk_neutral_paths", c.appendix.riskNeutralPaths);
    v("appendix", "epsilon_over_delta", c.appendix.epsilonOverDelta);
    v("appendix", "sub_steps", c.appendix.subSteps);
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string formatDouble(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline double parseDouble(const std::string& s, std::size_t line, const std::string& field) {
    const std::string t = trim(s);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE)
        throw ConfigError("field " + field + ": '" + t + "' is not a number", line, field);
    return v;
}

inline unsigned long long parseUnsigned(const std::string& s, std::size_t line,
                                        const std::string& field) {
    const std::string t = trim(s);
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
    if (t.empty() || t[0] == '-' || end != t.c_str() + t.size() || errno == ERANGE)
        throw ConfigError("field " + field + ": '" + t + "' is not a non-negative integer", line,
                          field);
    return v;
}

struct FieldSetter {
    const std::string& section;
    const std::string& key;
    const std::string& value;
    std::size_t line;
    bool found = false;

    std::string name(const char* s, const char* k) const { return std::string(s) + "." + k; }

    bool matches(const char* s, const char* k) const { return section == s && key == k; }

    void operator()(const char* s, const char* k, double& f) {
        if (!matches(s, k)) return;
        f = parseDouble(value, line, name(s, k));
        found = true;
    }
    template <std::unsigned_integral U>
    void operator()(const char* s, const char* k, U& f) {
        if (!matches(s, k)) return;
        f = static_cast<U>(parseUnsigned(value, line, name(s, k)));
        found = true;
    }
    void operator()(const char* s, const char* k, std::string& f) {
        if (!matches(s, k)) return;
        f = trim(value);
        found = true;
    }
    void operator()(const char* s, const char* k, bool& f) {
        if (!matches(s, k)) return;
        const std::string t = trim(value);
        if (t == "true")
            f = true;
        else if (t == "false")
            f = false;
        else
            throw ConfigError("field " + name(s, k) + ": expected true or false", line, name(s, k));
        found = true;
    }
    void operator()(const char* s, const char* k, std::vector<double>& f) {
        if (!matches(s, k)) return;
        f.clear();
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (trim(item).empty()) continue;
            f.push_back(parseDouble(item, line, name(s, k)));
        }
        found = true;
    }
};

struct FieldWriter {
    std::ostream& os;
    std::string current;

    void header(const char* s) {
        if (current == s) return;
        if (!current.empty()) os << "\n";
        os << "[" << s << "]\n";
        current = s;
    }
    void operator()(const char* s, const char* k, const double& f) {
        header(s);
        os << k << " = " << formatDouble(f) << "\n";
    }
    template <std::unsigned_integral U>
    void operator()(const char* s, const char* k, const U& f) {
        header(s);
        os << k << " = " << f << "\n";
    }
    void operator()(const char* s, const char* k, const std::string& f) {
        header(s);
        os << k << " = " << f << "\n";
    }
    void operator()(const char* s, const char* k, const bool& f) {
        header(s);
        os << k << " = " << (f ? "true" : "false") << "\n";
    }
    void operator()(const char* s, const char* k, const std::vector<double>& f) {
        header(s);
        os << k << " =";
        for (std::size_t i = 0; i < f.size(); ++i) os << (i ? ", " : " ") << formatDouble(f[i]);
        os << "\n";
    }
};

}  // namespace detail

/// Sets one field; `line` is reported in errors (0 for command-line overrides).
inline void setConfigField(ExperimentConfig& cfg, const std::string& section,
                           const std::string& key, const std::string& value, std::size_t line = 0) {
    detail::FieldSetter setter{section, key, value, line};
    detail::forEachField(cfg, setter);
    if (!setter.found)
        throw ConfigError("unknown field " + section + "." + key, line, section + "." + key);
}

/// Applies an override of the form section.key=value.
inline void applyOverride(ExperimentConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw ConfigError("override must look like section.key=value: '" + assignment + "'", 0,
                          assignment);
    setConfigField(cfg, detail::trim(assignment.substr(0, dot)),
                   detail::trim(assignment.substr(dot + 1, eq - dot - 1)), assignment.substr(eq + 1));
}

/// Parses on top of the defaults; fields not mentioned keep their default values.
inline ExperimentConfig parseConfig(std::istream& is) {
    ExperimentConfig cfg;
    std::string raw, section;
    std::size_t line = 0;
    while (std::getline(is, raw)) {
        ++line;
        const auto hash = raw.find_first_of("#;");
        const std::string s = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']' || s.size() < 3)
                throw ConfigError("malformed section header '" + s + "'", line, s);
            section = detail::trim(s.substr(1, s.size() - 2));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value, got '" + s + "'", line, s);
        const std::string key = detail::trim(s.substr(0, eq));
        if (section.empty())
            throw ConfigError("field '" + key + "' appears before any [section]", line, key);
        setConfigField(cfg, section, key, s.substr(eq + 1), line);
    }
    return cfg;
}

inline ExperimentConfig parseConfigString(const std::string& text) {
    std::istringstream is(text);
    return parseConfig(is);
}

inline void writeConfig(std::ostream& os, const ExperimentConfig& cfg) {
    detail::FieldWriter w{os, {}};
    detail::forEachField(cfg, w);
}

inline std::string serializeConfig(const ExperimentConfig& cfg) {
    std::ostringstream os;
    writeConfig(os, cfg);
    return os.str();
}

}  // namespace gridgbm
