#pragma once

/// \file scenario.hpp
/// JSON-driven experiment runner. A config file carries a `schema_version`
/// and a list of scenarios; each scenario names a verification pipeline
/// (kind), a space, an operator, curvature claims, and solver settings.
/// Parsing is strict: unknown fields and missing required fields raise
/// ConfigError naming the offending path. Execution is per-scenario isolated;
/// a failing or throwing scenario never aborts the run.
///
/// Scenarios marked `expected_fail` are negative controls: the run is
/// considered healthy only if they do fail.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "comparison.hpp"
#include "curvature.hpp"
#include "density.hpp"
#include "eigen.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "operators.hpp"
#include "pde.hpp"
#include "report.hpp"
#include "serialize.hpp"
#include "verify.hpp"

namespace qcomp {

enum class ScenarioKind {
    mc_dirichlet,
    mc_neumann,
    decay,
    eigen_dirichlet,
    eigen_neumann,
    supersolution,
    two_point,
    gradient_parabolic,
    gradient_elliptic,
    decay_rate,
};

inline std::string to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::mc_dirichlet: return "mc_dirichlet";
        case ScenarioKind::mc_neumann: return "mc_neumann";
        case ScenarioKind::decay: return "decay";
        case ScenarioKind::eigen_dirichlet: return "eigen_dirichlet";
        case ScenarioKind::eigen_neumann: return "eigen_neumann";
        case ScenarioKind::supersolution: return "supersolution";
        case ScenarioKind::two_point: return "two_point";
        case ScenarioKind::gradient_parabolic: return "gradient_parabolic";
        case ScenarioKind::gradient_elliptic: return "gradient_elliptic";
        case ScenarioKind::decay_rate: return "decay_rate";
    }
    return "?";
}

namespace cfg {

using Json = nlohmann::json;

inline void check_keys(const Json& j, const std::string& path,
                       const std::vector<std::string>& required,
                       const std::vector<std::string>& optional) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    for (const auto& key : required)
        if (!j.contains(key)) throw ConfigError(path + "." + key + ": missing required field");
    for (const auto& item : j.items()) {
        const std::string& key = item.key();
        bool known = false;
        for (const auto& k : required) known = known || k == key;
        for (const auto& k : optional) known = known || k == key;
        if (!known) throw ConfigError(path + "." + key + ": unknown field");
    }
}

inline double num_at(const Json& j, const std::string& path, const std::string& key) {
    const auto& v = j.at(key);
    if (!v.is_number()) throw ConfigError(path + "." + key + ": expected a number");
    return v.get<double>();
}

inline double num_or(const Json& j, const std::string& path, const std::string& key,
                     double dflt) {
    return j.contains(key) ? num_at(j, path, key) : dflt;
}

inline long int_at(const Json& j, const std::string& path, const std::string& key) {
    const auto& v = j.at(key);
    if (!v.is_number_integer()) throw ConfigError(path + "." + key + ": expected an integer");
    return v.get<long>();
}

inline long int_or(const Json& j, const std::string& path, const std::string& key, long dflt) {
    return j.contains(key) ? int_at(j, path, key) : dflt;
}

inline std::string str_at(const Json& j, const std::string& path, const std::string& key) {
    const auto& v = j.at(key);
    if (!v.is_string()) throw ConfigError(path + "." + key + ": expected a string");
    return v.get<std::string>();
}

inline std::string str_or(const Json& j, const std::string& path, const std::string& key,
                          const std::string& dflt) {
    return j.contains(key) ? str_at(j, path, key) : dflt;
}

inline bool bool_or(const Json& j, const std::string& path, const std::string& key, bool dflt) {
    if (!j.contains(key)) return dflt;
    const auto& v = j.at(key);
    if (!v.is_boolean()) throw ConfigError(path + "." + key + ": expected a boolean");
    return v.get<bool>();
}

}  // namespace cfg

/// Symbolic function spec, realized to a Density once the domain length and
/// (for random forms) the run seed are known.
struct FunctionSpec {
    std::string form = "zero";  ///< zero|poly|sin|cos|sinh|cosh|exp|model|sum|random_fourier
    std::vector<double> coeffs;
    double amplitude = 1.0, frequency = 1.0, phase = 0.0;
    double kappa = 0.0, lambda = 0.0, nm1 = 1.0;
    long terms = 3;
    std::vector<FunctionSpec> parts;
};

inline FunctionSpec parse_function(const cfg::Json& j, const std::string& path) {
    FunctionSpec out;
    out.form = cfg::str_at(j, path, "form");
    if (out.form == "zero") {
        cfg::check_keys(j, path, {"form"}, {});
    } else if (out.form == "poly") {
        cfg::check_keys(j, path, {"form", "coeffs"}, {});
        const auto& c = j.at("coeffs");
        if (!c.is_array() || c.empty()) throw ConfigError(path + ".coeffs: expected an array");
        for (const auto& x : c) {
            if (!x.is_number()) throw ConfigError(path + ".coeffs: expected numbers");
            out.coeffs.push_back(x.get<double>());
        }
    } else if (out.form == "sin" || out.form == "cos" || out.form == "sinh" ||
               out.form == "cosh" || out.form == "exp") {
        cfg::check_keys(j, path, {"form"}, {"amplitude", "frequency", "phase"});
        out.amplitude = cfg::num_or(j, path, "amplitude", 1.0);
        out.frequency = cfg::num_or(j, path, "frequency", 1.0);
        out.phase = cfg::num_or(j, path, "phase", 0.0);
    } else if (out.form == "model") {
        cfg::check_keys(j, path, {"form", "kappa", "lambda", "dimension_minus_one"}, {});
        out.kappa = cfg::num_at(j, path, "kappa");
        out.lambda = cfg::num_at(j, path, "lambda");
        out.nm1 = cfg::num_at(j, path, "dimension_minus_one");
    } else if (out.form == "sum") {
        cfg::check_keys(j, path, {"form", "parts"}, {});
        const auto& parts = j.at("parts");
        if (!parts.is_array() || parts.empty())
            throw ConfigError(path + ".parts: expected a nonempty array");
        for (std::size_t i = 0; i < parts.size(); ++i)
            out.parts.push_back(
                parse_function(parts[i], path + ".parts[" + std::to_string(i) + "]"));
    } else if (out.form == "random_fourier") {
        cfg::check_keys(j, path, {"form", "terms", "amplitude"}, {});
        out.terms = cfg::int_at(j, path, "terms");
        out.amplitude = cfg::num_at(j, path, "amplitude");
        if (out.terms < 1) throw ConfigError(path + ".terms: must be at least 1");
    } else {
        throw ConfigError(path + ".form: unknown form '" + out.form + "'");
    }
    return out;
}

/// Realizes a FunctionSpec on [0, L]. Random Fourier sums draw amplitudes
/// a_k in [-A/k^2, A/k^2] and phases in [0, 2 pi) from the supplied engine,
/// with frequencies k pi / L, so every draw stays smooth and the seed fully
/// determines the density.
inline Density realize_function(const FunctionSpec& spec, double L, std::mt19937_64& rng) {
    if (spec.form == "zero") return Density::zero();
    if (spec.form == "poly") return Density::polynomial(spec.coeffs);
    if (spec.form == "sin")
        return Density::elementary(DensityKind::sin, spec.amplitude, spec.frequency, spec.phase);
    if (spec.form == "cos")
        return Density::elementary(DensityKind::cos, spec.amplitude, spec.frequency, spec.phase);
    if (spec.form == "sinh")
        return Density::elementary(DensityKind::sinh, spec.amplitude, spec.frequency, spec.phase);
    if (spec.form == "cosh")
        return Density::elementary(DensityKind::cosh, spec.amplitude, spec.frequency, spec.phase);
    if (spec.form == "exp")
        return Density::elementary(DensityKind::exp, spec.amplitude, spec.frequency, spec.phase);
    if (spec.form == "model") return Density::model(spec.kappa, spec.lambda, spec.nm1);
    if (spec.form == "sum") {
        Density acc = realize_function(spec.parts.front(), L, rng);
        for (std::size_t i = 1; i < spec.parts.size(); ++i)
            acc = acc + realize_function(spec.parts[i], L, rng);
        return acc;
    }
    if (spec.form == "random_fourier") {
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
        Density acc = Density::zero();
        for (long k = 1; k <= spec.terms; ++k) {
            const double a = spec.amplitude * unit(rng) / static_cast<double>(k * k);
            const double th = angle(rng);
            acc = acc + Density::elementary(DensityKind::sin, a,
                                            static_cast<double>(k) * M_PI / L, th);
        }
        return acc;
    }
    throw ConfigError("realize_function: unknown form '" + spec.form + "'");
}

struct SpaceSpec {
    double length = 1.0;
    long m = 200;
    FunctionSpec density;
};

inline SpaceSpec parse_space(const cfg::Json& j, const std::string& path) {
    cfg::check_keys(j, path, {"type", "length", "m", "density"}, {});
    const std::string type = cfg::str_at(j, path, "type");
    if (type != "weighted_interval")
        throw ConfigError(path + ".type: only 'weighted_interval' is supported in schema 1");
    SpaceSpec out;
    out.length = cfg::num_at(j, path, "length");
    out.m = cfg::int_at(j, path, "m");
    out.density = parse_function(j.at("density"), path + ".density");
    if (!(out.length > 0.0)) throw ConfigError(path + ".length: must be positive");
    if (out.m < 32 || out.m % 2 != 0)
        throw ConfigError(path + ".m: must be an even integer >= 32");
    return out;
}

struct CurvatureSpec {
    bool effective = false;
    double kappa = 0.0;
    double lambda = 0.0;
    double bigN = std::numeric_limits<double>::infinity();
};

inline CurvatureSpec parse_curvature(const cfg::Json& j, const std::string& path) {
    CurvatureSpec out;
    const std::string mode = cfg::str_or(j, path, "mode", "explicit");
    if (mode == "effective") {
        cfg::check_keys(j, path, {"mode", "dimension"}, {});
        out.effective = true;
    } else if (mode == "explicit") {
        cfg::check_keys(j, path, {"kappa", "dimension"}, {"mode", "lambda"});
        out.kappa = cfg::num_at(j, path, "kappa");
        out.lambda = cfg::num_or(j, path, "lambda", 0.0);
    } else {
        throw ConfigError(path + ".mode: expected 'explicit' or 'effective'");
    }
    const auto& dim = j.at("dimension");
    if (dim.is_string()) {
        if (dim.get<std::string>() != "inf")
            throw ConfigError(path + ".dimension: expected a number or \"inf\"");
    } else if (dim.is_number()) {
        out.bigN = dim.get<double>();
        if (!(out.bigN > 1.0)) throw ConfigError(path + ".dimension: must exceed 1");
    } else {
        throw ConfigError(path + ".dimension: expected a number or \"inf\"");
    }
    return out;
}

inline CurvatureParams realize_curvature(const CurvatureSpec& spec,
                                         const WeightedInterval& space) {
    if (spec.effective) return effective_bounds(space, spec.bigN);
    CurvatureParams p;
    p.kappa = spec.kappa;
    p.lambda = spec.lambda;
    p.bigN = spec.bigN;
    p.n = 1;
    p.validate();
    return p;
}

struct OperatorSpec {
    std::string name = "laplacian";
    std::map<std::string, double> params;
};

inline OperatorSpec parse_operator(const cfg::Json& j, const std::string& path) {
    cfg::check_keys(j, path, {"name"}, {"params"});
    OperatorSpec out;
    out.name = cfg::str_at(j, path, "name");
    if (j.contains("params")) {
        const auto& p = j.at("params");
        if (!p.is_object()) throw ConfigError(path + ".params: expected an object");
        for (const auto& item : p.items()) {
            if (!item.value().is_number())
                throw ConfigError(path + ".params." + item.key() + ": expected a number");
            out.params[item.key()] = item.value().get<double>();
        }
    }
    return out;
}

struct SolverSpec {
    double dt_factor = 0.25;  ///< dt = dt_factor * h^2
    double t_end = 0.0;
    long snapshots = 10;
    double eps = 1e-8;
    long max_steps = 50000000;
};

inline SolverSpec parse_solver(const cfg::Json& j, const std::string& path) {
    cfg::check_keys(j, path, {"dt_factor"}, {"t_end", "snapshots", "eps", "max_steps"});
    SolverSpec out;
    out.dt_factor = cfg::num_at(j, path, "dt_factor");
    out.t_end = cfg::num_or(j, path, "t_end", 0.0);
    out.snapshots = cfg::int_or(j, path, "snapshots", 10);
    out.eps = cfg::num_or(j, path, "eps", 1e-8);
    out.max_steps = cfg::int_or(j, path, "max_steps", 50000000);
    if (!(out.dt_factor > 0.0)) throw ConfigError(path + ".dt_factor: must be positive");
    if (out.snapshots < 1) throw ConfigError(path + ".snapshots: must be at least 1");
    return out;
}

struct Scenario {
    std::string id;
    ScenarioKind kind = ScenarioKind::two_point;
    std::string theorem;
    bool expected_fail = false;

    SpaceSpec space;
    OperatorSpec op;
    CurvatureSpec curvature;
    SolverSpec solver;
    FunctionSpec initial;
    FunctionSpec barrier;

    bool barrier_from_modulus = false;
    bool flip_barrier_drift = false;
    bool sharp_upper = false;
    double tol_model = 20.0;
    double rel_tol = 1e-4;
    double gamma_override = -1.0;  ///< <= 0: use the operator's homogeneity degree
    long cases = 1;
    bool mixed_bc = false;  ///< eigen_dirichlet: use the one-sided mixed problem on [0, L]
    double barrier_stretch = 1.0;
    double source_value = 1.0;
    double slope_constant = 0.5;
    std::string rate_reference = "fixed";
    double rate_value = 0.0;
    std::string rate_mode = "equals";
    double rate_rel_tol = 0.02;
};

inline ScenarioKind parse_kind(const std::string& s, const std::string& path) {
    for (ScenarioKind k :
         {ScenarioKind::mc_dirichlet, ScenarioKind::mc_neumann, ScenarioKind::decay,
          ScenarioKind::eigen_dirichlet, ScenarioKind::eigen_neumann, ScenarioKind::supersolution,
          ScenarioKind::two_point, ScenarioKind::gradient_parabolic,
          ScenarioKind::gradient_elliptic, ScenarioKind::decay_rate})
        if (to_string(k) == s) return k;
    throw ConfigError(path + ".kind: unknown kind '" + s + "'");
}

inline Scenario parse_scenario(const cfg::Json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    if (!j.contains("id")) throw ConfigError(path + ".id: missing required field");
    if (!j.contains("kind")) throw ConfigError(path + ".kind: missing required field");

    Scenario s;
    s.id = cfg::str_at(j, path, "id");
    s.kind = parse_kind(cfg::str_at(j, path, "kind"), path);
    const std::string p = path + "(" + s.id + ")";
    s.theorem = cfg::str_or(j, p, "theorem", "");
    s.expected_fail = cfg::bool_or(j, p, "expected_fail", false);

    const std::vector<std::string> common = {"id", "kind", "theorem", "expected_fail"};
    auto keys = [&](std::vector<std::string> required, std::vector<std::string> optional) {
        for (const auto& c : common) optional.push_back(c);
        cfg::check_keys(j, p, required, optional);
    };

    switch (s.kind) {
        case ScenarioKind::mc_dirichlet:
        case ScenarioKind::mc_neumann:
            keys({"space", "operator", "curvature", "solver", "initial"},
                 {"barrier_initial", "barrier_from_modulus", "tolerance_model",
                  "flip_barrier_drift"});
            s.space = parse_space(j.at("space"), p + ".space");
            s.op = parse_operator(j.at("operator"), p + ".operator");
            s.curvature = parse_curvature(j.at("curvature"), p + ".curvature");
            s.solver = parse_solver(j.at("solver"), p + ".solver");
            s.initial = parse_function(j.at("initial"), p + ".initial");
            s.barrier_from_modulus = cfg::bool_or(j, p, "barrier_from_modulus", false);
            if (j.contains("barrier_initial") == s.barrier_from_modulus)
                throw ConfigError(p + ": provide exactly one of barrier_initial / "
                                      "barrier_from_modulus");
            if (j.contains("barrier_initial"))
                s.barrier = parse_function(j.at("barrier_initial"), p + ".barrier_initial");
            s.tol_model = cfg::num_or(j, p, "tolerance_model", 20.0);
            s.flip_barrier_drift = cfg::bool_or(j, p, "flip_barrier_drift", false);
            if (!(s.solver.t_end > 0.0)) throw ConfigError(p + ".solver.t_end: must be positive");
            break;

        case ScenarioKind::decay:
            keys({"space", "operator", "curvature", "solver"},
                 {"tolerance_model", "sharp_upper"});
            s.space = parse_space(j.at("space"), p + ".space");
            s.op = parse_operator(j.at("operator"), p + ".operator");
            s.curvature = parse_curvature(j.at("curvature"), p + ".curvature");
            s.solver = parse_solver(j.at("solver"), p + ".solver");
            s.tol_model = cfg::num_or(j, p, "tolerance_model", 20.0);
            s.sharp_upper = cfg::bool_or(j, p, "sharp_upper", false);
            if (!(s.solver.t_end > 0.0)) throw ConfigError(p + ".solver.t_end: must be positive");
            break;

        case ScenarioKind::eigen_dirichlet:
        case ScenarioKind::eigen_neumann:
            keys({"space", "operator", "curvature"}, {"rel_tol", "gamma", "cases", "mixed_bc"});
            s.space = parse_space(j.at("space"), p + ".space");
            s.op = parse_operator(j.at("operator"), p + ".operator");
            s.curvature = parse_curvature(j.at("curvature"), p + ".curvature");
            s.rel_tol = cfg::num_or(j, p, "rel_tol", 1e-4);
            s.gamma_override = cfg::num_or(j, p, "gamma", -1.0);
            s.cases = cfg::int_or(j, p, "cases", 1);
            s.mixed_bc = cfg::bool_or(j, p, "mixed_bc", false);
            if (s.cases < 1) throw ConfigError(p + ".cases: must be at least 1");
            if (s.mixed_bc && s.kind != ScenarioKind::eigen_dirichlet)
                throw ConfigError(p + ".mixed_bc: only valid for eigen_dirichlet");
            break;

        case ScenarioKind::supersolution:
            keys({"space", "operator", "curvature", "barrier"}, {});
            s.space = parse_space(j.at("space"), p + ".space");
            s.op = parse_operator(j.at("operator"), p + ".operator");
            s.curvature = parse_curvature(j.at("curvature"), p + ".curvature");
            s.barrier = parse_function(j.at("barrier"), p + ".barrier");
            break;

        case ScenarioKind::two_point:
            keys({"space", "curvature"}, {});
            s.space = parse_space(j.at("space"), p + ".space");
            s.curvature = parse_curvature(j.at("curvature"), p + ".curvature");
            break;

        case ScenarioKind::gradient_parabolic:
            keys({"space", "operator", "curvature", "solver", "initial"},
                 {"tolerance_model", "barrier_stretch"});
            s.space = parse_space(j.at("space"), p + ".space");
            s.op = parse_operator(j.at("operator"), p + ".operator");
            s.curvature = parse_curvature(j.at("curvature"), p + ".curvature");
            s.solver = parse_solver(j.at("solver"), p + ".solver");
            s.initial = parse_function(j.at("initial"), p + ".initial");
            s.tol_model = cfg::num_or(j, p, "tolerance_model", 20.0);
            s.barrier_stretch = cfg::num_or(j, p, "barrier_stretch", 1.0);
            if (!(s.barrier_stretch > 0.0 && s.barrier_stretch <= 1.0))
                throw ConfigError(p + ".barrier_stretch: must lie in (0, 1]");
            if (!(s.solver.t_end > 0.0)) throw ConfigError(p + ".solver.t_end: must be positive");
            break;

        case ScenarioKind::gradient_elliptic:
            keys({"space", "operator", "curvature", "solver", "source_value",
                  "slope_constant"},
                 {"tolerance_model", "barrier_stretch"});
            s.space = parse_space(j.at("space"), p + ".space");
            s.op = parse_operator(j.at("operator"), p + ".operator");
            s.curvature = parse_curvature(j.at("curvature"), p + ".curvature");
            s.solver = parse_solver(j.at("solver"), p + ".solver");
            s.source_value = cfg::num_at(j, p, "source_value");
            s.slope_constant = cfg::num_at(j, p, "slope_constant");
            s.tol_model = cfg::num_or(j, p, "tolerance_model", 20.0);
            s.barrier_stretch = cfg::num_or(j, p, "barrier_stretch", 1.0);
            if (!(s.barrier_stretch > 0.0 && s.barrier_stretch <= 1.0))
                throw ConfigError(p + ".barrier_stretch: must lie in (0, 1]");
            if (!(s.source_value > 0.0)) throw ConfigError(p + ".source_value: must be positive");
            break;

        case ScenarioKind::decay_rate: {
            keys({"space", "operator", "solver", "initial", "reference"},
                 {"mode", "rel_tol", "curvature"});
            s.space = parse_space(j.at("space"), p + ".space");
            s.op = parse_operator(j.at("operator"), p + ".operator");
            s.solver = parse_solver(j.at("solver"), p + ".solver");
            s.initial = parse_function(j.at("initial"), p + ".initial");
            const auto& ref = j.at("reference");
            cfg::check_keys(ref, p + ".reference", {"kind"}, {"value"});
            s.rate_reference = cfg::str_at(ref, p + ".reference", "kind");
            if (s.rate_reference == "fixed") {
                if (!ref.contains("value"))
                    throw ConfigError(p + ".reference.value: missing required field");
                s.rate_value = cfg::num_at(ref, p + ".reference", "value");
            } else if (s.rate_reference == "model_eigen") {
                if (!j.contains("curvature"))
                    throw ConfigError(p + ".curvature: required when reference is model_eigen");
            } else {
                throw ConfigError(p + ".reference.kind: expected 'fixed' or 'model_eigen'");
            }
            if (j.contains("curvature"))
                s.curvature = parse_curvature(j.at("curvature"), p + ".curvature");
            s.rate_mode = cfg::str_or(j, p, "mode", "equals");
            if (s.rate_mode != "equals" && s.rate_mode != "at_least")
                throw ConfigError(p + ".mode: expected 'equals' or 'at_least'");
            s.rate_rel_tol = cfg::num_or(j, p, "rel_tol", 0.02);
            if (!(s.solver.t_end > 0.0)) throw ConfigError(p + ".solver.t_end: must be positive");
            break;
        }
    }
    return s;
}

struct RunConfig {
    std::vector<Scenario> scenarios;
};

/// Parses a full config document. `source` names the file in error messages.
inline RunConfig parse_config(const std::string& text, const std::string& source = "config") {
    cfg::Json j;
    try {
        j = cfg::Json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(source + ": " + e.what());
    }
    cfg::check_keys(j, source, {"schema_version", "scenarios"}, {});
    if (!j.at("schema_version").is_number_integer() || j.at("schema_version").get<long>() != 1)
        throw ConfigError(source + ".schema_version: expected 1");
    const auto& arr = j.at("scenarios");
    if (!arr.is_array()) throw ConfigError(source + ".scenarios: expected an array");

    RunConfig out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        Scenario s =
            parse_scenario(arr[i], source + ".scenarios[" + std::to_string(i) + "]");
        if (!seen.insert(s.id).second)
            throw ConfigError(source + ".scenarios[" + std::to_string(i) + "].id: duplicate id '" +
                              s.id + "'");
        out.scenarios.push_back(std::move(s));
    }
    return out;
}

/// Result of one executed scenario; artifacts are (filename, content) pairs
/// written later by a single collector so reports stay deterministic.
struct ScenarioOutcome {
    std::string id;
    std::string kind;
    std::string theorem;
    bool expected_fail = false;
    bool passed = false;
    std::string error;
    std::vector<CheckReport> checks;
    std::vector<HypothesisReport> hypothesis_reports;
    std::vector<std::pair<std::string, std::string>> artifacts;

    bool failed() const { return !error.empty() || !passed; }
    /// A control is healthy when it fails; a regular scenario when it passes.
    bool outcome_ok() const { return expected_fail ? failed() : !failed(); }

    /// Largest violation across checks and hypothesis sub-checks.
    double worst_violation() const {
        double w = -std::numeric_limits<double>::infinity();
        for (const auto& c : checks) w = std::max(w, c.worst_violation);
        for (const auto& h : hypothesis_reports)
            for (const auto& c : h.hypotheses) w = std::max(w, c.worst_violation);
        return w;
    }
};

namespace detail {

inline SolverConfig make_solver_config(const SolverSpec& spec, double h) {
    SolverConfig cfg;
    cfg.dt = spec.dt_factor * h * h;
    cfg.eps = spec.eps;
    cfg.t_end = spec.t_end;
    cfg.max_steps = spec.max_steps;
    const long n_steps = (long)std::ceil(spec.t_end / cfg.dt - 1e-12);
    cfg.snapshot_every = std::max<long>(1, n_steps / spec.snapshots);
    return cfg;
}

/// Model drift -(N-1) T_{kappa,lambda}(s), or -kappa s when N is infinite.
inline std::function<double(double)> model_drift(const CurvatureParams& params, bool zero_lambda,
                                                 bool flip) {
    const double sign = flip ? -1.0 : 1.0;
    const double kappa = params.kappa;
    const double lambda = zero_lambda ? 0.0 : params.lambda;
    if (params.infinite_N()) {
        if (lambda != 0.0)
            throw InvalidParameter("model_drift: N = infinity requires lambda = 0");
        return [=](double s) { return sign * (-kappa * s); };
    }
    const double nm1 = params.bigN - 1.0;
    return [=](double s) { return sign * (-nm1 * t_kappa_lambda(kappa, lambda, s)); };
}

inline double resolve_gamma(const Scenario& scn, const IsotropicOperator& op) {
    if (scn.gamma_override > 0.0) return scn.gamma_override;
    if (op.gamma) return *op.gamma;
    throw InvalidParameter("scenario '" + scn.id +
                           "': operator has no homogeneity degree; set gamma explicitly");
}

inline void run_mc(const Scenario& scn, std::uint64_t seed, ScenarioOutcome& out) {
    const bool dirichlet = scn.kind == ScenarioKind::mc_dirichlet;
    std::mt19937_64 rng(seed);
    WeightedInterval wi{scn.space.length, realize_function(scn.space.density, scn.space.length, rng),
                        static_cast<int>(scn.space.m)};
    wi.validate();
    const IsotropicOperator op = catalog(scn.op.name, scn.op.params);
    const CurvatureParams params = realize_curvature(scn.curvature, wi);

    const Density u0 = realize_function(scn.initial, wi.length, rng);
    Field1D field = make_field(wi, [&](double s) { return u0(s); },
                               dirichlet ? FieldBC::dirichlet_zero() : FieldBC::neumann_zero());
    const SolverConfig cfg = make_solver_config(scn.solver, wi.h());
    const Trajectory traj = solve_parabolic(field, op, SourceTerm::zero(), cfg);

    const int mb = static_cast<int>(scn.space.m / 2);
    const auto bgrid = uniform_grid(0.0, 0.5 * wi.length, mb);
    std::vector<double> phi0(bgrid.size());
    if (scn.barrier_from_modulus) {
        const ModulusCurve mc0 = modulus_of_continuity(traj.front());
        for (std::size_t i = 0; i < bgrid.size(); ++i) phi0[i] = mc0.omega[2 * i];
    } else {
        const Density phi_fn = realize_function(scn.barrier, wi.length, rng);
        for (std::size_t i = 0; i < bgrid.size(); ++i) phi0[i] = phi_fn(bgrid[i]);
    }

    // Both theorems leave the barrier free at s = L/2; numerically the right
    // end must stay compatible with the barrier's own evolution.  Dirichlet
    // barriers flatten at L/2, so a mirrored zero-slope ghost is exact there;
    // Neumann barriers keep a nonzero slope, so hold the initial one instead.
    auto drift_b = model_drift(params, !dirichlet, scn.flip_barrier_drift);
    const double hb = bgrid[1] - bgrid[0];
    ProfileBC bbc = dirichlet ? ProfileBC::pinned_neumann() : ProfileBC::free_ends();
    bbc.pinned_left = true;
    ComparisonProfile prof =
        evolve_profile(op, drift_b, SourceTerm::zero(), bgrid, phi0, bbc,
                       scn.solver.dt_factor * hb * hb, scn.solver.t_end, scn.solver.eps);
    // Admissibility is always judged against the theorem's drift; with
    // flip_barrier_drift the table was evolved under the wrong sign and the
    // differential inequality check must catch it.
    prof.drift = model_drift(params, !dirichlet, false);

    HypothesisReport adm = check_profile_admissible(
        prof, dirichlet ? ForTheorem::MC_Dirichlet : ForTheorem::MC_Neumann);
    CheckReport mc = check_mc_dominated(traj, prof, scn.tol_model);

    out.hypothesis_reports.push_back(std::move(adm));
    out.checks.push_back(std::move(mc));
    out.artifacts.emplace_back(scn.id + "_trajectory.csv", trajectory_csv(traj));
    out.artifacts.emplace_back(scn.id + "_barrier.csv", profile_csv(prof));
    const ModulusCurve mc_end = modulus_of_continuity(traj.back());
    out.artifacts.emplace_back(scn.id + "_modulus.dat",
                               plot_data({"s", "omega"}, {mc_end.s_grid, mc_end.omega}));
}

inline void run_decay(const Scenario& scn, std::uint64_t seed, ScenarioOutcome& out) {
    std::mt19937_64 rng(seed);
    WeightedInterval wi{scn.space.length, realize_function(scn.space.density, scn.space.length, rng),
                        static_cast<int>(scn.space.m)};
    wi.validate();
    const IsotropicOperator op = catalog(scn.op.name, scn.op.params);
    if (!op.gamma || *op.gamma != 1.0)
        throw InvalidParameter("decay scenario requires a 1-homogeneous operator");
    const CurvatureParams params = realize_curvature(scn.curvature, wi);

    const double R = 0.5 * wi.length;
    const EigenResult eig = shoot_1d_model(op, params, R, 1.0);
    // Sample the barrier with the same piecewise-linear interpolant the decay
    // check uses, so u0 <= phi0(d) holds exactly at every grid node.
    auto u0 = [&](double s) {
        const double d = std::clamp(std::min(s, wi.length - s), 0.0, R);
        const double he = eig.s[1] - eig.s[0];
        const std::size_t j =
            std::min(static_cast<std::size_t>(d / he), eig.s.size() - 2);
        const double w = (d - eig.s[j]) / he;
        return (1.0 - w) * eig.phi[j] + w * eig.phi[j + 1];
    };
    Field1D field = make_field(wi, u0, FieldBC::dirichlet_zero());
    const SolverConfig cfg = make_solver_config(scn.solver, wi.h());
    const Trajectory traj = solve_parabolic(field, op, SourceTerm::zero(), cfg);

    ComparisonProfile prof;
    prof.s_grid = eig.s;
    prof.bc = ProfileBC::pinned_neumann();
    prof.op = op;
    prof.drift = model_drift(params, false, false);
    prof.dt_scheme = 0.0;
    for (const auto& snap : traj) {
        const double factor = std::exp(-eig.lambda * snap.time);
        prof.t_grid.push_back(snap.time);
        std::vector<double> row(eig.s.size()), drow(eig.s.size());
        for (std::size_t i = 0; i < eig.s.size(); ++i) {
            row[i] = factor * eig.phi[i];
            drow[i] = factor * eig.dphi[i];
        }
        prof.values.push_back(std::move(row));
        prof.phi_s.push_back(std::move(drow));
    }

    CheckReport decay = check_decay(traj, prof, wi, scn.tol_model);
    decay.metadata["lambda_model"] = eig.lambda;
    const double tol = decay.tolerance_used;
    out.checks.push_back(decay);
    if (scn.sharp_upper) {
        CheckReport sharp;
        sharp.name = "decay_sharpness";
        sharp.worst_violation = -decay.worst_violation - 5.0 * tol;
        sharp.worst_location = decay.worst_location;
        sharp.metadata["slack_bound"] = 5.0 * tol;
        sharp.tolerance_used = 0.0;
        sharp.finalize();
        out.checks.push_back(std::move(sharp));
    }

    out.artifacts.emplace_back(scn.id + "_trajectory.csv", trajectory_csv(traj));
    out.artifacts.emplace_back(scn.id + "_barrier.csv", profile_csv(prof));
    std::vector<double> ts, lognorm;
    for (const auto& snap : traj) {
        double m = 0.0;
        for (double v : snap.values) m = std::max(m, std::abs(v));
        if (m > 0.0) {
            ts.push_back(snap.time);
            lognorm.push_back(std::log(m));
        }
    }
    out.artifacts.emplace_back(scn.id + "_supnorm.dat",
                               plot_data({"t", "log_sup_norm"}, {ts, lognorm}));
}

inline void run_eigen(const Scenario& scn, std::uint64_t seed, ScenarioOutcome& out) {
    const bool dirichlet = scn.kind == ScenarioKind::eigen_dirichlet;
    const IsotropicOperator op = catalog(scn.op.name, scn.op.params);
    const double gamma = resolve_gamma(scn, op);

    for (long c = 0; c < scn.cases; ++c) {
        std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(c));
        WeightedInterval wi{scn.space.length,
                            realize_function(scn.space.density, scn.space.length, rng),
                            static_cast<int>(scn.space.m)};
        wi.validate();
        CurvatureParams params = realize_curvature(scn.curvature, wi);

        const EigenBC bc = !dirichlet  ? EigenBC::neumann_both
                           : scn.mixed_bc ? EigenBC::dirichlet_left_neumann_right
                                          : EigenBC::dirichlet_both;
        const EigenResult lam_space = shoot_weighted_interval(op, wi, bc, gamma);
        EigenResult lam_model;
        if (dirichlet) {
            // Two-sided Dirichlet has inradius L/2; the mixed problem models
            // the full distance range [0, L] itself.
            lam_model = shoot_1d_model(op, params, scn.mixed_bc ? wi.length : 0.5 * wi.length,
                                       gamma);
        } else {
            CurvatureParams np = params;
            np.lambda = 0.0;
            lam_model = neumann_1d_model(op, np, wi.length, gamma);
        }

        CheckReport rep = check_eigen_comparison(lam_space, lam_model, scn.rel_tol);
        rep.metadata["kappa"] = params.kappa;
        rep.metadata["lambda_bound"] = params.lambda;
        if (scn.cases > 1) rep.name += "_case" + std::to_string(c);
        out.checks.push_back(std::move(rep));
        if (c == 0) {
            out.artifacts.emplace_back(scn.id + "_eigen_space.csv", eigen_csv(lam_space));
            out.artifacts.emplace_back(scn.id + "_eigen_model.csv", eigen_csv(lam_model));
        }
    }
}

inline void run_supersolution(const Scenario& scn, std::uint64_t seed, ScenarioOutcome& out) {
    std::mt19937_64 rng(seed);
    WeightedInterval wi{scn.space.length, realize_function(scn.space.density, scn.space.length, rng),
                        static_cast<int>(scn.space.m)};
    wi.validate();
    const IsotropicOperator op = catalog(scn.op.name, scn.op.params);
    const CurvatureParams params = realize_curvature(scn.curvature, wi);
    const Density phi_fn = realize_function(scn.barrier, wi.length, rng);

    const int mb = std::max(16, static_cast<int>(scn.space.m / 2));
    const auto bgrid = uniform_grid(0.0, 0.5 * wi.length, mb);
    ComparisonProfile prof;
    prof.s_grid = bgrid;
    prof.t_grid = {0.0};
    prof.values.emplace_back(bgrid.size());
    prof.phi_s.emplace_back(bgrid.size());
    for (std::size_t i = 0; i < bgrid.size(); ++i) {
        prof.values[0][i] = phi_fn(bgrid[i]);
        prof.phi_s[0][i] = phi_fn.d1(bgrid[i]);
    }
    prof.bc = ProfileBC::free_ends();
    prof.op = op;
    prof.dt_scheme = 0.0;

    out.checks.push_back(check_supersolution_boundary(prof, wi, op, params));
    out.artifacts.emplace_back(scn.id + "_barrier.csv", profile_csv(prof));
}

inline void run_two_point(const Scenario& scn, std::uint64_t seed, ScenarioOutcome& out) {
    std::mt19937_64 rng(seed);
    WeightedInterval wi{scn.space.length, realize_function(scn.space.density, scn.space.length, rng),
                        static_cast<int>(scn.space.m)};
    wi.validate();
    const CurvatureParams params = realize_curvature(scn.curvature, wi);
    out.checks.push_back(check_two_point_drift(wi, params));
}

inline void run_gradient_parabolic(const Scenario& scn, std::uint64_t seed,
                                   ScenarioOutcome& out) {
    std::mt19937_64 rng(seed);
    WeightedInterval wi{scn.space.length, realize_function(scn.space.density, scn.space.length, rng),
                        static_cast<int>(scn.space.m)};
    wi.validate();
    const IsotropicOperator op = catalog(scn.op.name, scn.op.params);
    const CurvatureParams params = realize_curvature(scn.curvature, wi);
    if (!params.infinite_N())
        throw InvalidParameter("gradient_parabolic: curvature dimension must be \"inf\"");
    if (params.kappa > 0.0)
        throw InvalidParameter("gradient_parabolic: requires kappa <= 0");

    const Density u0 = realize_function(scn.initial, wi.length, rng);
    Field1D field = make_field(wi, [&](double s) { return u0(s); }, FieldBC::neumann_zero());
    const SolverConfig cfg = make_solver_config(scn.solver, wi.h());
    const Trajectory traj = solve_parabolic(field, op, SourceTerm::zero(), cfg);

    const double a = scn.barrier_stretch;
    const auto bgrid = uniform_grid(0.0, wi.length / a, static_cast<int>(scn.space.m));
    std::vector<double> phi0(bgrid.size());
    for (std::size_t i = 0; i < bgrid.size(); ++i)
        phi0[i] = u0(std::min(a * bgrid[i], wi.length));
    const double kappa = params.kappa;
    auto drift_b = [kappa](double s) { return -kappa * s; };
    const double hb = bgrid[1] - bgrid[0];
    ComparisonProfile prof =
        evolve_profile(op, drift_b, SourceTerm::zero(), bgrid, phi0, ProfileBC::free_ends(),
                       scn.solver.dt_factor * hb * hb, scn.solver.t_end, scn.solver.eps);

    const InverseProfile inv = invert_profile(prof);
    const double tol = scn.tol_model * (wi.h() + cfg.dt);
    out.checks.push_back(check_gradient_bound(traj, inv, tol));
    out.artifacts.emplace_back(scn.id + "_trajectory.csv", trajectory_csv(traj));
    out.artifacts.emplace_back(scn.id + "_barrier.csv", profile_csv(prof));
}

inline void run_gradient_elliptic(const Scenario& scn, std::uint64_t seed,
                                  ScenarioOutcome& out) {
    std::mt19937_64 rng(seed);
    WeightedInterval wi{scn.space.length, realize_function(scn.space.density, scn.space.length, rng),
                        static_cast<int>(scn.space.m)};
    wi.validate();
    const IsotropicOperator op = catalog(scn.op.name, scn.op.params);
    const CurvatureParams params = realize_curvature(scn.curvature, wi);
    if (!params.infinite_N())
        throw InvalidParameter("gradient_elliptic: curvature dimension must be \"inf\"");

    SourceTerm b;
    const double bval = scn.source_value;
    b.b = [bval](double, double) { return bval; };
    SolverConfig cfg = make_solver_config(scn.solver, wi.h());
    cfg.t_end = 0.0;
    const Field1D u = solve_elliptic(op, b, wi, FieldBC::dirichlet_zero(), cfg);

    double lo = u.values[0], hi = u.values[0];
    for (double v : u.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    ComparisonProfile prof = barrier_elliptic(op, b, params.kappa, {lo, hi}, scn.slope_constant);
    if (scn.barrier_stretch < 1.0) {
        const double a = scn.barrier_stretch;
        for (double& s : prof.s_grid) s /= a;
        for (double& g : prof.phi_s[0]) g *= a;
    }

    const InverseProfile inv = invert_profile(prof);
    const double tol = scn.tol_model * (wi.h() + cfg.dt);
    Trajectory traj = {u};
    out.checks.push_back(check_gradient_bound(traj, inv, tol));
    out.artifacts.emplace_back(scn.id + "_solution.csv", trajectory_csv(traj));
    out.artifacts.emplace_back(scn.id + "_barrier.csv", profile_csv(prof));
}

inline void run_decay_rate(const Scenario& scn, std::uint64_t seed, ScenarioOutcome& out) {
    std::mt19937_64 rng(seed);
    WeightedInterval wi{scn.space.length, realize_function(scn.space.density, scn.space.length, rng),
                        static_cast<int>(scn.space.m)};
    wi.validate();
    const IsotropicOperator op = catalog(scn.op.name, scn.op.params);

    const Density u0 = realize_function(scn.initial, wi.length, rng);
    Field1D field = make_field(wi, [&](double s) { return u0(s); }, FieldBC::dirichlet_zero());
    const SolverConfig cfg = make_solver_config(scn.solver, wi.h());
    const Trajectory traj = solve_parabolic(field, op, SourceTerm::zero(), cfg);
    const double rate = decay_rate_estimate(traj);

    double ref = scn.rate_value;
    if (scn.rate_reference == "model_eigen") {
        const CurvatureParams params = realize_curvature(scn.curvature, wi);
        if (!op.gamma || *op.gamma != 1.0)
            throw InvalidParameter("decay_rate: model_eigen reference requires gamma = 1");
        ref = shoot_1d_model(op, params, 0.5 * wi.length, 1.0).lambda;
    }

    CheckReport rep;
    rep.name = "decay_rate_" + scn.rate_mode;
    rep.metadata["rate"] = rate;
    rep.metadata["reference"] = ref;
    if (scn.rate_mode == "equals") {
        rep.worst_violation = std::abs(rate - ref) / ref;
        rep.tolerance_used = scn.rate_rel_tol;
    } else {
        rep.worst_violation = (ref * (1.0 - scn.rate_rel_tol) - rate) / ref;
        rep.tolerance_used = 0.0;
    }
    rep.finalize();
    out.checks.push_back(std::move(rep));

    std::vector<double> ts, lognorm;
    for (const auto& snap : traj) {
        double m = 0.0;
        for (double v : snap.values) m = std::max(m, std::abs(v));
        if (m > 0.0) {
            ts.push_back(snap.time);
            lognorm.push_back(std::log(m));
        }
    }
    out.artifacts.emplace_back(scn.id + "_supnorm.dat",
                               plot_data({"t", "log_sup_norm"}, {ts, lognorm}));
}

}  // namespace detail

/// Executes one scenario. Never throws: pipeline errors are captured into the
/// outcome so a bad scenario cannot abort the run.
inline ScenarioOutcome run_scenario(const Scenario& scn, std::uint64_t seed) {
    ScenarioOutcome out;
    out.id = scn.id;
    out.kind = to_string(scn.kind);
    out.theorem = scn.theorem;
    out.expected_fail = scn.expected_fail;
    try {
        switch (scn.kind) {
            case ScenarioKind::mc_dirichlet:
            case ScenarioKind::mc_neumann: detail::run_mc(scn, seed, out); break;
            case ScenarioKind::decay: detail::run_decay(scn, seed, out); break;
            case ScenarioKind::eigen_dirichlet:
            case ScenarioKind::eigen_neumann: detail::run_eigen(scn, seed, out); break;
            case ScenarioKind::supersolution: detail::run_supersolution(scn, seed, out); break;
            case ScenarioKind::two_point: detail::run_two_point(scn, seed, out); break;
            case ScenarioKind::gradient_parabolic:
                detail::run_gradient_parabolic(scn, seed, out);
                break;
            case ScenarioKind::gradient_elliptic:
                detail::run_gradient_elliptic(scn, seed, out);
                break;
            case ScenarioKind::decay_rate: detail::run_decay_rate(scn, seed, out); break;
        }
        out.passed = true;
        for (const auto& c : out.checks) out.passed = out.passed && c.passed;
        for (const auto& h : out.hypothesis_reports) out.passed = out.passed && h.passed;
    } catch (const std::exception& e) {
        out.error = e.what();
        out.passed = false;
    }
    return out;
}

/// Per-scenario report document.
inline JsonValue outcome_to_json(const ScenarioOutcome& out) {
    JsonValue o = JsonValue::object();
    o.set("id", out.id);
    o.set("kind", out.kind);
    if (!out.theorem.empty()) o.set("theorem", out.theorem);
    o.set("expected_fail", out.expected_fail);
    o.set("passed", out.passed);
    o.set("outcome_ok", out.outcome_ok());
    if (!out.error.empty()) o.set("error", out.error);
    if (!out.checks.empty()) {
        JsonValue checks = JsonValue::array();
        for (const auto& c : out.checks) checks.push(to_json(c));
        o.set("checks", std::move(checks));
    }
    if (!out.hypothesis_reports.empty()) {
        JsonValue hyps = JsonValue::array();
        for (const auto& h : out.hypothesis_reports) hyps.push(to_json(h));
        o.set("hypothesis_reports", std::move(hyps));
    }
    return o;
}

/// Runs every scenario, at most `jobs` concurrently, preserving config order
/// in the returned list.
inline std::vector<ScenarioOutcome> run_all(const RunConfig& config, std::uint64_t seed,
                                            int jobs) {
    const std::size_t n = config.scenarios.size();
    std::vector<ScenarioOutcome> outcomes(n);
    if (jobs < 1) jobs = 1;
    std::size_t next = 0;
    while (next < n) {
        const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(jobs), n - next);
        std::vector<std::future<ScenarioOutcome>> futures;
        futures.reserve(batch);
        for (std::size_t k = 0; k < batch; ++k) {
            const Scenario* scn = &config.scenarios[next + k];
            futures.push_back(std::async(std::launch::async,
                                         [scn, seed]() { return run_scenario(*scn, seed); }));
        }
        for (std::size_t k = 0; k < batch; ++k) outcomes[next + k] = futures[k].get();
        next += batch;
    }
    return outcomes;
}

/// Run-level summary document.
inline JsonValue summary_to_json(const std::vector<ScenarioOutcome>& outcomes) {
    JsonValue doc = JsonValue::object();
    doc.set("schema_version", JsonValue::number(1.0));
    bool all_ok = true;
    JsonValue rows = JsonValue::array();
    for (const auto& out : outcomes) {
        all_ok = all_ok && out.outcome_ok();
        JsonValue row = JsonValue::object();
        row.set("id", out.id);
        row.set("kind", out.kind);
        row.set("expected_fail", out.expected_fail);
        row.set("passed", out.passed);
        row.set("outcome_ok", out.outcome_ok());
        if (!out.error.empty()) row.set("error", out.error);
        if (!out.checks.empty() || !out.hypothesis_reports.empty())
            row.set("worst_violation", out.worst_violation());
        rows.push(std::move(row));
    }
    doc.set("all_ok", all_ok);
    doc.set("scenarios", std::move(rows));
    return doc;
}

inline std::string summary_csv(const std::vector<ScenarioOutcome>& outcomes) {
    std::string out = "id,kind,expected_fail,passed,outcome_ok,worst_violation\n";
    for (const auto& o : outcomes) {
        out += o.id;
        out.push_back(',');
        out += o.kind;
        out.push_back(',');
        out += o.expected_fail ? "true" : "false";
        out.push_back(',');
        out += o.passed ? "true" : "false";
        out.push_back(',');
        out += o.outcome_ok() ? "true" : "false";
        out.push_back(',');
        const double w = o.worst_violation();
        out += std::isfinite(w) ? fmt_g17(w) : std::string("");
        out.push_back('\n');
    }
    return out;
}

}  // namespace qcomp
