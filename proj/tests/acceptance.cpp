/// Acceptance gate for the comparison toolkit. Runs ten end-to-end criteria
/// covering the eigenvalue solvers, the comparison flows, the barrier checks,
/// and the randomized property battery, printing one [PASS]/[FAIL] line per
/// criterion. Exit status is zero exactly when every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <qcomp/curvature.hpp>
#include <qcomp/density.hpp>
#include <qcomp/eigen.hpp>
#include <qcomp/geometry.hpp>
#include <qcomp/operators.hpp>
#include <qcomp/pde.hpp>
#include <qcomp/scenario.hpp>
#include <qcomp/serialize.hpp>
#include <qcomp/verify.hpp>

#include "property_battery.hpp"

using namespace qcomp;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return std::string(buf);
}

CurvatureParams curv(double kappa, double lambda, double bigN) {
    CurvatureParams p;
    p.kappa = kappa;
    p.lambda = lambda;
    p.bigN = bigN;
    p.n = 1;
    return p;
}

WeightedInterval interval(double L, long m, Density f) {
    WeightedInterval wi;
    wi.length = L;
    wi.m = m;
    wi.density = std::move(f);
    return wi;
}

Scenario parse_one(const std::string& scenario_json) {
    const std::string doc =
        std::string("{ \"schema_version\": 1, \"scenarios\": [") + scenario_json + "] }";
    return parse_config(doc).scenarios.front();
}

double check_worst(const ScenarioOutcome& out, const std::string& name) {
    for (const auto& c : out.checks)
        if (c.name == name) return c.worst_violation;
    return std::numeric_limits<double>::quiet_NaN();
}

bool has_metadata(const ScenarioOutcome& out, const std::string& key) {
    for (const auto& c : out.checks)
        for (const auto& kv : c.metadata)
            if (kv.first == key) return true;
    return false;
}

/// Criterion 1: flat-space eigenvalue anchors against closed forms.
bool criterion1(std::string& text) {
    const auto lap = catalog("laplacian");
    bool ok = true;
    double worst = 0.0, slowest = 0.0;
    auto probe = [&](double lambda, double ref, double secs) {
        const double rel = std::abs(lambda - ref) / ref;
        worst = std::max(worst, rel);
        slowest = std::max(slowest, secs);
        ok = ok && rel <= 1e-6 && secs < 1.0;
    };

    auto t0 = Clock::now();
    probe(shoot_1d_model(lap, curv(0.0, 0.0, 3.0), 1.0, 1.0).lambda, M_PI * M_PI / 4.0,
          seconds_since(t0));
    t0 = Clock::now();
    probe(shoot_weighted_interval(lap, interval(M_PI, 200, Density::zero()),
                                  EigenBC::dirichlet_both, 1.0)
              .lambda,
          1.0, seconds_since(t0));
    t0 = Clock::now();
    probe(neumann_1d_model(lap, curv(0.0, 0.0, 3.0), M_PI, 1.0).lambda, 1.0,
          seconds_since(t0));

    text = "flat eigenvalue anchors (mixed pi^2/4, Dirichlet 1, Neumann 1), worst rel err " +
           num(worst) + ", slowest " + num(slowest) + "s";
    return ok;
}

/// Criterion 2: Neumann p-Laplacian model eigenvalue equals the pi_p formula.
bool criterion2(std::string& text) {
    bool ok = true;
    double worst = 0.0;
    for (double p : {1.5, 3.0, 4.0}) {
        const auto op = catalog("p_laplacian", {{"p", p}});
        const double lambda = neumann_1d_model(op, curv(0.0, 0.0, 3.0), M_PI, p - 1.0).lambda;
        const double pi_p = 2.0 * M_PI / (p * std::sin(M_PI / p));
        const double ref = (p - 1.0) * std::pow(pi_p / M_PI, p);
        const double rel = std::abs(lambda - ref) / ref;
        worst = std::max(worst, rel);
        ok = ok && rel <= 1e-5;
    }
    text = "Neumann p-Laplacian closed form, p in {1.5, 3, 4}, worst rel err " + num(worst);
    return ok;
}

/// Criterion 3: intervals carrying exact model densities reproduce the model
/// solver across nine curvature combinations and two operators.
bool criterion3(std::string& text) {
    const auto t0 = Clock::now();
    bool ok = true;
    double worst = 0.0;
    struct OpCase {
        IsotropicOperator op;
        double gamma;
    };
    const std::vector<OpCase> ops = {{catalog("laplacian"), 1.0},
                                     {catalog("p_laplacian", {{"p", 2.5}}), 1.5}};
    for (const auto& oc : ops) {
        for (double kappa : {-1.0, 0.0, 1.0}) {
            for (double lambda : {-0.3, 0.0, 0.3}) {
                const CurvatureParams params = curv(kappa, lambda, 3.0);
                const double model = shoot_1d_model(oc.op, params, 1.0, oc.gamma).lambda;
                const auto wi = interval(1.0, 200, model_density(params, 1.0));
                const double space =
                    shoot_weighted_interval(oc.op, wi, EigenBC::dirichlet_left_neumann_right,
                                            oc.gamma)
                        .lambda;
                const double rel = std::abs(space - model) / model;
                worst = std::max(worst, rel);
                ok = ok && rel <= 1e-6;
            }
        }
    }
    const double secs = seconds_since(t0);
    ok = ok && secs < 30.0;
    text = "model-density intervals match the model solver (18 combos), worst rel err " +
           num(worst) + ", " + num(secs) + "s";
    return ok;
}

/// Criterion 4: random smooth densities never beat their effective model
/// bound, for all three boundary condition types.
bool criterion4(std::string& text) {
    const auto t0 = Clock::now();
    const auto lap = catalog("laplacian");
    std::mt19937_64 rng(0x5eedULL);
    auto unif = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };

    bool ok = true;
    int done_total = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (EigenBC bc : {EigenBC::dirichlet_both, EigenBC::dirichlet_left_neumann_right,
                       EigenBC::neumann_both}) {
        int done = 0, attempts = 0;
        while (done < 10 && attempts < 300) {
            ++attempts;
            const double L = unif(0.9, 1.4);
            Density f = Density::zero();
            for (int k = 1; k <= 3; ++k)
                f = f + Density::elementary(DensityKind::sin,
                                            unif(-0.08, 0.08) / (k * k),
                                            static_cast<double>(k) * M_PI / L,
                                            unif(0.0, 2.0 * M_PI));
            const auto wi = interval(L, 200, f);
            const CurvatureParams params = effective_bounds(wi, 3.0);

            // The theorems presume the comparison model exists on the needed
            // radius; redraw when a strongly positive effective curvature
            // exhausts the model domain.
            double lam_model = 0.0;
            if (bc == EigenBC::neumann_both) {
                CurvatureParams np = params;
                np.lambda = 0.0;
                if (!(2.0 * first_c_zero(np.kappa, 0.0) > 1.02 * L)) continue;
                lam_model = neumann_1d_model(lap, np, L, 1.0).lambda;
            } else {
                const double R = bc == EigenBC::dirichlet_both ? 0.5 * L : L;
                if (!(first_c_zero(params.kappa, params.lambda) > 1.02 * R)) continue;
                lam_model = shoot_1d_model(lap, params, R, 1.0).lambda;
            }
            const double lam_space = shoot_weighted_interval(lap, wi, bc, 1.0).lambda;
            const double margin = lam_space / lam_model - 1.0;
            worst_margin = std::min(worst_margin, margin);
            ok = ok && margin >= -1e-4;
            ++done;
        }
        ok = ok && done == 10;
        done_total += done;
    }
    const double secs = seconds_since(t0);
    ok = ok && secs < 120.0;
    text = "random densities vs effective model bound, " + std::to_string(done_total) +
           "/30 cases, worst margin " + num(worst_margin) + ", " + num(secs) + "s";
    return ok;
}

/// Criterion 5: Neumann modulus-of-continuity comparison in the sharp
/// configuration, with the violation shrinking under grid refinement.
bool criterion5(std::string& text) {
    const auto t0 = Clock::now();
    auto mc_scenario = [](const std::string& id, const std::string& op_json,
                          const std::string& dens_json, long m) {
        return std::string(R"({ "id": ")") + id + R"(", "kind": "mc_neumann",
          "space": { "type": "weighted_interval", "length": 3.141592653589793,
                     "m": )" + std::to_string(m) + R"(, "density": )" + dens_json + R"( },
          "operator": )" + op_json + R"(,
          "curvature": { "mode": "effective", "dimension": 2 },
          "solver": { "dt_factor": 0.4, "t_end": 0.3, "snapshots": 6 },
          "initial": { "form": "cos", "amplitude": -1.0 },
          "barrier_initial": { "form": "sin" } })";
    };
    const std::vector<std::pair<std::string, std::string>> ops = {
        {"lap", R"({ "name": "laplacian" })"},
        {"np3", R"({ "name": "normalized_p_laplacian", "params": { "p": 3.0 } })"}};
    const std::vector<std::pair<std::string, std::string>> densities = {
        {"flat", R"({ "form": "zero" })"},
        {"curved",
         R"({ "form": "model", "kappa": -0.3, "lambda": 0.0, "dimension_minus_one": 1.0 })"}};

    bool ok = true;
    double worst_coarse = 0.0, worst_fine = 0.0;
    for (const auto& op : ops) {
        for (const auto& dens : densities) {
            double w[2] = {0.0, 0.0};
            int idx = 0;
            for (long m : {100L, 200L}) {
                const std::string id = "acc5-" + op.first + "-" + dens.first + "-m" +
                                       std::to_string(m);
                const auto out =
                    run_scenario(parse_one(mc_scenario(id, op.second, dens.second, m)), 1);
                ok = ok && out.outcome_ok() && out.error.empty();
                w[idx++] = check_worst(out, "mc_dominated");
            }
            const double coarse = std::max(w[0], 0.0), fine = std::max(w[1], 0.0);
            ok = ok && (fine <= 0.5 * coarse || fine <= 1e-9);
            worst_coarse = std::max(worst_coarse, coarse);
            worst_fine = std::max(worst_fine, fine);
        }
    }
    const double secs = seconds_since(t0);
    ok = ok && secs < 120.0;
    text = "sharp Neumann modulus comparison, violation " + num(worst_coarse) + " (m=100) -> " +
           num(worst_fine) + " (m=200), " + num(secs) + "s";
    return ok;
}

/// Criterion 6: decay below the model eigen-barrier, sharp on both sides.
bool criterion6(std::string& text) {
    const char* flat = R"({
      "id": "acc6-flat", "kind": "decay",
      "space": { "type": "weighted_interval", "length": 3.141592653589793, "m": 200,
                 "density": { "form": "zero" } },
      "operator": { "name": "laplacian" },
      "curvature": { "kappa": 0.0, "lambda": 0.0, "dimension": 3 },
      "solver": { "dt_factor": 0.4, "t_end": 1.0, "snapshots": 10 },
      "sharp_upper": true })";
    const char* curved = R"({
      "id": "acc6-model", "kind": "decay",
      "space": { "type": "weighted_interval", "length": 1.0, "m": 200,
                 "density": { "form": "model", "kappa": -1.0, "lambda": 0.3,
                              "dimension_minus_one": 2.0 } },
      "operator": { "name": "laplacian" },
      "curvature": { "kappa": -1.0, "lambda": 0.3, "dimension": 3 },
      "solver": { "dt_factor": 0.4, "t_end": 0.5, "snapshots": 8 },
      "sharp_upper": true })";

    const auto out_flat = run_scenario(parse_one(flat), 1);
    const auto out_curved = run_scenario(parse_one(curved), 1);
    const bool ok = out_flat.outcome_ok() && out_flat.error.empty() &&
                    out_curved.outcome_ok() && out_curved.error.empty();
    text = "eigen-barrier decay with sharpness, worst violation flat " +
           num(check_worst(out_flat, "decay_dominated")) + ", curved " +
           num(check_worst(out_curved, "decay_dominated"));
    return ok;
}

/// Criterion 7: exponential sup-norm decay rates.
bool criterion7(std::string& text) {
    const char* heat = R"({
      "id": "acc7-heat", "kind": "decay_rate",
      "space": { "type": "weighted_interval", "length": 3.141592653589793, "m": 200,
                 "density": { "form": "zero" } },
      "operator": { "name": "laplacian" },
      "solver": { "dt_factor": 0.4, "t_end": 2.0, "snapshots": 12 },
      "initial": { "form": "sin" },
      "reference": { "kind": "fixed", "value": 1.0 },
      "mode": "equals", "rel_tol": 0.02 })";
    const char* nlap = R"({
      "id": "acc7-3lap", "kind": "decay_rate",
      "space": { "type": "weighted_interval", "length": 3.141592653589793, "m": 200,
                 "density": { "form": "zero" } },
      "operator": { "name": "normalized_p_laplacian", "params": { "p": 3.0 } },
      "solver": { "dt_factor": 0.4, "t_end": 2.0, "snapshots": 12 },
      "initial": { "form": "sin" },
      "reference": { "kind": "model_eigen" },
      "curvature": { "kappa": 0.0, "lambda": 0.0, "dimension": 3 },
      "mode": "at_least", "rel_tol": 0.02 })";

    const auto out_heat = run_scenario(parse_one(heat), 1);
    const auto out_nlap = run_scenario(parse_one(nlap), 1);
    const bool ok = out_heat.outcome_ok() && out_heat.error.empty() &&
                    out_nlap.outcome_ok() && out_nlap.error.empty();
    text = "sup-norm decay rates: heat = 1 within 2%, normalized 3-Laplacian >= 2/3 - 2%";
    return ok;
}

/// Criterion 8: supersolution barriers and the two-point drift inequality,
/// with equality cases, a strictly better density, and failing controls.
bool criterion8(std::string& text) {
    const auto t0 = Clock::now();
    const char* equality = R"({
      "id": "acc8-supersolution-equality", "kind": "supersolution",
      "space": { "type": "weighted_interval", "length": 1.0, "m": 200,
                 "density": { "form": "model", "kappa": -1.0, "lambda": 0.3,
                              "dimension_minus_one": 2.0 } },
      "operator": { "name": "laplacian" },
      "curvature": { "kappa": -1.0, "lambda": 0.3, "dimension": 3 },
      "barrier": { "form": "sin", "frequency": 3.141592653589793 } })";
    const char* strict = R"({
      "id": "acc8-supersolution-strict", "kind": "supersolution",
      "space": { "type": "weighted_interval", "length": 1.0, "m": 200,
                 "density": { "form": "poly", "coeffs": [0.0, 0.0, 0.5] } },
      "operator": { "name": "laplacian" },
      "curvature": { "kappa": 0.0, "lambda": -0.6, "dimension": 3 },
      "barrier": { "form": "sin", "frequency": 3.141592653589793 } })";
    const char* ctrl_super = R"({
      "id": "acc8-ctrl-supersolution", "kind": "supersolution", "expected_fail": true,
      "space": { "type": "weighted_interval", "length": 1.0, "m": 200,
                 "density": { "form": "zero" } },
      "operator": { "name": "laplacian" },
      "curvature": { "kappa": 0.5, "lambda": 0.0, "dimension": 3 },
      "barrier": { "form": "sin", "frequency": 3.141592653589793 } })";
    const char* tp_half = R"({
      "id": "acc8-two-point-halfspace", "kind": "two_point",
      "space": { "type": "weighted_interval", "length": 2.0, "m": 200,
                 "density": { "form": "poly", "coeffs": [0.0, 0.0, 0.5] } },
      "curvature": { "kappa": 1.0, "dimension": "inf" } })";
    const char* tp_model = R"({
      "id": "acc8-two-point-model", "kind": "two_point",
      "space": { "type": "weighted_interval", "length": 1.0, "m": 200,
                 "density": { "form": "model", "kappa": -0.3, "lambda": 0.0,
                              "dimension_minus_one": 2.0 } },
      "curvature": { "kappa": -0.3, "dimension": 3 } })";
    const char* tp_ctrl = R"({
      "id": "acc8-ctrl-two-point", "kind": "two_point", "expected_fail": true,
      "space": { "type": "weighted_interval", "length": 2.0, "m": 200,
                 "density": { "form": "poly", "coeffs": [0.0, 0.0, -0.25] } },
      "curvature": { "kappa": 0.0, "dimension": "inf" } })";

    const auto out_eq = run_scenario(parse_one(equality), 1);
    const auto out_strict = run_scenario(parse_one(strict), 1);
    const auto out_ctrl_s = run_scenario(parse_one(ctrl_super), 1);
    const auto out_tp1 = run_scenario(parse_one(tp_half), 1);
    const auto out_tp2 = run_scenario(parse_one(tp_model), 1);
    const auto out_tp3 = run_scenario(parse_one(tp_ctrl), 1);

    bool ok = out_eq.outcome_ok() && out_eq.worst_violation() >= -1e-8;
    ok = ok && out_strict.outcome_ok() &&
         check_worst(out_strict, "supersolution_boundary") <= -1e-3;
    ok = ok && out_ctrl_s.outcome_ok() && has_metadata(out_ctrl_s, "hypothesis_violated");
    ok = ok && out_tp1.outcome_ok() && out_tp2.outcome_ok() && out_tp3.outcome_ok();
    const double secs = seconds_since(t0);
    ok = ok && secs < 30.0;
    text = "supersolution + two-point: equality slack " + num(out_eq.worst_violation()) +
           ", strict slack " + num(check_worst(out_strict, "supersolution_boundary")) +
           ", controls fail as expected, " + num(secs) + "s";
    return ok;
}

/// Criterion 9: height-dependent gradient bounds, parabolic and elliptic,
/// with 10 percent barrier-stretch controls flipping to failure.
bool criterion9(std::string& text) {
    const char* parabolic = R"({
      "id": "acc9-parabolic", "kind": "gradient_parabolic",
      "space": { "type": "weighted_interval", "length": 3.141592653589793, "m": 400,
                 "density": { "form": "poly", "coeffs": [0.0, 0.0, -0.5] } },
      "operator": { "name": "laplacian" },
      "curvature": { "kappa": -1.0, "dimension": "inf" },
      "solver": { "dt_factor": 0.4, "t_end": 0.3, "snapshots": 6 },
      "initial": { "form": "sum", "parts": [
        { "form": "cos", "amplitude": -1.2 },
        { "form": "poly", "coeffs": [-0.07853981633974483, 0.05] } ] },
      "tolerance_model": 20.0%s })";
    const char* elliptic = R"({
      "id": "acc9-elliptic", "kind": "gradient_elliptic",
      "space": { "type": "weighted_interval", "length": 1.0, "m": 200,
                 "density": { "form": "zero" } },
      "operator": { "name": "laplacian" },
      "curvature": { "kappa": 0.0, "dimension": "inf" },
      "solver": { "dt_factor": 0.45 },
      "source_value": 1.0, "slope_constant": 0.52,
      "tolerance_model": 5.0%s })";

    auto instantiate = [](const char* tmpl, bool control) {
        std::string s = tmpl;
        const std::string extra =
            control ? ", \"expected_fail\": true, \"barrier_stretch\": 0.9" : "";
        s.replace(s.find("%s"), 2, extra);
        if (control) {
            const auto pos = s.find("acc9-");
            s.insert(pos + 5, "ctrl-");
        }
        return s;
    };

    bool ok = true;
    double worst_pass = -std::numeric_limits<double>::infinity();
    for (const char* tmpl : {parabolic, elliptic}) {
        for (bool control : {false, true}) {
            const auto out = run_scenario(parse_one(instantiate(tmpl, control)), 1);
            ok = ok && out.outcome_ok() && out.error.empty();
            if (!control) worst_pass = std::max(worst_pass, out.worst_violation());
        }
    }
    text = "gradient bounds hold (worst violation " + num(worst_pass) +
           ") and 10% stretched barriers fail";
    return ok;
}

/// Criterion 10: convergence under refinement, operator homogeneity, and the
/// randomized property battery.
bool criterion10(std::string& text) {
    const auto lap = catalog("laplacian");
    auto heat_err = [&](long m) {
        const auto wi = interval(M_PI, m, Density::zero());
        const Field1D u0 =
            make_field(wi, [](double s) { return std::sin(s); }, FieldBC::dirichlet_zero());
        SolverConfig cfg;
        cfg.dt = 0.4 * wi.h() * wi.h();
        cfg.t_end = 0.5;
        const auto traj = solve_parabolic(u0, lap, SourceTerm::zero(), cfg);
        double err = 0.0;
        for (const auto& f : traj) {
            const auto grid = f.grid();
            for (std::size_t i = 0; i < grid.size(); ++i)
                err = std::max(err,
                               std::abs(f.values[i] - std::exp(-f.time) * std::sin(grid[i])));
        }
        return err;
    };
    const double coarse = heat_err(64), fine = heat_err(128);
    bool ok = coarse >= 3.0 * fine;

    const std::vector<RadialSample> samples = {
        {0.7, -1.2, 0.3}, {-0.4, 0.9, 0.8}, {1.5, 0.2, 1.1}, {-2.0, -0.5, 0.25}};
    auto unit_drift = [](double) { return 1.0; };
    for (const auto& op :
         {catalog("laplacian"), catalog("p_laplacian", {{"p", 3.0}}),
          catalog("p_laplacian", {{"p", 1.5}}), catalog("normalized_p_laplacian", {{"p", 3.0}}),
          catalog("one_laplacian"), catalog("infinity_laplacian")})
        ok = ok && homogeneity_check(op, *op.gamma, unit_drift, samples);

    const auto battery = battery::run_property_battery(20260815ULL);
    ok = ok && battery.cases >= 1000 && battery.failures == 0;

    text = "heat error ratio " + num(coarse / fine) + " (>= 3), homogeneity for 6 catalog ops, " +
           std::to_string(battery.cases) + " property cases with " +
           std::to_string(battery.failures) + " failures";
    return ok;
}

}  // namespace

int main() {
    const auto t_start = Clock::now();
    const std::vector<std::function<bool(std::string&)>> criteria = {
        criterion1, criterion2, criterion3, criterion4, criterion5,
        criterion6, criterion7, criterion8, criterion9, criterion10};

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        std::string text;
        bool ok = false;
        try {
            ok = criteria[i](text);
        } catch (const std::exception& e) {
            text = std::string("unhandled exception: ") + e.what();
        }
        if (!ok) ++failed;
        std::printf("[%s] criterion %zu: %s\n", ok ? "PASS" : "FAIL", i + 1, text.c_str());
        std::fflush(stdout);
    }
    std::printf("acceptance: %d/10 criteria passed in %.1fs\n", 10 - failed,
                seconds_since(t_start));
    return failed == 0 ? 0 : 1;
}
