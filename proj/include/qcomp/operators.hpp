#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qcomp/errors.hpp"

namespace qcomp {

/// Pure power law c * g^e; set on catalog operators whose alpha or beta has
/// this form, enabling the momentum substitution in the eigenvalue shooting.
struct PowerLaw {
    double coef = 0.0;
    double expn = 0.0;

    double operator()(double g) const { return coef * std::pow(g, expn); }
};

/// Isotropic quasilinear operator
///   Q[u] = alpha(|Du|) D^2_{dd} u + beta(|Du|) (Delta_1 u - <Du, Df>),
/// reduced on radial/1-D spaces to
///   Q[u](s) = alpha(|u'|) u'' + beta(|u'|) drift(s) u'.
/// alpha and beta also receive (u, t) for the height-dependent extensions;
/// catalog entries ignore them.
struct IsotropicOperator {
    std::string name;
    std::map<std::string, double> params;

    std::function<double(double g, double u, double t)> alpha;
    std::function<double(double g, double u, double t)> beta;
    /// Homogeneity degree: Q[c u] = c^gamma Q[u]; absent when not homogeneous.
    std::optional<double> gamma;
    /// True when alpha or beta blows up as |Du| -> 0 (p-Laplacian, p < 2).
    bool singular_at_zero = false;

    std::optional<PowerLaw> alpha_power; ///< alpha(g) when it is c * g^e
    std::optional<PowerLaw> beta_power;  ///< beta(g) when it is c * g^e

    double alpha_at(double g, double u = 0.0, double t = 0.0) const { return alpha(g, u, t); }
    double beta_at(double g, double u = 0.0, double t = 0.0) const { return beta(g, u, t); }
};

/// Zeroth-order terms: q(|Du|, u, t) for parabolic problems and b(u, |Du|)
/// for elliptic ones. Empty members mean identically zero.
struct SourceTerm {
    std::function<double(double g, double u, double t)> q;
    std::function<double(double u, double g)> b;

    static SourceTerm zero() { return {}; }

    double q_at(double g, double u, double t) const { return q ? q(g, u, t) : 0.0; }
    double b_at(double u, double g) const { return b ? b(u, g) : 0.0; }
};

/// Builds a catalog operator. Known names: laplacian, p_laplacian,
/// normalized_p_laplacian, mean_curvature, one_laplacian,
/// infinity_laplacian. The p-family reads params["p"] and requires p > 1.
inline IsotropicOperator catalog(const std::string& name,
                                 const std::map<std::string, double>& params = {}) {
    IsotropicOperator op;
    op.name = name;
    op.params = params;

    auto get_p = [&]() {
        auto it = params.find("p");
        if (it == params.end())
            throw InvalidParameter("catalog: operator '" + name + "' requires parameter p");
        if (!(it->second > 1.0))
            throw InvalidParameter("catalog: p must be > 1, got " + std::to_string(it->second));
        return it->second;
    };

    if (name == "laplacian") {
        op.alpha = [](double, double, double) { return 1.0; };
        op.beta = [](double, double, double) { return 1.0; };
        op.gamma = 1.0;
        op.alpha_power = PowerLaw{1.0, 0.0};
        op.beta_power = PowerLaw{1.0, 0.0};
    } else if (name == "p_laplacian") {
        const double p = get_p();
        op.alpha = [p](double g, double, double) { return (p - 1.0) * std::pow(g, p - 2.0); };
        op.beta = [p](double g, double, double) { return std::pow(g, p - 2.0); };
        op.gamma = p - 1.0;
        op.singular_at_zero = p < 2.0;
        op.alpha_power = PowerLaw{p - 1.0, p - 2.0};
        op.beta_power = PowerLaw{1.0, p - 2.0};
    } else if (name == "normalized_p_laplacian") {
        const double p = get_p();
        op.alpha = [p](double, double, double) { return (p - 1.0) / p; };
        op.beta = [p](double, double, double) { return 1.0 / p; };
        op.gamma = 1.0;
        op.alpha_power = PowerLaw{(p - 1.0) / p, 0.0};
        op.beta_power = PowerLaw{1.0 / p, 0.0};
    } else if (name == "mean_curvature") {
        op.alpha = [](double g, double, double) { return 1.0 / (1.0 + g * g); };
        op.beta = [](double, double, double) { return 1.0; };
        op.gamma = std::nullopt;
        op.beta_power = PowerLaw{1.0, 0.0};
    } else if (name == "one_laplacian") {
        op.alpha = [](double, double, double) { return 0.0; };
        op.beta = [](double, double, double) { return 1.0; };
        op.gamma = 1.0;
        op.alpha_power = PowerLaw{0.0, 0.0};
        op.beta_power = PowerLaw{1.0, 0.0};
    } else if (name == "infinity_laplacian") {
        op.alpha = [](double, double, double) { return 1.0; };
        op.beta = [](double, double, double) { return 0.0; };
        op.gamma = 1.0;
        op.alpha_power = PowerLaw{1.0, 0.0};
        op.beta_power = PowerLaw{0.0, 0.0};
    } else {
        throw UnknownOperator("catalog: unknown operator '" + name + "'");
    }
    return op;
}

/// Radial evaluation alpha(|u'|_eps) u'' + beta(|u'|_eps) drift(s) u' with
/// the gradient regularization |u'|_eps = max(|u'|, eps).
template <typename DriftFn>
double evaluate_radial(const IsotropicOperator& op, DriftFn&& drift, double up, double upp,
                       double s, double eps = 1e-8, double u = 0.0, double t = 0.0) {
    const double g = std::max(std::abs(up), eps);
    return op.alpha_at(g, u, t) * upp + op.beta_at(g, u, t) * drift(s) * up;
}

/// Sample configuration for homogeneity testing: slope, curvature, position.
struct RadialSample {
    double up;
    double upp;
    double s;
};

/// Checks Q[c u] == c^gamma Q[u] at the supplied samples for
/// c in {0.5, 2, 7}. Returns the largest deviation beyond the per-sample
/// allowance 1e-9 * (1 + |c^gamma Q[u]|); nonpositive means homogeneous.
template <typename DriftFn>
double homogeneity_defect(const IsotropicOperator& op, double gamma, DriftFn&& drift,
                          const std::vector<RadialSample>& samples) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const double c : {0.5, 2.0, 7.0}) {
        for (const auto& smp : samples) {
            const double q_scaled =
                evaluate_radial(op, drift, c * smp.up, c * smp.upp, smp.s, 0.0);
            const double q_ref =
                std::pow(c, gamma) * evaluate_radial(op, drift, smp.up, smp.upp, smp.s, 0.0);
            const double defect = std::abs(q_scaled - q_ref) - 1e-9 * (1.0 + std::abs(q_ref));
            worst = std::max(worst, defect);
        }
    }
    return worst;
}

template <typename DriftFn>
bool homogeneity_check(const IsotropicOperator& op, double gamma, DriftFn&& drift,
                       const std::vector<RadialSample>& samples) {
    return homogeneity_defect(op, gamma, drift, samples) <= 0.0;
}

} // namespace qcomp
