#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "qcomp/errors.hpp"

namespace qcomp {

/// Curvature data (kappa, Lambda, N, n) for the comparison geometry:
/// a lower bound (N-1)*kappa on the N-Bakry-Emery Ricci curvature and a
/// lower bound (N-1)*Lambda on the weighted mean curvature of the boundary.
struct CurvatureParams {
    double kappa = 0.0;
    double lambda = 0.0;
    /// Effective dimension N; may be +infinity.
    double bigN = std::numeric_limits<double>::infinity();
    /// Topological dimension of the space being modeled.
    int n = 1;

    bool infinite_N() const { return std::isinf(bigN); }

    /// Validates N >= n, and N > 1 whenever n == 1 and N is finite
    /// (N == n == 1 forces f constant and the drift 1/(N-1) is undefined).
    void validate() const {
        if (n < 1) throw InvalidParameter("CurvatureParams: n must be >= 1");
        if (!infinite_N()) {
            if (bigN < n)
                throw InvalidParameter("CurvatureParams: N must satisfy N >= n");
            if (n == 1 && !(bigN > 1.0))
                throw InvalidParameter("CurvatureParams: N must exceed 1 when n == 1");
        }
    }
};

namespace detail {

constexpr double kKappaSeriesCut = 1e-10;

struct CAndDerivative {
    double c;
    double cp;
};

inline CAndDerivative c_and_derivative(double kappa, double lambda, double t) {
    if (std::abs(kappa) < kKappaSeriesCut) {
        // Taylor expansion in kappa; the neglected terms are O(kappa^2 t^4).
        const double c = 1.0 - lambda * t - 0.5 * kappa * t * t +
                         kappa * lambda * t * t * t / 6.0;
        const double cp = -lambda - kappa * t + 0.5 * kappa * lambda * t * t;
        return {c, cp};
    }
    if (kappa > 0.0) {
        const double r = std::sqrt(kappa);
        return {std::cos(r * t) - lambda / r * std::sin(r * t),
                -r * std::sin(r * t) - lambda * std::cos(r * t)};
    }
    const double r = std::sqrt(-kappa);
    return {std::cosh(r * t) - lambda / r * std::sinh(r * t),
            r * std::sinh(r * t) - lambda * std::cosh(r * t)};
}

} // namespace detail

/// Solution of C'' + kappa C = 0 with C(0) = 1, C'(0) = -Lambda.
inline double c_kappa_lambda(double kappa, double lambda, double t) {
    return detail::c_and_derivative(kappa, lambda, t).c;
}

/// T = -C'/C. Satisfies T' = kappa + T^2 and T(0) = Lambda.
/// Throws DomainError at or past the first zero of C.
inline double t_kappa_lambda(double kappa, double lambda, double t) {
    const auto [c, cp] = detail::c_and_derivative(kappa, lambda, t);
    if (!(c > 0.0))
        throw DomainError("t_kappa_lambda: C_{kappa,lambda} is nonpositive at t = " +
                          std::to_string(t));
    return -cp / c;
}

} // namespace qcomp
