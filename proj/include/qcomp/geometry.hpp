#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "qcomp/curvature.hpp"
#include "qcomp/density.hpp"
#include "qcomp/errors.hpp"

namespace qcomp {

/// Uniform grid of m+1 nodes on [a, b].
inline std::vector<double> uniform_grid(double a, double b, int m) {
    if (m < 1) throw InvalidParameter("uniform_grid: m must be positive");
    std::vector<double> g(static_cast<std::size_t>(m) + 1);
    for (int i = 0; i <= m; ++i)
        g[static_cast<std::size_t>(i)] = a + (b - a) * static_cast<double>(i) / m;
    g.back() = b;
    return g;
}

/// Position of the first zero of C_{kappa,lambda} on (0, inf), or +inf.
inline double first_c_zero(double kappa, double lambda) {
    const double inf = std::numeric_limits<double>::infinity();
    if (kappa > detail::kKappaSeriesCut) {
        const double r = std::sqrt(kappa);
        // C = A cos(r t + theta), theta = atan(lambda / r) in (-pi/2, pi/2).
        return (0.5 * M_PI - std::atan(lambda / r)) / r;
    }
    if (kappa < -detail::kKappaSeriesCut) {
        const double r = std::sqrt(-kappa);
        if (lambda <= r) return inf;
        return std::atanh(r / lambda) / r;
    }
    return lambda > 0.0 ? 1.0 / lambda : inf;
}

/// One-dimensional weighted space: the interval [0, L] with measure
/// e^{-f(s)} ds and a uniform evaluation grid of m cells.
struct WeightedInterval {
    double length = 1.0;
    Density density; ///< log-density f
    int m = 200;     ///< grid cells; at least 16

    void validate() const {
        if (!(length > 0.0)) throw InvalidParameter("WeightedInterval: length must be positive");
        if (m < 16) throw InvalidParameter("WeightedInterval: grid must have at least 16 cells");
    }

    double h() const { return length / m; }
    std::vector<double> grid() const { return uniform_grid(0.0, length, m); }

    /// First-order drift coefficient of the radial operator: -f'(s).
    double drift(double s) const { return -density.d1(s); }
};

/// Radial reduction of a warped product over [0, R] with warp w(s) > 0 on
/// (0, R] and log-density f. The pole s = 0 is excluded by the PDE layer.
struct WarpedModel {
    double radius = 1.0;
    int n = 2;             ///< ambient dimension, at least 2
    SmoothFunction warp;   ///< w
    Density density;       ///< f
    int m = 200;

    void validate() const {
        if (!(radius > 0.0)) throw InvalidParameter("WarpedModel: radius must be positive");
        if (n < 2) throw InvalidParameter("WarpedModel: dimension must be at least 2");
        if (m < 16) throw InvalidParameter("WarpedModel: grid must have at least 16 cells");
    }

    double h() const { return radius / m; }
    std::vector<double> grid() const { return uniform_grid(0.0, radius, m); }

    /// Drift (n-1) w'/w - f'. Throws DomainError where the warp vanishes.
    double drift(double s) const {
        const Jet2 w = warp.jet(s);
        if (!(w.v > 0.0))
            throw DomainError("WarpedModel: warp function must be positive away from the pole");
        return (n - 1) * w.d1 / w.v - density.d1(s);
    }
};

/// Radial N-Bakry-Emery Ricci curvature of a weighted interval at s:
/// f'' - (f')^2/(N-1) for finite N, and f'' for N = infinity.
inline double ricci_f_N(const WeightedInterval& space, const CurvatureParams& params, double s) {
    params.validate();
    const Jet2 f = space.density.jet(s);
    if (params.infinite_N()) return f.d2;
    return f.d2 - f.d1 * f.d1 / (params.bigN - 1.0);
}

enum class IntervalEnd { left, right };

/// Weighted mean curvature of the boundary point: H_f = -<grad f, nu> in 1-D,
/// i.e. f'(0) at the left end and -f'(L) at the right end.
inline double boundary_hf(const WeightedInterval& space, IntervalEnd end) {
    if (end == IntervalEnd::left) return space.density.d1(0.0);
    return -space.density.d1(space.length);
}

/// Largest (kappa, lambda) certified by a grid scan of the space:
/// kappa_eff = min_s Ric^N_f / (N-1) and lambda_eff = min H_f / (N-1) for
/// finite N; for N = infinity the raw minima of f'' and H_f are returned.
inline CurvatureParams effective_bounds(const WeightedInterval& space, double bigN) {
    space.validate();
    CurvatureParams params;
    params.bigN = bigN;
    params.n = 1;
    params.validate();

    double ric_min = std::numeric_limits<double>::infinity();
    for (double s : space.grid())
        ric_min = std::min(ric_min, ricci_f_N(space, params, s));
    const double hf_min = std::min(boundary_hf(space, IntervalEnd::left),
                                   boundary_hf(space, IntervalEnd::right));
    if (params.infinite_N()) {
        params.kappa = ric_min;
        params.lambda = hf_min;
    } else {
        params.kappa = ric_min / (bigN - 1.0);
        params.lambda = hf_min / (bigN - 1.0);
    }
    return params;
}

/// Equality-case density f = -(N-1) log C_{kappa,lambda} on [0, R].
/// Realizes Ric^N_f == (N-1) kappa exactly and H_f(0) == (N-1) lambda.
/// Throws DomainError if C_{kappa,lambda} vanishes on [0, R].
inline Density model_density(const CurvatureParams& params, double R) {
    params.validate();
    if (params.infinite_N())
        throw InvalidParameter("model_density: requires finite N");
    if (!(R > 0.0)) throw InvalidParameter("model_density: R must be positive");
    if (first_c_zero(params.kappa, params.lambda) <= R)
        throw DomainError("model_density: C_{kappa,lambda} vanishes on [0, R]");
    return Density::model(params.kappa, params.lambda, params.bigN - 1.0);
}

} // namespace qcomp
