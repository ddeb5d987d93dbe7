#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "qcomp/comparison.hpp"
#include "qcomp/curvature.hpp"
#include "qcomp/eigen.hpp"
#include "qcomp/errors.hpp"
#include "qcomp/geometry.hpp"
#include "qcomp/interp.hpp"
#include "qcomp/operators.hpp"
#include "qcomp/pde.hpp"
#include "qcomp/report.hpp"

namespace qcomp {

/// Discrete modulus of continuity: omega(s_j) at s_j = j h/2 is the largest
/// half-difference over node pairs at distance at most 2 s_j.
struct ModulusCurve {
    std::vector<double> s_grid;
    std::vector<double> omega;
    double time = 0.0;
};

/// Exact O(m^2) pair scan. For gap g the extreme half-difference is
/// max_i |u_{i+g} - u_i| / 2; omega(s_j) is the running maximum over gaps
/// g <= j since pairs at distance <= 2 s_j = j h are exactly those gaps.
inline ModulusCurve modulus_of_continuity(const Field1D& field) {
    const auto& u = field.values;
    const std::size_t n = u.size();
    const double h = field.h();
    ModulusCurve mc;
    mc.time = field.time;
    mc.s_grid.resize(n);
    mc.omega.resize(n);
    double running = 0.0;
    for (std::size_t g = 0; g < n; ++g) {
        double extreme = 0.0;
        for (std::size_t i = 0; i + g < n; ++i)
            extreme = std::max(extreme, std::abs(u[i + g] - u[i]));
        running = std::max(running, 0.5 * extreme);
        mc.s_grid[g] = 0.5 * h * (double)g;
        mc.omega[g] = running;
    }
    return mc;
}

namespace detail {

/// Linear interpolation of a tabulated slice, clamped at the table ends.
inline double interp_slice(const std::vector<double>& s, const std::vector<double>& v,
                           double x) {
    if (x <= s.front()) return v.front();
    if (x >= s.back()) return v.back();
    const std::size_t i = cell_index(s, x);
    const double th = (x - s[i]) / (s[i + 1] - s[i]);
    return (1.0 - th) * v[i] + th * v[i + 1];
}

inline double sup_norm(const std::vector<double>& u) {
    double m = 0.0;
    for (double x : u) m = std::max(m, std::abs(x));
    return m;
}

} // namespace detail

/// Modulus domination: at every snapshot and every modulus node,
/// omega(s, t) <= phi(s, t) + tol with tol = tol_model (h + dt). The dt in
/// the tolerance is the barrier's stored step (the trajectory's own step is
/// of order h^2 and dominated by the h term).
inline CheckReport check_mc_dominated(const Trajectory& traj, const ComparisonProfile& prof,
                                      double tol_model = 20.0) {
    if (traj.empty()) throw PreconditionFailed("check_mc_dominated: empty trajectory");
    const double h = traj.front().h();
    CheckReport rep;
    rep.name = "mc_dominated";
    rep.tolerance_used = tol_model * (h + prof.dt_scheme);
    rep.worst_violation = -std::numeric_limits<double>::infinity();
    for (const auto& snap : traj) {
        const auto mc = modulus_of_continuity(snap);
        const auto phi = prof.slice_at(snap.time);
        for (std::size_t j = 0; j < mc.s_grid.size(); ++j) {
            const double viol =
                mc.omega[j] - detail::interp_slice(prof.s_grid, phi, mc.s_grid[j]);
            if (viol > rep.worst_violation) {
                rep.worst_violation = viol;
                rep.worst_location = {j, mc.s_grid[j], snap.time};
            }
        }
    }
    rep.metadata["snapshots"] = (double)traj.size();
    rep.finalize();
    return rep;
}

/// Decay barrier domination: u(s, t) <= phi(min(s, L - s), t) + tol at all
/// snapshots, for Dirichlet-zero trajectories whose initial data is already
/// dominated (PreconditionFailed otherwise, per the comparison theorem's
/// hypothesis Z(x, 0) <= 0).
inline CheckReport check_decay(const Trajectory& traj, const ComparisonProfile& prof,
                               const WeightedInterval& space, double tol_model = 20.0) {
    if (traj.empty()) throw PreconditionFailed("check_decay: empty trajectory");
    if (traj.front().bc.kind != FieldBCKind::dirichlet_zero)
        throw PreconditionFailed("check_decay: trajectory must carry Dirichlet-zero data");
    const double L = space.length;
    const double h = traj.front().h();
    const auto grid = traj.front().grid();

    {
        const auto phi0 = prof.slice_at(traj.front().time);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double d = std::min(grid[i], L - grid[i]);
            const double cap = detail::interp_slice(prof.s_grid, phi0, d);
            if (traj.front().values[i] > cap + 1e-12 * (1.0 + std::abs(cap)))
                throw PreconditionFailed(
                    "check_decay: initial data exceeds the barrier at s = " +
                    std::to_string(grid[i]));
        }
    }

    CheckReport rep;
    rep.name = "decay_dominated";
    rep.tolerance_used = tol_model * (h + prof.dt_scheme);
    rep.worst_violation = -std::numeric_limits<double>::infinity();
    for (const auto& snap : traj) {
        const auto phi = prof.slice_at(snap.time);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double d = std::min(grid[i], L - grid[i]);
            const double viol =
                snap.values[i] - detail::interp_slice(prof.s_grid, phi, d);
            if (viol > rep.worst_violation) {
                rep.worst_violation = viol;
                rep.worst_location = {i, grid[i], snap.time};
            }
        }
    }
    rep.metadata["snapshots"] = (double)traj.size();
    rep.finalize();
    return rep;
}

/// Supersolution property of v(x) = phi(d(x, boundary)): at every node
/// where the distance is smooth (the midpoint node is skipped), the radial
/// operator value with the space's true drift must not exceed the model
/// value alpha phi'' - (N-1) T_{kappa,lambda} beta phi' at the same
/// distance. Both sides reuse the same sampled (phi', phi''), so the
/// comparison isolates the drift inequality; model densities give equality
/// to roundoff. A claimed curvature the space cannot certify produces a
/// failing report.
inline CheckReport check_supersolution_boundary(const ComparisonProfile& phi,
                                                const WeightedInterval& space,
                                                const IsotropicOperator& op,
                                                const CurvatureParams& params,
                                                double eps = 1e-8) {
    params.validate();
    if (params.infinite_N())
        throw InvalidParameter("check_supersolution_boundary: N must be finite");
    if (phi.values.empty())
        throw PreconditionFailed("check_supersolution_boundary: empty profile");
    const double L = space.length;
    if (phi.s_grid.back() < 0.5 * L - 1e-12)
        throw PreconditionFailed("check_supersolution_boundary: profile does not cover [0, L/2]");

    CheckReport rep;
    rep.name = "supersolution_boundary";
    const auto eff = effective_bounds(space, params.bigN);
    rep.metadata["kappa_effective"] = eff.kappa;
    rep.metadata["lambda_effective"] = eff.lambda;
    rep.metadata["kappa_claimed"] = params.kappa;
    rep.metadata["lambda_claimed"] = params.lambda;

    const double hyp_gap =
        std::max(params.kappa - eff.kappa, params.lambda - eff.lambda);
    if (hyp_gap > 1e-10) {
        rep.worst_violation = hyp_gap;
        rep.tolerance_used = 1e-10;
        rep.metadata["hypothesis_violated"] = 1.0;
        rep.finalize();
        return rep;
    }

    const CubicSpline spl(phi.s_grid, phi.values.front());
    const auto grid = space.grid();
    const double h = space.h();
    const double nm1 = params.bigN - 1.0;
    auto drift = [&space](double s) { return space.drift(s); };

    double scale = 1.0;
    rep.worst_violation = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double s = grid[i];
        if (std::abs(s - 0.5 * L) <= 0.25 * h) continue;  // distance kink
        const double d = std::min(s, L - s);
        const auto j = spl.jet(d);
        const double sign = s < 0.5 * L ? 1.0 : -1.0;
        const double lhs = evaluate_radial(op, drift, sign * j.d1, j.d2, s, eps);
        const double g = std::max(std::abs(j.d1), eps);
        const double rhs = op.alpha_at(g, j.v, 0.0) * j.d2 -
                           nm1 * t_kappa_lambda(params.kappa, params.lambda, d) *
                               op.beta_at(g, j.v, 0.0) * j.d1;
        scale = std::max({scale, std::abs(lhs), std::abs(rhs)});
        const double viol = lhs - rhs;
        if (viol > rep.worst_violation) {
            rep.worst_violation = viol;
            rep.worst_location = {i, s, phi.t_grid.front()};
        }
    }
    rep.tolerance_used = 1e-8 * scale;
    rep.finalize();
    return rep;
}

/// Two-point drift inequality: for all grid pairs x < y,
///   f'(y) - f'(x) >= 2 (N-1) T_{kappa,0}((y - x)/2)    (finite N)
///   f'(y) - f'(x) >= kappa (y - x)                     (N = infinity),
/// the one-dimensional inequality that makes 2 phi(d/2) a supersolution of
/// the two-point operator. Model densities with matching curvature sit at
/// near-equality; densities violating the curvature hypothesis fail.
inline CheckReport check_two_point_drift(const WeightedInterval& space,
                                         const CurvatureParams& params) {
    params.validate();
    const auto grid = space.grid();
    std::vector<double> fp(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) fp[i] = space.density.d1(grid[i]);

    CheckReport rep;
    rep.name = "two_point_drift";
    rep.worst_violation = -std::numeric_limits<double>::infinity();
    double scale = 1.0;
    const bool finite = !params.infinite_N();
    const double nm1 = finite ? params.bigN - 1.0 : 0.0;
    for (std::size_t ix = 0; ix < grid.size(); ++ix) {
        for (std::size_t iy = ix + 1; iy < grid.size(); ++iy) {
            const double gap = grid[iy] - grid[ix];
            const double need =
                finite ? 2.0 * nm1 * t_kappa_lambda(params.kappa, 0.0, 0.5 * gap)
                       : params.kappa * gap;
            const double have = fp[iy] - fp[ix];
            scale = std::max({scale, std::abs(need), std::abs(have)});
            const double viol = need - have;
            if (viol > rep.worst_violation) {
                rep.worst_violation = viol;
                rep.worst_location = {ix, grid[ix], 0.0};
                rep.metadata["worst_pair_y"] = grid[iy];
            }
        }
    }
    const auto eff = effective_bounds(space, params.bigN);
    rep.metadata["kappa_effective"] = eff.kappa;
    rep.metadata["kappa_claimed"] = params.kappa;
    rep.tolerance_used = 1e-8 * scale;
    rep.finalize();
    return rep;
}

/// Height-dependent gradient bound against an inverted barrier: per
/// snapshot, (a) the pairwise inequality Psi(u(y)) - Psi(u(x)) <= |y - x|
/// and (b) the pointwise bound |Du| <= phi'(Psi(u)) at interior nodes, both
/// within tol. Values outside the barrier's range raise RangeError.
inline CheckReport check_gradient_bound(const Trajectory& traj, const InverseProfile& inv,
                                        double tol) {
    if (traj.empty()) throw PreconditionFailed("check_gradient_bound: empty trajectory");
    CheckReport rep;
    rep.name = "gradient_bound";
    rep.tolerance_used = tol;
    rep.worst_violation = -std::numeric_limits<double>::infinity();
    for (const auto& snap : traj) {
        const auto grid = snap.grid();
        const auto& u = snap.values;
        const double h = snap.h();
        std::vector<double> psi(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) psi[i] = inv.eval(u[i], snap.time);

        for (std::size_t ix = 0; ix < u.size(); ++ix)
            for (std::size_t iy = ix + 1; iy < u.size(); ++iy) {
                const double viol = std::abs(psi[iy] - psi[ix]) - (grid[iy] - grid[ix]);
                if (viol > rep.worst_violation) {
                    rep.worst_violation = viol;
                    rep.worst_location = {ix, grid[ix], snap.time};
                    rep.metadata["worst_pair_y"] = grid[iy];
                    rep.metadata["worst_kind_pairwise"] = 1.0;
                }
            }
        for (std::size_t i = 1; i + 1 < u.size(); ++i) {
            const double du = (u[i + 1] - u[i - 1]) / (2.0 * h);
            const double viol = std::abs(du) - inv.slope_at_value(u[i], snap.time);
            if (viol > rep.worst_violation) {
                rep.worst_violation = viol;
                rep.worst_location = {i, grid[i], snap.time};
                rep.metadata["worst_kind_pairwise"] = 0.0;
            }
        }
    }
    rep.metadata["snapshots"] = (double)traj.size();
    rep.finalize();
    return rep;
}

/// First-eigenvalue comparison: the space's eigenvalue must not fall below
/// the model eigenvalue by more than rel_tol relative. Both inputs must
/// satisfy the solver's residual invariant.
inline CheckReport check_eigen_comparison(const EigenResult& lambda_M,
                                          const EigenResult& lambda_model,
                                          double rel_tol = 1e-4) {
    if (!(lambda_M.residual <= 1e-6 * (1.0 + lambda_M.lambda)) ||
        !(lambda_model.residual <= 1e-6 * (1.0 + lambda_model.lambda)))
        throw PreconditionFailed("check_eigen_comparison: residual invariant violated");
    CheckReport rep;
    rep.name = "eigen_comparison";
    rep.tolerance_used = rel_tol;
    rep.worst_violation = (lambda_model.lambda - lambda_M.lambda) / lambda_model.lambda;
    rep.metadata["lambda_space"] = lambda_M.lambda;
    rep.metadata["lambda_model"] = lambda_model.lambda;
    rep.metadata["gap_absolute"] = lambda_M.lambda - lambda_model.lambda;
    rep.finalize();
    return rep;
}

/// Decay rate from the trajectory's sup-norms: least-squares slope of
/// log ||u||_inf over the last half of the snapshots, returned as a
/// positive rate. Vanishing norms make the fit degenerate.
inline double decay_rate_estimate(const Trajectory& traj) {
    if (traj.size() < 4)
        throw PreconditionFailed("decay_rate_estimate: need at least 4 snapshots");
    const std::size_t k0 = traj.size() / 2;
    std::vector<double> ts, ln;
    for (std::size_t k = k0; k < traj.size(); ++k) {
        const double norm = detail::sup_norm(traj[k].values);
        if (!(norm > 1e-250))
            throw DegenerateFit("decay_rate_estimate: sup-norm reached numerical zero");
        ts.push_back(traj[k].time);
        ln.push_back(std::log(norm));
    }
    const std::size_t n = ts.size();
    double mt = 0.0, ml = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mt += ts[i];
        ml += ln[i];
    }
    mt /= (double)n;
    ml /= (double)n;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (ts[i] - mt) * (ln[i] - ml);
        den += (ts[i] - mt) * (ts[i] - mt);
    }
    if (!(den > 0.0)) throw DegenerateFit("decay_rate_estimate: snapshots share one time");
    return -num / den;
}

} // namespace qcomp
