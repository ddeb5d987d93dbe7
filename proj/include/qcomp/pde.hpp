#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "qcomp/errors.hpp"
#include "qcomp/geometry.hpp"
#include "qcomp/operators.hpp"

namespace qcomp {

/// Spatial domain of a radial field: a weighted interval [0, L] or a warped
/// model posed on [3h, R] (the pole is excluded; symmetry is imposed at the
/// inner node, an O(h) modeling choice).
using Space = std::variant<WeightedInterval, WarpedModel>;

inline double space_h(const Space& sp) {
    return std::visit([](const auto& s) { return s.h(); }, sp);
}

inline double space_drift(const Space& sp, double s) {
    return std::visit([s](const auto& g) { return g.drift(s); }, sp);
}

/// Node set of the discretization. Weighted intervals use the full uniform
/// grid; warped models start three cells away from the pole.
inline std::vector<double> space_grid(const Space& sp) {
    if (std::holds_alternative<WeightedInterval>(sp)) {
        const auto& w = std::get<WeightedInterval>(sp);
        return uniform_grid(0.0, w.length, w.m);
    }
    const auto& w = std::get<WarpedModel>(sp);
    const double h = w.h();
    std::vector<double> g;
    g.reserve(w.m - 2);
    for (int i = 3; i <= w.m; ++i) g.push_back(i * h);
    return g;
}

enum class FieldBCKind { dirichlet_zero, neumann_zero, dirichlet_values };

struct FieldBC {
    FieldBCKind kind = FieldBCKind::dirichlet_zero;
    double left = 0.0;   ///< assigned value at the left end (dirichlet_values)
    double right = 0.0;  ///< assigned value at the right end (dirichlet_values)

    static FieldBC dirichlet_zero() { return {FieldBCKind::dirichlet_zero, 0.0, 0.0}; }
    static FieldBC neumann_zero() { return {FieldBCKind::neumann_zero, 0.0, 0.0}; }
    static FieldBC dirichlet_values(double g0, double g1) {
        return {FieldBCKind::dirichlet_values, g0, g1};
    }
};

/// Radial scalar field sampled on the space's node set. On warped models the
/// boundary condition applies at the outer radius; the pole side always
/// carries the symmetry (Neumann) condition.
struct Field1D {
    Space space;
    FieldBC bc;
    std::vector<double> values;
    double time = 0.0;

    double h() const { return space_h(space); }
    std::vector<double> grid() const { return space_grid(space); }
};

/// Samples u0 on the space's grid and applies the boundary assignment once.
inline Field1D make_field(Space space, const std::function<double(double)>& u0, FieldBC bc) {
    Field1D f;
    f.space = std::move(space);
    f.bc = bc;
    const auto g = f.grid();
    f.values.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        f.values[i] = u0(g[i]);
        if (!std::isfinite(f.values[i]))
            throw InvalidParameter("make_field: initial data not finite at s = " +
                                   std::to_string(g[i]));
    }
    const bool warped = std::holds_alternative<WarpedModel>(f.space);
    if (bc.kind == FieldBCKind::dirichlet_zero) {
        if (!warped) f.values.front() = 0.0;
        f.values.back() = 0.0;
    } else if (bc.kind == FieldBCKind::dirichlet_values) {
        if (!warped) f.values.front() = bc.left;
        f.values.back() = bc.right;
    }
    return f;
}

struct SolverConfig {
    double dt = 0.0;
    double eps = 1e-8;       ///< gradient floor |Du|_eps = max(|Du|, eps)
    double cfl = 0.9;        ///< safety factor in dt <= cfl h^2 / (2 alpha)
    double t_end = 0.0;
    long snapshot_every = 0; ///< steps between stored snapshots (0: ends only)
    long max_steps = 50000000;
};

using Trajectory = std::vector<Field1D>;

namespace detail {

/// One explicit update of the full node set into `un`. Centered D2 and
/// centered Du for the alpha argument, upwinded Du inside the drift term.
/// Audits the monotonicity condition at every node and throws CFLViolation
/// before any state is published.
template <typename Q3>
void explicit_sweep(const std::vector<double>& u, std::vector<double>& un,
                    const std::vector<double>& grid, const std::vector<double>& dr,
                    double h, double dt, double t, const IsotropicOperator& op,
                    const Q3& q3, const FieldBC& bc, bool left_symmetry, double eps,
                    double cfl) {
    const std::size_t n = u.size();
    for (std::size_t i = 0; i < n; ++i) {
        double d2, g_raw, up_fwd, up_bwd;
        if (i == 0) {
            if (!left_symmetry && bc.kind != FieldBCKind::neumann_zero) {
                un[0] = bc.kind == FieldBCKind::dirichlet_zero ? 0.0 : bc.left;
                continue;
            }
            d2 = 2.0 * (u[1] - u[0]) / (h * h);
            g_raw = 0.0;
            up_fwd = (u[1] - u[0]) / h;
            up_bwd = -up_fwd;  // reflected ghost
        } else if (i == n - 1) {
            if (bc.kind != FieldBCKind::neumann_zero) {
                un[i] = bc.kind == FieldBCKind::dirichlet_zero ? 0.0 : bc.right;
                continue;
            }
            d2 = 2.0 * (u[n - 2] - u[n - 1]) / (h * h);
            g_raw = 0.0;
            up_bwd = (u[n - 1] - u[n - 2]) / h;
            up_fwd = -up_bwd;
        } else {
            d2 = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
            g_raw = (u[i + 1] - u[i - 1]) / (2.0 * h);
            up_fwd = (u[i + 1] - u[i]) / h;
            up_bwd = (u[i] - u[i - 1]) / h;
        }
        const double g = std::max(std::abs(g_raw), eps);
        const double a = op.alpha_at(g, u[i], t);
        const double v = op.beta_at(g, u[i], t) * dr[i];
        const double adv = v > 0.0 ? v * up_fwd : v * up_bwd;
        if (dt * 2.0 * a > cfl * h * h || dt * (2.0 * a / (h * h) + std::abs(v) / h) > 1.0)
            throw CFLViolation("explicit step: realized alpha/drift violate the CFL bound at s = " +
                               std::to_string(grid[i]));
        un[i] = u[i] + dt * (a * d2 + adv + q3(g, u[i], t));
    }
}

struct SpaceTable {
    std::vector<double> grid;
    std::vector<double> drift;
    double h;
    bool left_symmetry;
};

inline SpaceTable tabulate(const Space& sp) {
    SpaceTable t;
    t.grid = space_grid(sp);
    t.h = space_h(sp);
    t.left_symmetry = std::holds_alternative<WarpedModel>(sp);
    t.drift.resize(t.grid.size());
    for (std::size_t i = 0; i < t.grid.size(); ++i) t.drift[i] = space_drift(sp, t.grid[i]);
    return t;
}

inline void overflow_guard(const std::vector<double>& u) {
    for (double v : u)
        if (!(std::abs(v) <= 1e12)) throw Overflow("field norm exceeded 1e12");
}

} // namespace detail

/// One explicit step of u_t = alpha(|Du|_eps) D2u + beta(|Du|_eps) drift Du
/// + q(|Du|_eps, u, t). On CFLViolation the step is retried once as two
/// half steps before the error propagates.
inline Field1D step_parabolic(const Field1D& field, const IsotropicOperator& op,
                              const SourceTerm& source, const SolverConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw InvalidParameter("step_parabolic: dt must be positive");
    const auto tab = detail::tabulate(field.space);
    auto q3 = [&](double g, double u, double t) { return source.q_at(g, u, t); };

    Field1D out = field;
    std::vector<double> un(field.values.size());
    try {
        detail::explicit_sweep(field.values, un, tab.grid, tab.drift, tab.h, cfg.dt,
                               field.time, op, q3, field.bc, tab.left_symmetry, cfg.eps,
                               cfg.cfl);
    } catch (const CFLViolation&) {
        std::vector<double> mid(field.values.size());
        detail::explicit_sweep(field.values, mid, tab.grid, tab.drift, tab.h, 0.5 * cfg.dt,
                               field.time, op, q3, field.bc, tab.left_symmetry, cfg.eps,
                               cfg.cfl);
        detail::explicit_sweep(mid, un, tab.grid, tab.drift, tab.h, 0.5 * cfg.dt,
                               field.time + 0.5 * cfg.dt, op, q3, field.bc,
                               tab.left_symmetry, cfg.eps, cfg.cfl);
    }
    detail::overflow_guard(un);
    out.values.swap(un);
    out.time = field.time + cfg.dt;
    return out;
}

/// Evolves u0 to cfg.t_end, storing the initial state, every
/// cfg.snapshot_every-th step, and the final state.
inline Trajectory solve_parabolic(const Field1D& u0, const IsotropicOperator& op,
                                  const SourceTerm& source, const SolverConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw InvalidParameter("solve_parabolic: dt must be positive");
    if (!(cfg.t_end > 0.0)) throw InvalidParameter("solve_parabolic: t_end must be positive");
    const long n_steps = (long)std::ceil(cfg.t_end / cfg.dt - 1e-12);
    if (n_steps > cfg.max_steps) throw InvalidParameter("solve_parabolic: step budget exceeded");
    const double dte = cfg.t_end / (double)n_steps;
    const auto tab = detail::tabulate(u0.space);
    auto q3 = [&](double g, double u, double t) { return source.q_at(g, u, t); };

    Trajectory traj;
    traj.push_back(u0);
    traj.front().time = 0.0;

    std::vector<double> u = u0.values, un(u.size()), mid(u.size());
    for (long step = 0; step < n_steps; ++step) {
        const double t = step * dte;
        try {
            detail::explicit_sweep(u, un, tab.grid, tab.drift, tab.h, dte, t, op, q3, u0.bc,
                                   tab.left_symmetry, cfg.eps, cfg.cfl);
        } catch (const CFLViolation&) {
            detail::explicit_sweep(u, mid, tab.grid, tab.drift, tab.h, 0.5 * dte, t, op, q3,
                                   u0.bc, tab.left_symmetry, cfg.eps, cfg.cfl);
            detail::explicit_sweep(mid, un, tab.grid, tab.drift, tab.h, 0.5 * dte,
                                   t + 0.5 * dte, op, q3, u0.bc, tab.left_symmetry, cfg.eps,
                                   cfg.cfl);
        }
        detail::overflow_guard(un);
        u.swap(un);
        const bool last = step + 1 == n_steps;
        if (last || (cfg.snapshot_every > 0 && (step + 1) % cfg.snapshot_every == 0)) {
            Field1D snap = u0;
            snap.values = u;
            snap.time = last ? cfg.t_end : (step + 1) * dte;
            traj.push_back(std::move(snap));
        }
    }
    return traj;
}

/// Max interior defect |alpha D2u + beta drift Du + b(u, |Du|)| of the
/// steady equation, discretized exactly as the relaxation scheme (upwinded
/// drift term), so a converged solve reports its own fixed-point residual.
inline double residual_elliptic(const Field1D& field, const IsotropicOperator& op,
                                const SourceTerm& b, double eps = 1e-8) {
    const auto tab = detail::tabulate(field.space);
    const auto& u = field.values;
    const double h = tab.h;
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < u.size(); ++i) {
        const double d2 = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
        const double g_raw = (u[i + 1] - u[i - 1]) / (2.0 * h);
        const double g = std::max(std::abs(g_raw), eps);
        const double a = op.alpha_at(g, u[i], 0.0);
        const double v = op.beta_at(g, u[i], 0.0) * tab.drift[i];
        const double adv = v > 0.0 ? v * (u[i + 1] - u[i]) / h : v * (u[i] - u[i - 1]) / h;
        worst = std::max(worst, std::abs(a * d2 + adv + b.b_at(u[i], g)));
    }
    return worst;
}

/// Steady state of alpha D2u + beta drift Du + b(u, |Du|) = 0 by explicit
/// pseudo-time relaxation from the linear interpolant of the boundary data,
/// iterated until the scheme residual falls under 1e-8 (1 + sup |b|).
inline Field1D solve_elliptic(const IsotropicOperator& op, const SourceTerm& b,
                              const Space& space, FieldBC bc, const SolverConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw InvalidParameter("solve_elliptic: dt must be positive");
    const auto tab = detail::tabulate(space);
    const double a0 = tab.grid.front(), a1 = tab.grid.back();
    const double v0 = bc.kind == FieldBCKind::dirichlet_values ? bc.left : 0.0;
    const double v1 = bc.kind == FieldBCKind::dirichlet_values ? bc.right : 0.0;

    Field1D f;
    f.space = space;
    f.bc = bc;
    f.values.resize(tab.grid.size());
    for (std::size_t i = 0; i < tab.grid.size(); ++i)
        f.values[i] = v0 + (v1 - v0) * (tab.grid[i] - a0) / (a1 - a0);

    auto q3 = [&](double g, double u, double) { return b.b_at(u, g); };
    const long max_steps = cfg.max_steps;
    std::vector<double> un(f.values.size()), mid(f.values.size());
    double res = std::numeric_limits<double>::infinity();
    for (long step = 0; step < max_steps; ++step) {
        try {
            detail::explicit_sweep(f.values, un, tab.grid, tab.drift, tab.h, cfg.dt, 0.0, op,
                                   q3, bc, tab.left_symmetry, cfg.eps, cfg.cfl);
        } catch (const CFLViolation&) {
            detail::explicit_sweep(f.values, mid, tab.grid, tab.drift, tab.h, 0.5 * cfg.dt,
                                   0.0, op, q3, bc, tab.left_symmetry, cfg.eps, cfg.cfl);
            detail::explicit_sweep(mid, un, tab.grid, tab.drift, tab.h, 0.5 * cfg.dt, 0.0, op,
                                   q3, bc, tab.left_symmetry, cfg.eps, cfg.cfl);
        }
        detail::overflow_guard(un);
        f.values.swap(un);
        if (step % 200 == 199 || step + 1 == max_steps) {
            double bsup = 0.0;
            for (std::size_t i = 0; i < f.values.size(); ++i) {
                const double g = std::max(
                    std::abs(i == 0 || i + 1 == f.values.size()
                                 ? 0.0
                                 : (f.values[i + 1] - f.values[i - 1]) / (2.0 * tab.h)),
                    cfg.eps);
                bsup = std::max(bsup, std::abs(b.b_at(f.values[i], g)));
            }
            res = residual_elliptic(f, op, b, cfg.eps);
            if (res < 1e-8 * (1.0 + bsup)) return f;
        }
    }
    throw NonConvergence("solve_elliptic: residual " + std::to_string(res) +
                         " after step budget");
}

} // namespace qcomp
