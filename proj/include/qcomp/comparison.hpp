#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qcomp/errors.hpp"
#include "qcomp/geometry.hpp"
#include "qcomp/interp.hpp"
#include "qcomp/ode.hpp"
#include "qcomp/operators.hpp"
#include "qcomp/report.hpp"

namespace qcomp {

/// End conditions for an evolved barrier. A flag left false leaves that end
/// "free": the node evolves under the interior equation with its one-sided
/// slope held at the initial value (a stable selection among the solutions
/// the comparison theorems admit, which impose no boundary data on the
/// barrier).
struct ProfileBC {
    bool pinned_left = false;    ///< reassign phi(0, t) = phi0(0) every step
    bool neumann_right = false;  ///< ghost reflection, phi_s = 0 at the right end

    static ProfileBC free_ends() { return {false, false}; }
    static ProfileBC pinned_neumann() { return {true, true}; }
};

/// Space-time table of a one-dimensional barrier phi(s, t) together with the
/// equation it was evolved under, so admissibility can be audited later.
/// phi_s holds the slope per slice: centered in the interior, one-sided at
/// the ends (exact samples when the profile came from an ODE integration).
struct ComparisonProfile {
    std::vector<double> s_grid;
    std::vector<double> t_grid;
    std::vector<std::vector<double>> values;  ///< values[k][i] = phi(s_i, t_k)
    std::vector<std::vector<double>> phi_s;   ///< slope table, same layout
    /// State one scheme step before each stored slice (empty entry when
    /// unavailable, e.g. the initial slice or an analytic table). Lets the
    /// admissibility audit measure phi_t over a single step instead of
    /// differencing across whole storage intervals.
    std::vector<std::vector<double>> values_pre;
    ProfileBC bc;
    IsotropicOperator op = catalog("laplacian", {});
    std::function<double(double)> drift = [](double) { return 0.0; };
    SourceTerm source = SourceTerm::zero();
    double dt_scheme = 0.0;  ///< time step used by the evolution (0 if none)
    double eps = 1e-8;       ///< gradient floor used in coefficient arguments

    double h() const {
        if (s_grid.size() < 2) throw PreconditionFailed("profile: s_grid too small");
        return s_grid[1] - s_grid[0];
    }
    double tol_mono() const { return 10.0 * h(); }

    /// Barrier slice at time t: exact slice within 1e-9, linear
    /// interpolation between stored slices otherwise.
    std::vector<double> slice_at(double t) const {
        if (t_grid.empty()) throw PreconditionFailed("profile: no slices");
        for (std::size_t k = 0; k < t_grid.size(); ++k)
            if (std::abs(t_grid[k] - t) <= 1e-9 * (1.0 + std::abs(t))) return values[k];
        if (t < t_grid.front() || t > t_grid.back())
            throw TimeMismatch("profile: requested time outside stored range");
        std::size_t k = 1;
        while (t_grid[k] < t) ++k;
        const double th = (t - t_grid[k - 1]) / (t_grid[k] - t_grid[k - 1]);
        std::vector<double> out(values[k].size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = (1.0 - th) * values[k - 1][i] + th * values[k][i];
        return out;
    }
};

namespace detail {

inline std::vector<double> slopes_of(const std::vector<double>& v, double h) {
    const std::size_t n = v.size();
    std::vector<double> d(n);
    d[0] = (v[1] - v[0]) / h;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    d[n - 1] = (v[n - 1] - v[n - 2]) / h;
    return d;
}

} // namespace detail

/// Explicit monotone finite-difference evolution of
///   phi_t = alpha(phi') phi'' + drift(s) beta(phi') phi' + q(phi', phi, t)
/// on the given grid. Centered second differences; the first-order term is
/// upwinded by the sign of drift * beta. The time step is audited every step
/// (CFLViolation) and the slope every step (MonotonicityLost below
/// -tol_mono, reported rather than clamped). Slices are stored with cadence
/// about h plus the initial and final times.
inline ComparisonProfile evolve_profile(const IsotropicOperator& op,
                                        const std::function<double(double)>& drift,
                                        const SourceTerm& source,
                                        const std::vector<double>& s_grid,
                                        const std::vector<double>& phi0, ProfileBC bc,
                                        double dt, double t_end, double eps = 1e-8) {
    if (s_grid.size() < 4) throw InvalidParameter("evolve_profile: need at least 4 nodes");
    if (phi0.size() != s_grid.size())
        throw InvalidParameter("evolve_profile: phi0 and s_grid sizes differ");
    if (!(dt > 0.0)) throw InvalidParameter("evolve_profile: dt must be positive");
    if (!(t_end >= 0.0)) throw InvalidParameter("evolve_profile: t_end must be nonnegative");

    const std::size_t n = s_grid.size();
    const double h = s_grid[1] - s_grid[0];
    const long n_steps = t_end > 0.0 ? (long)std::ceil(t_end / dt - 1e-12) : 0;
    const double dte = n_steps > 0 ? t_end / (double)n_steps : dt;
    const long stride = std::max<long>(1, (long)std::llround(h / dte));

    ComparisonProfile prof;
    prof.s_grid = s_grid;
    prof.bc = bc;
    prof.op = op;
    prof.drift = drift;
    prof.source = source;
    prof.dt_scheme = dte;
    prof.eps = eps;

    std::vector<double> dr(n);
    for (std::size_t i = 0; i < n; ++i) dr[i] = drift(s_grid[i]);
    const double slope_left = (phi0[1] - phi0[0]) / h;
    const double slope_right = (phi0[n - 1] - phi0[n - 2]) / h;

    std::vector<double> u = phi0, un(n);
    const double tol_mono = 10.0 * h;

    auto store = [&](double t, bool with_pre) {
        prof.t_grid.push_back(t);
        prof.values.push_back(u);
        prof.phi_s.push_back(detail::slopes_of(u, h));
        // After the swap below, un holds the state one step back.
        prof.values_pre.push_back(with_pre ? un : std::vector<double>{});
    };
    store(0.0, false);

    for (long step = 0; step < n_steps; ++step) {
        const double t = step * dte;
        for (std::size_t i = 0; i < n; ++i) {
            double d2, g_raw;
            if (i == 0) {
                g_raw = slope_left;
                d2 = bc.pinned_left ? 0.0 : 2.0 * (u[1] - u[0] - h * slope_left) / (h * h);
            } else if (i == n - 1) {
                g_raw = bc.neumann_right ? 0.0 : slope_right;
                d2 = bc.neumann_right
                         ? 2.0 * (u[n - 2] - u[n - 1]) / (h * h)
                         : 2.0 * (u[n - 2] - u[n - 1] + h * slope_right) / (h * h);
            } else {
                g_raw = (u[i + 1] - u[i - 1]) / (2.0 * h);
                d2 = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
            }
            const double g = std::max(std::abs(g_raw), eps);
            const double a = op.alpha_at(g, u[i], t);
            const double v = dr[i] * op.beta_at(g, u[i], t);
            double adv;
            if (i == 0 || i == n - 1)
                adv = v * g_raw;  // imposed end slope (0 for reflected Neumann)
            else
                adv = v > 0.0 ? v * (u[i + 1] - u[i]) / h : v * (u[i] - u[i - 1]) / h;
            if (dte * (2.0 * a / (h * h) + std::abs(v) / h) > 1.0 ||
                dte * 2.0 * a > 0.9 * h * h)
                throw CFLViolation("evolve_profile: dt too large for realized alpha at s = " +
                                   std::to_string(s_grid[i]));
            un[i] = u[i] + dte * (a * d2 + adv + source.q_at(g, u[i], t));
        }
        if (bc.pinned_left) un[0] = phi0[0];
        u.swap(un);
        for (std::size_t i = 0; i + 1 < n; ++i)
            if ((u[i + 1] - u[i]) / h < -tol_mono)
                throw MonotonicityLost("evolve_profile: slope fell below -10h at t = " +
                                       std::to_string(t + dte));
        if ((step + 1) % stride == 0 && step + 1 < n_steps) store((step + 1) * dte, true);
    }
    if (n_steps > 0) store(t_end, true);
    return prof;
}

enum class ForTheorem { MC_Dirichlet, MC_Neumann, Decay };

inline std::string to_string(ForTheorem ft) {
    switch (ft) {
    case ForTheorem::MC_Dirichlet: return "MC_Dirichlet";
    case ForTheorem::MC_Neumann: return "MC_Neumann";
    case ForTheorem::Decay: return "Decay";
    }
    return "?";
}

/// Audits the barrier hypotheses of the selected comparison theorem on the
/// stored table: slope nonnegativity (always), concavity and left pinning
/// (Dirichlet modulus), left pinning (decay), and the differential
/// inequality phi_t >= alpha phi'' + drift beta phi' + q at interior nodes.
/// The right side is discretized exactly as the evolution scheme (upwinded
/// first-order term) so an equality-evolved profile reports a residual of
/// the scheme's own truncation order. Time derivatives prefer the one-step
/// pre-states recorded by evolve_profile; slices without one fall back to a
/// three-point difference across stored slices that remains second order on
/// unequal spacing.
inline HypothesisReport check_profile_admissible(const ComparisonProfile& prof,
                                                 ForTheorem ft) {
    if (prof.values.empty() || prof.s_grid.size() < 4)
        throw PreconditionFailed("check_profile_admissible: empty profile");
    const double h = prof.h();
    const std::size_t n = prof.s_grid.size();
    const std::size_t K = prof.t_grid.size();
    const double tol_pde = 10.0 * (h * h + prof.dt_scheme);

    HypothesisReport rep;
    rep.name = "profile_admissible_" + to_string(ft);

    {
        CheckReport r;
        r.name = "slope_nonnegative";
        r.tolerance_used = prof.tol_mono();
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const double viol = -(prof.values[k][i + 1] - prof.values[k][i]) / h;
                if (viol > r.worst_violation) {
                    r.worst_violation = viol;
                    r.worst_location = {i, prof.s_grid[i], prof.t_grid[k]};
                }
            }
        r.finalize();
        rep.add(std::move(r));
    }

    if (ft == ForTheorem::MC_Dirichlet) {
        CheckReport r;
        r.name = "concavity";
        r.tolerance_used = tol_pde;
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t i = 1; i + 1 < n; ++i) {
                const auto& v = prof.values[k];
                const double viol = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
                if (viol > r.worst_violation) {
                    r.worst_violation = viol;
                    r.worst_location = {i, prof.s_grid[i], prof.t_grid[k]};
                }
            }
        r.finalize();
        rep.add(std::move(r));
    }

    if (ft == ForTheorem::MC_Dirichlet || ft == ForTheorem::Decay) {
        CheckReport r;
        r.name = "pinned_at_origin";
        r.tolerance_used = 1e-9;
        for (std::size_t k = 0; k < K; ++k) {
            const double viol = std::abs(prof.values[k][0]);
            if (viol > r.worst_violation) {
                r.worst_violation = viol;
                r.worst_location = {0, prof.s_grid[0], prof.t_grid[k]};
            }
        }
        r.finalize();
        rep.add(std::move(r));
    }

    {
        CheckReport r;
        r.name = "differential_inequality";
        r.tolerance_used = tol_pde;
        long checked = 0;
        for (std::size_t k = 0; k < K; ++k) {
            // A slice stored with its one-step-back state gets an
            // instantaneous time derivative, insensitive to how fast the
            // table bends between slices. Other slices difference across
            // storage intervals with a three-point formula that stays second
            // order on the unequal gap left by the final store; that needs
            // both neighbors, and a single-slice table is treated as
            // stationary (phi_t = 0).
            const bool micro = prof.dt_scheme > 0.0 && prof.values_pre.size() == K &&
                               prof.values_pre[k].size() == n;
            if (!micro) {
                if (K >= 3 && (k == 0 || k + 1 == K)) continue;
                if (K == 2) continue;
            }
            ++checked;
            const auto& v = prof.values[k];
            const double t = prof.t_grid[k];
            const bool slices = !micro && K >= 3;
            const double dp = slices ? prof.t_grid[k + 1] - prof.t_grid[k] : 0.0;
            const double dm = slices ? prof.t_grid[k] - prof.t_grid[k - 1] : 0.0;
            for (std::size_t i = 1; i + 1 < n; ++i) {
                const double phi_t =
                    micro ? (v[i] - prof.values_pre[k][i]) / prof.dt_scheme
                    : slices ? (dm * dm * prof.values[k + 1][i] +
                                (dp * dp - dm * dm) * v[i] -
                                dp * dp * prof.values[k - 1][i]) /
                                   (dp * dm * (dp + dm))
                             : 0.0;
                const double g_raw = (v[i + 1] - v[i - 1]) / (2.0 * h);
                const double g = std::max(std::abs(g_raw), prof.eps);
                const double a = prof.op.alpha_at(g, v[i], t);
                const double w = prof.drift(prof.s_grid[i]) * prof.op.beta_at(g, v[i], t);
                const double adv =
                    w > 0.0 ? w * (v[i + 1] - v[i]) / h : w * (v[i] - v[i - 1]) / h;
                const double rhs = a * (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h) + adv +
                                   prof.source.q_at(g, v[i], t);
                const double viol = rhs - phi_t;
                if (viol > r.worst_violation) {
                    r.worst_violation = viol;
                    r.worst_location = {i, prof.s_grid[i], t};
                }
            }
        }
        r.metadata["time_slices_checked"] = static_cast<double>(checked);
        r.finalize();
        rep.add(std::move(r));
    }
    return rep;
}

/// Per-time inverse maps Psi(., t) of a strictly increasing barrier table.
/// Evaluation linearly interpolates the inverse between stored slices.
class InverseProfile {
public:
    InverseProfile(std::vector<double> t_grid, std::vector<MonotoneCubic> maps,
                   double h)
        : t_grid_(std::move(t_grid)), maps_(std::move(maps)), h_(h) {}

    /// Psi(v, t): arc-length position at which the barrier attains value v.
    double eval(double v, double t) const {
        if (t < t_grid_.front() - 1e-9 || t > t_grid_.back() + 1e-9)
            throw TimeMismatch("inverse profile: time outside stored range");
        std::size_t k = 0;
        while (k + 1 < t_grid_.size() && t_grid_[k + 1] < t) ++k;
        if (k + 1 == t_grid_.size()) return at_slice(k, v);
        if (std::abs(t_grid_[k] - t) <= 1e-9 * (1.0 + std::abs(t))) return at_slice(k, v);
        const double th = (t - t_grid_[k]) / (t_grid_[k + 1] - t_grid_[k]);
        return (1.0 - th) * at_slice(k, v) + th * at_slice(k + 1, v);
    }

    /// Barrier slope at height v, read through the inverse: phi'(Psi(v,t),t)
    /// computed as the reciprocal of Psi_v (chain rule on the stored table).
    double slope_at_value(double v, double t) const {
        if (t < t_grid_.front() - 1e-9 || t > t_grid_.back() + 1e-9)
            throw TimeMismatch("inverse profile: time outside stored range");
        std::size_t k = 0;
        while (k + 1 < t_grid_.size() && t_grid_[k + 1] < t) ++k;
        if (k + 1 == t_grid_.size() ||
            std::abs(t_grid_[k] - t) <= 1e-9 * (1.0 + std::abs(t)))
            return slope_slice(k, v);
        const double th = (t - t_grid_[k]) / (t_grid_[k + 1] - t_grid_[k]);
        return (1.0 - th) * slope_slice(k, v) + th * slope_slice(k + 1, v);
    }

    const std::vector<double>& times() const { return t_grid_; }
    double value_min(std::size_t k) const { return maps_[k].front(); }
    double value_max(std::size_t k) const { return maps_[k].back(); }

private:
    double at_slice(std::size_t k, double v) const {
        const auto& m = maps_[k];
        const double span = m.back() - m.front();
        if (v < m.front() - 1e-9 * span || v > m.back() + 1e-9 * span)
            throw RangeError("inverse profile: value outside barrier range");
        return m(std::clamp(v, m.front(), m.back()));
    }
    double slope_slice(std::size_t k, double v) const {
        const auto& m = maps_[k];
        const double span = m.back() - m.front();
        if (v < m.front() - 1e-9 * span || v > m.back() + 1e-9 * span)
            throw RangeError("inverse profile: value outside barrier range");
        const auto j = m.jet(std::clamp(v, m.front(), m.back()));
        if (!(j.d1 > 0.0))
            throw NotInvertible("inverse profile: flat spot in the inverse table");
        return 1.0 / j.d1;
    }

    std::vector<double> t_grid_;
    std::vector<MonotoneCubic> maps_;
    double h_;
};

/// Builds the inverse table. Requires strict monotonicity of every slice;
/// monotone cubic interpolation through (phi(s_i), s_i) reproduces the grid
/// nodes exactly, which bounds the round trip |Psi(phi(s)) - s| by 2h
/// between nodes.
inline InverseProfile invert_profile(const ComparisonProfile& prof) {
    if (prof.values.empty()) throw PreconditionFailed("invert_profile: empty profile");
    const double h = prof.h();
    std::vector<MonotoneCubic> maps;
    maps.reserve(prof.values.size());
    for (std::size_t k = 0; k < prof.values.size(); ++k) {
        const auto& v = prof.values[k];
        for (std::size_t i = 0; i + 1 < v.size(); ++i)
            if (!(v[i + 1] > v[i]))
                throw NotInvertible("invert_profile: slice at t = " +
                                    std::to_string(prof.t_grid[k]) +
                                    " is not strictly increasing");
        maps.emplace_back(v, prof.s_grid);
    }
    return InverseProfile(prof.t_grid, std::move(maps), h);
}

struct BarrierOptions {
    double ode_rtol = 1e-10;
    double ode_atol = 1e-12;
    int grid_m = 256;          ///< cells of the returned sample grid
    double max_span = 1e4;     ///< integration budget in the profile variable
    double slope_floor = 1e-12;
};

/// Integrates the stationary barrier equation
///   alpha(phi') phi'' - kappa t beta(phi') phi' + b(phi, phi') = 0
/// from phi(0) = inf_u with initial slope c > 0 until phi first reaches
/// sup_u; the hitting point b_c becomes the right end of the returned
/// single-slice profile. Fails with SlopeCollapse when phi' reaches the
/// floor first and DomainExhausted when the span budget runs out.
inline ComparisonProfile barrier_elliptic(const IsotropicOperator& op, const SourceTerm& b,
                                          double kappa, std::pair<double, double> u_range,
                                          double c, const BarrierOptions& opt = {}) {
    const auto [inf_u, sup_u] = u_range;
    if (!(sup_u > inf_u)) throw InvalidParameter("barrier_elliptic: empty value range");
    if (!(c > 0.0)) throw InvalidParameter("barrier_elliptic: initial slope must be positive");

    auto rhs = [&](double t, const OdeState<2>& y) -> OdeState<2> {
        const double g = std::abs(y[1]);
        const double a = op.alpha_at(g, y[0], 0.0);
        if (!(a > 0.0))
            throw DegenerateOperator("barrier_elliptic: alpha vanished along the trajectory");
        return {y[1], (kappa * t * op.beta_at(g, y[0], 0.0) * y[1] - b.b_at(y[0], y[1])) / a};
    };
    Rk45Options ro{opt.ode_rtol, opt.ode_atol, 1e-4, 1e-14, 2000000};

    // March in windows, watching for the height crossing or slope collapse.
    double t0 = 0.0;
    OdeState<2> y{inf_u, c};
    double t_hit = -1.0, t_lo = 0.0;
    OdeState<2> y_lo = y;
    bool collapsed = false;
    const double window = std::max((sup_u - inf_u) / c, 1e-3);
    while (t0 < opt.max_span) {
        const double t1 = std::min(t0 + window, opt.max_span);
        double s_prev = t0;
        OdeState<2> y_prev = y;
        bool stopped = false;
        OdeState<2> yend = rk45_to(rhs, t0, y, t1, ro,
                                   [&](double sp, const OdeState<2>& yp, double,
                                       const OdeState<2>& yn) {
                                       if (yn[0] >= sup_u || yn[1] <= opt.slope_floor) {
                                           s_prev = sp;
                                           y_prev = yp;
                                           stopped = true;
                                           return false;
                                       }
                                       return true;
                                   });
        if (stopped) {
            if (yend[1] <= opt.slope_floor && yend[0] < sup_u)
                collapsed = true;
            t_lo = s_prev;
            y_lo = y_prev;
            t_hit = t0;  // marker: crossing inside this window
            y = yend;
            break;
        }
        y = yend;
        t0 = t1;
    }
    if (collapsed)
        throw SlopeCollapse("barrier_elliptic: phi' collapsed before reaching sup_u");
    if (t_hit < 0.0)
        throw DomainExhausted("barrier_elliptic: span budget exhausted before reaching sup_u");

    // Refine b_c between the last pre-crossing state and the stop point.
    double lo = t_lo, hi = t_lo + std::max(1e-12, 2.0 * window);
    {
        // First find a bracketing hi by stepping from the known low state.
        OdeState<2> yy = y_lo;
        double step = std::max((sup_u - y_lo[0]) / std::max(y_lo[1], opt.slope_floor), 1e-9);
        double tt = t_lo;
        while (yy[0] < sup_u) {
            yy = rk45_to(rhs, tt, yy, tt + step, ro);
            tt += step;
            if (tt > opt.max_span)
                throw DomainExhausted("barrier_elliptic: refinement left the span budget");
        }
        hi = tt;
    }
    for (int it = 0; it < 80 && hi - lo > 1e-13 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        OdeState<2> ym = rk45_to(rhs, t_lo, y_lo, mid, ro);
        if (ym[0] >= sup_u)
            hi = mid;
        else
            lo = mid;
    }
    const double b_c = 0.5 * (lo + hi);

    ComparisonProfile prof;
    prof.s_grid = uniform_grid(0.0, b_c, opt.grid_m);
    prof.t_grid = {0.0};
    prof.bc = ProfileBC::free_ends();
    prof.op = op;
    prof.drift = [kappa](double s) { return -kappa * s; };
    prof.source.q = [b](double g, double u, double) { return b.b_at(u, g); };
    prof.dt_scheme = 0.0;
    prof.values.resize(1);
    prof.phi_s.resize(1);
    auto& vals = prof.values[0];
    auto& slopes = prof.phi_s[0];
    vals.resize(prof.s_grid.size());
    slopes.resize(prof.s_grid.size());
    OdeState<2> yy{inf_u, c};
    vals[0] = yy[0];
    slopes[0] = yy[1];
    for (std::size_t i = 1; i < prof.s_grid.size(); ++i) {
        yy = rk45_to(rhs, prof.s_grid[i - 1], yy, prof.s_grid[i], ro);
        vals[i] = yy[0];
        slopes[i] = yy[1];
    }
    return prof;
}

} // namespace qcomp
