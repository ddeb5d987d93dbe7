#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "qcomp/errors.hpp"
#include "qcomp/geometry.hpp"
#include "qcomp/ode.hpp"
#include "qcomp/operators.hpp"

namespace qcomp {

enum class EigenBC {
    dirichlet_both,
    dirichlet_left_neumann_right,
    neumann_both,
};

inline std::string to_string(EigenBC bc) {
    switch (bc) {
    case EigenBC::dirichlet_both: return "dirichlet_both";
    case EigenBC::dirichlet_left_neumann_right: return "dirichlet_left_neumann_right";
    case EigenBC::neumann_both: return "neumann_both";
    }
    return "?";
}

/// Final bisection bracket; hi - lo certifies the eigenvalue enclosure.
struct BracketCertificate {
    double lo = 0.0;
    double hi = 0.0;
};

struct EigenResult {
    double lambda = 0.0;
    std::vector<double> s;      ///< sample grid
    std::vector<double> phi;    ///< eigenfunction samples
    std::vector<double> dphi;   ///< first derivative samples
    std::vector<double> d2phi;  ///< second derivative samples (eps-regularized)
    double residual = 0.0;      ///< max nodal defect through evaluate_radial
    int iterations = 0;         ///< bisection iterations
    EigenBC bc = EigenBC::dirichlet_left_neumann_right;
    BracketCertificate bracket;
    double matching_gap = 0.0;  ///< two-sided runs: momentum gap at the join
};

struct ShootOptions {
    double ode_rtol = 1e-10;
    double ode_atol = 1e-12;
    double bisect_rel_tol = 1e-10;
    int max_bisect = 200;
    int grid_m = 256;          ///< cells of the sample grid
    int max_expand = 20;       ///< bracket expansion budget, factor 2^20
    double initial_slope = 1.0;///< phi'(0) for Dirichlet-start problems
    double eps = 1e-8;         ///< gradient floor used for d2phi reconstruction
};

namespace detail {

/// Momentum-form shooting state: y = (phi, Phi) with Phi = |phi'|^m phi',
/// m the exponent of the alpha power law. Removes the alpha(0) degeneracy
/// for p != 2 and keeps the system Lipschitz through phi' = 0 crossings.
struct MomentumOp {
    double a0;   ///< alpha = a0 g^m
    double m;
    double b0;   ///< beta = b0 g^mb
    double mb;
    double gamma;

    static MomentumOp from(const IsotropicOperator& op, double gamma) {
        if (!op.alpha_power || !op.beta_power)
            throw DegenerateOperator("eigen: operator lacks power-law alpha/beta");
        if (!(op.alpha_power->coef > 0.0))
            throw DegenerateOperator("eigen: alpha vanishes identically for '" + op.name + "'");
        if (!(op.alpha_power->expn > -1.0))
            throw DegenerateOperator("eigen: alpha exponent must exceed -1");
        if (!(gamma > 0.0)) throw InvalidParameter("eigen: gamma must be positive");
        return {op.alpha_power->coef, op.alpha_power->expn,
                op.beta_power->coef, op.beta_power->expn, gamma};
    }

    double dphi_from_Phi(double Phi) const {
        return std::copysign(std::pow(std::abs(Phi), 1.0 / (m + 1.0)), Phi);
    }

    double Phi_from_dphi(double dphi) const {
        return std::copysign(std::pow(std::abs(dphi), m + 1.0), dphi);
    }

    /// beta(|phi'|) phi' expressed through Phi (exact for power laws).
    double beta_dphi(double Phi) const {
        return b0 * std::copysign(std::pow(std::abs(Phi), (mb + 1.0) / (m + 1.0)), Phi);
    }

    template <typename DriftFn>
    OdeState<2> rhs(double s, const OdeState<2>& y, double lambda, DriftFn&& drift) const {
        const double phi = y[0], Phi = y[1];
        const double forcing = -lambda * std::copysign(std::pow(std::abs(phi), gamma), phi);
        return {dphi_from_Phi(Phi),
                (m + 1.0) / a0 * (forcing - drift(s) * beta_dphi(Phi))};
    }
};

enum class ShotVerdict { low, high };

/// One Dirichlet-start shot on [0, L]: phi(0) = 0, phi'(0) = slope > 0.
/// Returns high when phi' reaches zero at or before L, low otherwise.
template <typename DriftFn>
ShotVerdict shoot_dirichlet_start(const MomentumOp& mop, DriftFn&& drift, double lambda,
                                  double L, const ShootOptions& opt) {
    auto f = [&](double s, const OdeState<2>& y) { return mop.rhs(s, y, lambda, drift); };
    Rk45Options ro{opt.ode_rtol, opt.ode_atol, L * 1e-3, 1e-14, 2000000};
    bool hit = false;
    OdeState<2> y0{0.0, mop.Phi_from_dphi(opt.initial_slope)};
    OdeState<2> yend = rk45_to(f, 0.0, y0, L, ro,
                               [&](double, const OdeState<2>&, double, const OdeState<2>& yn) {
                                   if (yn[1] <= 0.0) {
                                       hit = true;
                                       return false;
                                   }
                                   return true;
                               });
    if (hit) return ShotVerdict::high;
    return yend[1] > 0.0 ? ShotVerdict::low : ShotVerdict::high;
}

/// One Neumann-start shot on [0, L]: phi(0) = -1, phi'(0) = 0. Low while the
/// solution is still rising at L with at most one interior sign change.
template <typename DriftFn>
ShotVerdict shoot_neumann_start(const MomentumOp& mop, DriftFn&& drift, double lambda,
                                double L, const ShootOptions& opt) {
    auto f = [&](double s, const OdeState<2>& y) { return mop.rhs(s, y, lambda, drift); };
    Rk45Options ro{opt.ode_rtol, opt.ode_atol, L * 1e-3, 1e-14, 2000000};
    int sign_changes = 0;
    bool stopped = false;
    OdeState<2> y0{-1.0, 0.0};
    OdeState<2> yend =
        rk45_to(f, 0.0, y0, L, ro,
                [&](double, const OdeState<2>& yp, double, const OdeState<2>& yn) {
                    if ((yp[0] < 0.0 && yn[0] >= 0.0) || (yp[0] > 0.0 && yn[0] <= 0.0))
                        ++sign_changes;
                    if (sign_changes >= 2) {
                        stopped = true;
                        return false;
                    }
                    return true;
                });
    if (stopped) return ShotVerdict::high;
    return yend[1] > 0.0 ? ShotVerdict::low : ShotVerdict::high;
}

/// Expands [lo, hi] geometrically until classify(lo) == low and
/// classify(hi) == high, then bisects to the relative tolerance.
template <typename ClassifyFn>
BracketCertificate bisect_lambda(ClassifyFn&& classify, double seed, const ShootOptions& opt,
                                 int& iterations) {
    double lo = 0.5 * seed, hi = 2.0 * seed;
    int budget = opt.max_expand;
    while (classify(lo) == ShotVerdict::high) {
        lo *= 0.5;
        if (--budget < 0) throw BracketingFailure("eigen: no lower bracket after expansion");
    }
    budget = opt.max_expand;
    while (classify(hi) == ShotVerdict::low) {
        hi *= 2.0;
        if (--budget < 0) throw BracketingFailure("eigen: no upper bracket after expansion");
    }
    iterations = 0;
    while (hi - lo > opt.bisect_rel_tol * hi && iterations < opt.max_bisect) {
        const double mid = 0.5 * (lo + hi);
        if (classify(mid) == ShotVerdict::low)
            lo = mid;
        else
            hi = mid;
        ++iterations;
    }
    return {lo, hi};
}

/// Final pass: integrate at the converged lambda, sampling the grid nodes,
/// and reconstruct derivatives. d2phi uses the same eps floor as
/// evaluate_radial so the reported residual reflects convention consistency.
template <typename DriftFn>
void sample_eigenfunction(EigenResult& out, const IsotropicOperator& op, const MomentumOp& mop,
                          DriftFn&& drift, double L, const OdeState<2>& y0,
                          const ShootOptions& opt) {
    const double lambda = out.lambda;
    auto rhs = [&](double s, const OdeState<2>& y) { return mop.rhs(s, y, lambda, drift); };
    Rk45Options ro{opt.ode_rtol, opt.ode_atol, L * 1e-3, 1e-14, 2000000};

    const int mg = opt.grid_m;
    out.s = uniform_grid(0.0, L, mg);
    out.phi.assign(out.s.size(), 0.0);
    out.dphi.assign(out.s.size(), 0.0);
    out.d2phi.assign(out.s.size(), 0.0);

    OdeState<2> y = y0;
    out.phi[0] = y[0];
    out.dphi[0] = mop.dphi_from_Phi(y[1]);
    for (std::size_t i = 1; i < out.s.size(); ++i) {
        y = rk45_to(rhs, out.s[i - 1], y, out.s[i], ro);
        out.phi[i] = y[0];
        out.dphi[i] = mop.dphi_from_Phi(y[1]);
    }
    // Reconstruct phi'' from the momentum relation Phi' = (m+1)|phi'|^m phi''.
    for (std::size_t i = 0; i < out.s.size(); ++i) {
        const double Phi = mop.Phi_from_dphi(out.dphi[i]);
        const OdeState<2> dy = mop.rhs(out.s[i], {out.phi[i], Phi}, lambda, drift);
        const double g = std::max(std::abs(out.dphi[i]), opt.eps);
        out.d2phi[i] = dy[1] / ((mop.m + 1.0) * std::pow(g, mop.m));
    }
    double res = 0.0;
    for (std::size_t i = 0; i < out.s.size(); ++i) {
        const double q = evaluate_radial(op, drift, out.dphi[i], out.d2phi[i], out.s[i], opt.eps);
        const double forcing =
            lambda * std::copysign(std::pow(std::abs(out.phi[i]), mop.gamma), out.phi[i]);
        res = std::max(res, std::abs(q + forcing));
    }
    out.residual = res;
}

inline double pi_p(double p) { return 2.0 * M_PI / (p * std::sin(M_PI / p)); }

/// Bracket seed from the drift-free closed form with q = m + 2.
inline double bracket_seed(const MomentumOp& mop, double halfwave) {
    const double q = mop.m + 2.0;
    return mop.a0 * std::pow(pi_p(q) / (2.0 * halfwave), q);
}

} // namespace detail

/// First eigenvalue of the 1-D model problem on [0, R] with drift
/// -(N-1) T_{kappa,lambda}(s), boundary conditions phi(0) = 0, phi'(R) = 0.
inline EigenResult shoot_1d_model(const IsotropicOperator& op, const CurvatureParams& params,
                                  double R, double gamma, const ShootOptions& opt = {}) {
    params.validate();
    if (params.infinite_N())
        throw InvalidParameter(
            "shoot_1d_model: N must be finite (the N = infinity model is drift-free; "
            "use kappa = lambda = 0)");
    if (!(R > 0.0)) throw InvalidParameter("shoot_1d_model: R must be positive");
    if (first_c_zero(params.kappa, params.lambda) <= R)
        throw DomainError("shoot_1d_model: T_{kappa,lambda} blows up inside [0, R]");

    const auto mop = detail::MomentumOp::from(op, gamma);
    const double nm1 = params.bigN - 1.0;
    const double kappa = params.kappa, lambda_b = params.lambda;
    auto drift = [=](double s) { return -nm1 * t_kappa_lambda(kappa, lambda_b, s); };

    auto classify = [&](double lam) {
        return detail::shoot_dirichlet_start(mop, drift, lam, R, opt);
    };
    EigenResult out;
    out.bc = EigenBC::dirichlet_left_neumann_right;
    out.bracket = detail::bisect_lambda(classify, detail::bracket_seed(mop, R), opt,
                                        out.iterations);
    out.lambda = 0.5 * (out.bracket.lo + out.bracket.hi);
    detail::sample_eigenfunction(out, op, mop, drift, R,
                                 {0.0, mop.Phi_from_dphi(opt.initial_slope)}, opt);
    return out;
}

/// First eigenvalue of the weighted interval [0, L] with drift -f'(s).
/// dirichlet_both uses two-sided shooting matched at the interior maximum;
/// the other conditions are single shots from the left.
inline EigenResult shoot_weighted_interval(const IsotropicOperator& op,
                                           const WeightedInterval& space, EigenBC bc,
                                           double gamma, const ShootOptions& opt = {}) {
    space.validate();
    const auto mop = detail::MomentumOp::from(op, gamma);
    const double L = space.length;
    const Density f = space.density;
    auto drift = [f](double s) { return -f.d1(s); };

    EigenResult out;
    out.bc = bc;

    if (bc == EigenBC::dirichlet_left_neumann_right) {
        auto classify = [&](double lam) {
            return detail::shoot_dirichlet_start(mop, drift, lam, L, opt);
        };
        out.bracket = detail::bisect_lambda(classify, detail::bracket_seed(mop, L), opt,
                                            out.iterations);
        out.lambda = 0.5 * (out.bracket.lo + out.bracket.hi);
        detail::sample_eigenfunction(out, op, mop, drift, L,
                                     {0.0, mop.Phi_from_dphi(opt.initial_slope)}, opt);
        return out;
    }

    if (bc == EigenBC::neumann_both) {
        auto classify = [&](double lam) {
            return detail::shoot_neumann_start(mop, drift, lam, L, opt);
        };
        out.bracket = detail::bisect_lambda(classify, detail::bracket_seed(mop, 0.5 * L), opt,
                                            out.iterations);
        out.lambda = 0.5 * (out.bracket.lo + out.bracket.hi);
        detail::sample_eigenfunction(out, op, mop, drift, L, {-1.0, 0.0}, opt);
        return out;
    }

    // dirichlet_both: left branch to its maximum, right branch (reflected
    // coordinate, drift -drift(L - sigma)) to the meeting point; the signed
    // matching gap is the rescaled right momentum there.
    auto drift_right = [f, L](double sigma) { return f.d1(L - sigma); };
    Rk45Options ro{opt.ode_rtol, opt.ode_atol, L * 1e-3, 1e-14, 2000000};

    auto left_max = [&](double lam) -> std::pair<double, double> {
        // Returns (s at first zero of Phi, phi there); s > L means no zero.
        auto rhs = [&](double s, const OdeState<2>& y) { return mop.rhs(s, y, lam, drift); };
        double s_a = 0.0, s_b = -1.0;
        OdeState<2> y_a{0.0, mop.Phi_from_dphi(opt.initial_slope)};
        OdeState<2> yend = rk45_to(rhs, 0.0, y_a, L, ro,
                                   [&](double sp, const OdeState<2>& yp, double sn,
                                       const OdeState<2>& yn) {
                                       if (yn[1] <= 0.0) {
                                           s_a = sp;
                                           y_a = yp;
                                           s_b = sn;
                                           return false;
                                       }
                                       return true;
                                   });
        if (s_b < 0.0) return {2.0 * L, yend[0]};
        // Refine the crossing by bisection, re-integrating subintervals.
        for (int it = 0; it < 60 && s_b - s_a > 1e-13 * L; ++it) {
            const double smid = 0.5 * (s_a + s_b);
            OdeState<2> ym = rk45_to(rhs, s_a, y_a, smid, ro);
            if (ym[1] <= 0.0) {
                s_b = smid;
            } else {
                s_a = smid;
                y_a = ym;
            }
        }
        return {0.5 * (s_a + s_b), y_a[0]};
    };

    double last_gap = 0.0;
    auto classify = [&](double lam) {
        const auto [s_star, v_left] = left_max(lam);
        if (s_star >= L) return detail::ShotVerdict::low;
        const double sigma_m = L - s_star;
        auto rhs_r = [&](double sigma, const OdeState<2>& y) {
            return mop.rhs(sigma, y, lam, drift_right);
        };
        OdeState<2> yr0{0.0, mop.Phi_from_dphi(opt.initial_slope)};
        OdeState<2> yr = rk45_to(rhs_r, 0.0, yr0, sigma_m, ro);
        if (!(yr[0] > 0.0)) return detail::ShotVerdict::high;
        const double c = v_left / yr[0];
        last_gap = std::pow(c, mop.m + 1.0) * yr[1];
        return last_gap > 0.0 ? detail::ShotVerdict::low : detail::ShotVerdict::high;
    };

    out.bracket = detail::bisect_lambda(classify, detail::bracket_seed(mop, 0.5 * L), opt,
                                        out.iterations);
    out.lambda = 0.5 * (out.bracket.lo + out.bracket.hi);
    out.matching_gap = last_gap;
    detail::sample_eigenfunction(out, op, mop, drift, L,
                                 {0.0, mop.Phi_from_dphi(opt.initial_slope)}, opt);
    return out;
}

/// First nonzero Neumann eigenvalue of the 1-D model of diameter D.
/// Finite N: odd reduction on [0, D/2] with drift -(N-1) T_{kappa,0}.
/// N = infinity: full interval [0, D] with drift -kappa s.
inline EigenResult neumann_1d_model(const IsotropicOperator& op, const CurvatureParams& params,
                                    double D, double gamma, const ShootOptions& opt = {}) {
    params.validate();
    if (!(D > 0.0)) throw InvalidParameter("neumann_1d_model: D must be positive");
    const auto mop = detail::MomentumOp::from(op, gamma);
    EigenResult out;
    out.bc = EigenBC::neumann_both;

    if (params.infinite_N()) {
        const double kappa = params.kappa;
        auto drift = [kappa](double s) { return -kappa * s; };
        auto classify = [&](double lam) {
            return detail::shoot_neumann_start(mop, drift, lam, D, opt);
        };
        out.bracket = detail::bisect_lambda(classify, detail::bracket_seed(mop, 0.5 * D), opt,
                                            out.iterations);
        out.lambda = 0.5 * (out.bracket.lo + out.bracket.hi);
        detail::sample_eigenfunction(out, op, mop, drift, D, {-1.0, 0.0}, opt);
        return out;
    }

    const double R = 0.5 * D;
    if (first_c_zero(params.kappa, 0.0) <= R)
        throw DomainError("neumann_1d_model: T_{kappa,0} blows up inside [0, D/2]");
    const double nm1 = params.bigN - 1.0;
    const double kappa = params.kappa;
    auto drift = [=](double s) { return -nm1 * t_kappa_lambda(kappa, 0.0, s); };
    auto classify = [&](double lam) {
        return detail::shoot_dirichlet_start(mop, drift, lam, R, opt);
    };
    out.bracket = detail::bisect_lambda(classify, detail::bracket_seed(mop, R), opt,
                                        out.iterations);
    out.lambda = 0.5 * (out.bracket.lo + out.bracket.hi);
    detail::sample_eigenfunction(out, op, mop, drift, R,
                                 {0.0, mop.Phi_from_dphi(opt.initial_slope)}, opt);
    return out;
}

struct RayleighOptions {
    int max_iters = 500000;
    double rel_tol = 1e-13;     ///< quotient stall tolerance
    int stall_window = 25;
    double eps = 1e-12;         ///< regularization inside |du|^{p-2} du
};

struct RayleighResult {
    double lambda = 0.0;
    std::vector<double> u;
    int iterations = 0;
};

/// Direct minimization of the weighted p-Rayleigh quotient
///   R(u) = int |u'|^p e^{-f} / int |u|^p e^{-f}
/// on the space's grid by projected (Barzilai-Borwein) gradient descent.
/// Cross-checks the shooting solvers through an independent discretization.
inline RayleighResult rayleigh_p(const WeightedInterval& space, double p, EigenBC bc,
                                 const RayleighOptions& opt = {}) {
    space.validate();
    if (!(p > 1.0)) throw InvalidParameter("rayleigh_p: p must be > 1");
    const double h = space.h();
    const double L = space.length;
    const auto s = space.grid();
    const std::size_t n = s.size();

    std::vector<double> wc(n - 1), wn(n);
    for (std::size_t c = 0; c + 1 < n; ++c)
        wc[c] = h * std::exp(-space.density(0.5 * (s[c] + s[c + 1])));
    for (std::size_t i = 0; i < n; ++i) {
        const double tw = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
        wn[i] = tw * h * std::exp(-space.density(s[i]));
    }

    auto spow = [&](double x, double e) {
        return std::copysign(std::pow(std::max(std::abs(x), opt.eps), e), x);
    };

    auto mass = [&](const std::vector<double>& u) {
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) d += wn[i] * std::pow(std::abs(u[i]), p);
        return d;
    };
    auto energy = [&](const std::vector<double>& u) {
        double e = 0.0;
        for (std::size_t c = 0; c + 1 < n; ++c)
            e += wc[c] * std::pow(std::abs((u[c + 1] - u[c]) / h), p);
        return e;
    };

    // Neumann runs constrain int |u|^{p-2} u e^{-f} = 0 by a scalar shift.
    auto recenter = [&](std::vector<double>& u) {
        if (bc != EigenBC::neumann_both) return;
        auto g = [&](double c) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += wn[i] * spow(u[i] - c, p - 1.0);
            return acc;
        };
        double lo = *std::min_element(u.begin(), u.end());
        double hi = *std::max_element(u.begin(), u.end());
        for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (g(mid) > 0.0)
                lo = mid;
            else
                hi = mid;
        }
        const double c = 0.5 * (lo + hi);
        for (auto& v : u) v -= c;
    };

    auto project = [&](std::vector<double>& u) {
        if (bc == EigenBC::dirichlet_both) {
            u.front() = 0.0;
            u.back() = 0.0;
        } else if (bc == EigenBC::dirichlet_left_neumann_right) {
            u.front() = 0.0;
        } else {
            recenter(u);
        }
        const double d = mass(u);
        if (!(d > 0.0)) throw NonConvergence("rayleigh_p: iterate collapsed to zero");
        const double scale = std::pow(d, -1.0 / p);
        for (auto& v : u) v *= scale;
    };

    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (bc == EigenBC::dirichlet_both)
            u[i] = std::sin(M_PI * s[i] / L);
        else if (bc == EigenBC::dirichlet_left_neumann_right)
            u[i] = std::sin(0.5 * M_PI * s[i] / L);
        else
            u[i] = -std::cos(M_PI * s[i] / L);
    }
    project(u);

    auto gradient = [&](const std::vector<double>& v, double rayleigh) {
        std::vector<double> g(n, 0.0);
        for (std::size_t c = 0; c + 1 < n; ++c) {
            const double du = (v[c + 1] - v[c]) / h;
            const double flux = wc[c] * spow(du, p - 1.0) / h;
            g[c] -= flux;
            g[c + 1] += flux;
        }
        for (std::size_t i = 0; i < n; ++i)
            g[i] = p * (g[i] - rayleigh * wn[i] * spow(v[i], p - 1.0));
        if (bc != EigenBC::neumann_both) g.front() = 0.0;
        if (bc == EigenBC::dirichlet_both) g.back() = 0.0;
        return g;
    };

    double r_prev = energy(u) / mass(u);
    std::vector<double> g = gradient(u, r_prev);
    std::vector<double> u_old = u, g_old = g;
    double eta = h * h;
    int stall = 0;
    int it = 0;
    for (; it < opt.max_iters; ++it) {
        std::vector<double> trial = u;
        double step = eta;
        double r_new = r_prev;
        for (int bt = 0; bt < 40; ++bt) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] - step * g[i];
            project(trial);
            r_new = energy(trial) / mass(trial);
            if (r_new <= r_prev + 1e-14 * (1.0 + std::abs(r_prev))) break;
            step *= 0.5;
        }
        u_old.swap(u);
        g_old.swap(g);
        u = trial;
        g = gradient(u, r_new);

        // Barzilai-Borwein step for the next iterate.
        double sy = 0.0, yy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ds = u[i] - u_old[i];
            const double dy = g[i] - g_old[i];
            sy += ds * dy;
            yy += dy * dy;
        }
        eta = (sy > 0.0 && yy > 0.0) ? std::max(sy / yy, 1e-8 * h * h) : h * h;

        if (std::abs(r_new - r_prev) <= opt.rel_tol * (1.0 + std::abs(r_new))) {
            if (++stall >= opt.stall_window) {
                r_prev = r_new;
                break;
            }
        } else {
            stall = 0;
        }
        r_prev = r_new;
    }
    if (it >= opt.max_iters)
        throw NonConvergence("rayleigh_p: iteration budget exhausted");
    return {r_prev, u, it};
}

} // namespace qcomp
