#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "qcomp/errors.hpp"

namespace qcomp {

/// Small fixed-size state vector for the 1-D radial ODE systems.
template <std::size_t N>
using OdeState = std::array<double, N>;

struct Rk45Options {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 1e-4;
    double h_min_factor = 1e-14; ///< minimum step as a fraction of the span
    long max_steps = 2000000;
};

/// Adaptive Dormand-Prince 5(4) from s0 to s1 (s1 > s0).
/// Integrates y' = f(s, y); the final step is clamped to land on s1 exactly.
/// `watch`, when given, is called after every accepted step with
/// (s_prev, y_prev, s_new, y_new); returning false stops the integration
/// early (the state at the last accepted step is returned).
template <std::size_t N, typename F, typename W>
OdeState<N> rk45_to(F&& f, double s0, OdeState<N> y, double s1,
                    const Rk45Options& opt, W&& watch) {
    if (!(s1 > s0)) return y;
    const double span = s1 - s0;
    const double h_min = opt.h_min_factor * span;
    double s = s0;
    double h = std::min(opt.h_init, span);
    OdeState<N> k1 = f(s, y);

    auto scaled_err = [&](const OdeState<N>& a, const OdeState<N>& b,
                          const OdeState<N>& err) {
        double acc = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = opt.atol + opt.rtol * std::max(std::abs(a[i]), std::abs(b[i]));
            const double e = err[i] / sc;
            acc += e * e;
        }
        return std::sqrt(acc / static_cast<double>(N));
    };

    for (long step = 0; step < opt.max_steps; ++step) {
        if (s >= s1) return y;
        bool clamped = false;
        if (s + h >= s1) {
            h = s1 - s;
            clamped = true;
        }

        OdeState<N> k2, k3, k4, k5, k6, k7, yt, y5;
        for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + h * (1.0 / 5.0) * k1[i];
        k2 = f(s + h / 5.0, yt);
        for (std::size_t i = 0; i < N; ++i)
            yt[i] = y[i] + h * (3.0 / 40.0 * k1[i] + 9.0 / 40.0 * k2[i]);
        k3 = f(s + 3.0 * h / 10.0, yt);
        for (std::size_t i = 0; i < N; ++i)
            yt[i] = y[i] + h * (44.0 / 45.0 * k1[i] - 56.0 / 15.0 * k2[i] + 32.0 / 9.0 * k3[i]);
        k4 = f(s + 4.0 * h / 5.0, yt);
        for (std::size_t i = 0; i < N; ++i)
            yt[i] = y[i] + h * (19372.0 / 6561.0 * k1[i] - 25360.0 / 2187.0 * k2[i] +
                                64448.0 / 6561.0 * k3[i] - 212.0 / 729.0 * k4[i]);
        k5 = f(s + 8.0 * h / 9.0, yt);
        for (std::size_t i = 0; i < N; ++i)
            yt[i] = y[i] + h * (9017.0 / 3168.0 * k1[i] - 355.0 / 33.0 * k2[i] +
                                46732.0 / 5247.0 * k3[i] + 49.0 / 176.0 * k4[i] -
                                5103.0 / 18656.0 * k5[i]);
        k6 = f(s + h, yt);
        for (std::size_t i = 0; i < N; ++i)
            y5[i] = y[i] + h * (35.0 / 384.0 * k1[i] + 500.0 / 1113.0 * k3[i] +
                                125.0 / 192.0 * k4[i] - 2187.0 / 6784.0 * k5[i] +
                                11.0 / 84.0 * k6[i]);
        k7 = f(s + h, y5);

        OdeState<N> err;
        for (std::size_t i = 0; i < N; ++i) {
            const double y4 = y[i] + h * (5179.0 / 57600.0 * k1[i] + 7571.0 / 16695.0 * k3[i] +
                                          393.0 / 640.0 * k4[i] - 92097.0 / 339200.0 * k5[i] +
                                          187.0 / 2100.0 * k6[i] + 1.0 / 40.0 * k7[i]);
            err[i] = y5[i] - y4;
        }

        const double e = scaled_err(y, y5, err);
        if (e <= 1.0 || h <= h_min) {
            const double s_new = clamped ? s1 : s + h;
            if (!watch(s, y, s_new, y5)) return y5;
            s = s_new;
            y = y5;
            k1 = k7; // FSAL
        }
        double fac = 0.9 * std::pow(std::max(e, 1e-10), -0.2);
        fac = std::min(5.0, std::max(0.2, fac));
        h = std::max(h * fac, h_min);
    }
    throw NonConvergence("rk45_to: step budget exhausted");
}

template <std::size_t N, typename F>
OdeState<N> rk45_to(F&& f, double s0, const OdeState<N>& y0, double s1,
                    const Rk45Options& opt = {}) {
    return rk45_to(
        std::forward<F>(f), s0, y0, s1, opt,
        [](double, const OdeState<N>&, double, const OdeState<N>&) { return true; });
}

/// Classical fixed-step RK4; used as an independent cross-check integrator.
template <std::size_t N, typename F>
OdeState<N> rk4_fixed(F&& f, double s0, OdeState<N> y, double s1, long nsteps) {
    const double h = (s1 - s0) / static_cast<double>(nsteps);
    double s = s0;
    for (long n = 0; n < nsteps; ++n) {
        OdeState<N> k1 = f(s, y), yt;
        for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + 0.5 * h * k1[i];
        OdeState<N> k2 = f(s + 0.5 * h, yt);
        for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + 0.5 * h * k2[i];
        OdeState<N> k3 = f(s + 0.5 * h, yt);
        for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + h * k3[i];
        OdeState<N> k4 = f(s + h, yt);
        for (std::size_t i = 0; i < N; ++i)
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        s += h;
    }
    return y;
}

} // namespace qcomp
