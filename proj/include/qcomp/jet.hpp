#pragma once

#include <cmath>

namespace qcomp {

/// Degree-2 jet: a value together with its first and second derivative
/// with respect to a single underlying variable. Arithmetic on jets
/// implements exact symbolic differentiation rules (forward mode), so
/// densities built from composable primitives carry exact derivatives.
struct Jet2 {
    double v = 0.0;  ///< value
    double d1 = 0.0; ///< first derivative
    double d2 = 0.0; ///< second derivative

    /// Jet of the identity map at s (value s, slope 1).
    static Jet2 variable(double s) { return {s, 1.0, 0.0}; }
    /// Jet of a constant.
    static Jet2 constant(double c) { return {c, 0.0, 0.0}; }
};

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
    return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2};
}

inline Jet2 operator-(const Jet2& a, const Jet2& b) {
    return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2};
}

inline Jet2 operator-(const Jet2& a) { return {-a.v, -a.d1, -a.d2}; }

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
    return {a.v * b.v,
            a.d1 * b.v + a.v * b.d1,
            a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}

inline Jet2 operator*(double c, const Jet2& a) { return {c * a.v, c * a.d1, c * a.d2}; }

/// Composition g(h) for a scalar function g with known g', g'' at h.v.
inline Jet2 compose(double g, double dg, double ddg, const Jet2& h) {
    return {g, dg * h.d1, ddg * h.d1 * h.d1 + dg * h.d2};
}

inline Jet2 exp(const Jet2& h) {
    const double e = std::exp(h.v);
    return compose(e, e, e, h);
}

inline Jet2 log(const Jet2& h) {
    return compose(std::log(h.v), 1.0 / h.v, -1.0 / (h.v * h.v), h);
}

inline Jet2 sin(const Jet2& h) {
    const double s = std::sin(h.v), c = std::cos(h.v);
    return compose(s, c, -s, h);
}

inline Jet2 cos(const Jet2& h) {
    const double s = std::sin(h.v), c = std::cos(h.v);
    return compose(c, -s, -c, h);
}

inline Jet2 sinh(const Jet2& h) {
    const double s = std::sinh(h.v), c = std::cosh(h.v);
    return compose(s, c, s, h);
}

inline Jet2 cosh(const Jet2& h) {
    const double s = std::sinh(h.v), c = std::cosh(h.v);
    return compose(c, s, c, h);
}

} // namespace qcomp
