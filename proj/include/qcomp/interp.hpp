#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "qcomp/errors.hpp"
#include "qcomp/jet.hpp"

namespace qcomp {

namespace detail {

/// Index i such that x[i] <= s < x[i+1], clamped to the valid cell range.
inline std::size_t cell_index(const std::vector<double>& x, double s) {
    auto it = std::upper_bound(x.begin(), x.end(), s);
    std::ptrdiff_t i = (it - x.begin()) - 1;
    i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(x.size()) - 2);
    return static_cast<std::size_t>(i);
}

} // namespace detail

/// Natural C2 cubic spline through (x_i, y_i).
class CubicSpline {
public:
    CubicSpline() = default;

    CubicSpline(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 3 || y_.size() != n)
            throw InvalidParameter("CubicSpline: need at least 3 samples, equal sizes");
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (!(x_[i] < x_[i + 1]))
                throw InvalidParameter("CubicSpline: abscissae must be strictly increasing");

        // Tridiagonal solve for interior second derivatives, natural ends.
        m2_.assign(n, 0.0);
        std::vector<double> diag(n, 2.0), rhs(n, 0.0), sub(n, 0.0), sup(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double hl = x_[i] - x_[i - 1];
            const double hr = x_[i + 1] - x_[i];
            sub[i] = hl / (hl + hr);
            sup[i] = hr / (hl + hr);
            rhs[i] = 6.0 / (hl + hr) *
                     ((y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl);
        }
        for (std::size_t i = 2; i + 1 < n; ++i) {
            const double w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        for (std::size_t i = n - 2; i >= 1; --i)
            m2_[i] = (rhs[i] - sup[i] * m2_[i + 1]) / diag[i];
    }

    /// Value and first two derivatives at s.
    Jet2 jet(double s) const {
        const std::size_t i = detail::cell_index(x_, s);
        const double h = x_[i + 1] - x_[i];
        const double a = (x_[i + 1] - s) / h;
        const double b = (s - x_[i]) / h;
        Jet2 out;
        out.v = a * y_[i] + b * y_[i + 1] +
                ((a * a * a - a) * m2_[i] + (b * b * b - b) * m2_[i + 1]) * h * h / 6.0;
        out.d1 = (y_[i + 1] - y_[i]) / h +
                 (-(3.0 * a * a - 1.0) * m2_[i] + (3.0 * b * b - 1.0) * m2_[i + 1]) * h / 6.0;
        out.d2 = a * m2_[i] + b * m2_[i + 1];
        return out;
    }

    double operator()(double s) const { return jet(s).v; }

    const std::vector<double>& knots() const { return x_; }
    const std::vector<double>& values() const { return y_; }

private:
    std::vector<double> x_, y_, m2_;
};

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson limited).
/// Requires strictly increasing abscissae and nondecreasing ordinates; the
/// interpolant is then nondecreasing on the whole range.
class MonotoneCubic {
public:
    MonotoneCubic() = default;

    /// Build from data alone; node slopes are secant averages, then limited.
    MonotoneCubic(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n)
            throw InvalidParameter("MonotoneCubic: need at least 2 samples, equal sizes");
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (!(x_[i] < x_[i + 1]))
                throw InvalidParameter("MonotoneCubic: abscissae must be strictly increasing");

        std::vector<double> sec(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i)
            sec[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);

        m_.assign(n, 0.0);
        m_[0] = sec[0];
        m_[n - 1] = sec[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i) m_[i] = 0.5 * (sec[i - 1] + sec[i]);

        // Fritsch-Carlson limiter keeps the cubic monotone on each cell.
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (sec[i] == 0.0) {
                m_[i] = 0.0;
                m_[i + 1] = 0.0;
                continue;
            }
            const double a = m_[i] / sec[i];
            const double b = m_[i + 1] / sec[i];
            const double r = a * a + b * b;
            if (r > 9.0) {
                const double tau = 3.0 / std::sqrt(r);
                m_[i] = tau * a * sec[i];
                m_[i + 1] = tau * b * sec[i];
            }
        }
    }

    Jet2 jet(double s) const {
        const std::size_t i = detail::cell_index(x_, s);
        const double h = x_[i + 1] - x_[i];
        const double t = (s - x_[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        const double h10 = t3 - 2.0 * t2 + t;
        const double h01 = -2.0 * t3 + 3.0 * t2;
        const double h11 = t3 - t2;
        Jet2 out;
        out.v = h00 * y_[i] + h * h10 * m_[i] + h01 * y_[i + 1] + h * h11 * m_[i + 1];
        out.d1 = ((6.0 * t2 - 6.0 * t) * (y_[i] - y_[i + 1]) / h +
                  (3.0 * t2 - 4.0 * t + 1.0) * m_[i] + (3.0 * t2 - 2.0 * t) * m_[i + 1]);
        out.d2 = ((12.0 * t - 6.0) * (y_[i] - y_[i + 1]) / h +
                  (6.0 * t - 4.0) * m_[i] + (6.0 * t - 2.0) * m_[i + 1]) / h;
        return out;
    }

    double operator()(double s) const { return jet(s).v; }

    double front() const { return x_.front(); }
    double back() const { return x_.back(); }

private:
    std::vector<double> x_, y_, m_;
};

} // namespace qcomp
