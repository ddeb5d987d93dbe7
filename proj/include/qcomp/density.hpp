#pragma once

#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "qcomp/curvature.hpp"
#include "qcomp/errors.hpp"
#include "qcomp/interp.hpp"
#include "qcomp/jet.hpp"

namespace qcomp {

/// Node kinds of the density expression grammar. Densities are built from
/// this fixed grammar (or from C2-spline samples) so that first and second
/// derivatives are exact rather than finite-differenced.
enum class DensityKind {
    constant,
    variable,
    poly,    ///< polynomial in a subexpression, coefficients low to high
    sum,
    product,
    exp,
    log,
    sin,
    cos,
    sinh,
    cosh,
    model,   ///< -(N-1) log C_{kappa,lambda}(s)
    spline,  ///< natural cubic spline through samples
};

struct DensityNode;
using DensityNodePtr = std::shared_ptr<const DensityNode>;

struct DensityNode {
    DensityKind kind = DensityKind::constant;
    std::vector<double> coeffs;        ///< poly coefficients or single constant
    std::vector<DensityNodePtr> kids;  ///< operands
    double kappa = 0.0, lambda = 0.0, nm1 = 0.0; ///< model payload
    CubicSpline spline;                ///< spline payload

    Jet2 eval(double s) const {
        switch (kind) {
        case DensityKind::constant:
            return Jet2::constant(coeffs.at(0));
        case DensityKind::variable:
            return Jet2::variable(s);
        case DensityKind::poly: {
            const Jet2 x = kids.at(0)->eval(s);
            Jet2 acc = Jet2::constant(0.0);
            for (std::size_t i = coeffs.size(); i > 0; --i)
                acc = acc * x + Jet2::constant(coeffs[i - 1]);
            return acc;
        }
        case DensityKind::sum: {
            Jet2 acc = Jet2::constant(0.0);
            for (const auto& k : kids) acc = acc + k->eval(s);
            return acc;
        }
        case DensityKind::product:
            return kids.at(0)->eval(s) * kids.at(1)->eval(s);
        case DensityKind::exp:
            return qcomp::exp(kids.at(0)->eval(s));
        case DensityKind::log: {
            const Jet2 x = kids.at(0)->eval(s);
            if (!(x.v > 0.0)) throw DomainError("density: log of nonpositive value");
            return qcomp::log(x);
        }
        case DensityKind::sin:
            return qcomp::sin(kids.at(0)->eval(s));
        case DensityKind::cos:
            return qcomp::cos(kids.at(0)->eval(s));
        case DensityKind::sinh:
            return qcomp::sinh(kids.at(0)->eval(s));
        case DensityKind::cosh:
            return qcomp::cosh(kids.at(0)->eval(s));
        case DensityKind::model: {
            // f = -(N-1) log C; using T = -C'/C gives exact derivatives
            // f' = (N-1) T and f'' = (N-1)(kappa + T^2).
            const double c = c_kappa_lambda(kappa, lambda, s);
            if (!(c > 0.0))
                throw DomainError("model density: C_{kappa,lambda} vanishes inside the domain");
            const double t = t_kappa_lambda(kappa, lambda, s);
            return {-nm1 * std::log(c), nm1 * t, nm1 * (kappa + t * t)};
        }
        case DensityKind::spline:
            return spline.jet(s);
        }
        throw Error("density: corrupt node kind");
    }
};

/// Log-density f of the reference measure e^{-f} dmu, with exact first and
/// second derivatives. Value-semantic wrapper around a shared expression tree.
class Density {
public:
    Density() : root_(make_constant_node(0.0)) {}
    explicit Density(DensityNodePtr root) : root_(std::move(root)) {
        if (!root_) throw InvalidParameter("Density: null expression");
    }

    Jet2 jet(double s) const { return root_->eval(s); }
    double operator()(double s) const { return root_->eval(s).v; }
    double d1(double s) const { return root_->eval(s).d1; }
    double d2(double s) const { return root_->eval(s).d2; }

    const DensityNodePtr& root() const { return root_; }

    static Density zero() { return Density(); }

    static Density constant(double c) { return Density(make_constant_node(c)); }

    /// Polynomial in s, coefficients from the constant term upward.
    static Density polynomial(std::vector<double> coeffs) {
        auto node = std::make_shared<DensityNode>();
        node->kind = DensityKind::poly;
        node->coeffs = std::move(coeffs);
        node->kids = {variable_node()};
        return Density(node);
    }

    /// amp * fn(freq * s + phase) for fn one of exp/log/sin/cos/sinh/cosh.
    static Density elementary(DensityKind fn, double amp, double freq, double phase) {
        auto arg = std::make_shared<DensityNode>();
        arg->kind = DensityKind::poly;
        arg->coeffs = {phase, freq};
        arg->kids = {variable_node()};
        auto call = std::make_shared<DensityNode>();
        call->kind = fn;
        call->kids = {arg};
        auto amp_node = make_constant_node(amp);
        auto prod = std::make_shared<DensityNode>();
        prod->kind = DensityKind::product;
        prod->kids = {amp_node, call};
        return Density(prod);
    }

    /// f = -(N-1) log C_{kappa,lambda}; the equality-case density.
    static Density model(double kappa, double lambda, double n_minus_1) {
        auto node = std::make_shared<DensityNode>();
        node->kind = DensityKind::model;
        node->kappa = kappa;
        node->lambda = lambda;
        node->nm1 = n_minus_1;
        return Density(node);
    }

    /// C2 natural cubic spline through (s_i, f_i).
    static Density spline(std::vector<double> s, std::vector<double> f) {
        auto node = std::make_shared<DensityNode>();
        node->kind = DensityKind::spline;
        node->spline = CubicSpline(std::move(s), std::move(f));
        return Density(node);
    }

    friend Density operator+(const Density& a, const Density& b) {
        auto node = std::make_shared<DensityNode>();
        node->kind = DensityKind::sum;
        node->kids = {a.root_, b.root_};
        return Density(node);
    }

    friend Density operator*(double c, const Density& a) {
        auto node = std::make_shared<DensityNode>();
        node->kind = DensityKind::product;
        node->kids = {make_constant_node(c), a.root_};
        return Density(node);
    }

private:
    static DensityNodePtr make_constant_node(double c) {
        auto node = std::make_shared<DensityNode>();
        node->kind = DensityKind::constant;
        node->coeffs = {c};
        return node;
    }

    static DensityNodePtr variable_node() {
        auto node = std::make_shared<DensityNode>();
        node->kind = DensityKind::variable;
        return node;
    }

    DensityNodePtr root_;
};

/// Warp factors and other smooth scalar coefficients share the expression
/// machinery of Density (exact derivatives, same grammar).
using SmoothFunction = Density;

} // namespace qcomp
