#include <doctest.h>

#include <cmath>
#include <limits>

#include <qcomp/curvature.hpp>
#include <qcomp/geometry.hpp>

using namespace qcomp;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("c_kappa_lambda matches the closed forms") {
    // kappa = 0: C = 1 - Lambda t.
    for (double lambda : {-0.5, 0.0, 0.7}) {
        for (double t : {0.0, 0.3, 1.0}) {
            CHECK(c_kappa_lambda(0.0, lambda, t) ==
                  doctest::Approx(1.0 - lambda * t).epsilon(1e-14));
        }
    }
    // kappa = 1: C = cos t - Lambda sin t.
    CHECK(c_kappa_lambda(1.0, 0.0, 0.4) == doctest::Approx(std::cos(0.4)).epsilon(1e-14));
    CHECK(c_kappa_lambda(1.0, 0.3, 0.4) ==
          doctest::Approx(std::cos(0.4) - 0.3 * std::sin(0.4)).epsilon(1e-14));
    // kappa = -1: C = cosh t - Lambda sinh t.
    CHECK(c_kappa_lambda(-1.0, 0.5, 0.8) ==
          doctest::Approx(std::cosh(0.8) - 0.5 * std::sinh(0.8)).epsilon(1e-14));
    // General kappa > 0 scales the frequency.
    const double r = std::sqrt(2.5);
    CHECK(c_kappa_lambda(2.5, 0.2, 0.3) ==
          doctest::Approx(std::cos(r * 0.3) - 0.2 / r * std::sin(r * 0.3)).epsilon(1e-14));
}

TEST_CASE("t_kappa_lambda matches the closed forms and the initial value") {
    CHECK(t_kappa_lambda(1.0, 0.0, 0.5) == doctest::Approx(std::tan(0.5)).epsilon(1e-13));
    CHECK(t_kappa_lambda(-1.0, 0.0, 0.5) == doctest::Approx(-std::tanh(0.5)).epsilon(1e-13));
    const double r = std::sqrt(3.0);
    CHECK(t_kappa_lambda(3.0, 0.0, 0.4) == doctest::Approx(r * std::tan(r * 0.4)).epsilon(1e-13));
    CHECK(t_kappa_lambda(-2.0, 0.0, 0.7) ==
          doctest::Approx(-std::sqrt(2.0) * std::tanh(std::sqrt(2.0) * 0.7)).epsilon(1e-13));
    // T(0) = Lambda for every kappa.
    for (double kappa : {-1.0, -1e-13, 0.0, 1e-13, 2.0}) {
        for (double lambda : {-0.4, 0.0, 0.9}) {
            CHECK(t_kappa_lambda(kappa, lambda, 0.0) == doctest::Approx(lambda).epsilon(1e-12));
        }
    }
}

TEST_CASE("T satisfies the Riccati equation T' = kappa + T^2") {
    const double d = 1e-5;
    for (double kappa : {-1.5, 0.0, 0.8}) {
        for (double lambda : {-0.3, 0.0, 0.6}) {
            for (double t : {0.1, 0.35, 0.6}) {
                const double tp = (t_kappa_lambda(kappa, lambda, t + d) -
                                   t_kappa_lambda(kappa, lambda, t - d)) /
                                  (2.0 * d);
                const double tv = t_kappa_lambda(kappa, lambda, t);
                CHECK(tp == doctest::Approx(kappa + tv * tv).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("C satisfies C'' + kappa C = 0 by finite differences") {
    const double d = 1e-4;
    for (double kappa : {-2.0, 0.5, 1.7}) {
        for (double lambda : {-0.2, 0.4}) {
            for (double t : {0.15, 0.5}) {
                const double c0 = c_kappa_lambda(kappa, lambda, t);
                const double cpp = (c_kappa_lambda(kappa, lambda, t + d) - 2.0 * c0 +
                                    c_kappa_lambda(kappa, lambda, t - d)) /
                                   (d * d);
                CHECK(std::abs(cpp + kappa * c0) <= 1e-5);
            }
        }
    }
}

TEST_CASE("first_c_zero closed forms and consistency with C") {
    // kappa > 0: first zero of cos(rt) - (lambda/r) sin(rt).
    CHECK(first_c_zero(1.0, 0.0) == doctest::Approx(0.5 * M_PI).epsilon(1e-14));
    CHECK(first_c_zero(4.0, 0.0) == doctest::Approx(0.25 * M_PI).epsilon(1e-14));
    CHECK(first_c_zero(1.0, 1.0) == doctest::Approx(0.25 * M_PI).epsilon(1e-14));
    // kappa = 0: zero at 1/lambda for lambda > 0, else none.
    CHECK(first_c_zero(0.0, 2.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(first_c_zero(0.0, 0.0) == kInf);
    CHECK(first_c_zero(0.0, -1.0) == kInf);
    // kappa < 0: finite zero only when lambda > sqrt(-kappa).
    CHECK(first_c_zero(-1.0, 0.5) == kInf);
    CHECK(first_c_zero(-1.0, 1.0) == kInf);
    CHECK(first_c_zero(-1.0, 2.0) == doctest::Approx(std::atanh(0.5)).epsilon(1e-14));
    // The reported zero is indeed a zero of C.
    for (auto [kappa, lambda] : {std::pair{2.0, 0.4}, {1.0, -0.7}, {-1.0, 1.5}}) {
        const double z = first_c_zero(kappa, lambda);
        REQUIRE(std::isfinite(z));
        CHECK(std::abs(c_kappa_lambda(kappa, lambda, z)) < 1e-12);
        CHECK(c_kappa_lambda(kappa, lambda, 0.5 * z) > 0.0);
    }
}

TEST_CASE("t_kappa_lambda throws past the first zero of C") {
    const double z = first_c_zero(1.0, 0.0);
    CHECK_NOTHROW(t_kappa_lambda(1.0, 0.0, 0.99 * z));
    CHECK_THROWS_AS(t_kappa_lambda(1.0, 0.0, z + 1e-6), DomainError);
    CHECK_THROWS_AS(t_kappa_lambda(0.0, 1.0, 1.5), DomainError);
    CHECK_THROWS_AS(t_kappa_lambda(-1.0, 2.0, 1.0), DomainError);
}

TEST_CASE("tiny kappa falls back to a continuous series expansion") {
    // Values on each side of the series cut agree to the neglected order.
    for (double lambda : {0.0, 0.4}) {
        for (double t : {0.2, 0.9}) {
            const double a = c_kappa_lambda(1e-12, lambda, t);
            const double b = c_kappa_lambda(0.0, lambda, t);
            CHECK(a == doctest::Approx(b).epsilon(0.0).scale(1.0).epsilon(1e-11));
            const double ta = t_kappa_lambda(1e-12, lambda, t);
            const double tb = t_kappa_lambda(0.0, lambda, t);
            CHECK(ta == doctest::Approx(tb).epsilon(1e-10));
        }
    }
    // Across the cut against the exact trig branch.
    const double eps = 2e-10;
    CHECK(c_kappa_lambda(eps, 0.3, 0.8) ==
          doctest::Approx(c_kappa_lambda(0.0, 0.3, 0.8)).epsilon(1e-9));
}

TEST_CASE("CurvatureParams::validate rejects inconsistent dimensions") {
    CurvatureParams ok;
    ok.bigN = 3.0;
    ok.n = 2;
    CHECK_NOTHROW(ok.validate());

    CurvatureParams inf_ok; // defaults: N = inf, n = 1
    CHECK_NOTHROW(inf_ok.validate());
    CHECK(inf_ok.infinite_N());

    CurvatureParams bad_n;
    bad_n.n = 0;
    CHECK_THROWS_AS(bad_n.validate(), InvalidParameter);

    CurvatureParams n_gt_N;
    n_gt_N.bigN = 2.0;
    n_gt_N.n = 3;
    CHECK_THROWS_AS(n_gt_N.validate(), InvalidParameter);

    CurvatureParams one_one;
    one_one.bigN = 1.0;
    one_one.n = 1;
    CHECK_THROWS_AS(one_one.validate(), InvalidParameter);
}
