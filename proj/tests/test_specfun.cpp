#include <doctest.h>

#include <cmath>

#include "mghs/specfun.hpp"
#include "oracle.hpp"

using namespace mghs::specfun;

TEST_CASE("lambert_w fixed points") {
    CHECK(lambert_w(0.0, WBranch::Principal) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(lambert_w(std::exp(1.0), WBranch::Principal) ==
          doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("lambert_w negative branch vs bisection oracle") {
    // solve w e^w = -0.2 on (-50, -1) by bisection;
    // f(-50) = 0.2 - tiny > 0 and f(-1) = 0.2 - 1/e < 0
    auto f = [](double w) { return w * std::exp(w) + 0.2; };
    double lo = -50.0, hi = -1.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    double w_ref = 0.5 * (lo + hi);
    double w = lambert_w(-0.2, WBranch::NegativeOne);
    CHECK(w == doctest::Approx(w_ref).epsilon(1e-12));
    CHECK(w == doctest::Approx(-2.5426413577735264).epsilon(1e-13));
}

TEST_CASE("lambert_w residual property across both branches") {
    for (double x : {-0.367, -0.3, -0.1, -0.01, -1e-6, 0.5, 3.0, 50.0, 1e4, 1e10}) {
        if (x < -0.36787944117144233) continue;
        double w = lambert_w(x, WBranch::Principal);
        CHECK(std::abs(w * std::exp(w) - x) <=
              1e-12 * std::max(std::abs(x), 1e-300));
    }
    for (double x : {-0.3678, -0.36, -0.2, -0.05, -1e-4, -1e-12}) {
        double w = lambert_w(x, WBranch::NegativeOne);
        CHECK(std::abs(w * std::exp(w) - x) <=
              1e-12 * std::max(std::abs(x), 1e-300));
        CHECK(w <= -1.0);
    }
}

TEST_CASE("lambert_w domain errors") {
    CHECK_THROWS_AS(lambert_w(-0.4, WBranch::Principal), range_error);
    CHECK_THROWS_AS(lambert_w(0.1, WBranch::NegativeOne), range_error);
}

TEST_CASE("pcf_d closed forms") {
    CHECK(pcf_d(0.0, 1.2) == doctest::Approx(std::exp(-1.44 / 4.0)).epsilon(1e-12));
    CHECK(pcf_d(-1.0, 0.0) ==
          doctest::Approx(std::sqrt(M_PI / 2.0)).epsilon(1e-12));
}

TEST_CASE("pcf_d vs quadrature oracle at D_{-5}(-2.3)") {
    // independent Simpson evaluation of the integral representation
    const double nu = 5.0, z = -2.3;
    auto integrand = [&](double t) {
        return t <= 0.0 ? 0.0 : std::exp((nu - 1.0) * std::log(t) - 0.5 * t * t - z * t);
    };
    double integral = oracle::simpson_adaptive(integrand, 0.0, 40.0, 1e-12);
    double ref = std::exp(-0.25 * z * z) / std::tgamma(nu) * integral;
    CHECK(pcf_d(-5.0, -2.3) == doctest::Approx(ref).epsilon(1e-10));
    // high-precision reference value
    CHECK(pcf_d(-5.0, -2.3) == doctest::Approx(24.583971559353477).epsilon(1e-10));
}

TEST_CASE("pcf three-term recurrence") {
    // D_v(z) = z D_{v-1}(z) - (v-1) D_{v-2}(z) at (v, z) = (-1, 0.7)
    double lhs = pcf_d(-1.0, 0.7);
    double rhs = 0.7 * pcf_d(-2.0, 0.7) + 2.0 * pcf_d(-3.0, 0.7);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
}

TEST_CASE("pcf recurrence residual over the working window") {
    for (double nu : {1.0, 2.0, 3.5, 7.0, 15.0, 40.0, 100.0}) {
        for (double z : {-20.0, -8.0, -1.0, 0.0, 2.5, 10.0, 20.0}) {
            double d0 = pcf_d_log(-nu, z);
            double d1 = pcf_d_log(-nu - 1.0, z);
            double d2 = pcf_d_log(-nu - 2.0, z);
            // D_{-nu} = z D_{-nu-1} + (nu+1) D_{-nu-2}
            double rhs = z * std::exp(d1 - d0) + (nu + 1.0) * std::exp(d2 - d0);
            CHECK(std::abs(rhs - 1.0) <= 1e-8);
        }
    }
}

TEST_CASE("pcf_ratio") {
    SUBCASE("large-order limit at z = 0") {
        CHECK(pcf_ratio(1e6, 0.0) ==
              doctest::Approx(std::sqrt(4e6 - 2.0) / 2.0).epsilon(1e-12));
    }
    SUBCASE("exact ratio vs quadrature oracle at nu = 2, z = 1") {
        auto I = [&](double order) {
            return oracle::simpson_adaptive(
                [&](double t) {
                    return t <= 0.0 ? 0.0
                                    : std::exp((order - 1.0) * std::log(t) -
                                               0.5 * t * t - t);
                },
                0.0, 30.0, 1e-12);
        };
        double ref = 2.0 * (I(3.0) / std::tgamma(3.0)) / (I(2.0) / std::tgamma(2.0));
        CHECK(pcf_ratio(2.0, 1.0) == doctest::Approx(ref).epsilon(1e-9));
        CHECK(pcf_ratio(2.0, 1.0) == doctest::Approx(0.9042712333296918).epsilon(1e-10));
    }
    SUBCASE("continuity at the approximation switch") {
        double nu = approx_order_threshold;
        for (double z : {-5.0, 0.0, 5.0}) {
            double exact = nu * std::exp(pcf_d_log(-nu - 1.0, z) - pcf_d_log(-nu, z));
            double approx = 0.5 * (std::sqrt(z * z + 4.0 * nu - 2.0) - z);
            CHECK(std::abs(exact - approx) / exact < 1e-4);
        }
    }
    SUBCASE("range errors propagate") {
        CHECK_THROWS_AS(pcf_ratio(0.5, 0.0), range_error);
    }
}

TEST_CASE("erf family") {
    auto e0 = erf_family(0.0);
    CHECK(e0.erf == 0.0);
    CHECK(e0.erfc == 1.0);
    // quadrature of the standard normal density
    double ref = 0.5 + oracle::simpson_adaptive(
                           [](double t) {
                               return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI);
                           },
                           0.0, 1.96, 1e-13);
    CHECK(normal_cdf(1.96) == doctest::Approx(ref).epsilon(1e-12));
    CHECK(normal_cdf(1.96) == doctest::Approx(0.9750021048517796).epsilon(1e-14));

    for (double x = -10.0; x <= 10.0; x += 0.37) {
        auto e = erf_family(x);
        CHECK(e.erf + e.erfc == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("erfcx matches direct product and asymptotics") {
    for (double x : {0.0, 0.5, 2.0, 5.9}) {
        CHECK(erfcx(x) ==
              doctest::Approx(std::exp(x * x) * std::erfc(x)).epsilon(1e-13));
    }
    // large-x region against the quadrature identity
    // erfcx(x) = 2/sqrt(pi) int_0^inf e^{-t^2 - 2xt} dt
    for (double x : {8.0, 15.0, 40.0}) {
        double ref = 2.0 / std::sqrt(M_PI) *
                     oracle::simpson_adaptive(
                         [&](double t) { return std::exp(-t * t - 2.0 * x * t); },
                         0.0, 30.0 / x, 1e-13);
        CHECK(erfcx(x) == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("digamma spot values") {
    CHECK(digamma(1.0) == doctest::Approx(-0.5772156649015329).epsilon(1e-12));
    CHECK(digamma(3.5) == doctest::Approx(1.1031566406452432).epsilon(1e-12));
    CHECK(digamma(25.0) ==
          doctest::Approx(std::log(25.0) - 1.0 / 50.0 - 1.0 / (12.0 * 625.0))
              .epsilon(1e-6));
}
