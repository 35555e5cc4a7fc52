#pragma once

#include <stdexcept>
#include <string>

namespace mghs::specfun {

// Thrown when an argument leaves the range the evaluation routines support;
// callers in the g3p module catch it and fall back to limit approximations.
class range_error : public std::domain_error {
public:
    explicit range_error(const std::string& what) : std::domain_error(what) {}
};

enum class WBranch {
    Principal,    // W_0, defined on [-1/e, inf)
    NegativeOne,  // W_{-1}, defined on [-1/e, 0)
};

// Real Lambert W: w such that w * exp(w) = x on the requested branch.
// Halley iteration from series/asymptotic starting points; relative residual
// below 1e-12 on the whole branch domain.
double lambert_w(double x, WBranch branch);

// log of the Parabolic Cylinder function D_v(z), v <= 0.
//
// For v = -nu < 0 the integral representation
//   D_{-nu}(z) = e^{-z^2/4} / Gamma(nu) * int_0^inf t^{nu-1} e^{-t^2/2 - z t} dt
// is evaluated by adaptive quadrature on the log scale (D is strictly
// positive there, so only the log is returned). v = 0 is the closed form
// e^{-z^2/4}. Supported range: v in [-2000, 0], |z| <= 500.
double pcf_d_log(double order, double z);

// D_v(z) itself; overflows for large |log D| are the caller's problem.
double pcf_d(double order, double z);

// nu * D_{-nu-1}(z) / D_{-nu}(z), nu >= 1. Exact via pcf_d_log below
// `approx_order_threshold`, the large-nu approximation
//   -z + (z + sqrt(z^2 + 4 nu - 2)) / 2
// above it.
double pcf_ratio(double nu, double z);

inline constexpr double approx_order_threshold = 200.0;

struct ErfFamily {
    double erf;
    double erfc;
    double normal_cdf;
};

ErfFamily erf_family(double x);

// Standard normal CDF.
double normal_cdf(double x);

// Scaled complementary error function exp(x^2) erfc(x); stable for large
// positive x where erfc underflows.
double erfcx(double x);

// Digamma psi(x) = Gamma'(x)/Gamma(x), x > 0.
double digamma(double x);

}  // namespace mghs::specfun
