#pragma once

// J-Bessel functions of integer order, the Airy function near the origin,
// and explicit envelopes for J_nu near and below the turning point x = nu.

#include <string>
#include <string_view>

#include "klb/errors.hpp"

namespace klb {

inline constexpr int kMaxBesselOrder = 10'000;
inline constexpr double kMaxBesselArgument = 1e6;
/// Below this certified magnitude bessel_j reports 0 plus the envelope.
inline constexpr double kBesselFloor = 1e-30;

enum class BesselMethod { exact, series, quadrature, envelope, asymptotic };

std::string_view to_string(BesselMethod m);

struct BesselValue {
    double value = 0.0;
    double abs_error = 0.0;
    BesselMethod method = BesselMethod::exact;
    int working_digits = 0;  // decimal digits of the arithmetic that produced it
};

/// J_order(x) for 0 <= order <= 10^4, 0 <= x <= 10^6.
///
/// Ascending series for x <= max(12, order/3), trigonometric integral
/// (1/pi) int_0^pi cos(order t - x sin t) dt otherwise. Working precision
/// escalates (long double, float128, MPFR) until the rounding estimate
/// supports a relative error of 1e-11. For x >= max(1000, order^2) the
/// Hankel expansion is used instead. When Kapteyn's inequality certifies
/// a magnitude below 1e-30 the result is 0 with abs_error equal to it.
BesselValue bessel_j(int order, double x);

/// The two evaluation routes, exposed for cross-checking.
BesselValue bessel_j_series(int order, double x);
BesselValue bessel_j_quadrature(int order, double x, bool validate = true);

/// Ai(x) on [-2.34, 0] by its Maclaurin series in quad precision.
double airy_ai(double x);

/// Ai(0) = 1 / (3^{2/3} Gamma(2/3)).
double airy_ai_at_zero();

/// C0 = 2^{1/3} Ai(0) = 0.4473...
double turning_point_constant();

struct EnvelopePair {
    double lower = 0.0;
    double upper = 0.0;
    bool valid = false;
    std::string reason;
};

/// x^nu J_nu(nu) <= J_nu(nu x) <= e^{nu(1-x)} x^nu J_nu(nu) for 0 < x <= 1.
EnvelopePair paris_envelope(double nu, double x, double j_at_nu);

/// Natural log of e^{nu(1-x)} x^nu, the upper factor above.
double log_paris_factor(double nu, double x);

/// (C0 - eps)/nu^{1/3} <= J_nu(nu) <= C0/nu^{1/3} + 3/nu, valid for
/// nu >= (3/eps)^{3/2}. Invalid pair (with reason) when the condition fails.
EnvelopePair jnu_at_nu_bracket(double nu, double epsilon);

/// Bracket for J_{k-1}((k-1) + t (k-1)^{1/3}) from the Airy expansion,
/// main term 2^{1/3} Ai(-2^{1/3} t)/(k-1)^{1/3}, half-width (4 t^{9/4} + 21)/(7 (k-1)).
/// Requires k even, k >= 180, t in [0, 1].
EnvelopePair transition_value(int k, double t);

}  // namespace klb
