#include "klb/bessel.hpp"

#include <quadmath.h>

#include <algorithm>
#include <array>
#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/float128.hpp>
#include <boost/multiprecision/mpfr.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "klb/compensated_sum.hpp"

namespace klb {

namespace {

namespace mp = boost::multiprecision;

using Quad = mp::float128;
template <unsigned Digits>
using Mpfr = mp::number<mp::mpfr_float_backend<Digits, mp::allocate_stack>, mp::et_off>;

constexpr int kTierCount = 5;  // long double, float128, MPFR 50/80/130 digits
constexpr int kGaussPoints = 20;
constexpr double kRelativeTarget = 1e-11;
constexpr double kAbsoluteTarget = 1e-42;

double target_for(double value) { return std::max(kRelativeTarget * std::abs(value), kAbsoluteTarget); }

double positive_or_tiny(double v) { return std::max(v, std::numeric_limits<double>::denorm_min()); }

// Dispatch a templated callable to the arithmetic of the given tier.
template <typename F>
auto at_tier(int tier, F&& f) {
    switch (tier) {
        case 0: return f.template operator()<long double>();
        case 1: return f.template operator()<Quad>();
        case 2: return f.template operator()<Mpfr<50>>();
        case 3: return f.template operator()<Mpfr<80>>();
        default: return f.template operator()<Mpfr<130>>();
    }
}

struct Estimate {
    double value = 0.0;
    double rounding = 0.0;
    double truncation = 0.0;
    int digits = 0;

    double error() const { return rounding + truncation; }
};

template <typename Real>
Real unit_roundoff() {
    return std::numeric_limits<Real>::epsilon() / 2;
}

template <typename Real>
double half_ulp_of_double(const Real& v) {
    using std::abs;
    return static_cast<double>(abs(v)) * std::numeric_limits<double>::epsilon() / 2;
}

// ---- ascending series ---------------------------------------------------

template <typename Real>
Estimate series_tier(int order, double x) {
    using std::abs;
    const Real eps = unit_roundoff<Real>();
    const Real hx = Real(x) / 2;
    const Real q = hx * hx;
    Real term = 1;
    for (int j = 1; j <= order; ++j) term *= hx / j;

    CompensatedSum<Real> acc;
    Real weighted = 0;  // each term carries ~(order + 4k) roundings
    Real tail = 0;
    for (long k = 0;; ++k) {
        acc.add(term);
        weighted += abs(term) * Real(order + 4 * k + 4);
        const Real denom = Real(k + 1) * Real(k + 1 + order);
        term = -term * q / denom;
        const bool decreasing = denom > q;
        if (decreasing && (term == 0 || abs(term) <= eps * abs(acc.value()))) {
            tail = abs(term);
            break;
        }
    }
    Estimate e;
    const Real v = acc.value();
    e.value = static_cast<double>(v);
    e.rounding = static_cast<double>(eps * weighted + acc.error_bound(eps)) + half_ulp_of_double(v);
    e.truncation = static_cast<double>(tail);
    e.digits = std::numeric_limits<Real>::digits10;
    return e;
}

// ---- Gauss-Legendre panels on the trigonometric integral ------------------

template <typename Real>
struct GaussRule {
    std::array<Real, kGaussPoints> nodes;
    std::array<Real, kGaussPoints> weights;
};

template <typename Real>
GaussRule<Real> make_gauss_rule() {
    using std::abs;
    using std::cos;
    const Real pi = boost::math::constants::pi<Real>();
    const Real eps = unit_roundoff<Real>();
    GaussRule<Real> rule;
    const int n = kGaussPoints;
    for (int i = 0; i < n; ++i) {
        Real z = cos(pi * (Real(i) + Real(0.75)) / (Real(n) + Real(0.5)));
        Real dp = 0;
        for (int iter = 0; iter < 100; ++iter) {
            Real p0 = 1, p1 = z;
            for (int j = 2; j <= n; ++j) {
                const Real p2 = ((2 * j - 1) * z * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1);
            const Real step = p1 / dp;
            z -= step;
            if (abs(step) <= 4 * eps) break;
        }
        rule.nodes[i] = z;
        rule.weights[i] = 2 / ((1 - z * z) * dp * dp);
    }
    return rule;
}

template <typename Real>
const GaussRule<Real>& gauss_rule() {
    static const GaussRule<Real> rule = make_gauss_rule<Real>();
    return rule;
}

template <typename Real>
Estimate quadrature_tier(int order, double x, long panels) {
    using std::abs;
    using std::cos;
    using std::sin;
    const Real eps = unit_roundoff<Real>();
    const Real pi = boost::math::constants::pi<Real>();
    const GaussRule<Real>& rule = gauss_rule<Real>();
    const Real h = pi / panels;
    const Real half = h / 2;
    const Real arg = x;
    const Real nu = order;

    CompensatedSum<Real> acc;
    Real phase_weight = 0;
    for (long p = 0; p < panels; ++p) {
        const Real mid = h * (Real(p) + Real(0.5));
        for (int i = 0; i < kGaussPoints; ++i) {
            const Real theta = mid + half * rule.nodes[i];
            const Real w = half * rule.weights[i];
            const Real phase = nu * theta - arg * sin(theta);
            acc.add(w * cos(phase));
            phase_weight += w * (abs(phase) + 4);
        }
    }
    Estimate e;
    const Real v = acc.value() / pi;
    e.value = static_cast<double>(v);
    e.rounding = static_cast<double>((eps * phase_weight + acc.error_bound(eps)) / pi) + half_ulp_of_double(v);
    e.digits = std::numeric_limits<Real>::digits10;
    return e;
}

long default_panels(int order, double x) {
    return std::max({64L, 4L * order, static_cast<long>(std::ceil(x))});
}

BesselValue from_estimate(const Estimate& e, double error, BesselMethod method) {
    return {e.value, error, method, e.digits};
}

void check_range(int order, double x) {
    if (order < 0 || order > kMaxBesselOrder) throw DomainError("bessel_j: order outside [0, 10^4]");
    if (!(x >= 0.0) || x > kMaxBesselArgument) throw DomainError("bessel_j: x outside [0, 10^6]");
}

// Kapteyn: |J_nu(nu z)| <= z^nu e^{nu s} / (1 + s)^nu, s = sqrt(1 - z^2), 0 < z <= 1.
double log_kapteyn_bound(double nu, double z) {
    const double s = std::sqrt((1.0 - z) * (1.0 + z));
    return nu * (std::log(z) + s - std::log1p(s));
}

// Hankel expansion, P cos w - Q sin w. Past k > nu/2 the remainder of
// each of P and Q is smaller than its first omitted term.
Estimate hankel(int order, double x) {
    const __float128 nu2 = 4 * static_cast<__float128>(order) * order;
    const __float128 X = x;
    __float128 p = 0, q = 0, term = 1, p_tail = 0, q_tail = 0;
    bool converged = false;
    for (int k = 0; k < 400; ++k) {
        const __float128 signed_term = (k / 2) % 2 == 0 ? term : -term;
        if (k % 2 == 0) p += signed_term; else q += signed_term;
        const __float128 odd = 2 * k + 1;
        term *= (nu2 - odd * odd) / (8 * (k + 1) * X);
        if (2 * k > order + 2 && fabsq(term) < 1e-30Q) {
            // term is the first omitted one of its series; the next bounds the other
            const __float128 odd2 = 2 * k + 3;
            const __float128 next = fabsq(term * (nu2 - odd2 * odd2) / (8 * (k + 2) * X));
            p_tail = fabsq(term) + next;
            q_tail = p_tail;
            converged = true;
            break;
        }
    }
    const __float128 w = X - (static_cast<__float128>(order) / 2 + 0.25Q) * M_PIq;
    const __float128 amp = sqrtq(2 / (M_PIq * X));
    const __float128 v = amp * (p * cosq(w) - q * sinq(w));
    Estimate e;
    e.value = static_cast<double>(v);
    e.truncation = converged ? static_cast<double>(amp * (p_tail + q_tail))
                             : std::numeric_limits<double>::infinity();
    e.rounding = static_cast<double>(amp * 1e-30Q + fabsq(v) * 1e-32Q) + std::abs(e.value) * 1.2e-16;
    e.digits = 33;
    return e;
}

// ---- Airy series ------------------------------------------------------------

__float128 airy_series(__float128 z) {
    const __float128 third = 1.0Q / 3;
    const __float128 c1 = 1 / (powq(3, 2 * third) * tgammaq(2 * third));
    const __float128 c2 = 1 / (powq(3, third) * tgammaq(third));
    const __float128 z3 = z * z * z;
    __float128 f = 0, g = 0, tf = 1, tg = z;
    for (int k = 0; k < 200; ++k) {
        f += tf;
        g += tg;
        tf *= z3 / ((3 * k + 2) * (3 * k + 3));
        tg *= z3 / ((3 * k + 3) * (3 * k + 4));
        if (fabsq(tf) + fabsq(tg) < 1e-40Q) break;
    }
    return c1 * f - c2 * g;
}

}  // namespace

std::string_view to_string(BesselMethod m) {
    switch (m) {
        case BesselMethod::exact: return "exact";
        case BesselMethod::series: return "series";
        case BesselMethod::quadrature: return "quadrature";
        case BesselMethod::envelope: return "envelope";
        case BesselMethod::asymptotic: return "asymptotic";
    }
    return "unknown";
}

BesselValue bessel_j_series(int order, double x) {
    check_range(order, x);
    if (x == 0.0) return {order == 0 ? 1.0 : 0.0, 0.0, BesselMethod::exact, 0};
    Estimate e;
    for (int tier = 0; tier < kTierCount; ++tier) {
        e = at_tier(tier, [&]<typename Real>() { return series_tier<Real>(order, x); });
        if (e.error() <= target_for(e.value)) break;
    }
    return from_estimate(e, e.error(), BesselMethod::series);
}

BesselValue bessel_j_quadrature(int order, double x, bool validate) {
    check_range(order, x);
    long panels = default_panels(order, x);
    Estimate best;
    double best_error = std::numeric_limits<double>::infinity();
    for (int tier = 0; tier < kTierCount; ++tier) {
        const bool last_tier = tier + 1 == kTierCount;
        auto run = [&](long n) {
            return at_tier(tier, [&]<typename Real>() { return quadrature_tier<Real>(order, x, n); });
        };
        Estimate coarse = run(panels);
        if (coarse.rounding > target_for(coarse.value) && !last_tier) continue;
        if (!validate) return from_estimate(coarse, coarse.rounding, BesselMethod::quadrature);

        for (int doubling = 0; doubling < 4; ++doubling) {
            const Estimate fine = run(2 * panels);
            const double discretization = std::abs(fine.value - coarse.value);
            const double error = discretization + fine.rounding;
            if (error < best_error) {
                best = fine;
                best_error = error;
            }
            if (error <= target_for(fine.value)) return from_estimate(fine, error, BesselMethod::quadrature);
            panels *= 2;
            coarse = fine;
            if (discretization <= 10 * fine.rounding) break;  // rounding-limited: escalate
        }
    }
    return from_estimate(best, best_error, BesselMethod::quadrature);
}

BesselValue bessel_j(int order, double x) {
    check_range(order, x);
    if (x == 0.0) return {order == 0 ? 1.0 : 0.0, 0.0, BesselMethod::exact, 0};
    const double nu = order;
    const double log_floor = std::log(kBesselFloor);

    if (x <= std::max(12.0, nu / 3)) {
        if (order > 0) {
            // |J_nu(x)| <= (x/2)^nu / nu!
            const double log_bound = nu * std::log(x / 2) - std::lgamma(nu + 1);
            if (log_bound < log_floor) {
                return {0.0, positive_or_tiny(std::exp(log_bound)), BesselMethod::envelope, 0};
            }
        }
        return bessel_j_series(order, x);
    }
    if (order > 0 && x < nu) {
        const double log_envelope = log_kapteyn_bound(nu, x / nu);
        if (log_envelope < log_floor) {
            return {0.0, positive_or_tiny(std::exp(log_envelope)), BesselMethod::envelope, 0};
        }
    }
    if (x >= std::max(1000.0, nu * nu)) {
        const Estimate e = hankel(order, x);
        if (e.error() <= std::max(target_for(e.value), 1e-11 * std::sqrt(2 / (std::numbers::pi * x)))) {
            return from_estimate(e, e.error(), BesselMethod::asymptotic);
        }
    }
    return bessel_j_quadrature(order, x);
}

double airy_ai(double x) {
    if (!(x >= -2.34 && x <= 0.0)) throw DomainError("airy_ai: x outside [-2.34, 0]");
    return static_cast<double>(airy_series(x));
}

double airy_ai_at_zero() { return static_cast<double>(airy_series(0)); }

double turning_point_constant() {
    return std::cbrt(2.0) / (std::cbrt(9.0) * std::tgamma(2.0 / 3.0));
}

double log_paris_factor(double nu, double x) { return nu * (1.0 - x) + nu * std::log(x); }

EnvelopePair paris_envelope(double nu, double x, double j_at_nu) {
    if (!(nu > 0)) throw DomainError("paris_envelope: nu must be positive");
    if (!(x > 0.0 && x <= 1.0)) throw DomainError("paris_envelope: x outside (0, 1]");
    if (!(j_at_nu > 0)) throw DomainError("paris_envelope: J_nu(nu) must be positive");
    const double log_lower = nu * std::log(x) + std::log(j_at_nu);
    EnvelopePair out;
    out.lower = std::exp(log_lower);
    out.upper = positive_or_tiny(std::exp(log_lower + nu * (1.0 - x)));
    out.valid = true;
    return out;
}

EnvelopePair jnu_at_nu_bracket(double nu, double epsilon) {
    const double c0 = turning_point_constant();
    EnvelopePair out;
    if (!(epsilon > 0.0 && epsilon < 0.4473 && epsilon < c0)) {
        out.reason = "epsilon must lie in (0, 0.4473)";
        return out;
    }
    const double threshold = std::pow(3.0 / epsilon, 1.5);
    if (!(nu >= threshold)) {
        out.reason = "nu = " + std::to_string(nu) + " below threshold (3/eps)^{3/2} = " +
                     std::to_string(threshold);
        return out;
    }
    const double cube_root = std::cbrt(nu);
    out.lower = (c0 - epsilon) / cube_root;
    out.upper = c0 / cube_root + 3.0 / nu;
    out.valid = true;
    return out;
}

EnvelopePair transition_value(int k, double t) {
    if (k < 180 || k % 2 != 0) throw DomainError("transition_value: k must be even and >= 180");
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("transition_value: t outside [0, 1]");
    const double nu = k - 1;
    const double c2 = std::cbrt(2.0);
    const double main = c2 * airy_ai(-c2 * t) / std::cbrt(nu);
    const double half_width = (4.0 * std::pow(t, 2.25) + 21.0) / (7.0 * nu);
    return {main - half_width, main + half_width, true, {}};
}

}  // namespace klb
