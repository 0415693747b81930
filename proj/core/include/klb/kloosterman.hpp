#pragma once

// Classical Kloosterman sums S(a,b;c) = sum_{x mod c, (x,c)=1} e((a x + b xbar)/c).
// Three evaluators (direct, Salie closed form, multiplicative factorization)
// plus lower-bound certificates.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "klb/arith.hpp"

namespace klb {

enum class KloostermanMethod { brute, salie, multiplicative };

std::string_view to_string(KloostermanMethod m);

struct KloostermanValue {
    i64 a = 0;
    i64 b = 0;
    u64 c = 1;
    double value = 0.0;
    KloostermanMethod method = KloostermanMethod::brute;
    double abs_error = 0.0;
    // |sum of sines|; zero for the closed-form route
    double imag_residue = 0.0;
};

/// Declared tolerance for a sum mod c: max(1e-9, c * 1e-12).
double kloosterman_tolerance(u64 c);

KloostermanValue eval_bruteforce(i64 a, i64 b, u64 c);

/// S(a,b;p^beta) for beta >= 2 and p ∤ 2ab.
KloostermanValue eval_salie(i64 a, i64 b, u64 p, int beta);

/// Product over prime powers l_i || c of twisted sums S(a m c_i^-1, b m c_i^-1; l_i).
KloostermanValue eval_multiplicative(i64 a, i64 b, u64 c);

/// tau(c) sqrt(c); requires gcd(a, c) = 1.
double weil_bound(i64 a, i64 b, u64 c);

/// 4 sqrt(q) min(||(q - 8r)/(2q)||, ||4r/q||) with r the root l of ab mod q.
struct DistanceBound {
    double bound = 0.0;
    double dist_half = 0.0;   // ||(q - 8r)/(2q)||
    double dist_quarter = 0.0;  // ||4r/q||
    u64 root = 0;
};
DistanceBound prime_power_distance_bound(i64 a, i64 b, u64 p, int beta);

enum class CertificateVerdict { vanishes, bounded_below };

std::string_view to_string(CertificateVerdict v);

struct ResidueCheck {
    u64 prime = 0;
    int exponent = 0;
    bool residue = false;  // ab is a square mod prime
};

struct CertificateHypotheses {
    bool c_odd = false;
    bool coprime = false;  // gcd(ab, c) = 1
    std::vector<ResidueCheck> powerful_primes;
};

struct BoundCertificate {
    i64 a = 0;
    i64 b = 0;
    u64 c = 1;
    PowerfulSplit split;
    CertificateVerdict verdict = CertificateVerdict::bounded_below;
    // prod_{p^e || d} 2 / p^{e/2} * (tau(f) sqrt f)^{1 - phi(f)/tau(f)}
    double theorem_bound = 0.0;
    double log_theorem_bound = 0.0;
    // (f^3/c)^{1/4} 2^{omega(c)} / (tau(f)^2 f)^{phi(f) / (2 tau(f))}
    double corollary_bound = 0.0;
    double log_corollary_bound = 0.0;
    CertificateHypotheses hypotheses;
};

BoundCertificate certify_lower_bound(i64 a, i64 b, u64 c);

/// Norm of S(a,b;c) from Q(zeta_c) to Q: prod_{(n,c)=1} S(an, bn; c),
/// accumulated in quad precision. c odd squarefree, c <= 30.
struct NormProduct {
    long double value = 0;
    __int128 nearest = 0;
    double distance = 0.0;  // |value - nearest|
};
NormProduct norm_product(i64 a, i64 b, u64 c);

}  // namespace klb
