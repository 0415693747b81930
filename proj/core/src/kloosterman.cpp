#include "klb/kloosterman.hpp"

#include <quadmath.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "klb/compensated_sum.hpp"

namespace klb {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kUnitRoundoff = std::numeric_limits<double>::epsilon() / 2;
// cos() of a rounded angle 2*pi*r/c: one ulp from libm plus the
// argument rounding, which is at most a few ulps of 2*pi.
constexpr double kTermUlps = 8.0;

struct UnitTable {
    u64 c = 0;
    std::vector<u64> units;
    std::vector<u64> inverses;
};

// Sweeps evaluate many (a, b) against one modulus, so the last table is
// kept per thread.
const UnitTable& unit_table(u64 c) {
    thread_local UnitTable table;
    if (table.c != c) {
        table.c = c;
        table.units.clear();
        table.inverses.clear();
        for (u64 x = 1; x < c; ++x) {
            if (std::gcd(x, c) != 1) continue;
            table.units.push_back(x);
            table.inverses.push_back(mod_inverse(static_cast<i64>(x), c));
        }
    }
    return table;
}

u64 mul_reduce(i64 a, u64 x, u64 c) { return mulmod(reduce(a, c), x, c); }

}  // namespace

std::string_view to_string(KloostermanMethod m) {
    switch (m) {
        case KloostermanMethod::brute: return "brute";
        case KloostermanMethod::salie: return "salie";
        case KloostermanMethod::multiplicative: return "multiplicative";
    }
    return "unknown";
}

std::string_view to_string(CertificateVerdict v) {
    return v == CertificateVerdict::vanishes ? "vanishes" : "bounded_below";
}

double kloosterman_tolerance(u64 c) { return std::max(1e-9, static_cast<double>(c) * 1e-12); }

KloostermanValue eval_bruteforce(i64 a, i64 b, u64 c) {
    if (c == 0) throw DomainError("eval_bruteforce: c must be positive");
    KloostermanValue out{a, b, c, 1.0, KloostermanMethod::brute, kloosterman_tolerance(c), 0.0};
    if (c == 1) return out;

    const UnitTable& table = unit_table(c);
    const u64 ar = reduce(a, c);
    const u64 br = reduce(b, c);
    CompensatedSum<double> re;
    CompensatedSum<double> im;
    for (std::size_t i = 0; i < table.units.size(); ++i) {
        const u64 r = (mulmod(ar, table.units[i], c) + mulmod(br, table.inverses[i], c)) % c;
        // fold to [0, c/2] so the angle stays in [0, pi]
        const bool upper = 2 * r > c;
        const u64 folded = upper ? c - r : r;
        const double angle = kTwoPi * static_cast<double>(folded) / static_cast<double>(c);
        re.add(std::cos(angle));
        im.add(upper ? -std::sin(angle) : std::sin(angle));
    }
    out.value = re.value();
    out.imag_residue = std::abs(im.value());
    const double tracked = re.error_bound(kUnitRoundoff, kTermUlps);
    out.abs_error = std::max(out.abs_error, tracked);
    return out;
}

KloostermanValue eval_salie(i64 a, i64 b, u64 p, int beta) {
    if (beta < 2) throw DomainError("eval_salie: beta must be >= 2");
    if (p % 2 == 0 || !is_prime(p)) throw DomainError("eval_salie: p must be an odd prime");
    const u64 q = checked_pow(p, beta);
    if (reduce(a, p) == 0 || reduce(b, p) == 0) throw DomainError("eval_salie: p divides ab");

    KloostermanValue out{a, b, q, 0.0, KloostermanMethod::salie, kloosterman_tolerance(q), 0.0};
    const u64 ab = mulmod(reduce(a, q), reduce(b, q), q);
    if (jacobi_symbol(static_cast<i64>(ab % p), p) != 1) return out;  // exact cancellation

    const u64 l = sqrt_mod_prime_power(static_cast<i64>(ab), p, beta);
    const int symbol = jacobi_symbol(static_cast<i64>(l), q);
    const u64 twice = mulmod(2, l, q);
    const double angle = kTwoPi * static_cast<double>(twice) / static_cast<double>(q);
    const double amplitude = 2.0 * symbol * std::sqrt(static_cast<double>(q));
    out.value = q % 4 == 1 ? amplitude * std::cos(angle) : -amplitude * std::sin(angle);
    return out;
}

KloostermanValue eval_multiplicative(i64 a, i64 b, u64 c) {
    if (c == 0) throw DomainError("eval_multiplicative: c must be positive");
    KloostermanValue out{a, b, c, 1.0, KloostermanMethod::multiplicative, kloosterman_tolerance(c), 0.0};
    if (c == 1) return out;

    const Factorization fac = factorize(c);
    double value = 1.0;
    double error = 0.0;
    u64 rest = c;   // c_{i-1}
    u64 twist = 1;  // m_{i-1}, meaningful modulo rest
    for (const auto& pp : fac.factors) {
        const u64 l = pp.value();
        const u64 next = rest / l;  // c_i
        const u64 cofactor_inv = mod_inverse(static_cast<i64>(next % l), l);
        const u64 scale = mulmod(twist % l, cofactor_inv, l);
        const u64 ai = mulmod(reduce(a, l), scale, l);
        const u64 bi = mulmod(reduce(b, l), scale, l);

        const bool closed_form = pp.prime % 2 == 1 && pp.exponent >= 2 && ai % pp.prime != 0 &&
                                 bi % pp.prime != 0;
        const KloostermanValue factor =
            closed_form ? eval_salie(static_cast<i64>(ai), static_cast<i64>(bi), pp.prime, pp.exponent)
                        : eval_bruteforce(static_cast<i64>(ai), static_cast<i64>(bi), l);
        // tight propagation: each factor is good to ~sqrt(l) ulps
        const double factor_err = 16.0 * kUnitRoundoff * static_cast<double>(l);
        error = error * (std::abs(factor.value) + factor_err) + std::abs(value) * factor_err;
        value *= factor.value;

        if (next > 1) twist = mulmod(twist % next, mod_inverse(static_cast<i64>(l % next), next), next);
        rest = next;
    }
    out.value = value;
    out.abs_error = std::max(out.abs_error, error);
    return out;
}

double weil_bound(i64 a, i64 /*b*/, u64 c) {
    if (c == 0) throw DomainError("weil_bound: c must be positive");
    if (std::gcd(reduce(a, c), c) != 1 && c != 1) throw DomainError("weil_bound: requires gcd(a, c) = 1");
    const auto fn = arithmetic_functions(factorize(c));
    return static_cast<double>(fn.tau) * std::sqrt(static_cast<double>(c));
}

DistanceBound prime_power_distance_bound(i64 a, i64 b, u64 p, int beta) {
    if (beta < 2) throw DomainError("prime_power_distance_bound: beta must be >= 2");
    if (p % 2 == 0 || !is_prime(p)) throw DomainError("prime_power_distance_bound: p must be an odd prime");
    const u64 q = checked_pow(p, beta);
    const u64 ab = mulmod(reduce(a, q), reduce(b, q), q);
    if (ab % p == 0) throw DomainError("prime_power_distance_bound: p divides ab");
    DistanceBound out;
    out.root = sqrt_mod_prime_power(static_cast<i64>(ab), p, beta);  // throws on QNR
    const u64 r = out.root;
    const u64 two_q = 2 * q;
    const u64 half_num = (q + two_q - mulmod(8, r, two_q)) % two_q;
    const u64 quarter_num = mulmod(4, r, q);
    out.dist_half = static_cast<double>(std::min(half_num, two_q - half_num)) / static_cast<double>(two_q);
    out.dist_quarter = static_cast<double>(std::min(quarter_num, q - quarter_num)) / static_cast<double>(q);
    out.bound = 4.0 * std::sqrt(static_cast<double>(q)) * std::min(out.dist_half, out.dist_quarter);
    return out;
}

BoundCertificate certify_lower_bound(i64 a, i64 b, u64 c) {
    if (c == 0 || c % 2 == 0) throw DomainError("certify_lower_bound: c must be odd and positive");
    if (c > 1 && (std::gcd(reduce(a, c), c) != 1 || std::gcd(reduce(b, c), c) != 1)) {
        throw DomainError("certify_lower_bound: requires gcd(ab, c) = 1");
    }
    BoundCertificate cert;
    cert.a = a;
    cert.b = b;
    cert.c = c;
    const Factorization fac = factorize(c);
    cert.split = powerful_split(fac);
    cert.hypotheses.c_odd = true;
    cert.hypotheses.coprime = true;

    bool vanishes = false;
    double log_powerful = 0.0;
    for (const auto& pp : cert.split.powerful_primes) {
        const u64 ab = mulmod(reduce(a, pp.prime), reduce(b, pp.prime), pp.prime);
        const bool residue = jacobi_symbol(static_cast<i64>(ab), pp.prime) == 1;
        cert.hypotheses.powerful_primes.push_back({pp.prime, pp.exponent, residue});
        vanishes = vanishes || !residue;
        log_powerful += std::log(2.0) - 0.5 * pp.exponent * std::log(static_cast<double>(pp.prime));
    }
    cert.verdict = vanishes ? CertificateVerdict::vanishes : CertificateVerdict::bounded_below;

    const Factorization f_fac = factorize(cert.split.f);
    const auto ff = arithmetic_functions(f_fac);
    const double f = static_cast<double>(cert.split.f);
    const double tau = static_cast<double>(ff.tau);
    const double ratio = static_cast<double>(ff.phi) / tau;
    const int omega_c = static_cast<int>(fac.factors.size());

    cert.log_theorem_bound = log_powerful + (1.0 - ratio) * std::log(tau * std::sqrt(f));
    cert.log_corollary_bound = 0.25 * (3.0 * std::log(f) - std::log(static_cast<double>(c))) +
                               omega_c * std::log(2.0) - 0.5 * ratio * std::log(tau * tau * f);
    cert.theorem_bound = std::exp(cert.log_theorem_bound);
    cert.corollary_bound = std::exp(cert.log_corollary_bound);
    return cert;
}

NormProduct norm_product(i64 a, i64 b, u64 c) {
    if (c == 0 || c % 2 == 0) throw DomainError("norm_product: c must be odd and positive");
    if (c > 30) throw DomainError("norm_product: c > 30 exceeds the precision guard");
    const Factorization fac = factorize(c);
    if (!fac.squarefree()) throw DomainError("norm_product: c must be squarefree");
    if (c > 1 && (std::gcd(reduce(a, c), c) != 1 || std::gcd(reduce(b, c), c) != 1)) {
        throw DomainError("norm_product: requires gcd(ab, c) = 1");
    }
    NormProduct out;
    if (c == 1) {
        out.value = 1;
        out.nearest = 1;
        return out;
    }
    const UnitTable& table = unit_table(c);
    __float128 product = 1;
    for (u64 n : table.units) {
        const u64 an = mul_reduce(a, n, c);
        const u64 bn = mul_reduce(b, n, c);
        __float128 sum = 0;
        for (std::size_t i = 0; i < table.units.size(); ++i) {
            const u64 r = (mulmod(an, table.units[i], c) + mulmod(bn, table.inverses[i], c)) % c;
            sum += cosq(2 * M_PIq * static_cast<__float128>(r) / static_cast<__float128>(c));
        }
        product *= sum;
    }
    const __float128 nearest = roundq(product);
    out.value = static_cast<long double>(product);
    out.nearest = static_cast<__int128>(nearest);
    out.distance = static_cast<double>(fabsq(product - nearest));
    return out;
}

}  // namespace klb
