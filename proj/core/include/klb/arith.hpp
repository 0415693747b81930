#pragma once

// Exact integer and modular arithmetic on moduli up to 2^63.
// Products are formed in 128-bit intermediates throughout.

#include <cstdint>
#include <vector>

#include "klb/errors.hpp"

namespace klb {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;

inline constexpr u64 kMaxModulus = u64{1} << 63;

struct PrimePower {
    u64 prime = 0;
    int exponent = 0;

    u64 value() const;
    friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// n = prod p^e with primes strictly increasing.
struct Factorization {
    u64 n = 1;
    std::vector<PrimePower> factors;

    u64 product() const;
    bool squarefree() const;
};

struct ArithmeticFunctions {
    u64 phi = 1;  // Euler totient
    u64 tau = 1;  // number of divisors
    int omega = 0;  // number of distinct primes
};

/// c = d * f, d powerful, f squarefree, gcd(d, f) = 1.
struct PowerfulSplit {
    u64 c = 1;
    u64 d = 1;
    u64 f = 1;
    std::vector<PrimePower> powerful_primes;  // the p^e || d
    std::vector<u64> squarefree_primes;       // the p | f
};

u64 mulmod(u64 a, u64 b, u64 n);
u64 powmod(u64 base, u64 exp, u64 n);

/// a mod n in [0, n) for signed a.
u64 reduce(i64 a, u64 n);

/// Deterministic Miller-Rabin, exact for every 64-bit input.
bool is_prime(u64 n);

/// Trial division to 10^6, then Brent-Pollard rho seeded from n.
Factorization factorize(u64 n);

ArithmeticFunctions arithmetic_functions(const Factorization& fac);

PowerfulSplit powerful_split(const Factorization& fac);
PowerfulSplit powerful_split(u64 c);

/// Throws NotInvertible when gcd(a, n) != 1.
u64 mod_inverse(i64 a, u64 n);

/// Jacobi symbol (a/n) for odd n >= 1.
int jacobi_symbol(i64 a, u64 n);

/// Square root of a modulo p^beta, p an odd prime, p ∤ a.
/// Tonelli-Shanks mod p, then Hensel lifting; returns min(l, p^beta - l).
u64 sqrt_mod_prime_power(i64 a, u64 p, int beta);

/// p^beta, throwing if it does not fit below 2^63.
u64 checked_pow(u64 p, int beta);

}  // namespace klb
