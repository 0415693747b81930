#include "klb/arith.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace klb {

namespace {

constexpr u64 kTrialLimit = 1'000'000;

u64 splitmix64(u64 x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

u64 abs_diff(u64 a, u64 b) { return a > b ? a - b : b - a; }

// Brent's cycle-finding variant of Pollard rho. Deterministic: the
// polynomial constant and start point are derived from n and the attempt.
u64 rho_factor(u64 n) {
    if (n % 2 == 0) return 2;
    for (u64 attempt = 0;; ++attempt) {
        const u64 seed = splitmix64(n ^ (attempt * 0x2545f4914f6cdd1dULL));
        const u64 c = 1 + seed % (n - 1);
        u64 y = splitmix64(seed) % n;
        const u64 m = 128;
        u64 g = 1, r = 1, q = 1, x = 0, ys = 0;
        auto step = [&](u64 v) { return (mulmod(v, v, n) + c) % n; };
        do {
            x = y;
            for (u64 i = 0; i < r; ++i) y = step(y);
            u64 k = 0;
            do {
                ys = y;
                const u64 lim = std::min(m, r - k);
                for (u64 i = 0; i < lim; ++i) {
                    y = step(y);
                    q = mulmod(q, abs_diff(x, y), n);
                }
                g = std::gcd(q, n);
                k += m;
            } while (k < r && g == 1);
            r *= 2;
        } while (g == 1);
        if (g == n) {
            do {
                ys = step(ys);
                g = std::gcd(abs_diff(x, ys), n);
            } while (g == 1);
        }
        if (g != n) return g;
    }
}

void collect_large(u64 n, std::vector<u64>& primes) {
    if (n == 1) return;
    if (is_prime(n)) {
        primes.push_back(n);
        return;
    }
    const u64 g = rho_factor(n);
    collect_large(g, primes);
    collect_large(n / g, primes);
}

u64 sqrt_mod_prime(u64 a, u64 p) {
    if (p == 2) return a & 1;
    if (p % 4 == 3) return powmod(a, (p + 1) / 4, p);
    // Tonelli-Shanks
    u64 q = p - 1;
    int s = 0;
    while (q % 2 == 0) {
        q /= 2;
        ++s;
    }
    u64 z = 2;
    while (powmod(z, (p - 1) / 2, p) != p - 1) ++z;
    u64 m = static_cast<u64>(s);
    u64 c = powmod(z, q, p);
    u64 t = powmod(a, q, p);
    u64 r = powmod(a, (q + 1) / 2, p);
    while (t != 1) {
        u64 i = 0;
        u64 t2 = t;
        while (t2 != 1) {
            t2 = mulmod(t2, t2, p);
            ++i;
        }
        u64 b = c;
        for (u64 j = 0; j + 1 < m - i; ++j) b = mulmod(b, b, p);
        m = i;
        c = mulmod(b, b, p);
        t = mulmod(t, c, p);
        r = mulmod(r, b, p);
    }
    return r;
}

}  // namespace

u64 PrimePower::value() const { return checked_pow(prime, exponent); }

u64 Factorization::product() const {
    u64 acc = 1;
    for (const auto& pp : factors) acc *= pp.value();
    return acc;
}

bool Factorization::squarefree() const {
    return std::all_of(factors.begin(), factors.end(),
                       [](const PrimePower& pp) { return pp.exponent == 1; });
}

u64 mulmod(u64 a, u64 b, u64 n) {
    return static_cast<u64>(static_cast<u128>(a) * b % n);
}

u64 powmod(u64 base, u64 exp, u64 n) {
    if (n == 1) return 0;
    u64 result = 1;
    base %= n;
    while (exp > 0) {
        if (exp & 1) result = mulmod(result, base, n);
        base = mulmod(base, base, n);
        exp >>= 1;
    }
    return result;
}

u64 reduce(i64 a, u64 n) {
    if (n == 0) throw DomainError("reduce: modulus must be positive");
    if (a >= 0) return static_cast<u64>(a) % n;
    // -(a+1) avoids overflow at INT64_MIN
    const u64 m = static_cast<u64>(-(a + 1)) % n;
    return n - 1 - m;
}

bool is_prime(u64 n) {
    if (n < 2) return false;
    for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    int s = 0;
    while (d % 2 == 0) {
        d /= 2;
        ++s;
    }
    // These twelve bases are a proven witness set for n < 3.3e24.
    for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        u64 x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

Factorization factorize(u64 n) {
    if (n == 0) throw DomainError("factorize: n must be positive");
    if (n > kMaxModulus) throw DomainError("factorize: n exceeds 2^63");
    Factorization fac;
    fac.n = n;
    u64 rest = n;
    auto take = [&](u64 p) {
        int e = 0;
        while (rest % p == 0) {
            rest /= p;
            ++e;
        }
        if (e > 0) fac.factors.push_back({p, e});
    };
    take(2);
    for (u64 p = 3; p <= kTrialLimit && p * p <= rest; p += 2) take(p);
    if (rest > 1) {
        std::vector<u64> primes;
        collect_large(rest, primes);
        std::sort(primes.begin(), primes.end());
        for (std::size_t i = 0; i < primes.size();) {
            std::size_t j = i;
            while (j < primes.size() && primes[j] == primes[i]) ++j;
            fac.factors.push_back({primes[i], static_cast<int>(j - i)});
            i = j;
        }
    }
    return fac;
}

ArithmeticFunctions arithmetic_functions(const Factorization& fac) {
    ArithmeticFunctions out;
    for (const auto& [p, e] : fac.factors) {
        out.phi *= checked_pow(p, e - 1) * (p - 1);
        out.tau *= static_cast<u64>(e + 1);
        ++out.omega;
    }
    return out;
}

PowerfulSplit powerful_split(const Factorization& fac) {
    PowerfulSplit split;
    split.c = fac.n;
    for (const auto& pp : fac.factors) {
        if (pp.exponent >= 2) {
            split.d *= pp.value();
            split.powerful_primes.push_back(pp);
        } else {
            split.f *= pp.prime;
            split.squarefree_primes.push_back(pp.prime);
        }
    }
    return split;
}

PowerfulSplit powerful_split(u64 c) { return powerful_split(factorize(c)); }

u64 mod_inverse(i64 a, u64 n) {
    if (n == 0) throw DomainError("mod_inverse: modulus must be positive");
    if (n == 1) return 0;
    // extended Euclid on (a mod n, n) in signed 128-bit
    __int128 r0 = n, r1 = reduce(a, n);
    __int128 s0 = 0, s1 = 1;
    while (r1 != 0) {
        const __int128 q = r0 / r1;
        r0 -= q * r1;
        std::swap(r0, r1);
        s0 -= q * s1;
        std::swap(s0, s1);
    }
    if (r0 != 1) {
        throw NotInvertible("mod_inverse: " + std::to_string(a) + " is not invertible modulo " +
                            std::to_string(n));
    }
    if (s0 < 0) s0 += n;
    return static_cast<u64>(s0);
}

int jacobi_symbol(i64 a_signed, u64 n) {
    if (n == 0 || n % 2 == 0) throw DomainError("jacobi_symbol: n must be odd and positive");
    u64 a = reduce(a_signed, n);
    int result = 1;
    while (a != 0) {
        while (a % 2 == 0) {
            a /= 2;
            const u64 r = n % 8;
            if (r == 3 || r == 5) result = -result;
        }
        std::swap(a, n);
        if (a % 4 == 3 && n % 4 == 3) result = -result;
        a %= n;
    }
    return n == 1 ? result : 0;
}

u64 checked_pow(u64 p, int beta) {
    if (beta < 0) throw DomainError("checked_pow: negative exponent");
    u128 acc = 1;
    for (int i = 0; i < beta; ++i) {
        acc *= p;
        if (acc > kMaxModulus) throw DomainError("checked_pow: p^beta exceeds 2^63");
    }
    return static_cast<u64>(acc);
}

u64 sqrt_mod_prime_power(i64 a_signed, u64 p, int beta) {
    if (beta < 1) throw DomainError("sqrt_mod_prime_power: beta must be >= 1");
    if (p % 2 == 0 || !is_prime(p)) throw DomainError("sqrt_mod_prime_power: p must be an odd prime");
    const u64 q = checked_pow(p, beta);
    const u64 a = reduce(a_signed, q);
    if (a % p == 0) throw DomainError("sqrt_mod_prime_power: p divides a");
    if (jacobi_symbol(static_cast<i64>(a % p), p) != 1) {
        throw NoSquareRoot("sqrt_mod_prime_power: " + std::to_string(a_signed) +
                           " is not a square modulo " + std::to_string(p));
    }
    u64 r = sqrt_mod_prime(a % p, p);
    u64 modulus = p;
    for (int j = 1; j < beta; ++j) {
        modulus *= p;
        // r <- r - (r^2 - a) / (2r)  (mod p^{j+1})
        const u64 am = a % modulus;
        const u64 r2 = mulmod(r, r, modulus);
        const u64 diff = (r2 + modulus - am) % modulus;
        const u64 inv = mod_inverse(static_cast<i64>(mulmod(2, r, modulus)), modulus);
        r = (r + modulus - mulmod(diff, inv, modulus)) % modulus;
    }
    return std::min(r, q - r);
}

}  // namespace klb
