#include "klb/petersson.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "klb/bessel.hpp"
#include "klb/compensated_sum.hpp"
#include "klb/kloosterman.hpp"

namespace klb {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr u64 kMaxProduct = u64{1} << 53;
constexpr double kEnvelopeRatio = 0.9;  // at or below this, terms are charged by envelope only

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// Prime of the powerful part of N modulo which mn is not a square.
std::optional<u64> residue_failure(u64 m, u64 n, u64 level) {
    for (const auto& pp : powerful_split(level).powerful_primes) {
        const u64 p = pp.prime;
        const u64 mn = mulmod(m % p, n % p, p);
        if (p == 2 ? mn == 0 : jacobi_symbol(static_cast<i64>(mn), p) != 1) return p;
    }
    return std::nullopt;
}

bool coprime_to_level(u64 m, u64 n, u64 level) {
    return std::gcd(mulmod(m % level, n % level, level), level) == 1;
}

Check residue_check(u64 m, u64 n, u64 level) {
    const auto bad = residue_failure(m, n, level);
    if (!bad) return {"quadratic_residue", true, false, "mn is a square modulo each prime of the powerful part"};
    return {"quadratic_residue", false, false,
            "mn is not a square modulo p = " + std::to_string(*bad)};
}

Check range_check(double x, double lo, double hi) {
    const bool ok = x >= lo && x <= hi;
    return {"argument_range", ok, false,
            "4 pi sqrt(mn)/N = " + fmt(x) + (ok ? " in [" : " outside [") + fmt(lo) + ", " + fmt(hi) + "]"};
}

double quantity_lhs_bessel(const TraceInstance& inst, bool& available) {
    const double x = inst.argument();
    available = x <= kMaxBesselArgument;
    return available ? bessel_j(inst.k - 1, x).value : 0.0;
}

}  // namespace

double h0() { return 1.0 - 4.0 / 9.0 - std::log(9.0 / 5.0); }

std::string_view to_string(Mode m) { return m == Mode::thm12 ? "thm12" : "thm13"; }

Mode parse_mode(std::string_view s) {
    if (s == "thm12") return Mode::thm12;
    if (s == "thm13") return Mode::thm13;
    throw DomainError("mode must be thm12 or thm13");
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::verified: return "verified";
        case Verdict::hypothesis_failed: return "hypothesis_failed";
        case Verdict::inconclusive: return "inconclusive";
        case Verdict::violated: return "violated";
    }
    return "unknown";
}

double TraceInstance::argument() const {
    const long double mn = static_cast<long double>(m) * static_cast<long double>(n);
    return static_cast<double>(4 * std::numbers::pi_v<long double> * std::sqrt(mn) / level);
}

double TraceInstance::ratio() const { return argument() / nu(); }

void validate(const TraceInstance& inst) {
    if (inst.m == 0 || inst.n == 0 || inst.level == 0) throw DomainError("m, n and N must be positive");
    if (inst.k < 2 || inst.k % 2 != 0) throw DomainError("k must be even and >= 2");
    if (static_cast<u128>(inst.m) * inst.n > kMaxProduct) throw DomainError("mn exceeds 2^53");
    if (!(inst.epsilon > 0.0 && inst.epsilon < 0.4473)) throw DomainError("epsilon outside (0, 0.4473)");
    if (inst.level > kMaxModulus) throw DomainError("N exceeds 2^63");
}

double default_e0(u64 level) { return 0.3 * 0.327 * thresholds(level).hn; }

Thresholds thresholds(u64 level, double d0, std::optional<double> e0) {
    if (level == 0 || level % 2 == 0) throw DomainError("thresholds: N must be odd and positive");
    const double lower = std::exp(h0());
    if (!(d0 > lower && d0 < 1.0)) {
        throw DomainError("thresholds: D0 = " + fmt(d0) + " outside (e^{H0}, 1) = (" + fmt(lower) + ", 1)");
    }
    Thresholds t;
    t.level = level;
    t.d0 = d0;
    t.h0 = h0();
    t.log_a0 = std::log(d0) - t.h0;
    t.a0 = std::exp(t.log_a0);

    const Factorization fac = factorize(level);
    const PowerfulSplit split = powerful_split(fac);
    const auto ff = arithmetic_functions(factorize(split.f));
    const double f = static_cast<double>(split.f);
    const double tau = static_cast<double>(ff.tau);
    const double expo = static_cast<double>(ff.phi) / (2.0 * tau);
    t.log_gn = 0.75 * std::log(f) - expo * std::log(tau * tau * f);
    t.log_hn = static_cast<double>(fac.factors.size()) * std::log(2.0) + t.log_gn -
               1.25 * std::log(static_cast<double>(level));
    t.gn = std::exp(t.log_gn);
    t.hn = std::exp(t.log_hn);

    t.k0 = 2 + static_cast<int>(std::floor((std::log(7.0) - t.log_hn) / t.log_a0));
    t.k0_base = 22;
    while ((t.k0_base - 1) * t.log_a0 < std::log(7.0)) t.k0_base += 2;

    t.e0 = e0.value_or(0.3 * 0.327 * t.hn);
    const double gap = 0.327 * t.hn - t.e0;
    if (t.e0 > 0.0 && gap > 0.0) {
        t.k1 = 2 + static_cast<int>(std::floor((std::log(1.632) - std::log(gap)) / -t.h0));
    }
    return t;
}

SeriesResult series_value(const TraceInstance& inst, int b_max) {
    validate(inst);
    if (inst.k < 4) throw DomainError("series_value: k must be >= 4");
    if (b_max < 1) throw DomainError("series_value: b_max must be positive");
    const int order = inst.k - 1;
    const double nu = order;
    const double x = inst.argument();
    if (x / (b_max + 1) > nu) {
        throw DomainError("series_value: b_max = " + std::to_string(b_max) +
                          " too small for a certified remainder");
    }
    if (static_cast<u128>(inst.level) * static_cast<u128>(b_max) > kMaxModulus) {
        throw DomainError("series_value: b_max * N exceeds 2^63");
    }

    const BesselValue at_nu = bessel_j(order, nu);
    const double log_j_nu = std::log(at_nu.value + at_nu.abs_error);
    const double sign = (inst.k / 2) % 2 == 0 ? 1.0 : -1.0;
    const u64 g_mn = std::gcd(inst.m, inst.n);

    SeriesResult out;
    out.b_max = b_max;
    CompensatedSum<double> sum;
    double error = 0.0;
    for (int b = 1; b <= b_max; ++b) {
        const u64 c = inst.level * static_cast<u64>(b);
        const double cd = static_cast<double>(c);
        const double r = x / (b * nu);
        double bound = 0.0;
        double term = 0.0;
        if (r <= kEnvelopeRatio) {
            const auto fn = arithmetic_functions(factorize(c));
            const double weil = fn.tau * std::sqrt(cd * static_cast<double>(std::gcd(g_mn, c)));
            const double weight = std::min(static_cast<double>(fn.phi), weil) / cd;
            bound = kTwoPi * weight * std::exp(log_paris_factor(nu, r) + log_j_nu);
            ++out.enveloped;
        } else {
            const KloostermanValue s = eval_multiplicative(static_cast<i64>(inst.m), static_cast<i64>(inst.n), c);
            const BesselValue j = bessel_j(order, x / b);
            const auto fn = arithmetic_functions(factorize(c));
            const double weil = fn.tau * std::sqrt(cd * static_cast<double>(std::gcd(g_mn, c)));
            term = kTwoPi * sign * s.value / cd * j.value;
            bound = kTwoPi / cd * (weil * j.abs_error + s.abs_error * (std::abs(j.value) + j.abs_error)) +
                    4 * std::numeric_limits<double>::epsilon() * std::abs(term);
            sum.add(term);
            ++out.evaluated;
        }
        error += bound;
        if (b == 1) {
            out.main_term = term;
            out.main_error = bound;
        } else {
            out.tail_numeric_bound += std::abs(term) + bound;
        }
    }

    // sum_{b > B} 2 pi e^{nu} J_nu(nu) (x/(b nu))^nu <= 2 pi e^nu J_nu(nu) (x/nu)^nu
    //   [(B+1)^{-nu} + (B+1)^{1-nu}/(nu-1)]
    const double next = b_max + 1.0;
    const double log_trunc = std::log(kTwoPi) + log_j_nu + nu + nu * std::log(x / nu) - nu * std::log(next) +
                             std::log1p(next / (nu - 1.0));
    out.truncation = std::exp(log_trunc);
    out.value = sum.value();
    out.error = error + out.truncation;
    out.tail_numeric_bound += out.truncation;
    return out;
}

double tail_paper_bound(const TraceInstance& inst) {
    validate(inst);
    if (inst.k < 22) throw DomainError("tail_paper_bound: k = " + std::to_string(inst.k) + " below 22");
    const double r = inst.ratio();
    if (!(r >= 8.0 / 9.0 && r <= 10.0 / 9.0)) {
        throw DomainError("tail_paper_bound: ratio " + fmt(r) + " outside [8/9, 10/9]");
    }
    const double nu = inst.nu();
    return 6.01 * kPi * bessel_j(inst.k - 1, nu).value * std::exp(h0() * nu);
}

bool BoundResult::hypotheses_hold() const {
    return std::all_of(checklist.begin(), checklist.end(),
                       [](const Check& c) { return c.informational || c.passed; });
}

const Check* BoundResult::first_failure() const {
    for (const auto& c : checklist) {
        if (!c.informational && !c.passed) return &c;
    }
    return nullptr;
}

BoundResult thm12_bound(const TraceInstance& inst) {
    validate(inst);
    BoundResult out;
    out.mode = Mode::thm12;
    const u64 level = inst.level;
    const double nu = inst.nu();
    const bool odd = level % 2 == 1;
    const double lower = std::exp(h0());
    const bool d0_ok = inst.d0 > lower && inst.d0 < 1.0;
    std::optional<Thresholds> th;
    if (odd && d0_ok) th = thresholds(level, inst.d0, inst.e0);

    auto& cl = out.checklist;
    cl.push_back({"level_odd", odd, false, "N = " + std::to_string(level)});
    cl.push_back({"coprime", coprime_to_level(inst.m, inst.n, level), false, "gcd(mn, N) = 1"});
    cl.push_back({"d0_range", d0_ok, false, "D0 = " + fmt(inst.d0) + " in (" + fmt(lower) + ", 1)"});
    cl.push_back({"k_min", inst.k >= 22, false, "k = " + std::to_string(inst.k) + " >= 22"});
    if (th) {
        cl.push_back({"k_threshold", inst.k >= th->k0, false,
                      "k = " + std::to_string(inst.k) + " >= k0(N) = " + std::to_string(th->k0)});
    } else {
        cl.push_back({"k_threshold", false, false, "k0(N) undefined"});
    }
    cl.push_back(range_check(inst.argument(), inst.d0 * nu, nu));
    cl.push_back(residue_check(inst.m, inst.n, level));
    if (th) {
        const bool base = nu * th->log_a0 >= std::log(7.0);
        const bool weighted = nu * th->log_a0 >= std::log(7.0) - th->log_hn;
        cl.push_back({"a0_power_over_7", base, true, "A0^{k-1} >= 7"});
        cl.push_back({"a0_power_over_7_over_h", weighted, true, "A0^{k-1} >= 7/H(N)"});
        out.thresholds = *th;
    }

    const BesselValue at_nu = bessel_j(inst.k - 1, nu);
    out.j_at_nu = at_nu.value;
    out.j_at_nu_error = at_nu.abs_error;
    const double decay = std::exp(h0() * nu);
    const double cube_root = std::cbrt(nu);
    out.epsilon_bound = 7.99 * kPi * (0.4473 - inst.epsilon) / cube_root * decay;
    out.explicit_bound = 0.002397 * kPi / cube_root * decay;

    if (th) {
        bool have_j = false;
        const double j_x = quantity_lhs_bessel(inst, have_j);
        if (have_j && odd) {
            const double s = eval_multiplicative(static_cast<i64>(inst.m), static_cast<i64>(inst.n), level).value;
            const double d0_pow = std::pow(inst.d0, nu);
            const double floor_rhs = std::exp(th->log_hn) * d0_pow * at_nu.value;
            const double lhs = std::abs(s) / static_cast<double>(level) * j_x;
            out.quantities.push_back({"main_term_floor", lhs, floor_rhs, lhs >= floor_rhs - 1e-12});
            out.quantities.push_back({"bessel_floor", j_x, d0_pow * at_nu.value, j_x >= d0_pow * at_nu.value - 1e-12});
        }
        const double dom_lhs = 7.0 * decay;
        const double dom_rhs = th->hn * std::pow(inst.d0, nu);
        out.quantities.push_back({"dominance", dom_lhs, dom_rhs, dom_lhs <= dom_rhs});
    }
    if (out.hypotheses_hold()) out.bound = 7.99 * kPi * at_nu.value * decay;
    return out;
}

BoundResult thm13_bound(const TraceInstance& inst) {
    validate(inst);
    BoundResult out;
    out.mode = Mode::thm13;
    const u64 level = inst.level;
    const double nu = inst.nu();
    const bool odd = level % 2 == 1;
    const double lower = std::exp(h0());
    const double d0 = inst.d0 > lower && inst.d0 < 1.0 ? inst.d0 : kDefaultD0;
    std::optional<Thresholds> th;
    if (odd) th = thresholds(level, d0, inst.e0);

    auto& cl = out.checklist;
    cl.push_back({"level_odd", odd, false, "N = " + std::to_string(level)});
    cl.push_back({"coprime", coprime_to_level(inst.m, inst.n, level), false, "gcd(mn, N) = 1"});
    cl.push_back({"k_min", inst.k >= 180, false, "k = " + std::to_string(inst.k) + " >= 180"});
    if (th) {
        const double cap = 0.327 * th->hn;
        cl.push_back({"e0_range", th->e0 > 0.0 && th->e0 < cap, false,
                      "E0 = " + fmt(th->e0) + " in (0, 0.327 H(N)) = (0, " + fmt(cap) + ")"});
        if (th->k1) {
            cl.push_back({"k_threshold", inst.k >= *th->k1, false,
                          "k = " + std::to_string(inst.k) + " >= k1(N) = " + std::to_string(*th->k1)});
        } else {
            cl.push_back({"k_threshold", false, false, "k1(N) undefined for this E0"});
        }
        out.thresholds = *th;
    } else {
        cl.push_back({"e0_range", false, false, "H(N) undefined for even N"});
        cl.push_back({"k_threshold", false, false, "k1(N) undefined"});
    }
    const double cube_root = std::cbrt(nu);
    cl.push_back(range_check(inst.argument(), nu, nu + cube_root));
    cl.push_back(residue_check(inst.m, inst.n, level));

    const BesselValue at_nu = bessel_j(inst.k - 1, nu);
    out.j_at_nu = at_nu.value;
    out.j_at_nu_error = at_nu.abs_error;
    if (th) {
        bool have_j = false;
        const double j_x = quantity_lhs_bessel(inst, have_j);
        if (have_j) {
            const double s = eval_multiplicative(static_cast<i64>(inst.m), static_cast<i64>(inst.n), level).value;
            const double lhs = std::abs(s) / static_cast<double>(level) * j_x;
            const double floor_rhs = 0.327 * th->hn / cube_root;
            out.quantities.push_back({"transition_floor", j_x, 0.327 / cube_root, j_x >= 0.327 / cube_root});
            out.quantities.push_back({"main_term_floor", lhs, floor_rhs, lhs >= floor_rhs - 1e-12});
        }
        out.quantities.push_back({"turning_point_ceiling", at_nu.value, 0.543 / cube_root,
                                  at_nu.value <= 0.543 / cube_root});
        const double dom_lhs = 1.632 * std::exp(h0() * nu);
        const double dom_rhs = 0.327 * th->hn - th->e0;
        out.quantities.push_back({"dominance", dom_lhs, dom_rhs, dom_lhs <= dom_rhs});
        if (out.hypotheses_hold()) out.bound = kTwoPi * th->e0 / cube_root;
    }
    return out;
}

BoundResult theorem_bound(const TraceInstance& inst, Mode mode) {
    return mode == Mode::thm12 ? thm12_bound(inst) : thm13_bound(inst);
}

std::vector<u64> find_admissible(u64 level, int k, Mode mode, double d0) {
    if (level == 0 || level % 2 == 0) throw DomainError("find_admissible: N must be odd and positive");
    if (k < 2 || k % 2 != 0) throw DomainError("find_admissible: k must be even and >= 2");
    const double nu = k - 1;
    const double lo = mode == Mode::thm12 ? d0 * nu : nu;
    const double hi = mode == Mode::thm12 ? nu : nu + std::cbrt(nu);
    const double scale = static_cast<double>(level) / (4.0 * kPi);
    const double n_lo = std::max(1.0, std::floor(std::pow(lo * scale, 2)) - 2.0);
    const double n_hi = std::ceil(std::pow(hi * scale, 2)) + 2.0;
    if (n_hi > static_cast<double>(kMaxProduct)) throw DomainError("find_admissible: interval exceeds 2^53");
    if (n_hi - n_lo > 1e7) throw DomainError("find_admissible: interval holds more than 10^7 integers");

    std::vector<u64> out;
    for (u64 n = static_cast<u64>(n_lo); n <= static_cast<u64>(n_hi); ++n) {
        TraceInstance inst;
        inst.n = n;
        inst.level = level;
        inst.k = k;
        const double x = inst.argument();
        if (x < lo || x > hi) continue;
        if (std::gcd(n, level) != 1) continue;
        if (residue_failure(1, n, level)) continue;
        out.push_back(n);
    }
    return out;
}

PeterssonVerification verify(const TraceInstance& inst, Mode mode) {
    validate(inst);
    PeterssonVerification out;
    out.instance = inst;
    out.bound = theorem_bound(inst, mode);
    try {
        out.tail_paper_bound = tail_paper_bound(inst);
    } catch (const DomainError& e) {
        out.tail_paper_note = e.what();
    }

    if (inst.k >= 4) {
        int b_max = 8;
        for (;;) {
            const double x = inst.argument();
            if (x / (b_max + 1) > inst.nu()) {
                if (b_max >= kMaxTruncation) throw DomainError("verify: argument needs b_max beyond 1024");
                b_max *= 2;
                continue;
            }
            SeriesResult s = series_value(inst, b_max);
            const bool enough = !out.bound.bound || s.truncation < 0.01 * *out.bound.bound;
            if (enough) {
                out.series = s;
                break;
            }
            if (b_max >= kMaxTruncation) throw DomainError("verify: truncation still above 1% at b_max = 1024");
            b_max = std::min(2 * b_max, kMaxTruncation);
        }
    }

    if (!out.bound.bound || !out.series) {
        out.verdict = Verdict::hypothesis_failed;
        return out;
    }
    const double size = std::abs(out.series->value);
    const double bound = *out.bound.bound;
    if (size - out.series->error >= bound) {
        out.verdict = Verdict::verified;
    } else if (size + out.series->error < bound) {
        out.verdict = Verdict::violated;
    } else {
        out.verdict = Verdict::inconclusive;
    }
    return out;
}

}  // namespace klb
