// Acceptance checks 1-11. Prints one PASS/FAIL line per criterion; exit 0
// only when every selected criterion passes.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include "klb/bessel.hpp"
#include "klb/harness.hpp"
#include "klb/kloosterman.hpp"
#include "klb/petersson.hpp"

using namespace klb;

namespace {

struct Outcome {
    bool passed = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x) {
    std::ostringstream s;
    s.precision(6);
    s << x;
    return s.str();
}

i64 draw_unit(std::mt19937_64& rng, u64 c) {
    if (c == 1) return 1 + static_cast<i64>(rng() % 1000);
    for (;;) {
        const u64 x = 1 + rng() % (c - 1);
        if (std::gcd(x, c) == 1) return static_cast<i64>(x);
    }
}

TraceInstance instance(u64 n, u64 level, int k) {
    TraceInstance t;
    t.n = n;
    t.level = level;
    t.k = k;
    return t;
}

// 1 and 3 share one pass over odd c <= 2000.
struct KloostermanSweep {
    std::size_t cases = 0;
    double max_difference = 0.0;
    double seconds = 0.0;
    std::size_t bounded = 0;
    std::size_t unsound = 0;
    std::size_t dominance_failures = 0;
    u64 first_dominance_failure = 0;
    double worst_ratio = 0.0;  // corollary / theorem
};

const KloostermanSweep& kloosterman_sweep() {
    static const KloostermanSweep sweep = [] {
        KloostermanSweep s;
        std::mt19937_64 rng(20240601);
        const auto t0 = Clock::now();
        for (u64 c = 1; c <= 2000; c += 2) {
            for (int i = 0; i < 50; ++i) {
                const i64 a = draw_unit(rng, c), b = draw_unit(rng, c);
                const double brute = eval_bruteforce(a, b, c).value;
                const double mult = eval_multiplicative(a, b, c).value;
                s.max_difference = std::max(s.max_difference, std::abs(brute - mult));
                ++s.cases;

                const BoundCertificate cert = certify_lower_bound(a, b, c);
                if (cert.verdict != CertificateVerdict::bounded_below) continue;
                ++s.bounded;
                if (std::abs(brute) < cert.theorem_bound - 1e-6) ++s.unsound;
                const double log_ratio = cert.log_corollary_bound - cert.log_theorem_bound;
                s.worst_ratio = std::max(s.worst_ratio, std::exp(log_ratio));
                if (log_ratio > 1e-12) {
                    if (s.dominance_failures++ == 0) s.first_dominance_failure = c;
                }
            }
        }
        s.seconds = seconds_since(t0);
        return s;
    }();
    return sweep;
}

Outcome criterion1() {
    const auto& s = kloosterman_sweep();
    Outcome o;
    o.passed = s.max_difference <= 1e-6 && s.seconds < 120;
    o.detail = std::to_string(s.cases) + " sums, max |mult - brute| = " + fmt(s.max_difference) + ", " +
               fmt(s.seconds) + " s (includes certificates)";
    return o;
}

Outcome criterion2() {
    std::mt19937_64 rng(7);
    const auto t0 = Clock::now();
    std::size_t cases = 0, zeros = 0, bad_zero = 0;
    double worst = 0.0;
    for (u64 p = 3; p * p <= 10000; p += 2) {
        if (!is_prime(p)) continue;
        for (int beta = 2; checked_pow(p, beta) <= 10000; ++beta) {
            const u64 q = checked_pow(p, beta);
            for (int i = 0; i < 20; ++i) {
                const i64 a = draw_unit(rng, q), b = draw_unit(rng, q);
                const double closed = eval_salie(a, b, p, beta).value;
                const double brute = eval_bruteforce(a, b, q).value;
                worst = std::max(worst, std::abs(closed - brute));
                if (jacobi_symbol(a * b % static_cast<i64>(p), p) == -1) {
                    ++zeros;
                    if (closed != 0.0) ++bad_zero;
                }
                ++cases;
            }
        }
    }
    const double secs = seconds_since(t0);
    Outcome o;
    o.passed = worst <= 1e-6 && bad_zero == 0 && secs < 60;
    o.detail = std::to_string(cases) + " samples (" + std::to_string(zeros) + " non-residue, " +
               std::to_string(bad_zero) + " not exactly 0), max diff " + fmt(worst) + ", " + fmt(secs) + " s";
    return o;
}

Outcome criterion3() {
    const auto& s = kloosterman_sweep();
    Outcome o;
    o.passed = s.unsound == 0 && s.dominance_failures == 0;
    o.detail = std::to_string(s.bounded) + " bounded_below certificates, " + std::to_string(s.unsound) +
               " below theorem_bound; corollary_bound > theorem_bound in " + std::to_string(s.dominance_failures) +
               " (first at c = " + std::to_string(s.first_dominance_failure) + ", worst ratio " +
               fmt(s.worst_ratio) + ")";
    return o;
}

Outcome criterion4() {
    std::mt19937_64 rng(4);
    std::size_t cases = 0, bad = 0;
    double worst = 0.0;
    for (u64 c : {3u, 5u, 7u, 11u, 13u, 15u, 21u}) {
        for (int i = 0; i < 10; ++i) {
            const i64 a = draw_unit(rng, c), b = draw_unit(rng, c);
            const NormProduct n = norm_product(a, b, c);
            worst = std::max(worst, n.distance);
            if (n.nearest == 0 || n.distance > 1e-6) ++bad;
            ++cases;
        }
    }
    return {bad == 0, std::to_string(cases) + " norms, max distance to a nonzero integer " + fmt(worst)};
}

Outcome criterion5() {
    const auto t0 = Clock::now();
    const double c0 = turning_point_constant();
    std::size_t outside = 0;
    for (int k = 22; k <= 500; k += 2) {
        const double nu = k - 1;
        const BesselValue j = bessel_j(k - 1, nu);
        const double lower = (0.4473 - 0.4470) / std::cbrt(nu);
        const double upper = 0.4473 / std::cbrt(nu) + 3 / nu;
        if (j.value - j.abs_error < lower || j.value + j.abs_error > upper) ++outside;
    }
    const double secs = seconds_since(t0);
    const bool digits = std::abs(c0 - 0.4473) < 5e-5;
    return {outside == 0 && digits && secs < 60,
            "240 weights, " + std::to_string(outside) + " outside the bracket; C0 = " + fmt(c0) + ", " + fmt(secs) +
                " s"};
}

Outcome criterion6() {
    struct Pick {
        u64 level;
        int k;
    };
    std::size_t cases = 0, bad = 0;
    double worst = 0.0;  // numeric / analytic
    for (Pick pk : {Pick{1, 22}, Pick{1, 64}, Pick{5, 50}, Pick{3, 100}, Pick{15, 238}}) {
        const double nu = pk.k - 1;
        for (double r : {0.89, 0.95, 1.0, 1.05, 1.11}) {
            if (cases >= 20) break;
            const double root = r * nu * static_cast<double>(pk.level) / (4 * M_PI);
            u64 n = static_cast<u64>(std::llround(root * root));
            while (std::gcd(n, pk.level) != 1) ++n;
            const TraceInstance inst = instance(n, pk.level, pk.k);
            if (inst.ratio() < 8.0 / 9 || inst.ratio() > 10.0 / 9) continue;
            const PeterssonVerification v = verify(inst, Mode::thm12);
            if (!v.series || !v.tail_paper_bound) continue;
            worst = std::max(worst, v.series->tail_numeric_bound / *v.tail_paper_bound);
            if (v.series->tail_numeric_bound > *v.tail_paper_bound) ++bad;
            ++cases;
        }
    }
    return {cases >= 20 && bad == 0, std::to_string(cases) + " instances, " + std::to_string(bad) +
                                         " above the analytic tail bound; max numeric/analytic = " + fmt(worst)};
}

// 7 and 8 share the instances.
struct Thm12Run {
    int k0 = 0;
    std::size_t admissible = 0;
    std::vector<PeterssonVerification> checked;
    double seconds = 0.0;
};

const Thm12Run& thm12_run() {
    static const Thm12Run run = [] {
        Thm12Run r;
        const auto t0 = Clock::now();
        r.k0 = thresholds(15, 0.999).k0;
        const int k = r.k0 + r.k0 % 2;
        const auto ns = find_admissible(15, k, Mode::thm12, 0.999);
        r.admissible = ns.size();
        for (std::size_t i = 0; i < ns.size() && r.checked.size() < 8; i += std::max<std::size_t>(1, ns.size() / 8)) {
            r.checked.push_back(verify(instance(ns[i], 15, k), Mode::thm12));
        }
        r.seconds = seconds_since(t0);
        return r;
    }();
    return run;
}

Outcome criterion7() {
    const auto& r = thm12_run();
    std::size_t verified = 0;
    double margin = INFINITY;
    for (const auto& v : r.checked) {
        if (v.verdict != Verdict::verified) continue;
        ++verified;
        margin = std::min(margin, (std::abs(v.series->value) - v.series->error) / *v.bound.bound);
    }
    return {r.k0 == 238 && r.admissible > 0 && verified >= 5 && verified == r.checked.size() && r.seconds < 300,
            "k0(15) = " + std::to_string(r.k0) + ", " + std::to_string(r.admissible) + " admissible n, " +
                std::to_string(verified) + "/" + std::to_string(r.checked.size()) +
                " verified, min (|series| - error)/bound = " + fmt(margin) + ", " + fmt(r.seconds) + " s"};
}

Outcome criterion8() {
    const auto& r = thm12_run();
    std::size_t ok = 0;
    for (const auto& v : r.checked) {
        if (!v.bound.bound || !v.bound.explicit_bound || !v.series) continue;
        const double e = *v.bound.explicit_bound;
        if (*v.bound.bound >= e && std::abs(v.series->value) - v.series->error >= e) ++ok;
    }
    return {!r.checked.empty() && ok == r.checked.size(),
            std::to_string(ok) + "/" + std::to_string(r.checked.size()) +
                " instances above 0.002397 pi (k-1)^{-1/3} e^{H0 (k-1)}"};
}

Outcome criterion9() {
    const auto t0 = Clock::now();
    std::string detail;
    bool passed = true;
    for (u64 level : {15u, 3u}) {
        const Thresholds th = thresholds(level);
        if (!th.k1 || *th.k1 > 400) {
            passed = false;
            detail += "N = " + std::to_string(level) + ": k1 above 400; ";
            continue;
        }
        int k = std::max(180, *th.k1);
        k += k % 2;
        const auto ns = find_admissible(level, k, Mode::thm13);
        std::size_t verified = 0, tried = 0;
        for (std::size_t i = 0; i < ns.size() && tried < 4; i += std::max<std::size_t>(1, ns.size() / 4), ++tried) {
            if (verify(instance(ns[i], level, k), Mode::thm13).verdict == Verdict::verified) ++verified;
        }
        passed = passed && verified >= 3 && verified == tried;
        detail += "N = " + std::to_string(level) + ", k1 = " + std::to_string(*th.k1) + ", k = " + std::to_string(k) +
                  ": " + std::to_string(verified) + "/" + std::to_string(tried) + " verified; ";
    }
    const double secs = seconds_since(t0);
    return {passed && secs < 300, detail + fmt(secs) + " s"};
}

Outcome criterion10() {
    std::size_t cases = 0, outside = 0, below = 0;
    for (int k : {180, 240, 400}) {
        const double nu = k - 1;
        const double floor = 0.327 / std::cbrt(nu);
        for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            const BesselValue j = bessel_j(k - 1, nu + t * std::cbrt(nu));
            const EnvelopePair br = transition_value(k, t);
            if (j.value - j.abs_error < br.lower || j.value + j.abs_error > br.upper) ++outside;
            if (j.value - j.abs_error < floor || br.lower < floor) ++below;
            ++cases;
        }
    }
    return {outside == 0 && below == 0, std::to_string(cases) + " points, " + std::to_string(outside) +
                                            " outside the expansion bracket, " + std::to_string(below) +
                                            " below 0.327/(k-1)^{1/3}"};
}

Outcome criterion11() {
    const auto dir = std::filesystem::temp_directory_path();
    auto write = [&](const std::string& name, const json& doc) {
        const auto path = dir / ("klb_acceptance_" + name + ".json");
        std::ofstream(path) << doc.dump(2);
        return path.string();
    };
    auto run = [](const std::string& path, std::string& out) {
        std::ostringstream o, e;
        const int code = run_cli({"sweep", "--config", path}, o, e);
        out = o.str();
        return code;
    };
    const json base = {{"target", "kloosterman"},
                       {"ranges", {{"c", {1, 301, 2}}}},
                       {"samples_per_modulus", 5},
                       {"seed", 99},
                       {"parallelism", 4}};
    const std::string clean = write("clean", base);
    std::string first, second, third, scratch;
    const int c1 = run(clean, first);
    const int c2 = run(clean, second);
    json serial = base;
    serial["parallelism"] = 1;
    run(write("serial", serial), third);
    const bool identical = c1 == 0 && c2 == 0 && first == second &&
                           json::parse(first)["records"] == json::parse(third)["records"];

    json injected = base;
    injected["tolerances"] = {{"certificate", -1}};
    const int c_injected = run(write("injected", injected), scratch);
    json bessel = {{"target", "bessel"}, {"ranges", {{"k", {22, 40, 2}}}}, {"tolerances", {{"bracket", -1}}}};
    const int c_bessel = run(write("bessel", bessel), scratch);
    json empty = base;
    empty["ranges"]["c"] = {5, 3, 2};
    const int c_empty = run(write("empty", empty), scratch);

    return {identical && c_injected == 2 && c_bessel == 2 && c_empty == 1,
            std::string("repeat runs ") + (identical ? "byte-identical" : "differ") + "; exit codes clean " +
                std::to_string(c1) + ", injected " + std::to_string(c_injected) + "/" + std::to_string(c_bessel) +
                ", empty " + std::to_string(c_empty)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria 1-11"};
    std::vector<int> selected;
    app.add_option("--criterion", selected, "Run only these criteria")->check(CLI::Range(1, 11));
    CLI11_PARSE(app, argc, argv);
    if (selected.empty()) {
        for (int i = 1; i <= 11; ++i) selected.push_back(i);
    }

    const std::vector<std::function<Outcome()>> checks = {criterion1, criterion2, criterion3, criterion4,
                                                          criterion5, criterion6, criterion7, criterion8,
                                                          criterion9, criterion10, criterion11};
    bool all = true;
    for (int i : selected) {
        Outcome o;
        try {
            o = checks[i - 1]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all = all && o.passed;
        std::cout << "criterion " << i << ": " << (o.passed ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
    }
    return all ? 0 : 1;
}
