#include <CLI11.hpp>
#include <algorithm>
#include <ostream>

#include "klb/bessel.hpp"
#include "klb/harness.hpp"
#include "klb/kloosterman.hpp"

namespace klb {

namespace {

// Exit status: 0 ok / verified, 1 hypothesis failed or empty, 2 violation,
// internal error or bad usage.
constexpr int kOk = 0;
constexpr int kHypothesis = 1;
constexpr int kViolation = 2;

json value_json(const KloostermanValue& v) {
    return {{"a", v.a},
            {"b", v.b},
            {"c", v.c},
            {"value", v.value},
            {"method", std::string(to_string(v.method))},
            {"abs_error", v.abs_error},
            {"imag_residue", v.imag_residue}};
}

json certificate_json(const BoundCertificate& cert, double value) {
    json primes = json::array();
    for (const auto& r : cert.hypotheses.powerful_primes) {
        primes.push_back({{"prime", r.prime}, {"exponent", r.exponent}, {"residue", r.residue}});
    }
    return {{"a", cert.a},
            {"b", cert.b},
            {"c", cert.c},
            {"value", value},
            {"verdict", std::string(to_string(cert.verdict))},
            {"d", cert.split.d},
            {"f", cert.split.f},
            {"theorem_bound", cert.theorem_bound},
            {"log_theorem_bound", cert.log_theorem_bound},
            {"corollary_bound", cert.corollary_bound},
            {"log_corollary_bound", cert.log_corollary_bound},
            {"powerful_primes", primes}};
}

json thresholds_json(const Thresholds& t) {
    return {{"level", t.level},
            {"D0", t.d0},
            {"E0", t.e0},
            {"H0", t.h0},
            {"A0", t.a0},
            {"log_A0", t.log_a0},
            {"HN", t.hn},
            {"log_HN", t.log_hn},
            {"GN", t.gn},
            {"log_GN", t.log_gn},
            {"k0", t.k0},
            {"k0_base", t.k0_base},
            {"k1", t.k1 ? json(*t.k1) : json(nullptr)}};
}

json verification_json(const PeterssonVerification& v) {
    const TraceInstance& i = v.instance;
    json checks = json::array();
    for (const auto& c : v.bound.checklist) {
        checks.push_back({{"name", c.name}, {"passed", c.passed}, {"informational", c.informational},
                          {"detail", c.detail}});
    }
    json quantities = json::array();
    for (const auto& q : v.bound.quantities) {
        quantities.push_back({{"name", q.name}, {"lhs", q.lhs}, {"reference", q.reference}, {"holds", q.holds}});
    }
    auto opt = [](const std::optional<double>& x) { return x ? json(*x) : json(nullptr); };
    json out = {{"m", i.m},
                {"n", i.n},
                {"level", i.level},
                {"k", i.k},
                {"d0", i.d0},
                {"e0", v.bound.mode == Mode::thm13 ? json(v.bound.thresholds.e0) : opt(i.e0)},
                {"epsilon", i.epsilon},
                {"mode", std::string(to_string(v.bound.mode))},
                {"verdict", std::string(to_string(v.verdict))},
                {"theorem_bound", opt(v.bound.bound)},
                {"epsilon_bound", opt(v.bound.epsilon_bound)},
                {"explicit_bound", opt(v.bound.explicit_bound)},
                {"j_at_nu", v.bound.j_at_nu},
                {"tail_paper_bound", opt(v.tail_paper_bound)},
                {"hypotheses", checks},
                {"quantities", quantities}};
    if (!v.tail_paper_note.empty()) out["tail_paper_note"] = v.tail_paper_note;
    if (v.series) {
        out["series_value"] = v.series->value;
        out["series_error"] = v.series->error;
        out["main_term"] = v.series->main_term;
        out["tail_numeric_bound"] = v.series->tail_numeric_bound;
        out["truncation"] = v.series->truncation;
        out["b_max"] = v.series->b_max;
    } else {
        out["series_value"] = nullptr;
    }
    return out;
}

struct Emitter {
    std::ostream& out;
    std::string format = "json";

    void object(const json& j) const {
        if (format == "csv") {
            out << to_csv({j});
        } else {
            out << j.dump(2) << "\n";
        }
    }
    void rows(const json& whole, const std::vector<json>& rs) const {
        if (format == "csv") {
            out << to_csv(rs);
        } else {
            out << whole.dump(2) << "\n";
        }
    }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Kloosterman sums, Bessel envelopes and Petersson lower bounds", "klb"};
    app.require_subcommand(1);
    app.fallthrough();
    Emitter emit{out};
    app.add_option("--format", emit.format, "Output format")->check(CLI::IsMember({"json", "csv"}));

    i64 a = 0, b = 0;
    u64 c = 1;
    std::string method = "brute";
    auto* eval = app.add_subcommand("eval", "Evaluate S(a,b;c)");
    eval->add_option("a", a)->required();
    eval->add_option("b", b)->required();
    eval->add_option("c", c)->required()->check(CLI::PositiveNumber);
    eval->add_option("--method", method)->check(CLI::IsMember({"brute", "salie", "mult"}));

    auto* bound = app.add_subcommand("bound", "Lower-bound certificate for S(a,b;c)");
    bound->add_option("a", a)->required();
    bound->add_option("b", b)->required();
    bound->add_option("c", c)->required()->check(CLI::PositiveNumber);

    std::string config_path;
    auto* sweep = app.add_subcommand("sweep", "Run a configured sweep");
    sweep->add_option("--config", config_path)->required();

    int order = 0;
    double x = 0.0;
    auto* bessel = app.add_subcommand("bessel", "Bessel functions");
    bessel->require_subcommand(1);
    auto* bessel_jn = bessel->add_subcommand("j", "J_order(x)");
    bessel_jn->add_option("order", order)->required();
    bessel_jn->add_option("x", x)->required();

    TraceInstance inst;
    std::string mode_name;
    std::optional<double> e0;
    auto* pet = app.add_subcommand("petersson", "Kloosterman-Bessel series lower bounds");
    pet->require_subcommand(1);
    auto* verify_cmd = pet->add_subcommand("verify", "Verify a lower bound on one instance");
    verify_cmd->add_option("--m", inst.m)->required();
    verify_cmd->add_option("--n", inst.n)->required();
    verify_cmd->add_option("--level", inst.level)->required();
    verify_cmd->add_option("--k", inst.k)->required();
    verify_cmd->add_option("--mode", mode_name)->required()->check(CLI::IsMember({"thm12", "thm13"}));
    verify_cmd->add_option("--d0", inst.d0);
    verify_cmd->add_option("--e0", e0);
    verify_cmd->add_option("--eps", inst.epsilon);

    auto* find_cmd = pet->add_subcommand("find", "Admissible n with m = 1");
    find_cmd->add_option("--level", inst.level)->required();
    find_cmd->add_option("--k", inst.k)->required();
    find_cmd->add_option("--mode", mode_name)->required()->check(CLI::IsMember({"thm12", "thm13"}));
    find_cmd->add_option("--d0", inst.d0);

    auto* thr_cmd = pet->add_subcommand("thresholds", "H(N), G(N), k0(N), k1(N)");
    thr_cmd->add_option("--level", inst.level)->required();
    thr_cmd->add_option("--d0", inst.d0);
    thr_cmd->add_option("--e0", e0);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kViolation;
    }

    try {
        if (*eval) {
            KloostermanValue v;
            if (method == "brute") {
                v = eval_bruteforce(a, b, c);
            } else if (method == "mult") {
                v = eval_multiplicative(a, b, c);
            } else {
                const Factorization fac = factorize(c);
                if (fac.factors.size() != 1) throw DomainError("salie: c must be a prime power p^beta");
                v = eval_salie(a, b, fac.factors[0].prime, fac.factors[0].exponent);
            }
            emit.object(value_json(v));
            return kOk;
        }
        if (*bound) {
            if (c % 2 == 0 || (c > 1 && (std::gcd(reduce(a, c), c) != 1 || std::gcd(reduce(b, c), c) != 1))) {
                emit.object({{"a", a}, {"b", b}, {"c", c}, {"verdict", "hypothesis_failed"},
                             {"reason", "requires c odd and gcd(ab, c) = 1"}});
                return kHypothesis;
            }
            const BoundCertificate cert = certify_lower_bound(a, b, c);
            emit.object(certificate_json(cert, eval_multiplicative(a, b, c).value));
            return kOk;
        }
        if (*sweep) {
            const SweepConfig cfg = load_config(config_path);
            const SweepReport report = run_sweep(cfg);
            emit.rows(report_to_json(report), report.records);
            err << "wall_seconds " << report.wall_seconds << "\n";
            return report.exit_code();
        }
        if (*bessel_jn) {
            const BesselValue v = bessel_j(order, x);
            emit.object({{"order", order},
                         {"x", x},
                         {"value", v.value},
                         {"abs_error", v.abs_error},
                         {"method", std::string(to_string(v.method))},
                         {"working_digits", v.working_digits}});
            return kOk;
        }
        if (*verify_cmd) {
            inst.e0 = e0;
            const PeterssonVerification v = verify(inst, parse_mode(mode_name));
            emit.object(verification_json(v));
            switch (v.verdict) {
                case Verdict::verified: return kOk;
                case Verdict::violated: return kViolation;
                default: return kHypothesis;
            }
        }
        if (*find_cmd) {
            const Mode mode = parse_mode(mode_name);
            const std::vector<u64> ns = find_admissible(inst.level, inst.k, mode, inst.d0);
            std::vector<json> rows;
            for (u64 n : ns) rows.push_back({{"n", n}});
            emit.rows({{"level", inst.level}, {"k", inst.k}, {"mode", mode_name}, {"d0", inst.d0},
                       {"count", ns.size()}, {"n", ns}},
                      rows);
            return ns.empty() ? kHypothesis : kOk;
        }
        if (*thr_cmd) {
            emit.object(thresholds_json(thresholds(inst.level, inst.d0, e0)));
            return kOk;
        }
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kViolation;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kViolation;
    }
    err << app.help();
    return kViolation;
}

}  // namespace klb
