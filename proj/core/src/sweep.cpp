#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "klb/bessel.hpp"
#include "klb/harness.hpp"
#include "klb/kloosterman.hpp"

namespace klb {

namespace {

struct Case {
    i64 a = 0;
    i64 b = 0;
    u64 c = 0;
    int k = 0;
    u64 level = 0;
    u64 n = 0;
};

struct Outcome {
    json record;
    std::vector<double> key;
    double violation = 0.0;  // largest amount by which any check failed
    bool violated = false;
    std::optional<double> tightness;
    bool hypothesis_failed = false;
    bool inconclusive = false;
    bool corollary_exceeds = false;

    void require(bool ok, double amount) {
        if (ok) return;
        violated = true;
        violation = std::max(violation, std::max(amount, 0.0));
    }
};

const std::set<std::string> kTopLevelKeys = {"target", "ranges", "samples_per_modulus", "seed", "tolerances",
                                             "parallelism", "mode", "d0", "epsilon", "e0"};

Range parse_range(const std::string& name, const json& v, bool integral) {
    if (!v.is_array() || v.size() != 3 || !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); })) {
        throw DomainError("config: range '" + name + "' must be [start, stop, step]");
    }
    Range r{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
    if (!(r.step > 0)) throw DomainError("config: range '" + name + "' needs a positive step");
    if (integral) {
        for (double x : {r.start, r.stop, r.step}) {
            if (x != std::floor(x)) throw DomainError("config: range '" + name + "' must be integral");
        }
        if (r.start < 1) throw DomainError("config: range '" + name + "' must start at 1 or above");
    }
    return r;
}

double number_field(const json& doc, const char* key, double fallback) {
    if (!doc.contains(key)) return fallback;
    if (!doc[key].is_number()) throw DomainError(std::string("config: '") + key + "' must be a number");
    return doc[key].get<double>();
}

int positive_int_field(const json& doc, const char* key, int fallback) {
    if (!doc.contains(key)) return fallback;
    if (!doc[key].is_number_integer() || doc[key].get<long long>() < 1) {
        throw DomainError(std::string("config: '") + key + "' must be a positive integer");
    }
    return doc[key].get<int>();
}

std::vector<Case> kloosterman_cases(const SweepConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    std::vector<Case> cases;
    for (double cv : cfg.ranges.at("c").values()) {
        const u64 c = static_cast<u64>(cv);
        // raw modulo keeps reports identical across standard libraries
        auto draw_unit = [&] {
            if (c == 1) return static_cast<i64>(rng() % 1000 + 1);
            for (;;) {
                const u64 x = rng() % c;
                if (std::gcd(x, c) == 1) return static_cast<i64>(x);
            }
        };
        for (int s = 0; s < cfg.samples_per_modulus; ++s) {
            Case cs;
            cs.c = c;
            cs.a = draw_unit();
            cs.b = draw_unit();
            cases.push_back(cs);
        }
    }
    return cases;
}

std::vector<Case> bessel_cases(const SweepConfig& cfg) {
    std::vector<Case> cases;
    for (double kv : cfg.ranges.at("k").values()) {
        Case cs;
        cs.k = static_cast<int>(kv);
        cases.push_back(cs);
    }
    return cases;
}

std::vector<Case> petersson_cases(const SweepConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    std::vector<Case> cases;
    for (double lv : cfg.ranges.at("level").values()) {
        for (double kv : cfg.ranges.at("k").values()) {
            const u64 level = static_cast<u64>(lv);
            const int k = static_cast<int>(kv);
            if (level % 2 == 0 || k % 2 != 0) continue;
            std::vector<u64> ns = find_admissible(level, k, cfg.mode, cfg.d0);
            const std::size_t want = static_cast<std::size_t>(cfg.samples_per_modulus);
            if (ns.size() > want) {
                for (std::size_t i = 0; i < want; ++i) std::swap(ns[i], ns[i + rng() % (ns.size() - i)]);
                ns.resize(want);
                std::sort(ns.begin(), ns.end());
            }
            for (u64 n : ns) cases.push_back({0, 0, 0, k, level, n});
        }
    }
    return cases;
}

Outcome run_kloosterman(const Case& cs, const Tolerances& tol) {
    Outcome o;
    o.key = {static_cast<double>(cs.c), static_cast<double>(cs.a), static_cast<double>(cs.b)};
    const KloostermanValue brute = eval_bruteforce(cs.a, cs.b, cs.c);
    const KloostermanValue mult = eval_multiplicative(cs.a, cs.b, cs.c);
    const double s = std::abs(brute.value);
    json& r = o.record;
    r["c"] = cs.c;
    r["a"] = cs.a;
    r["b"] = cs.b;
    r["brute"] = brute.value;
    r["brute_error"] = brute.abs_error;
    r["multiplicative"] = mult.value;
    const double diff = std::abs(mult.value - brute.value);
    r["difference"] = diff;
    o.require(diff <= tol.evaluator, diff - tol.evaluator);

    const double weil = weil_bound(cs.a, cs.b, cs.c);
    r["weil_bound"] = weil;
    o.require(s <= weil + brute.abs_error + tol.weil, s - weil - brute.abs_error - tol.weil);

    r["salie"] = nullptr;
    const Factorization fac = factorize(cs.c);
    if (fac.factors.size() == 1 && fac.factors[0].prime % 2 == 1 && fac.factors[0].exponent >= 2) {
        const u64 p = fac.factors[0].prime;
        if (reduce(cs.a, p) != 0 && reduce(cs.b, p) != 0) {
            const double closed = eval_salie(cs.a, cs.b, p, fac.factors[0].exponent).value;
            r["salie"] = closed;
            const double sd = std::abs(closed - brute.value);
            o.require(sd <= tol.salie, sd - tol.salie);
        }
    }

    r["verdict"] = nullptr;
    if (cs.c % 2 == 1) {
        const BoundCertificate cert = certify_lower_bound(cs.a, cs.b, cs.c);
        r["verdict"] = std::string(to_string(cert.verdict));
        r["theorem_bound"] = cert.theorem_bound;
        r["log_theorem_bound"] = cert.log_theorem_bound;
        r["corollary_bound"] = cert.corollary_bound;
        r["log_corollary_bound"] = cert.log_corollary_bound;
        if (cert.verdict == CertificateVerdict::bounded_below) {
            const double lower = cert.theorem_bound - tol.certificate;
            o.require(s >= lower, lower - s);
            if (s > 0) o.tightness = std::exp(std::log(s) - cert.log_theorem_bound);
        } else {
            o.require(s <= brute.abs_error + tol.certificate, s - brute.abs_error - tol.certificate);
        }
        o.corollary_exceeds = cert.log_corollary_bound > cert.log_theorem_bound + 1e-12;
    }
    r["violated"] = o.violated;
    return o;
}

Outcome run_bessel(const Case& cs, const SweepConfig& cfg) {
    Outcome o;
    o.key = {static_cast<double>(cs.k)};
    const double nu = cs.k - 1;
    const BesselValue j = bessel_j(cs.k - 1, nu);
    const EnvelopePair bracket = jnu_at_nu_bracket(nu, cfg.epsilon);
    json& r = o.record;
    r["k"] = cs.k;
    r["j_at_nu"] = j.value;
    r["abs_error"] = j.abs_error;
    r["method"] = std::string(to_string(j.method));
    if (!bracket.valid) {
        o.hypothesis_failed = true;
        r["reason"] = bracket.reason;
        r["violated"] = false;
        return o;
    }
    const double tol = cfg.tolerances.bracket;
    r["lower"] = bracket.lower;
    r["upper"] = bracket.upper;
    o.require(j.value >= bracket.lower - tol, bracket.lower - tol - j.value);
    o.require(j.value <= bracket.upper + tol, j.value - bracket.upper - tol);
    o.require(j.value > 0, -j.value);
    o.tightness = j.value / bracket.lower;
    r["violated"] = o.violated;
    return o;
}

Outcome run_petersson(const Case& cs, const SweepConfig& cfg) {
    Outcome o;
    o.key = {static_cast<double>(cs.level), static_cast<double>(cs.k), static_cast<double>(cs.n)};
    TraceInstance inst;
    inst.n = cs.n;
    inst.level = cs.level;
    inst.k = cs.k;
    inst.d0 = cfg.d0;
    inst.e0 = cfg.e0;
    inst.epsilon = cfg.epsilon;
    const PeterssonVerification v = verify(inst, cfg.mode);
    json& r = o.record;
    r["level"] = cs.level;
    r["k"] = cs.k;
    r["n"] = cs.n;
    r["verdict"] = std::string(to_string(v.verdict));
    r["series_value"] = v.series ? json(v.series->value) : json(nullptr);
    r["series_error"] = v.series ? json(v.series->error) : json(nullptr);
    r["main_term"] = v.series ? json(v.series->main_term) : json(nullptr);
    r["tail_numeric_bound"] = v.series ? json(v.series->tail_numeric_bound) : json(nullptr);
    r["tail_paper_bound"] = v.tail_paper_bound ? json(*v.tail_paper_bound) : json(nullptr);
    r["theorem_bound"] = v.bound.bound ? json(*v.bound.bound) : json(nullptr);
    r["b_max"] = v.series ? v.series->b_max : 0;
    const Check* failed = v.bound.first_failure();
    r["failed_check"] = failed ? json(failed->name + ": " + failed->detail) : json(nullptr);

    o.hypothesis_failed = v.verdict == Verdict::hypothesis_failed;
    o.inconclusive = v.verdict == Verdict::inconclusive;
    if (v.series && v.bound.bound) {
        const double size = std::abs(v.series->value);
        const double lower = *v.bound.bound - cfg.tolerances.bound;
        o.require(size + v.series->error >= lower, lower - size - v.series->error);
        o.tightness = size / *v.bound.bound;
    }
    if (v.series && v.tail_paper_bound) {
        const double cap = *v.tail_paper_bound + cfg.tolerances.tail;
        o.require(v.series->tail_numeric_bound <= cap, v.series->tail_numeric_bound - cap);
    }
    r["violated"] = o.violated;
    return o;
}

}  // namespace

std::string_view to_string(SweepTarget t) {
    switch (t) {
        case SweepTarget::kloosterman: return "kloosterman";
        case SweepTarget::bessel: return "bessel";
        case SweepTarget::petersson: return "petersson";
    }
    return "unknown";
}

std::vector<double> Range::values() const {
    std::vector<double> out;
    for (long i = 0;; ++i) {
        const double v = start + static_cast<double>(i) * step;
        if (v > stop + 1e-9 * step) break;
        out.push_back(v);
    }
    return out;
}

SweepConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw DomainError("config: top level must be an object");
    for (const auto& [key, _] : doc.items()) {
        if (!kTopLevelKeys.count(key)) throw DomainError("config: unknown key '" + key + "'");
    }
    SweepConfig cfg;
    if (!doc.contains("target") || !doc["target"].is_string()) throw DomainError("config: 'target' is required");
    const std::string target = doc["target"];
    std::vector<std::string> needed;
    if (target == "kloosterman") {
        cfg.target = SweepTarget::kloosterman;
        needed = {"c"};
    } else if (target == "bessel") {
        cfg.target = SweepTarget::bessel;
        needed = {"k"};
    } else if (target == "petersson") {
        cfg.target = SweepTarget::petersson;
        needed = {"level", "k"};
    } else {
        throw DomainError("config: target must be kloosterman, bessel or petersson");
    }

    if (!doc.contains("ranges") || !doc["ranges"].is_object()) throw DomainError("config: 'ranges' is required");
    for (const auto& [name, v] : doc["ranges"].items()) {
        if (std::find(needed.begin(), needed.end(), name) == needed.end()) {
            throw DomainError("config: range '" + name + "' does not apply to target " + target);
        }
        cfg.ranges[name] = parse_range(name, v, true);
    }
    for (const auto& name : needed) {
        if (!cfg.ranges.count(name)) throw DomainError("config: missing range '" + name + "'");
    }

    cfg.samples_per_modulus = positive_int_field(doc, "samples_per_modulus", 1);
    cfg.parallelism = positive_int_field(doc, "parallelism", 1);
    if (doc.contains("seed")) {
        const json& s = doc["seed"];
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
            throw DomainError("config: 'seed' must be a nonnegative 64-bit integer");
        }
        cfg.seed = s.get<u64>();
    }
    if (doc.contains("tolerances")) {
        const json& t = doc["tolerances"];
        if (!t.is_object()) throw DomainError("config: 'tolerances' must be an object");
        std::map<std::string, double*> slots = {
            {"evaluator", &cfg.tolerances.evaluator}, {"salie", &cfg.tolerances.salie},
            {"certificate", &cfg.tolerances.certificate}, {"weil", &cfg.tolerances.weil},
            {"bracket", &cfg.tolerances.bracket}, {"tail", &cfg.tolerances.tail},
            {"bound", &cfg.tolerances.bound}};
        for (const auto& [key, v] : t.items()) {
            auto it = slots.find(key);
            if (it == slots.end()) throw DomainError("config: unknown tolerance '" + key + "'");
            if (!v.is_number()) throw DomainError("config: tolerance '" + key + "' must be a number");
            *it->second = v.get<double>();
        }
    }
    if (doc.contains("mode")) {
        if (!doc["mode"].is_string()) throw DomainError("config: 'mode' must be a string");
        const std::string mode = doc["mode"];
        if (mode != "thm12" && mode != "thm13") throw DomainError("config: mode '" + mode + "' must be thm12 or thm13");
        cfg.mode = parse_mode(mode);
    }
    cfg.d0 = number_field(doc, "d0", kDefaultD0);
    cfg.epsilon = number_field(doc, "epsilon", kDefaultEpsilon);
    if (doc.contains("e0") && !doc["e0"].is_null()) cfg.e0 = number_field(doc, "e0", 0.0);
    return cfg;
}

SweepConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("config: cannot open " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DomainError(std::string("config: ") + e.what());
    }
    return parse_config(doc);
}

json config_to_json(const SweepConfig& cfg) {
    json j;
    j["target"] = std::string(to_string(cfg.target));
    json ranges = json::object();
    for (const auto& [name, r] : cfg.ranges) ranges[name] = {r.start, r.stop, r.step};
    j["ranges"] = ranges;
    j["samples_per_modulus"] = cfg.samples_per_modulus;
    j["seed"] = cfg.seed;
    const Tolerances& t = cfg.tolerances;
    j["tolerances"] = {{"evaluator", t.evaluator}, {"salie", t.salie}, {"certificate", t.certificate},
                       {"weil", t.weil}, {"bracket", t.bracket}, {"tail", t.tail}, {"bound", t.bound}};
    j["mode"] = std::string(to_string(cfg.mode));
    j["d0"] = cfg.d0;
    j["epsilon"] = cfg.epsilon;
    j["e0"] = cfg.e0 ? json(*cfg.e0) : json(nullptr);
    return j;
}

int effective_parallelism(const SweepConfig& cfg) {
    if (const char* env = std::getenv("KLB_PARALLELISM")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 1024L));
    }
    return cfg.parallelism;
}

int SweepReport::exit_code() const {
    if (summary.violations > 0) return 2;
    if (summary.cases == 0) return 1;
    return 0;
}

SweepReport run_sweep(const SweepConfig& cfg) {
    const auto started = std::chrono::steady_clock::now();
    std::vector<Case> cases;
    switch (cfg.target) {
        case SweepTarget::kloosterman: cases = kloosterman_cases(cfg); break;
        case SweepTarget::bessel: cases = bessel_cases(cfg); break;
        case SweepTarget::petersson: cases = petersson_cases(cfg); break;
    }

    std::vector<Outcome> outcomes(cases.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_lock;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cases.size()) return;
            try {
                switch (cfg.target) {
                    case SweepTarget::kloosterman: outcomes[i] = run_kloosterman(cases[i], cfg.tolerances); break;
                    case SweepTarget::bessel: outcomes[i] = run_bessel(cases[i], cfg); break;
                    case SweepTarget::petersson: outcomes[i] = run_petersson(cases[i], cfg); break;
                }
            } catch (...) {
                std::lock_guard<std::mutex> hold(failure_lock);
                if (!failure) failure = std::current_exception();
                next = cases.size();
            }
        }
    };
    const int threads = std::max(1, std::min<int>(effective_parallelism(cfg), static_cast<int>(cases.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    std::stable_sort(outcomes.begin(), outcomes.end(),
                     [](const Outcome& x, const Outcome& y) { return x.key < y.key; });

    SweepReport report;
    report.config = cfg;
    SweepSummary& s = report.summary;
    s.cases = outcomes.size();
    for (auto& o : outcomes) {
        if (o.violated) {
            ++s.violations;
            s.max_violation = std::max(s.max_violation, o.violation);
        }
        if (o.tightness) s.min_tightness = s.min_tightness ? std::min(*s.min_tightness, *o.tightness) : *o.tightness;
        s.hypothesis_failures += o.hypothesis_failed;
        s.inconclusive += o.inconclusive;
        s.corollary_exceeds_theorem += o.corollary_exceeds;
        report.records.push_back(std::move(o.record));
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

json report_to_json(const SweepReport& report) {
    const SweepSummary& s = report.summary;
    json summary = {{"cases", s.cases},
                    {"violations", s.violations},
                    {"max_violation", s.max_violation},
                    {"min_tightness", s.min_tightness ? json(*s.min_tightness) : json(nullptr)},
                    {"hypothesis_failures", s.hypothesis_failures},
                    {"inconclusive", s.inconclusive},
                    {"corollary_exceeds_theorem", s.corollary_exceeds_theorem}};
    return {{"config", config_to_json(report.config)}, {"records", report.records}, {"summary", summary}};
}

namespace {

void flatten(const json& v, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
    if (v.is_object()) {
        for (const auto& [key, child] : v.items()) flatten(child, prefix.empty() ? key : prefix + "." + key, out);
    } else if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) flatten(v[i], prefix + "." + std::to_string(i), out);
    } else if (v.is_null()) {
        out.emplace_back(prefix, "");
    } else if (v.is_string()) {
        out.emplace_back(prefix, v.get<std::string>());
    } else {
        out.emplace_back(prefix, v.dump());
    }
}

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + "\"";
}

}  // namespace

std::string to_csv(const std::vector<json>& rows) {
    std::vector<std::string> header;
    std::vector<std::map<std::string, std::string>> cells;
    for (const auto& row : rows) {
        std::vector<std::pair<std::string, std::string>> flat;
        flatten(row, "", flat);
        std::map<std::string, std::string> m;
        for (auto& [k, v] : flat) {
            if (std::find(header.begin(), header.end(), k) == header.end()) header.push_back(k);
            m[k] = v;
        }
        cells.push_back(std::move(m));
    }
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << csv_cell(header[i]);
    os << "\n";
    for (const auto& m : cells) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            auto it = m.find(header[i]);
            os << (i ? "," : "") << (it == m.end() ? "" : csv_cell(it->second));
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace klb
