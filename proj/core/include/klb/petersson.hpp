#pragma once

// The Kloosterman-Bessel side of the Petersson trace formula,
//   2 pi i^k sum_{b >= 1} S(m,n;bN)/(bN) J_{k-1}(4 pi sqrt(mn)/(bN)),
// with certified truncation, and explicit lower bounds for its size when
// 4 pi sqrt(mn)/N sits just below or just above the turning point k-1.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "klb/arith.hpp"

namespace klb {

inline constexpr double kDefaultD0 = 0.999;
inline constexpr double kDefaultEpsilon = 0.447;
inline constexpr int kMaxTruncation = 1024;

/// H0 = 1 - 4/9 - log(9/5).
double h0();

enum class Mode { thm12, thm13 };
std::string_view to_string(Mode m);
Mode parse_mode(std::string_view s);

struct TraceInstance {
    u64 m = 1;
    u64 n = 1;
    u64 level = 1;  // N
    int k = 2;
    double d0 = kDefaultD0;
    std::optional<double> e0;  // default 0.3 * 0.327 * H(N)
    double epsilon = kDefaultEpsilon;

    double nu() const { return k - 1; }
    /// 4 pi sqrt(mn) / N
    double argument() const;
    /// argument() / (k - 1)
    double ratio() const;
};

/// Structural checks only (k even and >= 2, positive m, n, N, mn <= 2^53,
/// epsilon in (0, 0.4473)). The theorem hypotheses are reported by the
/// bound functions instead.
void validate(const TraceInstance& inst);

struct Thresholds {
    u64 level = 1;
    double d0 = kDefaultD0;
    double e0 = 0.0;
    double h0 = 0.0;
    double a0 = 0.0;
    double log_a0 = 0.0;
    double hn = 0.0;
    double log_hn = 0.0;
    double gn = 0.0;
    double log_gn = 0.0;
    int k0 = 0;       // 2 + floor((log 7 - log H(N)) / log A0)
    int k0_base = 0;  // least even k >= 22 with A0^{k-1} >= 7
    std::optional<int> k1;  // undefined unless 0 < E0 < 0.327 H(N)
};

double default_e0(u64 level);

/// Throws DomainError when N is even or D0 is outside (e^{H0}, 1).
Thresholds thresholds(u64 level, double d0 = kDefaultD0, std::optional<double> e0 = {});

struct SeriesResult {
    double value = 0.0;
    double error = 0.0;
    double main_term = 0.0;        // signed b = 1 term
    double main_error = 0.0;
    double tail_numeric_bound = 0.0;  // bound for |sum_{b >= 2}|, truncation included
    double truncation = 0.0;       // certified bound for sum_{b > b_max}
    int b_max = 0;
    int evaluated = 0;             // terms with ratio > 0.9
    int enveloped = 0;
};

/// Requires k >= 4 and argument / (b_max + 1) <= k - 1.
SeriesResult series_value(const TraceInstance& inst, int b_max);

/// 6.01 pi J_{k-1}(k-1) e^{H0 (k-1)}; requires k >= 22 and ratio in [8/9, 10/9].
double tail_paper_bound(const TraceInstance& inst);

struct Check {
    std::string name;
    bool passed = false;
    bool informational = false;  // recorded, not required
    std::string detail;
};

/// An inequality from the proof, lhs against reference.
struct Quantity {
    std::string name;
    double lhs = 0.0;
    double reference = 0.0;
    bool holds = false;
};

struct BoundResult {
    Mode mode = Mode::thm12;
    std::optional<double> bound;  // present iff every required check passed
    double j_at_nu = 0.0;
    double j_at_nu_error = 0.0;
    Thresholds thresholds;
    std::vector<Check> checklist;
    std::vector<Quantity> quantities;
    // thm12 only: the epsilon-specialised forms 7.99 pi (0.4473 - eps) nu^{-1/3} e^{H0 nu}
    // and 0.002397 pi nu^{-1/3} e^{H0 nu}
    std::optional<double> epsilon_bound;
    std::optional<double> explicit_bound;

    bool hypotheses_hold() const;
    const Check* first_failure() const;
};

BoundResult thm12_bound(const TraceInstance& inst);
BoundResult thm13_bound(const TraceInstance& inst);
BoundResult theorem_bound(const TraceInstance& inst, Mode mode);

/// n with m = 1 in the mode's argument interval, gcd(n, N) = 1 and n a
/// square modulo each prime of the powerful part of N, ascending.
std::vector<u64> find_admissible(u64 level, int k, Mode mode, double d0 = kDefaultD0);

enum class Verdict { verified, hypothesis_failed, inconclusive, violated };
std::string_view to_string(Verdict v);

struct PeterssonVerification {
    TraceInstance instance;
    BoundResult bound;
    std::optional<SeriesResult> series;
    std::optional<double> tail_paper_bound;
    std::string tail_paper_note;  // why it is absent
    Verdict verdict = Verdict::hypothesis_failed;
};

/// b_max starts at 8 and doubles until the truncation bound is below 1% of
/// the theorem bound; DomainError past 1024.
PeterssonVerification verify(const TraceInstance& inst, Mode mode);

}  // namespace klb
