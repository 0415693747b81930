#pragma once

// Sweep configuration, parallel sweep runner, report rendering, and the
// command-line dispatcher behind the klb binary.

#include <iosfwd>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "klb/arith.hpp"
#include "klb/petersson.hpp"

namespace klb {

using json = nlohmann::json;

enum class SweepTarget { kloosterman, bessel, petersson };
std::string_view to_string(SweepTarget t);

/// Inclusive range start, start + step, ..., <= stop. Empty when start > stop.
struct Range {
    double start = 0.0;
    double stop = 0.0;
    double step = 1.0;

    std::vector<double> values() const;
};

/// Allowed slack per check. A negative value makes the check fail, which is
/// how exit-code handling is exercised.
struct Tolerances {
    double evaluator = 1e-6;    // |multiplicative - brute|
    double salie = 1e-6;        // |closed form - brute|
    double certificate = 1e-6;  // |S| >= theorem_bound - tol
    double weil = 0.0;          // |S| <= tau(c) sqrt(c) + abs_error + tol
    double bracket = 0.0;       // J_nu(nu) inside its bracket, widened by tol
    double tail = 0.0;          // numeric tail <= analytic tail bound + tol
    double bound = 0.0;         // |series| + error >= bound - tol
};

struct SweepConfig {
    SweepTarget target = SweepTarget::kloosterman;
    std::map<std::string, Range> ranges;
    int samples_per_modulus = 1;
    u64 seed = 0;
    Tolerances tolerances;
    int parallelism = 1;
    // petersson and bessel parameters
    Mode mode = Mode::thm12;
    double d0 = kDefaultD0;
    double epsilon = kDefaultEpsilon;
    std::optional<double> e0;
};

/// Throws DomainError with a precise message on any schema problem.
SweepConfig parse_config(const json& doc);
SweepConfig load_config(const std::string& path);
json config_to_json(const SweepConfig& cfg);

/// KLB_PARALLELISM, when set to a positive integer, overrides the config.
int effective_parallelism(const SweepConfig& cfg);

struct SweepSummary {
    std::size_t cases = 0;
    std::size_t violations = 0;
    double max_violation = 0.0;
    std::optional<double> min_tightness;  // min |S| / theorem_bound, or |series| / bound
    std::size_t hypothesis_failures = 0;
    std::size_t inconclusive = 0;
    std::size_t corollary_exceeds_theorem = 0;  // informational
};

struct SweepReport {
    SweepConfig config;
    std::vector<json> records;  // sorted by inputs
    SweepSummary summary;
    double wall_seconds = 0.0;

    /// 0 when clean, 1 when empty, 2 on any violation.
    int exit_code() const;
};

SweepReport run_sweep(const SweepConfig& cfg);

json report_to_json(const SweepReport& report);

/// Flat CSV: one header row, one row per object; nested keys joined by '.'.
std::string to_csv(const std::vector<json>& rows);

/// The klb command line. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace klb
