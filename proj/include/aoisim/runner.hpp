#pragma once

#include <string>
#include <vector>

#include "aoisim/config.hpp"
#include "aoisim/metrics.hpp"

namespace aoisim::runner {

// Runs every configured channel policy on shared per-round randomness and
// writes regret.csv, kcount.csv, aoi.csv, cases.csv (p > 1) and
// summary.txt under cfg.output_dir. Floating values are printed with 17
// significant digits so identical configs regress byte-identically.
// Returns 0 on success; partial outputs are removed on error.
int run(const config::SimConfig& cfg);

// In-memory variant used by tests.
metrics::RunMetrics run_metrics(const config::SimConfig& cfg);

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifyOptions {
    std::vector<std::string> checks;  // empty = all
    std::uint64_t horizon = 10000;
    std::uint64_t rounds = 5;
    std::uint64_t seed = 1;
    std::string inject_fault;  // "skip_clamp" flips the projection check
};

// Invariant battery: coupling dominance, the Sherman-Morrison chain against
// direct inversion, distribution moments, the fixed-gap ratio diagnostic,
// AD/base branch equivalence and the [0,1] score projection.
std::vector<CheckResult> verify_checks(const VerifyOptions& opts);

// Prints one PASS/FAIL line per check; returns 0 iff all pass.
int verify(const VerifyOptions& opts);

// Re-runs cfg once per value of the swept parameter
// (alpha | v | delta | eps | lambda | pairs), each into its own
// subdirectory, and writes a final-checkpoint overview CSV.
int sweep(const config::SimConfig& cfg, const std::string& param,
          const std::vector<double>& values);

}  // namespace aoisim::runner
