#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aoisim/simulator.hpp"

namespace aoisim::metrics {

// Logarithmically spaced checkpoints (about `points` of them) always
// containing 1, every power of ten up to T, and T itself.
std::vector<std::uint64_t> checkpoint_grid(std::uint64_t horizon, std::size_t points = 50);

enum class Run { policy, benchmark, shadow };

// (1 / (M t)) sum_{s<=t} sum_m x_m(s)
double aoi_average(const simulator::RoundTrace& trace, Run which, std::uint64_t up_to);

// Cumulative coupled regret sum_{s<=t} sum_m (x^pi - x^star) at the grid
// points. May dip negative on some slots; the shadow comparison is the
// pointwise non-negative one.
std::vector<long long> regret_series(const simulator::RoundTrace& trace,
                                     const std::vector<std::uint64_t>& grid);

// Same reduction against the shadow run (pointwise >= 0, exact).
std::vector<long long> shadow_gap_series(const simulator::RoundTrace& trace,
                                         const std::vector<std::uint64_t>& grid);

// K(t): transmissions through a channel strictly below the slot's best
// (p = 1), or the count of selected channels outside the true top-p
// (p > 1). Idle slots contribute nothing.
std::vector<long long> suboptimal_count(const simulator::RoundTrace& trace,
                                        const std::vector<std::uint64_t>& grid);

// Per-source decomposition for p > 1: for every source scheduled by both
// runs, a strictly worse channel than the benchmark gave it is a real
// (case 1) sub-optimal choice, a strictly better one a fake (case 2).
// Throws std::invalid_argument for p = 1, where K already tells the story.
struct CaseSeries {
    std::vector<long long> case1;
    std::vector<long long> case2;
};
CaseSeries classify_suboptimality(const simulator::RoundTrace& trace,
                                  const std::vector<std::uint64_t>& grid);

enum class RatioVerdict { no_suboptimal, pass, fail };

struct RatioDiagnostic {
    std::vector<double> ratio;  // R(t) / max(1, K(t)) per checkpoint
    RatioVerdict verdict = RatioVerdict::no_suboptimal;
    double median = 0.0;  // over checkpoints in [T/10, T]
};

// Boundedness check of the regret-per-suboptimal-choice ratio: verdict is
// pass when every checkpoint in [T/10, T] stays within a factor-2 band of
// the window median.
RatioDiagnostic theorem1_ratio(const std::vector<double>& regret_mean,
                               const std::vector<double>& k_mean,
                               const std::vector<std::uint64_t>& grid, std::uint64_t horizon);

const char* to_string(RatioVerdict v);

// Per-round reduction of one trace onto the checkpoint grid.
struct PerRoundSeries {
    std::vector<long long> regret;
    std::vector<long long> k_count;
    std::vector<long long> aoi_pi_sum;    // cumulative AoI sums
    std::vector<long long> aoi_star_sum;
    std::vector<long long> case1, case2;  // empty when pairs == 1
    long long dominance_violations = 0;
    long long disjointness_violations = 0;
    double clamp_fraction = 0.0;
    double min_mu = 0.0;
    double min_gap = 0.0;
    bool has_gap = false;
};
PerRoundSeries reduce_round(const simulator::RoundTrace& trace,
                            const std::vector<std::uint64_t>& grid);

struct PolicyAggregate {
    std::string label;
    std::vector<double> regret_mean, regret_stderr;
    std::vector<double> k_mean, k_stderr;
    std::vector<double> aoi_mean, aoi_stderr;
    std::vector<double> case1_mean, case2_mean;  // p > 1 only
    // Final-checkpoint values per round, in round order; policies compared
    // on shared randomness pair up round-by-round through these.
    std::vector<double> regret_final_rounds;
    std::vector<double> k_final_rounds;
    RatioDiagnostic ratio;
    double clamp_fraction = 0.0;
    double min_mu_seen = 0.0;
    double min_gap_seen = 0.0;
    bool has_gap = false;
    long long dominance_violations = 0;
    long long disjointness_violations = 0;
};

struct RunMetrics {
    std::vector<std::uint64_t> t_grid;
    std::size_t rounds = 0;
    std::vector<double> benchmark_aoi_mean, benchmark_aoi_stderr;
    std::vector<PolicyAggregate> policies;
};

// Mean/standard-error aggregation of per-round series, reduced in round
// index order.
PolicyAggregate aggregate_policy(const std::string& label,
                                 const std::vector<PerRoundSeries>& rounds,
                                 const std::vector<std::uint64_t>& grid, std::uint64_t horizon,
                                 std::size_t num_sources);

}  // namespace aoisim::metrics
