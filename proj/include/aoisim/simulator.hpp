#pragma once

#include <cstdint>
#include <vector>

#include "aoisim/config.hpp"
#include "aoisim/envmodel.hpp"
#include "aoisim/netstate.hpp"
#include "aoisim/policies.hpp"

namespace aoisim::metrics {
struct RunMetrics;
}

namespace aoisim::simulator {

struct PairOutcome {
    int source = -1;
    int channel = -1;
    int success = 0;
};

// Applies one slot's transmissions and the AoI recursion
// x_m(t) = (1-w) (x_m(t-1)+1) + w tau_m(t) to every source. Success is the
// shared-uniform rule U <= mu_n(t). Scheduling an ineligible source is a
// contract violation unless allow_stale is set (the shadow run may find
// its newest packet already delivered; redelivery equals plain aging).
std::vector<PairOutcome> step(NetworkState& net, const policies::Decision& decision,
                              const envmodel::SlotContext& ctx, double coupling_u, long long t,
                              bool allow_stale = false);

// Slot-by-slot record of the three synchronized runs of one round:
// the configured policy pi, the benchmark (max-weight source + oracle
// channel), and the shadow (pi's realized sources + oracle channel, paired
// so every scheduled source keeps a channel at least as good as under pi).
struct RoundTrace {
    std::size_t num_sources = 0;
    std::size_t num_channels = 0;
    std::size_t pairs = 0;
    std::uint64_t horizon = 0;

    // Slot-indexed arrays (slot t stored at t-1).
    std::vector<double> coupling_u;                      // T
    std::vector<double> mu_true;                         // T x N
    std::vector<std::uint8_t> arrivals;                  // T x M
    std::vector<std::int32_t> aoi_pi, aoi_star, aoi_shadow;  // T x M each
    std::vector<std::int16_t> pi_src, pi_ch;             // T x pairs, -1 padded
    std::vector<std::int16_t> star_src, star_ch;         // T x pairs
    std::vector<std::int16_t> shadow_src, shadow_ch;     // T x pairs

    // Run-level diagnostics accumulated while stepping.
    long long dominance_violations = 0;     // slots*sources with x_pi < x_shadow
    long long disjointness_violations = 0;  // decisions with repeated source/channel
    long long clamped_mu = 0;               // clamped entries over T x N
    double min_mu_seen = 0.0;
    double min_gap_seen = 0.0;  // only meaningful when has_gap
    bool has_gap = false;

    const double* mu_row(std::uint64_t t) const { return mu_true.data() + (t - 1) * num_channels; }
    long long aoi_of(const std::vector<std::int32_t>& run, std::uint64_t t, std::size_t m) const {
        return run[(t - 1) * num_sources + m];
    }
};

// Three synchronized runs over t = 1..T on shared arrival, context, noise
// and coupling streams (the benchmark gets independent streams in
// uncoupled mode). The policy's bandit state learns only from its own
// outcomes.
RoundTrace run_round(const config::SimConfig& cfg, std::uint64_t round_idx,
                     const policies::PolicySpec& pspec);

// All configured channel policies x cfg.rounds rounds on shared per-round
// randomness, reduced to checkpoint aggregates in round-index order
// independent of the worker count.
metrics::RunMetrics run_experiment(const config::SimConfig& cfg);

}  // namespace aoisim::simulator
