#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aoisim/envmodel.hpp"
#include "aoisim/policies.hpp"

namespace aoisim::config {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class PairMatching { rank, random };

// Full experiment description. Presets fig2/fig4/fig5 carry the full-size
// scale (T = 1e5, 1000 rounds); the desk preset halves both decades so the
// whole suite runs in minutes.
struct SimConfig {
    std::string preset;  // informational

    std::size_t num_sources = 20;
    std::size_t num_channels = 5;
    std::size_t num_pairs = 1;
    std::uint64_t horizon = 10000;
    double arrival_rate = 0.5;
    std::uint64_t rounds = 100;
    std::uint64_t master_seed = 1;
    std::size_t checkpoints = 50;

    policies::SourcePolicy source_policy = policies::SourcePolicy::maxweight;
    std::vector<policies::PolicySpec> channel_policies;

    std::optional<double> alpha;  // unset: sqrt(0.5 ln(2TN/delta))
    double v = 1.0;
    bool v_theory = false;  // use sqrt((24/eps) d ln(1/delta)) instead of v
    double delta = 0.05;
    double eps = 0.5;
    double eps_worst = 0.25;  // explore rate of the internal eps-worst diagnostic policy

    envmodel::ChannelModel model;
    std::string model_name = "table1";

    PairMatching pair_matching = PairMatching::rank;
    std::string output_dir;
    std::size_t workers = 0;  // 0 = hardware concurrency
    bool uncoupled = false;
    bool dump_traces = false;
    bool per_pair_threshold = false;

    void validate() const;  // throws ConfigError naming key and constraint
    policies::PolicyParams resolved_params(std::size_t feature_dim) const;
};

// Named presets: "desk", "fig2", "fig4", "fig5".
SimConfig preset_config(const std::string& name);

// Model presets usable in the channel_model field.
envmodel::ChannelModel model_by_name(const std::string& name);

// Parses a JSON experiment description (optionally starting from the
// "preset" key); unknown keys are errors.
SimConfig parse_config(const std::string& json_text);

// Default output directory: $AOISIM_OUTDIR if set, else "out".
std::string default_output_dir();

}  // namespace aoisim::config
