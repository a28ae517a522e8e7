#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "aoisim/linalg.hpp"
#include "aoisim/stochastic.hpp"

namespace aoisim::envmodel {

enum class FeatureMap { raw, affine_bias };

struct LinearTruth {
    linalg::Vec theta_true;
    stochastic::DistSpec noise;  // fresh draw per channel per slot, zero-mean
};

// mu = 1 - exp(-(snr + offset)); the learner never sees this map, only the
// feature view, so the model misspecification acts as the noise.
struct NonLinearSNRTruth {
    double offset = 2.0;
    stochastic::DistSpec snr_spec;
};

struct ChannelModel {
    std::size_t num_channels = 0;
    std::size_t ctx_dim = 0;
    std::vector<std::vector<stochastic::DistSpec>> context_specs;  // N x ctx_dim
    std::variant<LinearTruth, NonLinearSNRTruth> truth;
    FeatureMap feature_map = FeatureMap::raw;

    std::size_t feature_dim() const {
        return feature_map == FeatureMap::raw ? ctx_dim : ctx_dim + 1;
    }
    bool is_linear() const { return std::holds_alternative<LinearTruth>(truth); }
    void validate() const;

    // Built-in presets.
    static ChannelModel table1();
    static ChannelModel nonlinear_snr();
    static ChannelModel fixed_gap(double mu_hi = 0.9, double mu_lo = 0.5);
};

struct SlotContext {
    std::size_t num_channels = 0;
    std::size_t ctx_dim = 0;
    std::size_t dim = 0;              // feature dimension
    std::vector<double> raw;          // N x ctx_dim, row-major
    std::vector<double> features;     // N x dim, row-major
    std::vector<double> mu_true;      // N, clamped to [0,1]; hidden from policies
    int clamped = 0;                  // channels clamped this slot

    const double* feature_row(std::size_t n) const { return features.data() + n * dim; }
};

// Draws the slot's sided information, the hidden success probabilities and
// the learner features. Rewinds both streams to slot t.
SlotContext generate_slot(const ChannelModel& model, std::uint64_t t,
                          stochastic::RngStream& ctx_rng, stochastic::RngStream& noise_rng);

// Indices of the p largest mu_true, ties to the lowest index. Reserved for
// the benchmark/shadow runs and metrics; learning policies never see it.
std::vector<int> best_channels(const SlotContext& ctx, std::size_t p);

// Same selection applied to a plain value array (used when reducing traces).
std::vector<int> top_by_value(const double* values, std::size_t n, std::size_t p);

}  // namespace aoisim::envmodel
