#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "aoisim/linalg.hpp"
#include "aoisim/netstate.hpp"
#include "aoisim/stochastic.hpp"

namespace aoisim::policies {

// Read-only view of the per-slot learner features (N rows of dimension d).
// Policy entry points accept only this view, never the slot context that
// carries the hidden success probabilities.
struct FeatureView {
    const double* data = nullptr;
    std::size_t num_channels = 0;
    std::size_t dim = 0;
    const double* row(std::size_t n) const { return data + n * dim; }
};

struct PolicyParams {
    double alpha = 1.0;   // LinUCB / AD-UCB confidence width
    double v = 1.0;       // LinTS / AD-TS posterior scale
    double delta = 0.05;  // confidence level for the default alpha formula
    double eps = 0.5;     // only used by the theoretical v formula

    // sqrt(0.5 * ln(2 T N / delta))
    static double default_alpha(std::uint64_t horizon, std::size_t num_channels, double delta);
    // sqrt((24 / eps) * d * ln(1 / delta)); the experiments default to v = 1.
    static double theory_v(std::size_t dim, double delta, double eps);

    void validate() const;
};

// Shared ridge estimator of all linear-contextual policies:
// A = I + sum x x^T, b = sum x r, theta_hat = A^{-1} b. The inverse is
// maintained by Sherman-Morrison and refreshed from A by direct inversion
// every kInverseRefresh updates to stop rounding drift over long horizons.
struct BanditState {
    linalg::Mat a;
    linalg::Mat a_inv;
    linalg::Vec b_acc;
    std::uint64_t update_count = 0;

    static constexpr std::uint64_t kInverseRefresh = 10000;

    explicit BanditState(std::size_t d);
    std::size_t dim() const { return b_acc.dim(); }
    linalg::Vec theta_hat() const { return linalg::solve_theta(a_inv, b_acc); }
    void update(const double* feature, int reward);
};

// Disjoint source-channel pairs chosen for one slot; empty <=> idle.
struct Decision {
    std::vector<std::pair<int, int>> pairs;  // (source, channel)
    bool idle() const { return pairs.empty(); }
    bool disjoint() const;
};

// score_n = clamp01(theta_hat . x_n + alpha * sqrt(x_n^T A^{-1} x_n))
std::vector<double> linucb_scores(const BanditState& state, const FeatureView& feats,
                                  const PolicyParams& params);

// One theta-tilde ~ N(theta_hat, v^2 A^{-1}) per call, shared across
// channels; score_n = clamp01(theta_tilde . x_n).
std::vector<double> lints_scores(const BanditState& state, const FeatureView& feats,
                                 const PolicyParams& params, stochastic::RngStream& rng);

// Indices of the p largest scores, ties to the lowest index.
std::vector<int> top_p(const std::vector<double>& scores, std::size_t p);

enum class AdBase { ucb, ts };

struct AdInfo {
    long long scheduled_aoi_max = 0;       // max AoI among this slot's scheduled sources
    const long long* scheduled_aois = nullptr;  // per-rank AoIs (per-pair threshold mode)
    std::size_t num_scheduled = 0;
    std::size_t num_sources = 0;           // M in the threshold
    double arrival_rate = 0.0;             // lambda in the threshold
    bool per_pair_threshold = false;
};

// Age-dependent selection: exploit (argmax theta_hat . x) once the
// scheduled AoI exceeds M / (2 lambda max_n theta_hat . x_n), otherwise
// fall through to the base policy's scores. A non-positive estimate keeps
// the bandit branch (cold start must explore).
std::vector<int> ad_select(const BanditState& state, const FeatureView& feats,
                           const PolicyParams& params, const AdInfo& info, AdBase base,
                           std::size_t p, stochastic::RngStream& rng);

// Exposed for tests and the verify battery: disables the [0,1] projection
// of policy scores when true. Never set in normal operation.
extern bool testing_skip_clamp;

// --- runtime policy objects used by the simulator ---------------------

// epsworst is a diagnostic-only kind (picks the true-worst channel with a
// configured probability); it is constructed programmatically by the
// verify battery, never parsed from a config.
enum class PolicyKind { oracle, random, linucb, lints, aducb, adts, suplinucb, epsworst };

struct PolicySpec {
    PolicyKind kind = PolicyKind::random;
    std::string name;   // config name
    std::string label;  // output column label (suplinucb reports as suplinucb-approx)
};

PolicySpec parse_policy(const std::string& name);
bool policy_is_learning(PolicyKind k);

struct SelectInfo {
    std::uint64_t t = 0;
    std::size_t want = 1;
    AdInfo ad;
};

class ChannelPolicy {
  public:
    virtual ~ChannelPolicy() = default;
    // Ordered best-first channel list of length min(want, N).
    virtual std::vector<int> select(const FeatureView& feats, const SelectInfo& info,
                                    stochastic::RngStream& rng) = 0;
    // Outcome of a transmitted pair; feature is the row actually used.
    virtual void record(int channel, const double* feature, int reward);
};

struct SupLinUCBDebug {
    int branch = -1;  // 0 exploit-all-narrow, 1 wide-width pick, -1 none yet
    int stage = -1;
    double width = 0.0;
};

std::unique_ptr<ChannelPolicy> make_policy(PolicyKind kind, std::size_t feature_dim,
                                           std::uint64_t horizon, std::size_t num_channels,
                                           const PolicyParams& params);

// Test/diagnostic hooks on concrete policies.
const BanditState* policy_bandit_state(const ChannelPolicy& p);
const SupLinUCBDebug* suplinucb_debug(const ChannelPolicy& p);

// --- source policies ---------------------------------------------------

enum class SourcePolicy { maxweight, roundrobin };

// Up to p eligible sources by descending one-step AoI reduction
// weight_m = (x_m + 1) - tau_m(t), ties to the lowest index; empty when no
// source holds an undelivered packet (idle slot).
std::vector<int> maxweight_sources(const simulator::NetworkState& net, std::uint64_t t,
                                   std::size_t p);

// Next p eligible sources in cyclic order; cursor persists across slots.
std::vector<int> roundrobin_sources(const simulator::NetworkState& net, std::uint64_t t,
                                    std::size_t p, std::size_t& cursor);

}  // namespace aoisim::policies
