#include "aoisim/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aoisim/kernels.hpp"

namespace aoisim::policies {

bool testing_skip_clamp = false;

namespace {

double clamp01(double x) {
    if (testing_skip_clamp) return x;
    return std::clamp(x, 0.0, 1.0);
}

}  // namespace

double PolicyParams::default_alpha(std::uint64_t horizon, std::size_t num_channels,
                                   double delta) {
    return std::sqrt(0.5 * std::log(2.0 * static_cast<double>(horizon) *
                                    static_cast<double>(num_channels) / delta));
}

double PolicyParams::theory_v(std::size_t dim, double delta, double eps) {
    return std::sqrt(24.0 / eps * static_cast<double>(dim) * std::log(1.0 / delta));
}

void PolicyParams::validate() const {
    if (!(alpha >= 0.0)) throw std::invalid_argument("params: alpha must be >= 0");
    if (!(v >= 0.0)) throw std::invalid_argument("params: v must be >= 0");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("params: delta must be in (0,1)");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("params: eps must be in (0,1)");
}

BanditState::BanditState(std::size_t d)
    : a(linalg::Mat::identity(d)), a_inv(linalg::Mat::identity(d)), b_acc(d) {}

void BanditState::update(const double* feature, int reward) {
    const std::size_t d = dim();
    linalg::Vec x(d);
    std::copy(feature, feature + d, x.data());
    linalg::add_outer(a, x, 1.0);
    ++update_count;
    if (update_count % kInverseRefresh == 0) {
        a_inv = linalg::invert(a);
    } else {
        a_inv = linalg::rank_one_update(a_inv, x);
    }
    if (reward != 0) {
        kernels::active().axpy(b_acc.data(), static_cast<double>(reward), feature, d);
    }
}

bool Decision::disjoint() const {
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        for (std::size_t j = i + 1; j < pairs.size(); ++j) {
            if (pairs[i].first == pairs[j].first || pairs[i].second == pairs[j].second)
                return false;
        }
    }
    return true;
}

std::vector<double> linucb_scores(const BanditState& state, const FeatureView& feats,
                                  const PolicyParams& params) {
    const linalg::Vec theta = state.theta_hat();
    std::vector<double> scores(feats.num_channels);
    const auto& ops = kernels::active();
    for (std::size_t n = 0; n < feats.num_channels; ++n) {
        const double* x = feats.row(n);
        const double mean = ops.dot(theta.data(), x, feats.dim);
        const double q = ops.quad_form(state.a_inv.data(), x, feats.dim);
        scores[n] = clamp01(mean + params.alpha * std::sqrt(std::max(q, 0.0)));
    }
    return scores;
}

std::vector<double> lints_scores(const BanditState& state, const FeatureView& feats,
                                 const PolicyParams& params, stochastic::RngStream& rng) {
    const std::size_t d = feats.dim;
    const linalg::Vec theta = state.theta_hat();
    const linalg::Mat l = linalg::cholesky_lower(state.a_inv);
    linalg::Vec z(d);
    for (std::size_t i = 0; i < d; ++i) z[i] = rng.normal();
    linalg::Vec tilde = theta;
    const linalg::Vec lz = linalg::matvec(l, z);
    for (std::size_t i = 0; i < d; ++i) tilde[i] += params.v * lz[i];

    std::vector<double> scores(feats.num_channels);
    for (std::size_t n = 0; n < feats.num_channels; ++n) {
        scores[n] = clamp01(kernels::active().dot(tilde.data(), feats.row(n), d));
    }
    return scores;
}

std::vector<int> top_p(const std::vector<double>& scores, std::size_t p) {
    std::vector<int> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return scores[a] > scores[b]; });
    idx.resize(std::min(p, scores.size()));
    return idx;
}

std::vector<int> ad_select(const BanditState& state, const FeatureView& feats,
                           const PolicyParams& params, const AdInfo& info, AdBase base,
                           std::size_t p, stochastic::RngStream& rng) {
    const linalg::Vec theta = state.theta_hat();
    std::vector<double> est(feats.num_channels);
    for (std::size_t n = 0; n < feats.num_channels; ++n) {
        est[n] = kernels::active().dot(theta.data(), feats.row(n), feats.dim);
    }
    const double est_max = *std::max_element(est.begin(), est.end());

    const auto exploit = [&](long long aoi) {
        if (!(est_max > 0.0)) return false;  // undefined threshold: keep exploring
        return static_cast<double>(aoi) >
               static_cast<double>(info.num_sources) / (2.0 * info.arrival_rate * est_max);
    };

    if (!info.per_pair_threshold) {
        if (exploit(info.scheduled_aoi_max)) return top_p(est, p);
        const auto scores = base == AdBase::ucb ? linucb_scores(state, feats, params)
                                                : lints_scores(state, feats, params, rng);
        return top_p(scores, p);
    }

    // Per-pair mode: each scheduled source (in rank order) gets either the
    // best remaining exploit channel or the best remaining bandit channel.
    std::vector<double> base_scores;
    std::vector<char> taken(feats.num_channels, 0);
    std::vector<int> chosen;
    const std::size_t count = std::min(p, info.num_scheduled);
    for (std::size_t k = 0; k < count; ++k) {
        const std::vector<double>* ranking = &est;
        if (!exploit(info.scheduled_aois[k])) {
            if (base_scores.empty()) {
                base_scores = base == AdBase::ucb ? linucb_scores(state, feats, params)
                                                  : lints_scores(state, feats, params, rng);
            }
            ranking = &base_scores;
        }
        int pick = -1;
        for (std::size_t n = 0; n < feats.num_channels; ++n) {
            if (taken[n]) continue;
            if (pick < 0 || (*ranking)[n] > (*ranking)[pick]) pick = static_cast<int>(n);
        }
        if (pick < 0) break;
        taken[pick] = 1;
        chosen.push_back(pick);
    }
    return chosen;
}

// --- runtime policy objects --------------------------------------------

void ChannelPolicy::record(int, const double*, int) {}

namespace {

class RandomPolicy final : public ChannelPolicy {
  public:
    std::vector<int> select(const FeatureView& feats, const SelectInfo& info,
                            stochastic::RngStream& rng) override {
        const std::size_t n = feats.num_channels;
        std::vector<int> pool(n);
        std::iota(pool.begin(), pool.end(), 0);
        std::vector<int> picked;
        const std::size_t want = std::min(info.want, n);
        for (std::size_t k = 0; k < want; ++k) {
            const std::size_t j =
                k + static_cast<std::size_t>(rng.uniform() * static_cast<double>(n - k));
            std::swap(pool[k], pool[std::min(j, n - 1)]);
            picked.push_back(pool[k]);
        }
        return picked;
    }
};

class LinUCBPolicy final : public ChannelPolicy {
  public:
    LinUCBPolicy(std::size_t d, PolicyParams params) : state_(d), params_(params) {}

    std::vector<int> select(const FeatureView& feats, const SelectInfo& info,
                            stochastic::RngStream&) override {
        return top_p(linucb_scores(state_, feats, params_), info.want);
    }
    void record(int, const double* feature, int reward) override {
        state_.update(feature, reward);
    }
    const BanditState& state() const { return state_; }

  private:
    BanditState state_;
    PolicyParams params_;
};

class LinTSPolicy final : public ChannelPolicy {
  public:
    LinTSPolicy(std::size_t d, PolicyParams params) : state_(d), params_(params) {}

    std::vector<int> select(const FeatureView& feats, const SelectInfo& info,
                            stochastic::RngStream& rng) override {
        return top_p(lints_scores(state_, feats, params_, rng), info.want);
    }
    void record(int, const double* feature, int reward) override {
        state_.update(feature, reward);
    }
    const BanditState& state() const { return state_; }

  private:
    BanditState state_;
    PolicyParams params_;
};

class AdPolicy final : public ChannelPolicy {
  public:
    AdPolicy(std::size_t d, PolicyParams params, AdBase base)
        : state_(d), params_(params), base_(base) {}

    std::vector<int> select(const FeatureView& feats, const SelectInfo& info,
                            stochastic::RngStream& rng) override {
        return ad_select(state_, feats, params_, info.ad, base_, info.want, rng);
    }
    void record(int, const double* feature, int reward) override {
        state_.update(feature, reward);
    }
    const BanditState& state() const { return state_; }

  private:
    BanditState state_;
    PolicyParams params_;
    AdBase base_;
};

// Stage-based elimination baseline. S = ceil(ln T) per-stage estimators;
// only observations taken through the wide-width branch feed the stage
// they were assigned to. Scores carry the same [0,1] projection as the
// other policies for comparability.
class SupLinUCBPolicy final : public ChannelPolicy {
  public:
    SupLinUCBPolicy(std::size_t d, std::uint64_t horizon, PolicyParams params)
        : params_(params),
          horizon_(horizon),
          stages_(std::max<std::size_t>(
              1, static_cast<std::size_t>(std::ceil(std::log(static_cast<double>(horizon)))))) {
        states_.reserve(stages_);
        for (std::size_t s = 0; s < stages_; ++s) states_.emplace_back(d);
    }

    std::vector<int> select(const FeatureView& feats, const SelectInfo& info,
                            stochastic::RngStream&) override {
        pending_.assign(feats.num_channels, -1);
        std::vector<char> available(feats.num_channels, 1);
        std::vector<int> picked;
        const std::size_t want = std::min(info.want, feats.num_channels);
        for (std::size_t k = 0; k < want; ++k) {
            const int ch = select_one(feats, available);
            if (ch < 0) break;
            available[ch] = 0;
            picked.push_back(ch);
        }
        return picked;
    }

    void record(int channel, const double* feature, int reward) override {
        if (channel < 0 || static_cast<std::size_t>(channel) >= pending_.size()) return;
        const int stage = pending_[channel];
        if (stage >= 0) states_[stage].update(feature, reward);
    }

    const SupLinUCBDebug& debug() const { return debug_; }

  private:
    int select_one(const FeatureView& feats, const std::vector<char>& available) {
        const double narrow = 1.0 / std::sqrt(static_cast<double>(horizon_));
        std::vector<int> cand;
        for (std::size_t n = 0; n < feats.num_channels; ++n) {
            if (available[n]) cand.push_back(static_cast<int>(n));
        }
        if (cand.empty()) return -1;

        for (std::size_t s = 0; s < stages_; ++s) {
            std::vector<double> width(cand.size()), ucb(cand.size());
            const linalg::Vec theta = states_[s].theta_hat();
            for (std::size_t i = 0; i < cand.size(); ++i) {
                const double* x = feats.row(cand[i]);
                const double q = kernels::active().quad_form(states_[s].a_inv.data(), x, feats.dim);
                width[i] = params_.alpha * std::sqrt(std::max(q, 0.0));
                ucb[i] = clamp01(kernels::active().dot(theta.data(), x, feats.dim) + width[i]);
            }

            bool all_narrow = true;
            for (double w : width) {
                if (w > narrow) {
                    all_narrow = false;
                    break;
                }
            }
            if (all_narrow) {
                const std::size_t best = argmax(ucb);
                debug_ = {0, static_cast<int>(s), width[best]};
                return cand[best];  // no stage credited: exploit step
            }

            const double wide = std::pow(2.0, -static_cast<double>(s + 1));
            for (std::size_t i = 0; i < cand.size(); ++i) {
                if (width[i] > wide) {
                    debug_ = {1, static_cast<int>(s), width[i]};
                    pending_[cand[i]] = static_cast<int>(s);
                    return cand[i];
                }
            }

            // Eliminate and descend a stage.
            const double best_ucb = ucb[argmax(ucb)];
            std::vector<int> kept;
            for (std::size_t i = 0; i < cand.size(); ++i) {
                if (ucb[i] >= best_ucb - 2.0 * wide) kept.push_back(cand[i]);
            }
            cand = std::move(kept);
        }
        // Stage budget exhausted (widths already below every threshold):
        // fall back to the deepest stage's empirical best.
        const linalg::Vec theta = states_[stages_ - 1].theta_hat();
        std::vector<double> ucb(cand.size());
        for (std::size_t i = 0; i < cand.size(); ++i) {
            ucb[i] = clamp01(kernels::active().dot(theta.data(), feats.row(cand[i]), feats.dim));
        }
        const std::size_t best = argmax(ucb);
        debug_ = {0, static_cast<int>(stages_ - 1), 0.0};
        return cand[best];
    }

    static std::size_t argmax(const std::vector<double>& xs) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < xs.size(); ++i) {
            if (xs[i] > xs[best]) best = i;
        }
        return best;
    }

    PolicyParams params_;
    std::uint64_t horizon_;
    std::size_t stages_;
    std::vector<BanditState> states_;
    std::vector<int> pending_;
    SupLinUCBDebug debug_;
};

}  // namespace

PolicySpec parse_policy(const std::string& name) {
    PolicySpec spec;
    spec.name = name;
    spec.label = name;
    if (name == "oracle") spec.kind = PolicyKind::oracle;
    else if (name == "random") spec.kind = PolicyKind::random;
    else if (name == "linucb") spec.kind = PolicyKind::linucb;
    else if (name == "lints") spec.kind = PolicyKind::lints;
    else if (name == "aducb") spec.kind = PolicyKind::aducb;
    else if (name == "adts") spec.kind = PolicyKind::adts;
    else if (name == "suplinucb") {
        spec.kind = PolicyKind::suplinucb;
        spec.label = "suplinucb-approx";
    } else {
        throw std::invalid_argument("unknown channel policy: " + name);
    }
    return spec;
}

bool policy_is_learning(PolicyKind k) {
    switch (k) {
        case PolicyKind::linucb:
        case PolicyKind::lints:
        case PolicyKind::aducb:
        case PolicyKind::adts:
        case PolicyKind::suplinucb:
            return true;
        default:
            return false;
    }
}

std::unique_ptr<ChannelPolicy> make_policy(PolicyKind kind, std::size_t feature_dim,
                                           std::uint64_t horizon, std::size_t num_channels,
                                           const PolicyParams& params) {
    (void)num_channels;
    switch (kind) {
        case PolicyKind::random:
            return std::make_unique<RandomPolicy>();
        case PolicyKind::linucb:
            return std::make_unique<LinUCBPolicy>(feature_dim, params);
        case PolicyKind::lints:
            return std::make_unique<LinTSPolicy>(feature_dim, params);
        case PolicyKind::aducb:
            return std::make_unique<AdPolicy>(feature_dim, params, AdBase::ucb);
        case PolicyKind::adts:
            return std::make_unique<AdPolicy>(feature_dim, params, AdBase::ts);
        case PolicyKind::suplinucb:
            return std::make_unique<SupLinUCBPolicy>(feature_dim, horizon, params);
        case PolicyKind::oracle:
        case PolicyKind::epsworst:
            break;
    }
    throw std::invalid_argument("make_policy: policy has no learner object");
}

const BanditState* policy_bandit_state(const ChannelPolicy& p) {
    if (const auto* u = dynamic_cast<const LinUCBPolicy*>(&p)) return &u->state();
    if (const auto* t = dynamic_cast<const LinTSPolicy*>(&p)) return &t->state();
    if (const auto* a = dynamic_cast<const AdPolicy*>(&p)) return &a->state();
    return nullptr;
}

const SupLinUCBDebug* suplinucb_debug(const ChannelPolicy& p) {
    if (const auto* s = dynamic_cast<const SupLinUCBPolicy*>(&p)) return &s->debug();
    return nullptr;
}

std::vector<int> maxweight_sources(const simulator::NetworkState& net, std::uint64_t t,
                                   std::size_t p) {
    struct Cand {
        long long weight;
        int idx;
    };
    std::vector<Cand> cands;
    const long long now = static_cast<long long>(t);
    for (std::size_t m = 0; m < net.num_sources(); ++m) {
        if (!net.eligible(m)) continue;
        const long long tau = now - net.buffer_gen[m];
        cands.push_back({net.aoi[m] + 1 - tau, static_cast<int>(m)});
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Cand& a, const Cand& b) { return a.weight > b.weight; });
    std::vector<int> out;
    for (std::size_t i = 0; i < cands.size() && i < p; ++i) out.push_back(cands[i].idx);
    return out;
}

std::vector<int> roundrobin_sources(const simulator::NetworkState& net, std::uint64_t,
                                    std::size_t p, std::size_t& cursor) {
    const std::size_t m_total = net.num_sources();
    std::vector<int> out;
    for (std::size_t step = 0; step < m_total && out.size() < p; ++step) {
        const std::size_t m = (cursor + step) % m_total;
        if (net.eligible(m)) out.push_back(static_cast<int>(m));
    }
    if (!out.empty()) cursor = (static_cast<std::size_t>(out.back()) + 1) % m_total;
    return out;
}

}  // namespace aoisim::policies
