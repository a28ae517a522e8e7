#include "aoisim/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "aoisim/metrics.hpp"

namespace aoisim::simulator {

using policies::Decision;
using stochastic::Purpose;
using stochastic::RngStream;

std::vector<PairOutcome> step(NetworkState& net, const Decision& decision,
                              const envmodel::SlotContext& ctx, double coupling_u, long long t,
                              bool allow_stale) {
    std::vector<PairOutcome> outcomes;
    outcomes.reserve(decision.pairs.size());
    std::vector<char> delivered(net.num_sources(), 0);
    for (const auto& [m, n] : decision.pairs) {
        if (m < 0 || static_cast<std::size_t>(m) >= net.num_sources() || n < 0 ||
            static_cast<std::size_t>(n) >= ctx.num_channels) {
            throw std::logic_error("step: pair indices out of range");
        }
        if (!net.eligible(m)) {
            if (!allow_stale) throw std::logic_error("step: ineligible source scheduled");
            continue;  // newest packet already delivered: aging is equivalent
        }
        const int success = coupling_u <= ctx.mu_true[n] ? 1 : 0;
        outcomes.push_back({m, n, success});
        if (success) {
            const long long gen = net.buffer_gen[m];
            net.aoi[m] = t - gen;
            net.last_delivered_gen[m] = gen;
            net.buffer_gen[m] = -1;
            delivered[m] = 1;
        }
    }
    for (std::size_t m = 0; m < net.num_sources(); ++m) {
        if (!delivered[m]) ++net.aoi[m];
    }
    return outcomes;
}

namespace {

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<int> select_sources(const config::SimConfig& cfg, const NetworkState& net,
                                std::uint64_t t, std::size_t& rr_cursor) {
    if (cfg.source_policy == policies::SourcePolicy::roundrobin) {
        return policies::roundrobin_sources(net, t, cfg.num_pairs, rr_cursor);
    }
    return policies::maxweight_sources(net, t, cfg.num_pairs);
}

// Worst-first channel list for the internal eps-worst diagnostic policy.
std::vector<int> worst_channels(const envmodel::SlotContext& ctx, std::size_t p) {
    std::vector<int> idx(ctx.num_channels);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return ctx.mu_true[a] < ctx.mu_true[b]; });
    idx.resize(std::min(p, ctx.num_channels));
    return idx;
}

void record_pairs(std::vector<std::int16_t>& src, std::vector<std::int16_t>& ch,
                  const Decision& d, std::uint64_t t, std::size_t pairs) {
    const std::size_t base = (t - 1) * pairs;
    for (std::size_t k = 0; k < d.pairs.size() && k < pairs; ++k) {
        src[base + k] = static_cast<std::int16_t>(d.pairs[k].first);
        ch[base + k] = static_cast<std::int16_t>(d.pairs[k].second);
    }
}

}  // namespace

RoundTrace run_round(const config::SimConfig& cfg, std::uint64_t round_idx,
                     const policies::PolicySpec& pspec) {
    const std::size_t m_total = cfg.num_sources;
    const std::size_t n_ch = cfg.num_channels;
    const std::size_t p = cfg.num_pairs;
    const std::uint64_t horizon = cfg.horizon;
    const std::size_t fd = cfg.model.feature_dim();
    const auto params = cfg.resolved_params(fd);
    const std::uint64_t seed = cfg.master_seed;

    RngStream arr_rng(seed, round_idx, Purpose::arrivals);
    RngStream ctx_rng(seed, round_idx, Purpose::contexts);
    RngStream noise_rng(seed, round_idx, Purpose::noise);
    RngStream coup_rng(seed, round_idx, Purpose::coupling);
    // Uncoupled mode gives the benchmark its own environment realization.
    RngStream arr_rng_b(seed, round_idx, Purpose::arrivals, 1);
    RngStream ctx_rng_b(seed, round_idx, Purpose::contexts, 1);
    RngStream noise_rng_b(seed, round_idx, Purpose::noise, 1);
    RngStream coup_rng_b(seed, round_idx, Purpose::coupling, 1);
    RngStream pol_rng(seed, round_idx, Purpose::policy, fnv1a64(pspec.name));

    std::unique_ptr<policies::ChannelPolicy> learner;
    if (pspec.kind != policies::PolicyKind::oracle &&
        pspec.kind != policies::PolicyKind::epsworst) {
        learner = policies::make_policy(pspec.kind, fd, horizon, n_ch, params);
    }

    NetworkState net_pi(m_total), net_star(m_total), net_shadow(m_total);
    std::size_t rr_cursor = 0;

    RoundTrace trace;
    trace.num_sources = m_total;
    trace.num_channels = n_ch;
    trace.pairs = p;
    trace.horizon = horizon;
    trace.coupling_u.resize(horizon);
    trace.mu_true.resize(horizon * n_ch);
    trace.arrivals.resize(horizon * m_total);
    trace.aoi_pi.resize(horizon * m_total);
    trace.aoi_star.resize(horizon * m_total);
    trace.aoi_shadow.resize(horizon * m_total);
    trace.pi_src.assign(horizon * p, -1);
    trace.pi_ch.assign(horizon * p, -1);
    trace.star_src.assign(horizon * p, -1);
    trace.star_ch.assign(horizon * p, -1);
    trace.shadow_src.assign(horizon * p, -1);
    trace.shadow_ch.assign(horizon * p, -1);
    trace.min_mu_seen = std::numeric_limits<double>::infinity();
    trace.min_gap_seen = std::numeric_limits<double>::infinity();

    std::vector<std::uint8_t> bits(m_total);
    std::vector<long long> sched_aois;

    for (std::uint64_t t = 1; t <= horizon; ++t) {
        const long long now = static_cast<long long>(t);

        // (1) arrivals, applied before scheduling so a slot-t packet can be
        // delivered in slot t with tau = 0
        arr_rng.begin_slot(t);
        for (std::size_t m = 0; m < m_total; ++m) {
            bits[m] = static_cast<std::uint8_t>(stochastic::bernoulli(cfg.arrival_rate, arr_rng));
            if (bits[m]) {
                net_pi.arrival(m, now);
                net_shadow.arrival(m, now);
            }
            trace.arrivals[(t - 1) * m_total + m] = bits[m];
        }
        if (cfg.uncoupled) {
            arr_rng_b.begin_slot(t);
            for (std::size_t m = 0; m < m_total; ++m) {
                if (stochastic::bernoulli(cfg.arrival_rate, arr_rng_b)) net_star.arrival(m, now);
            }
        } else {
            for (std::size_t m = 0; m < m_total; ++m) {
                if (bits[m]) net_star.arrival(m, now);
            }
        }

        // (2) contexts and hidden success probabilities
        const envmodel::SlotContext ctx = envmodel::generate_slot(cfg.model, t, ctx_rng, noise_rng);
        const envmodel::SlotContext ctx_b =
            cfg.uncoupled ? envmodel::generate_slot(cfg.model, t, ctx_rng_b, noise_rng_b)
                          : envmodel::SlotContext{};
        const envmodel::SlotContext& bench_ctx = cfg.uncoupled ? ctx_b : ctx;
        const double u = stochastic::coupling_uniform(t, coup_rng);
        const double u_b = cfg.uncoupled ? stochastic::coupling_uniform(t, coup_rng_b) : u;

        // (3)-(5) policy run
        pol_rng.begin_slot(t);
        const std::vector<int> srcs = select_sources(cfg, net_pi, t, rr_cursor);
        Decision d_pi;
        if (!srcs.empty()) {
            const std::size_t want = srcs.size();
            std::vector<int> chans;
            switch (pspec.kind) {
                case policies::PolicyKind::oracle:
                    chans = envmodel::best_channels(ctx, want);
                    break;
                case policies::PolicyKind::epsworst:
                    chans = pol_rng.uniform() < cfg.eps_worst ? worst_channels(ctx, want)
                                                              : envmodel::best_channels(ctx, want);
                    break;
                default: {
                    policies::SelectInfo info;
                    info.t = t;
                    info.want = want;
                    sched_aois.clear();
                    for (int m : srcs) sched_aois.push_back(net_pi.aoi[m]);
                    info.ad.scheduled_aoi_max =
                        *std::max_element(sched_aois.begin(), sched_aois.end());
                    info.ad.scheduled_aois = sched_aois.data();
                    info.ad.num_scheduled = sched_aois.size();
                    info.ad.num_sources = m_total;
                    info.ad.arrival_rate = cfg.arrival_rate;
                    info.ad.per_pair_threshold = cfg.per_pair_threshold;
                    policies::FeatureView view{ctx.features.data(), n_ch, fd};
                    chans = learner->select(view, info, pol_rng);
                    break;
                }
            }
            if (cfg.pair_matching == config::PairMatching::random && chans.size() > 1) {
                for (std::size_t k = 0; k + 1 < chans.size(); ++k) {
                    const std::size_t j =
                        k + static_cast<std::size_t>(pol_rng.uniform() *
                                                     static_cast<double>(chans.size() - k));
                    std::swap(chans[k], chans[std::min(j, chans.size() - 1)]);
                }
            }
            for (std::size_t k = 0; k < chans.size() && k < want; ++k) {
                d_pi.pairs.emplace_back(srcs[k], chans[k]);
            }
        }
        if (!d_pi.disjoint()) ++trace.disjointness_violations;
        const auto outcomes = step(net_pi, d_pi, ctx, u, now);
        if (learner) {
            for (const auto& oc : outcomes) {
                learner->record(oc.channel, ctx.feature_row(oc.channel), oc.success);
            }
        }

        // benchmark run: max-weight source + oracle channel
        const std::vector<int> srcs_b = policies::maxweight_sources(net_star, t, p);
        Decision d_star;
        if (!srcs_b.empty()) {
            const std::vector<int> chans_b = envmodel::best_channels(bench_ctx, srcs_b.size());
            for (std::size_t k = 0; k < chans_b.size() && k < srcs_b.size(); ++k) {
                d_star.pairs.emplace_back(srcs_b[k], chans_b[k]);
            }
        }
        step(net_star, d_star, bench_ctx, u_b, now);

        // shadow run: pi's realized sources, oracle channels ordered so each
        // source keeps a channel at least as good as its pi channel
        Decision d_shadow;
        if (!d_pi.idle()) {
            std::vector<std::size_t> order(d_pi.pairs.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return ctx.mu_true[d_pi.pairs[a].second] > ctx.mu_true[d_pi.pairs[b].second];
            });
            const std::vector<int> oracle_chans = envmodel::best_channels(ctx, order.size());
            for (std::size_t k = 0; k < order.size(); ++k) {
                d_shadow.pairs.emplace_back(d_pi.pairs[order[k]].first, oracle_chans[k]);
            }
        }
        step(net_shadow, d_shadow, ctx, u, now, /*allow_stale=*/true);

        // (6)-(7) happened inside step/record; log the slot
        trace.coupling_u[t - 1] = u;
        std::copy(ctx.mu_true.begin(), ctx.mu_true.end(), trace.mu_true.begin() + (t - 1) * n_ch);
        for (std::size_t m = 0; m < m_total; ++m) {
            trace.aoi_pi[(t - 1) * m_total + m] = static_cast<std::int32_t>(net_pi.aoi[m]);
            trace.aoi_star[(t - 1) * m_total + m] = static_cast<std::int32_t>(net_star.aoi[m]);
            trace.aoi_shadow[(t - 1) * m_total + m] = static_cast<std::int32_t>(net_shadow.aoi[m]);
            if (net_pi.aoi[m] < net_shadow.aoi[m]) ++trace.dominance_violations;
        }
        record_pairs(trace.pi_src, trace.pi_ch, d_pi, t, p);
        record_pairs(trace.star_src, trace.star_ch, d_star, t, p);
        record_pairs(trace.shadow_src, trace.shadow_ch, d_shadow, t, p);

        trace.clamped_mu += ctx.clamped;
        double best = -1.0, second = -1.0;
        for (double mu : ctx.mu_true) {
            trace.min_mu_seen = std::min(trace.min_mu_seen, mu);
            if (mu > best) {
                best = mu;
            }
        }
        for (double mu : ctx.mu_true) {
            if (mu < best && mu > second) second = mu;
        }
        if (second >= 0.0) {
            trace.has_gap = true;
            trace.min_gap_seen = std::min(trace.min_gap_seen, best - second);
        }
    }
    return trace;
}

metrics::RunMetrics run_experiment(const config::SimConfig& cfg) {
    cfg.validate();
    const auto grid = metrics::checkpoint_grid(cfg.horizon, cfg.checkpoints);
    const std::size_t n_pol = cfg.channel_policies.size();
    const std::size_t n_rounds = static_cast<std::size_t>(cfg.rounds);

    std::vector<std::vector<metrics::PerRoundSeries>> per_round(
        n_pol, std::vector<metrics::PerRoundSeries>(n_rounds));

    const std::size_t total_tasks = n_pol * n_rounds;
    std::size_t workers = cfg.workers ? cfg.workers : std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
    workers = std::min(workers, total_tasks);

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string error_message;
    std::mutex error_mutex;

    auto worker_fn = [&]() {
        for (;;) {
            const std::size_t task = next.fetch_add(1);
            if (task >= total_tasks || failed.load()) return;
            const std::size_t pol = task / n_rounds;
            const std::uint64_t round = task % n_rounds;
            try {
                const RoundTrace trace = run_round(cfg, round, cfg.channel_policies[pol]);
                per_round[pol][round] = metrics::reduce_round(trace, grid);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                error_message = e.what();
                failed.store(true);
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker_fn);
    for (auto& th : pool) th.join();
    if (failed.load()) throw std::runtime_error("run_experiment: " + error_message);

    metrics::RunMetrics out;
    out.t_grid = grid;
    out.rounds = n_rounds;
    for (std::size_t pol = 0; pol < n_pol; ++pol) {
        out.policies.push_back(metrics::aggregate_policy(cfg.channel_policies[pol].label,
                                                         per_round[pol], grid, cfg.horizon,
                                                         cfg.num_sources));
    }
    // Benchmark series is policy-independent; reduce it from policy 0.
    const std::size_t n_grid = grid.size();
    out.benchmark_aoi_mean.assign(n_grid, 0.0);
    out.benchmark_aoi_stderr.assign(n_grid, 0.0);
    for (std::size_t g = 0; g < n_grid; ++g) {
        const double denom = static_cast<double>(cfg.num_sources) * static_cast<double>(grid[g]);
        double mean = 0.0, sq = 0.0;
        for (std::size_t r = 0; r < n_rounds; ++r) {
            const double v = static_cast<double>(per_round[0][r].aoi_star_sum[g]) / denom;
            mean += v;
            sq += v * v;
        }
        mean /= static_cast<double>(n_rounds);
        out.benchmark_aoi_mean[g] = mean;
        if (n_rounds > 1) {
            const double var =
                (sq - static_cast<double>(n_rounds) * mean * mean) / static_cast<double>(n_rounds - 1);
            out.benchmark_aoi_stderr[g] = std::sqrt(std::max(var, 0.0) / static_cast<double>(n_rounds));
        }
    }
    return out;
}

}  // namespace aoisim::simulator
