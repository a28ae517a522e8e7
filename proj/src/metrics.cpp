#include "aoisim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "aoisim/envmodel.hpp"

namespace aoisim::metrics {

std::vector<std::uint64_t> checkpoint_grid(std::uint64_t horizon, std::size_t points) {
    std::set<std::uint64_t> grid{1, horizon};
    if (points > 1) {
        const double log_t = std::log(static_cast<double>(horizon));
        for (std::size_t i = 0; i < points; ++i) {
            const double f = static_cast<double>(i) / static_cast<double>(points - 1);
            const auto t = static_cast<std::uint64_t>(std::llround(std::exp(f * log_t)));
            grid.insert(std::clamp<std::uint64_t>(t, 1, horizon));
        }
    }
    for (std::uint64_t p10 = 10; p10 <= horizon; p10 *= 10) {
        grid.insert(p10);
        if (p10 > horizon / 10) break;  // overflow guard
    }
    return {grid.begin(), grid.end()};
}

namespace {

const std::vector<std::int32_t>& run_array(const simulator::RoundTrace& trace, Run which) {
    switch (which) {
        case Run::policy: return trace.aoi_pi;
        case Run::benchmark: return trace.aoi_star;
        case Run::shadow: return trace.aoi_shadow;
    }
    throw std::invalid_argument("unknown run");
}

}  // namespace

double aoi_average(const simulator::RoundTrace& trace, Run which, std::uint64_t up_to) {
    if (up_to < 1 || up_to > trace.horizon) throw std::invalid_argument("aoi_average: bad slot");
    const auto& xs = run_array(trace, which);
    long long sum = 0;
    const std::size_t m_total = trace.num_sources;
    for (std::uint64_t t = 1; t <= up_to; ++t) {
        for (std::size_t m = 0; m < m_total; ++m) sum += xs[(t - 1) * m_total + m];
    }
    return static_cast<double>(sum) /
           (static_cast<double>(m_total) * static_cast<double>(up_to));
}

namespace {

std::vector<long long> diff_series(const simulator::RoundTrace& trace,
                                   const std::vector<std::int32_t>& a,
                                   const std::vector<std::int32_t>& b,
                                   const std::vector<std::uint64_t>& grid) {
    std::vector<long long> out(grid.size(), 0);
    long long acc = 0;
    std::size_t g = 0;
    const std::size_t m_total = trace.num_sources;
    for (std::uint64_t t = 1; t <= trace.horizon && g < grid.size(); ++t) {
        const std::size_t base = (t - 1) * m_total;
        for (std::size_t m = 0; m < m_total; ++m) acc += a[base + m] - b[base + m];
        while (g < grid.size() && grid[g] == t) out[g++] = acc;
    }
    return out;
}

}  // namespace

std::vector<long long> regret_series(const simulator::RoundTrace& trace,
                                     const std::vector<std::uint64_t>& grid) {
    return diff_series(trace, trace.aoi_pi, trace.aoi_star, grid);
}

std::vector<long long> shadow_gap_series(const simulator::RoundTrace& trace,
                                         const std::vector<std::uint64_t>& grid) {
    return diff_series(trace, trace.aoi_pi, trace.aoi_shadow, grid);
}

std::vector<long long> suboptimal_count(const simulator::RoundTrace& trace,
                                        const std::vector<std::uint64_t>& grid) {
    std::vector<long long> out(grid.size(), 0);
    long long k_acc = 0;
    std::size_t g = 0;
    const std::size_t p = trace.pairs;
    const std::size_t n_ch = trace.num_channels;
    for (std::uint64_t t = 1; t <= trace.horizon && g < grid.size(); ++t) {
        const double* mu = trace.mu_row(t);
        const std::size_t base = (t - 1) * p;
        if (p == 1) {
            const int ch = trace.pi_ch[base];
            if (ch >= 0) {
                double best = mu[0];
                for (std::size_t n = 1; n < n_ch; ++n) best = std::max(best, mu[n]);
                if (mu[ch] < best) ++k_acc;
            }
        } else {
            std::vector<int> chosen;
            for (std::size_t k = 0; k < p; ++k) {
                if (trace.pi_ch[base + k] >= 0) chosen.push_back(trace.pi_ch[base + k]);
            }
            if (!chosen.empty()) {
                const auto top = envmodel::top_by_value(mu, n_ch, p);
                for (int ch : chosen) {
                    if (std::find(top.begin(), top.end(), ch) == top.end()) ++k_acc;
                }
            }
        }
        while (g < grid.size() && grid[g] == t) out[g++] = k_acc;
    }
    return out;
}

CaseSeries classify_suboptimality(const simulator::RoundTrace& trace,
                                  const std::vector<std::uint64_t>& grid) {
    if (trace.pairs <= 1)
        throw std::invalid_argument("classify_suboptimality: requires p > 1 (use K for p = 1)");
    CaseSeries out;
    out.case1.assign(grid.size(), 0);
    out.case2.assign(grid.size(), 0);
    long long c1 = 0, c2 = 0;
    std::size_t g = 0;
    const std::size_t p = trace.pairs;
    for (std::uint64_t t = 1; t <= trace.horizon && g < grid.size(); ++t) {
        const double* mu = trace.mu_row(t);
        const std::size_t base = (t - 1) * p;
        for (std::size_t i = 0; i < p; ++i) {
            const int m = trace.pi_src[base + i];
            if (m < 0) continue;
            for (std::size_t j = 0; j < p; ++j) {
                if (trace.star_src[base + j] != m) continue;
                const double mu_pi = mu[trace.pi_ch[base + i]];
                const double mu_star = mu[trace.star_ch[base + j]];
                if (mu_pi < mu_star) ++c1;
                else if (mu_pi > mu_star) ++c2;
                break;
            }
        }
        while (g < grid.size() && grid[g] == t) {
            out.case1[g] = c1;
            out.case2[g] = c2;
            ++g;
        }
    }
    return out;
}

RatioDiagnostic theorem1_ratio(const std::vector<double>& regret_mean,
                               const std::vector<double>& k_mean,
                               const std::vector<std::uint64_t>& grid, std::uint64_t horizon) {
    RatioDiagnostic d;
    d.ratio.resize(grid.size());
    bool any_suboptimal = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (k_mean[i] > 0.0) any_suboptimal = true;
        d.ratio[i] = regret_mean[i] / std::max(1.0, k_mean[i]);
    }
    if (!any_suboptimal) {
        std::fill(d.ratio.begin(), d.ratio.end(), 0.0);
        d.verdict = RatioVerdict::no_suboptimal;
        return d;
    }
    std::vector<double> window;
    const double lo = static_cast<double>(horizon) / 10.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (static_cast<double>(grid[i]) >= lo) window.push_back(d.ratio[i]);
    }
    if (window.empty()) {
        d.verdict = RatioVerdict::fail;
        return d;
    }
    std::vector<double> sorted = window;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    d.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    d.verdict = RatioVerdict::pass;
    for (double r : window) {
        if (!(r >= d.median / 2.0 && r <= d.median * 2.0)) {
            d.verdict = RatioVerdict::fail;
            break;
        }
    }
    return d;
}

const char* to_string(RatioVerdict v) {
    switch (v) {
        case RatioVerdict::no_suboptimal: return "no_suboptimal";
        case RatioVerdict::pass: return "pass";
        case RatioVerdict::fail: return "fail";
    }
    return "?";
}

PerRoundSeries reduce_round(const simulator::RoundTrace& trace,
                            const std::vector<std::uint64_t>& grid) {
    PerRoundSeries s;
    s.regret = regret_series(trace, grid);
    s.k_count = suboptimal_count(trace, grid);
    if (trace.pairs > 1) {
        const CaseSeries cs = classify_suboptimality(trace, grid);
        s.case1 = cs.case1;
        s.case2 = cs.case2;
    }

    s.aoi_pi_sum.assign(grid.size(), 0);
    s.aoi_star_sum.assign(grid.size(), 0);
    long long acc_pi = 0, acc_star = 0;
    std::size_t g = 0;
    const std::size_t m_total = trace.num_sources;
    for (std::uint64_t t = 1; t <= trace.horizon && g < grid.size(); ++t) {
        const std::size_t base = (t - 1) * m_total;
        for (std::size_t m = 0; m < m_total; ++m) {
            acc_pi += trace.aoi_pi[base + m];
            acc_star += trace.aoi_star[base + m];
        }
        while (g < grid.size() && grid[g] == t) {
            s.aoi_pi_sum[g] = acc_pi;
            s.aoi_star_sum[g] = acc_star;
            ++g;
        }
    }

    s.dominance_violations = trace.dominance_violations;
    s.disjointness_violations = trace.disjointness_violations;
    s.clamp_fraction = static_cast<double>(trace.clamped_mu) /
                       (static_cast<double>(trace.horizon) * static_cast<double>(trace.num_channels));
    s.min_mu = trace.min_mu_seen;
    s.min_gap = trace.min_gap_seen;
    s.has_gap = trace.has_gap;
    return s;
}

namespace {

void mean_stderr(const std::vector<std::vector<long long> const*>& rows, std::size_t g,
                 double& mean, double& stderr_out) {
    const std::size_t n = rows.size();
    double sum = 0.0, sq = 0.0;
    for (const auto* row : rows) {
        const double v = static_cast<double>((*row)[g]);
        sum += v;
        sq += v * v;
    }
    mean = sum / static_cast<double>(n);
    stderr_out = 0.0;
    if (n > 1) {
        const double var = (sq - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1);
        stderr_out = std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
    }
}

}  // namespace

PolicyAggregate aggregate_policy(const std::string& label,
                                 const std::vector<PerRoundSeries>& rounds,
                                 const std::vector<std::uint64_t>& grid, std::uint64_t horizon,
                                 std::size_t num_sources) {
    PolicyAggregate agg;
    agg.label = label;
    const std::size_t n_grid = grid.size();
    const std::size_t n_rounds = rounds.size();
    agg.regret_mean.resize(n_grid);
    agg.regret_stderr.resize(n_grid);
    agg.k_mean.resize(n_grid);
    agg.k_stderr.resize(n_grid);
    agg.aoi_mean.resize(n_grid);
    agg.aoi_stderr.resize(n_grid);
    const bool with_cases = !rounds.empty() && !rounds.front().case1.empty();
    if (with_cases) {
        agg.case1_mean.resize(n_grid);
        agg.case2_mean.resize(n_grid);
    }

    std::vector<std::vector<long long> const*> view(n_rounds);
    for (std::size_t g = 0; g < n_grid; ++g) {
        for (std::size_t r = 0; r < n_rounds; ++r) view[r] = &rounds[r].regret;
        mean_stderr(view, g, agg.regret_mean[g], agg.regret_stderr[g]);
        for (std::size_t r = 0; r < n_rounds; ++r) view[r] = &rounds[r].k_count;
        mean_stderr(view, g, agg.k_mean[g], agg.k_stderr[g]);
        for (std::size_t r = 0; r < n_rounds; ++r) view[r] = &rounds[r].aoi_pi_sum;
        double m = 0.0, se = 0.0;
        const double denom = static_cast<double>(num_sources) * static_cast<double>(grid[g]);
        {
            double sum = 0.0, sq = 0.0;
            for (std::size_t r = 0; r < n_rounds; ++r) {
                const double v = static_cast<double>(rounds[r].aoi_pi_sum[g]) / denom;
                sum += v;
                sq += v * v;
            }
            m = sum / static_cast<double>(n_rounds);
            if (n_rounds > 1) {
                const double var = (sq - static_cast<double>(n_rounds) * m * m) /
                                   static_cast<double>(n_rounds - 1);
                se = std::sqrt(std::max(var, 0.0) / static_cast<double>(n_rounds));
            }
        }
        agg.aoi_mean[g] = m;
        agg.aoi_stderr[g] = se;
        if (with_cases) {
            double c1 = 0.0, c2 = 0.0;
            for (std::size_t r = 0; r < n_rounds; ++r) {
                c1 += static_cast<double>(rounds[r].case1[g]);
                c2 += static_cast<double>(rounds[r].case2[g]);
            }
            agg.case1_mean[g] = c1 / static_cast<double>(n_rounds);
            agg.case2_mean[g] = c2 / static_cast<double>(n_rounds);
        }
    }

    agg.regret_final_rounds.resize(n_rounds);
    agg.k_final_rounds.resize(n_rounds);
    for (std::size_t r = 0; r < n_rounds; ++r) {
        agg.regret_final_rounds[r] = static_cast<double>(rounds[r].regret[n_grid - 1]);
        agg.k_final_rounds[r] = static_cast<double>(rounds[r].k_count[n_grid - 1]);
    }

    agg.ratio = theorem1_ratio(agg.regret_mean, agg.k_mean, grid, horizon);

    agg.min_mu_seen = std::numeric_limits<double>::infinity();
    agg.min_gap_seen = std::numeric_limits<double>::infinity();
    double clamp_sum = 0.0;
    for (const auto& r : rounds) {
        agg.dominance_violations += r.dominance_violations;
        agg.disjointness_violations += r.disjointness_violations;
        clamp_sum += r.clamp_fraction;
        agg.min_mu_seen = std::min(agg.min_mu_seen, r.min_mu);
        if (r.has_gap) {
            agg.has_gap = true;
            agg.min_gap_seen = std::min(agg.min_gap_seen, r.min_gap);
        }
    }
    agg.clamp_fraction = rounds.empty() ? 0.0 : clamp_sum / static_cast<double>(n_rounds);
    return agg;
}

}  // namespace aoisim::metrics
