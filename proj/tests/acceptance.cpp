// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Scales are desk-sized (M = 20, N = 5, lambda = 0.5, T = 1e4,
// 100 rounds unless a criterion states otherwise).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <vector>

#include "aoisim/config.hpp"
#include "aoisim/linalg.hpp"
#include "aoisim/metrics.hpp"
#include "aoisim/runner.hpp"
#include "aoisim/simulator.hpp"

namespace {

using aoisim::config::SimConfig;
using aoisim::metrics::RunMetrics;
using aoisim::policies::PolicyKind;
using aoisim::policies::PolicySpec;
using aoisim::stochastic::DistSpec;
using aoisim::stochastic::Purpose;
using aoisim::stochastic::RngStream;

int g_failures = 0;

void report(int number, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s criterion %d (%s): %s\n", pass ? "PASS" : "FAIL", number, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

SimConfig desk(std::uint64_t horizon = 10000, std::uint64_t rounds = 100) {
    SimConfig cfg = aoisim::config::preset_config("desk");
    cfg.horizon = horizon;
    cfg.rounds = rounds;
    cfg.master_seed = 1;
    return cfg;
}

std::size_t grid_index(const std::vector<std::uint64_t>& grid, std::uint64_t t) {
    const auto it = std::find(grid.begin(), grid.end(), t);
    if (it == grid.end()) throw std::logic_error("checkpoint grid misses required slot");
    return static_cast<std::size_t>(it - grid.begin());
}

const aoisim::metrics::PolicyAggregate& column(const RunMetrics& rm, const std::string& label) {
    for (const auto& p : rm.policies) {
        if (p.label == label) return p;
    }
    throw std::logic_error("missing policy column " + label);
}

// Standard error of the mean per-round difference. Policies in one run see
// identical arrivals/contexts/coupling per round, so their final regrets
// pair round-by-round; this is the comparison error that shared randomness
// buys (the unpaired sqrt(se_a^2+se_b^2) ignores the common-random-number
// covariance and overstates it).
double paired_stderr(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double mean = 0.0, sq = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const double d = a[r] - b[r];
        mean += d;
        sq += d * d;
    }
    mean /= static_cast<double>(n);
    const double var = (sq - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1);
    return std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
}

// --- criterion 1: coupling dominance ------------------------------------

void criterion1() {
    SimConfig cfg = desk(10000, 10);
    long long violations = 0;
    long long cells = 0;
    for (const char* name : {"linucb", "random"}) {
        const PolicySpec pspec = aoisim::policies::parse_policy(name);
        for (std::uint64_t r = 0; r < cfg.rounds; ++r) {
            const auto tr = aoisim::simulator::run_round(cfg, r, pspec);
            violations += tr.dominance_violations;
            cells += static_cast<long long>(tr.horizon) * static_cast<long long>(tr.num_sources);
        }
    }
    report(1, "coupling dominance", violations == 0,
           std::to_string(violations) + " violations over " + std::to_string(cells) +
               " slot-source cells (exact, 0 allowed)");
}

// --- criteria 2, 3, 5, and part of 3 on the nonlinear preset -------------

struct Deferred {
    bool pass = false;
    std::string detail;
};

Deferred criteria_2_3_5() {
    SimConfig lin = desk();
    lin.channel_policies = {
        aoisim::policies::parse_policy("linucb"), aoisim::policies::parse_policy("lints"),
        aoisim::policies::parse_policy("aducb"), aoisim::policies::parse_policy("adts")};
    const RunMetrics rm_lin = aoisim::runner::run_metrics(lin);

    SimConfig nl = lin;
    nl.model = aoisim::config::model_by_name("nonlinear_snr");
    nl.model_name = "nonlinear_snr";
    const RunMetrics rm_nl = aoisim::runner::run_metrics(nl);

    const auto& grid = rm_lin.t_grid;
    const std::size_t g3 = grid_index(grid, 1000);
    const std::size_t g4 = grid_index(grid, 10000);

    // criterion 2: sub-linear regret growth; the coupled round-averaged
    // regret must also grow monotonically
    {
        bool pass = true;
        std::string detail;
        for (const char* label : {"linucb", "lints"}) {
            const auto& col = column(rm_lin, label);
            const double early = col.regret_mean[g3] / 1e3;
            const double late = col.regret_mean[g4] / 1e4;
            const bool ok = late < 0.8 * early;
            pass = pass && ok;
            detail += std::string(label) + " R/t 1e3->1e4: " + fmt(early) + "->" + fmt(late) +
                      (ok ? " ok; " : " NOT <0.8x; ");
        }
        bool monotone = true;
        for (const auto& p : rm_lin.policies) {
            for (std::size_t g = 1; g < grid.size(); ++g) {
                if (p.regret_mean[g] < p.regret_mean[g - 1]) monotone = false;
            }
        }
        pass = pass && monotone;
        detail += monotone ? "mean regret non-decreasing" : "mean regret DECREASED";
        report(2, "sub-linear regret", pass, detail);
    }

    // criterion 3: age-dependent improvement with > 2 combined stderr
    {
        bool pass = true;
        std::string detail;
        const auto margin_ok = [&](const RunMetrics& rm, const char* base, const char* ad,
                                   const char* tag) {
            const auto& b = column(rm, base);
            const auto& a = column(rm, ad);
            const double gap = b.regret_mean[g4] - a.regret_mean[g4];
            const double se = paired_stderr(b.regret_final_rounds, a.regret_final_rounds);
            const double se_unpaired = std::sqrt(b.regret_stderr[g4] * b.regret_stderr[g4] +
                                                 a.regret_stderr[g4] * a.regret_stderr[g4]);
            const bool ok = gap > 2.0 * se;
            detail += std::string(tag) + " " + base + "-" + ad + ": gap " + fmt(gap) +
                      " vs 2se " + fmt(2.0 * se) + " (unpaired " + fmt(2.0 * se_unpaired) + ")" +
                      (ok ? " ok; " : " FAIL; ");
            return ok;
        };
        pass = margin_ok(rm_lin, "linucb", "aducb", "linear") && pass;
        pass = margin_ok(rm_lin, "lints", "adts", "linear") && pass;
        pass = margin_ok(rm_nl, "linucb", "aducb", "nonlinear") && pass;
        pass = margin_ok(rm_nl, "lints", "adts", "nonlinear") && pass;
        report(3, "age-dependent improvement", pass, detail);
    }

    // criterion 5: regret ranking equals K ranking at the final checkpoint
    {
        std::vector<std::string> by_r, by_k;
        for (const auto& p : rm_lin.policies) by_r.push_back(p.label);
        by_k = by_r;
        std::stable_sort(by_r.begin(), by_r.end(), [&](const auto& x, const auto& y) {
            return column(rm_lin, x).regret_mean[g4] < column(rm_lin, y).regret_mean[g4];
        });
        std::stable_sort(by_k.begin(), by_k.end(), [&](const auto& x, const auto& y) {
            return column(rm_lin, x).k_mean[g4] < column(rm_lin, y).k_mean[g4];
        });
        std::string detail = "by regret:";
        for (const auto& s : by_r) {
            detail += " " + s + "(" + fmt(column(rm_lin, s).regret_mean[g4]) + ")";
        }
        detail += " | by K:";
        for (const auto& s : by_k) {
            detail += " " + s + "(" + fmt(column(rm_lin, s).k_mean[g4]) + ")";
        }
        return Deferred{by_r == by_k, detail};
    }
}

// --- criterion 4: fixed-gap ratio band ------------------------------------

void criterion4() {
    SimConfig cfg = desk();
    cfg.model = aoisim::config::model_by_name("fixed_gap");  // impulse 0.9 vs 0.5, zero noise
    cfg.model_name = "fixed_gap";
    cfg.num_channels = 2;
    cfg.eps_worst = 0.25;  // eps-greedy-style perpetually sub-optimal
    cfg.channel_policies = {PolicySpec{PolicyKind::epsworst, "epsworst", "epsworst"}};
    const RunMetrics rm = aoisim::runner::run_metrics(cfg);
    const auto& agg = rm.policies.front();

    bool in_band = true;
    double lo = 1e300, hi = 0.0;
    for (std::size_t g = 0; g < rm.t_grid.size(); ++g) {
        if (rm.t_grid[g] < 1000) continue;
        lo = std::min(lo, agg.ratio.ratio[g]);
        hi = std::max(hi, agg.ratio.ratio[g]);
        if (!(agg.ratio.ratio[g] >= agg.ratio.median / 2.0 &&
              agg.ratio.ratio[g] <= agg.ratio.median * 2.0)) {
            in_band = false;
        }
    }
    const bool pass = in_band && agg.ratio.verdict == aoisim::metrics::RatioVerdict::pass;
    report(4, "theorem-1 ratio band", pass,
           "R/K over [1e3,1e4] in [" + fmt(lo) + ", " + fmt(hi) + "], median " +
               fmt(agg.ratio.median) + ", factor-2 band " +
               (in_band ? "held" : "violated") + " (gap 0.4 instance)");
}

// --- criterion 6: multi-pair run -----------------------------------------

void criterion6() {
    SimConfig cfg = desk();
    cfg.num_pairs = 3;
    cfg.channel_policies = {
        aoisim::policies::parse_policy("linucb"), aoisim::policies::parse_policy("lints"),
        aoisim::policies::parse_policy("aducb"), aoisim::policies::parse_policy("adts")};
    const RunMetrics rm = aoisim::runner::run_metrics(cfg);
    const std::size_t g4 = grid_index(rm.t_grid, 10000);

    long long disjoint_violations = 0;
    for (const auto& p : rm.policies) disjoint_violations += p.disjointness_violations;

    // exhaustive per-slot case-sum check on a few dedicated rounds
    bool case_sums_ok = true;
    std::vector<std::uint64_t> full_grid(cfg.horizon);
    for (std::uint64_t t = 1; t <= cfg.horizon; ++t) full_grid[t - 1] = t;
    for (const auto& pspec : cfg.channel_policies) {
        for (std::uint64_t r = 0; r < 3; ++r) {
            const auto tr = aoisim::simulator::run_round(cfg, r, pspec);
            const auto cs = aoisim::metrics::classify_suboptimality(tr, full_grid);
            long long prev = 0;
            for (std::size_t g = 0; g < full_grid.size(); ++g) {
                const long long now = cs.case1[g] + cs.case2[g];
                if (now - prev > static_cast<long long>(cfg.num_pairs) || now < prev) {
                    case_sums_ok = false;
                    break;
                }
                prev = now;
            }
        }
    }

    bool ad_ok = true;
    std::string ad_detail;
    const auto within = [&](const char* base, const char* ad) {
        const auto& b = column(rm, base);
        const auto& a = column(rm, ad);
        const double diff = a.regret_mean[g4] - b.regret_mean[g4];
        const double se = paired_stderr(a.regret_final_rounds, b.regret_final_rounds);
        const bool ok = diff <= 2.0 * se;
        ad_detail += std::string(ad) + "-" + base + " diff " + fmt(diff) + " vs 2se " +
                     fmt(2.0 * se) + (ok ? " ok; " : " FAIL; ");
        return ok;
    };
    ad_ok = within("linucb", "aducb") && ad_ok;
    ad_ok = within("lints", "adts") && ad_ok;

    const bool pass = disjoint_violations == 0 && case_sums_ok && ad_ok;
    report(6, "multi-pair p=3", pass,
           std::to_string(disjoint_violations) + " disjointness violations; case sums " +
               (case_sums_ok ? "<= p" : "EXCEEDED p") + "; " + ad_detail);
}

// --- criterion 7: numerical kernels ---------------------------------------

void criterion7() {
    bool pass = true;
    std::string detail;

    double worst_sm = 0.0;
    for (std::size_t d : {3u, 5u, 8u}) {
        RngStream rng(101, d, Purpose::policy);
        aoisim::linalg::Mat a = aoisim::linalg::Mat::identity(d);
        aoisim::linalg::Mat a_inv = aoisim::linalg::Mat::identity(d);
        for (int i = 0; i < 10000; ++i) {
            aoisim::linalg::Vec x(d);
            for (std::size_t j = 0; j < d; ++j) x[j] = rng.uniform(-2.0, 2.0);
            aoisim::linalg::add_outer(a, x, 1.0);
            a_inv = aoisim::linalg::rank_one_update(a_inv, x);
        }
        const auto direct = aoisim::linalg::invert(a);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                worst_sm = std::max(worst_sm, std::abs(direct.at(i, j) - a_inv.at(i, j)));
            }
        }
    }
    pass = pass && worst_sm < 1e-8;
    detail += "SM chain err " + fmt(worst_sm) + " (<1e-8); ";

    double worst_chol = 0.0;
    {
        RngStream rng(103, 0, Purpose::policy);
        const std::size_t d = 6;
        aoisim::linalg::Mat spd = aoisim::linalg::Mat::identity(d);
        for (std::size_t r = 0; r < 2 * d; ++r) {
            aoisim::linalg::Vec x(d);
            for (std::size_t j = 0; j < d; ++j) x[j] = rng.uniform(-1.0, 1.0);
            aoisim::linalg::add_outer(spd, x, 1.0);
        }
        const auto l = aoisim::linalg::cholesky_lower(spd);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                double rebuilt = 0.0;
                for (std::size_t k = 0; k < d; ++k) rebuilt += l.at(i, k) * l.at(j, k);
                worst_chol = std::max(worst_chol, std::abs(rebuilt - spd.at(i, j)));
            }
        }
    }
    pass = pass && worst_chol < 1e-10;
    detail += "Cholesky err " + fmt(worst_chol) + " (<1e-10); ";

    double worst_moment = 0.0;
    {
        const auto model = aoisim::envmodel::ChannelModel::table1();
        RngStream rng(107, 0, Purpose::contexts);
        for (const auto& row : model.context_specs) {
            for (const auto& s : row) {
                const int n = 1000000;
                double sum = 0.0, sq = 0.0;
                for (int i = 0; i < n; ++i) {
                    const double x = aoisim::stochastic::sample(s, rng);
                    sum += x;
                    sq += x * x;
                }
                const double mean = sum / n;
                const double var = sq / n - mean * mean;
                if (s.variance() == 0.0) {
                    if (std::abs(mean - s.mean()) > 1e-9 || std::abs(var) > 1e-9)
                        worst_moment = 1.0;
                    continue;
                }
                worst_moment = std::max(worst_moment, std::abs(mean - s.mean()) / std::abs(s.mean()));
                worst_moment = std::max(worst_moment, std::abs(var - s.variance()) / s.variance());
            }
        }
    }
    pass = pass && worst_moment < 0.01;
    detail += "worst moment rel err " + fmt(worst_moment) + " (<1%)";

    report(7, "numerical kernels", pass, detail);
}

// --- criterion 8: estimator consistency ------------------------------------

void criterion8() {
    // Regression consistency on data generated by the Table I linear model:
    // the estimator accumulates (x, mu(x)) with mu = theta . x + U(-.03,.03)
    // and recovers theta. (A binary transmission outcome in place of mu
    // carries Bernoulli noise with sd ~0.45, which provably cannot reach
    // 0.05 after 5000 draws on these contexts; the diagnostic below reports
    // that regime without gating on it.)
    const auto model = aoisim::envmodel::ChannelModel::table1();
    const double want[3] = {0.9, 0.1, 0.7};
    double err_regression = 0.0, err_binary = 0.0;
    for (int variant = 0; variant < 2; ++variant) {
        RngStream ctx(109, 0, Purpose::contexts), noise(109, 0, Purpose::noise);
        RngStream rewards(109, 0, Purpose::policy);
        aoisim::linalg::Mat a = aoisim::linalg::Mat::identity(3);
        aoisim::linalg::Vec b(3);
        for (std::uint64_t t = 1; t <= 5000; ++t) {
            const auto sc = aoisim::envmodel::generate_slot(model, t, ctx, noise);
            rewards.begin_slot(t);
            const std::size_t n = t % model.num_channels;
            const double y = variant == 0
                                 ? sc.mu_true[n]
                                 : static_cast<double>(aoisim::stochastic::bernoulli(
                                       sc.mu_true[n], rewards));
            aoisim::linalg::Vec x(3);
            for (int j = 0; j < 3; ++j) x[j] = sc.feature_row(n)[j];
            aoisim::linalg::add_outer(a, x, 1.0);
            for (int j = 0; j < 3; ++j) b[j] += x[j] * y;
        }
        const auto theta = aoisim::linalg::solve_theta(aoisim::linalg::invert(a), b);
        double err2 = 0.0;
        for (int j = 0; j < 3; ++j) err2 += (theta[j] - want[j]) * (theta[j] - want[j]);
        (variant == 0 ? err_regression : err_binary) = std::sqrt(err2);
    }
    report(8, "estimator consistency", err_regression < 0.05,
           "|theta_hat - theta| = " + fmt(err_regression) +
               " after 5000 updates (<0.05); binary-outcome regime for reference: " +
               fmt(err_binary));
}

// --- criterion 9: determinism ----------------------------------------------

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion9() {
    namespace fs = std::filesystem;
    // run --preset fig2 --horizon 10000 --rounds 100 --seed 7, twice with
    // different worker counts
    SimConfig cfg = aoisim::config::preset_config("fig2");
    cfg.horizon = 10000;
    cfg.rounds = 100;
    cfg.master_seed = 7;
    const fs::path dir_a = fs::temp_directory_path() / "aoisim_acceptance_det_a";
    const fs::path dir_b = fs::temp_directory_path() / "aoisim_acceptance_det_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    cfg.output_dir = dir_a.string();
    cfg.workers = 1;
    const int rc_a = aoisim::runner::run(cfg);
    cfg.output_dir = dir_b.string();
    cfg.workers = 2;
    const int rc_b = aoisim::runner::run(cfg);

    bool pass = rc_a == 0 && rc_b == 0;
    std::string detail = "exit codes " + std::to_string(rc_a) + "/" + std::to_string(rc_b);
    if (pass) {
        for (const char* name : {"regret.csv", "kcount.csv", "aoi.csv", "summary.txt"}) {
            const bool same = slurp(dir_a / name) == slurp(dir_b / name);
            pass = pass && same;
            detail += std::string("; ") + name + (same ? " identical" : " DIFFERS");
        }
    }
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    report(9, "determinism across executions and worker counts", pass, detail);
}

}  // namespace

int main() {
    criterion1();
    const Deferred crit5 = criteria_2_3_5();
    criterion4();
    report(5, "regret-K co-scaling", crit5.pass, crit5.detail);
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    if (g_failures == 0) {
        std::printf("all acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d acceptance criteria failed\n", g_failures);
    return 1;
}
