#include "aoisim/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "aoisim/kernels.hpp"
#include "aoisim/linalg.hpp"
#include "aoisim/simulator.hpp"

namespace aoisim::runner {

namespace fs = std::filesystem;
using config::SimConfig;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_table(const metrics::RunMetrics& rm,
                      const std::string& suffix_mean, const std::string& suffix_stderr,
                      const std::vector<double> metrics::PolicyAggregate::*mean,
                      const std::vector<double> metrics::PolicyAggregate::*stderr_member,
                      bool with_benchmark) {
    std::ostringstream out;
    out << "t";
    if (with_benchmark) out << ",benchmark_aoi_mean,benchmark_aoi_stderr";
    for (const auto& p : rm.policies) {
        out << "," << p.label << suffix_mean << "," << p.label << suffix_stderr;
    }
    out << "\n";
    for (std::size_t g = 0; g < rm.t_grid.size(); ++g) {
        out << rm.t_grid[g];
        if (with_benchmark)
            out << "," << fmt(rm.benchmark_aoi_mean[g]) << "," << fmt(rm.benchmark_aoi_stderr[g]);
        for (const auto& p : rm.policies) {
            out << "," << fmt((p.*mean)[g]) << "," << fmt((p.*stderr_member)[g]);
        }
        out << "\n";
    }
    return out.str();
}

std::string cases_table(const metrics::RunMetrics& rm) {
    std::ostringstream out;
    out << "t";
    for (const auto& p : rm.policies) {
        out << "," << p.label << "_case1_mean," << p.label << "_case2_mean";
    }
    out << "\n";
    for (std::size_t g = 0; g < rm.t_grid.size(); ++g) {
        out << rm.t_grid[g];
        for (const auto& p : rm.policies) {
            out << "," << fmt(p.case1_mean[g]) << "," << fmt(p.case2_mean[g]);
        }
        out << "\n";
    }
    return out.str();
}

std::string summary_text(const SimConfig& cfg, const metrics::RunMetrics& rm) {
    const std::size_t last = rm.t_grid.size() - 1;
    const auto params = cfg.resolved_params(cfg.model.feature_dim());
    std::ostringstream out;
    out << "[run]\n";
    if (!cfg.preset.empty()) out << "preset = " << cfg.preset << "\n";
    out << "model = " << cfg.model_name << "\n"
        << "sources = " << cfg.num_sources << "\n"
        << "channels = " << cfg.num_channels << "\n"
        << "pairs = " << cfg.num_pairs << "\n"
        << "horizon = " << cfg.horizon << "\n"
        << "arrival_rate = " << fmt(cfg.arrival_rate) << "\n"
        << "rounds = " << cfg.rounds << "\n"
        << "seed = " << cfg.master_seed << "\n"
        << "source_policy = "
        << (cfg.source_policy == policies::SourcePolicy::maxweight ? "maxweight" : "roundrobin")
        << "\n"
        << "coupled = " << (cfg.uncoupled ? "false" : "true") << "\n"
        << "alpha = " << fmt(params.alpha) << "\n"
        << "v = " << fmt(params.v) << "\n"
        << "delta = " << fmt(params.delta) << "\n"
        << "benchmark_final_aoi_mean = " << fmt(rm.benchmark_aoi_mean[last]) << "\n";
    for (const auto& p : rm.policies) {
        out << "\n[policy " << p.label << "]\n"
            << "final_regret_mean = " << fmt(p.regret_mean[last]) << "\n"
            << "final_regret_stderr = " << fmt(p.regret_stderr[last]) << "\n"
            << "final_k_mean = " << fmt(p.k_mean[last]) << "\n"
            << "final_k_stderr = " << fmt(p.k_stderr[last]) << "\n"
            << "final_aoi_mean = " << fmt(p.aoi_mean[last]) << "\n"
            << "ratio_final = " << fmt(p.ratio.ratio[last]) << "\n"
            << "ratio_median = " << fmt(p.ratio.median) << "\n"
            << "ratio_verdict = " << metrics::to_string(p.ratio.verdict) << "\n"
            << "clamp_fraction = " << fmt(p.clamp_fraction) << "\n"
            << "min_mu_seen = " << fmt(p.min_mu_seen) << "\n"
            << "min_gap_seen = " << (p.has_gap ? fmt(p.min_gap_seen) : std::string("none")) << "\n"
            << "dominance_violations = " << p.dominance_violations << "\n"
            << "disjointness_violations = " << p.disjointness_violations << "\n";
    }
    return out.str();
}

void write_one(const fs::path& dir, const std::string& name, const std::string& content,
               std::vector<fs::path>& written) {
    const fs::path tmp = dir / (name + ".tmp");
    const fs::path final_path = dir / name;
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp.string());
        f << content;
        if (!f.good()) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, final_path);
    written.push_back(final_path);
}

std::string trace_jsonl(const simulator::RoundTrace& tr) {
    std::ostringstream out;
    const std::size_t m_total = tr.num_sources;
    const std::size_t n_ch = tr.num_channels;
    const std::size_t p = tr.pairs;
    auto pairs_of = [&](const std::vector<std::int16_t>& src, const std::vector<std::int16_t>& ch,
                        std::uint64_t t) {
        std::ostringstream s;
        s << "[";
        bool first = true;
        for (std::size_t k = 0; k < p; ++k) {
            const int m = src[(t - 1) * p + k];
            if (m < 0) continue;
            if (!first) s << ",";
            s << "[" << m << "," << ch[(t - 1) * p + k] << "]";
            first = false;
        }
        s << "]";
        return s.str();
    };
    for (std::uint64_t t = 1; t <= tr.horizon; ++t) {
        out << "{\"t\":" << t << ",\"u\":" << fmt(tr.coupling_u[t - 1]) << ",\"mu\":[";
        for (std::size_t n = 0; n < n_ch; ++n) {
            if (n) out << ",";
            out << fmt(tr.mu_true[(t - 1) * n_ch + n]);
        }
        out << "],\"arr\":[";
        for (std::size_t m = 0; m < m_total; ++m) {
            if (m) out << ",";
            out << int(tr.arrivals[(t - 1) * m_total + m]);
        }
        out << "],\"pi\":" << pairs_of(tr.pi_src, tr.pi_ch, t)
            << ",\"star\":" << pairs_of(tr.star_src, tr.star_ch, t)
            << ",\"shadow\":" << pairs_of(tr.shadow_src, tr.shadow_ch, t) << ",\"aoi_pi\":[";
        for (std::size_t m = 0; m < m_total; ++m) {
            if (m) out << ",";
            out << tr.aoi_pi[(t - 1) * m_total + m];
        }
        out << "],\"aoi_star\":[";
        for (std::size_t m = 0; m < m_total; ++m) {
            if (m) out << ",";
            out << tr.aoi_star[(t - 1) * m_total + m];
        }
        out << "],\"aoi_shadow\":[";
        for (std::size_t m = 0; m < m_total; ++m) {
            if (m) out << ",";
            out << tr.aoi_shadow[(t - 1) * m_total + m];
        }
        out << "]}\n";
    }
    return out.str();
}

}  // namespace

metrics::RunMetrics run_metrics(const SimConfig& cfg) { return simulator::run_experiment(cfg); }

namespace {

int run_impl(const SimConfig& cfg_in, metrics::RunMetrics* out) {
    SimConfig cfg = cfg_in;
    if (cfg.output_dir.empty()) cfg.output_dir = config::default_output_dir();
    std::vector<fs::path> written;
    try {
        cfg.validate();
        const metrics::RunMetrics rm = simulator::run_experiment(cfg);
        const fs::path dir(cfg.output_dir);
        fs::create_directories(dir);
        write_one(dir, "regret.csv",
                  csv_table(rm, "_regret_mean", "_regret_stderr",
                            &metrics::PolicyAggregate::regret_mean,
                            &metrics::PolicyAggregate::regret_stderr, false),
                  written);
        write_one(dir, "kcount.csv",
                  csv_table(rm, "_k_mean", "_k_stderr", &metrics::PolicyAggregate::k_mean,
                            &metrics::PolicyAggregate::k_stderr, false),
                  written);
        write_one(dir, "aoi.csv",
                  csv_table(rm, "_aoi_mean", "_aoi_stderr", &metrics::PolicyAggregate::aoi_mean,
                            &metrics::PolicyAggregate::aoi_stderr, true),
                  written);
        if (cfg.num_pairs > 1) write_one(dir, "cases.csv", cases_table(rm), written);
        write_one(dir, "summary.txt", summary_text(cfg, rm), written);
        if (cfg.dump_traces) {
            const fs::path tdir = dir / "traces";
            fs::create_directories(tdir);
            for (const auto& pspec : cfg.channel_policies) {
                for (std::uint64_t r = 0; r < cfg.rounds; ++r) {
                    const simulator::RoundTrace tr = simulator::run_round(cfg, r, pspec);
                    write_one(tdir, pspec.label + "_round" + std::to_string(r) + ".jsonl",
                              trace_jsonl(tr), written);
                }
            }
        }
        if (out) *out = rm;
        return 0;
    } catch (const std::exception& e) {
        for (const auto& p : written) {
            std::error_code ec;
            fs::remove(p, ec);
        }
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int run(const SimConfig& cfg_in) { return run_impl(cfg_in, nullptr); }

// --- verify battery ------------------------------------------------------

namespace {

using stochastic::DistSpec;
using stochastic::Purpose;
using stochastic::RngStream;

CheckResult check_sherman(const VerifyOptions& opts) {
    CheckResult res{"sherman", true, ""};
    double worst = 0.0;
    for (std::size_t d : {3u, 5u, 8u}) {
        RngStream rng(opts.seed, 17, Purpose::policy, d);
        linalg::Mat a = linalg::Mat::identity(d);
        linalg::Mat a_inv = linalg::Mat::identity(d);
        for (int i = 0; i < 10000; ++i) {
            linalg::Vec x(d);
            for (std::size_t j = 0; j < d; ++j) x[j] = rng.uniform(-2.0, 2.0);
            linalg::add_outer(a, x, 1.0);
            a_inv = linalg::rank_one_update(a_inv, x);
        }
        const linalg::Mat direct = linalg::invert(a);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                worst = std::max(worst, std::abs(direct.at(i, j) - a_inv.at(i, j)));
            }
        }
    }
    res.pass = worst < 1e-8;
    res.detail = "max |chain - direct| = " + fmt(worst) + " (tolerance 1e-8)";
    return res;
}

CheckResult check_moments(const VerifyOptions& opts) {
    CheckResult res{"moments", true, ""};
    const auto model = envmodel::ChannelModel::table1();
    std::vector<DistSpec> specs;
    for (const auto& row : model.context_specs) {
        for (const auto& s : row) specs.push_back(s);
    }
    specs.push_back(std::get<envmodel::LinearTruth>(model.truth).noise);
    double worst_rel = 0.0;
    std::string worst_name;
    RngStream rng(opts.seed, 23, Purpose::contexts, 99);
    for (const auto& s : specs) {
        const std::size_t n = 1000000;
        double sum = 0.0, sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = stochastic::sample(s, rng);
            sum += x;
            sq += x * x;
        }
        const double emp_mean = sum / static_cast<double>(n);
        const double emp_var = sq / static_cast<double>(n) - emp_mean * emp_mean;
        const double am = s.mean(), av = s.variance();
        if (av == 0.0) {
            // constant draws: only summation rounding may show up
            if (std::abs(emp_var) > 1e-9 || std::abs(emp_mean - am) > 1e-9) {
                res.pass = false;
                worst_name = s.describe();
            }
            continue;
        }
        const double rel_m = am == 0.0 ? std::abs(emp_mean) : std::abs(emp_mean - am) / std::abs(am);
        const double rel_v = std::abs(emp_var - av) / av;
        const double rel = std::max(rel_m, rel_v);
        if (rel > worst_rel) {
            worst_rel = rel;
            worst_name = s.describe();
        }
    }
    if (worst_rel >= 0.01) res.pass = false;
    res.detail = "worst relative moment error " + fmt(worst_rel) + " (" + worst_name +
                 ", tolerance 1% over 1e6 draws)";
    return res;
}

CheckResult check_coupling(const VerifyOptions& opts) {
    CheckResult res{"coupling", true, ""};
    SimConfig cfg = config::preset_config("desk");
    cfg.horizon = opts.horizon;
    cfg.rounds = std::max<std::uint64_t>(1, opts.rounds);
    cfg.master_seed = opts.seed;
    long long violations = 0;
    std::uint64_t slots = 0;
    for (const char* name : {"linucb", "random"}) {
        const auto pspec = policies::parse_policy(name);
        for (std::uint64_t r = 0; r < cfg.rounds; ++r) {
            const auto tr = simulator::run_round(cfg, r, pspec);
            violations += tr.dominance_violations;
            slots += tr.horizon;
        }
    }
    res.pass = violations == 0;
    res.detail = std::to_string(violations) + " dominance violations over " +
                 std::to_string(slots) + " slots x " + std::to_string(cfg.num_sources) +
                 " sources (exact, 0 allowed)";
    return res;
}

CheckResult check_theorem1(const VerifyOptions& opts) {
    CheckResult res{"theorem1", true, ""};
    SimConfig cfg = config::preset_config("desk");
    cfg.model = envmodel::ChannelModel::fixed_gap();
    cfg.model_name = "fixed_gap";
    cfg.num_channels = 2;
    cfg.horizon = opts.horizon;
    cfg.rounds = std::max<std::uint64_t>(5, opts.rounds);
    cfg.master_seed = opts.seed;
    cfg.channel_policies = {
        policies::PolicySpec{policies::PolicyKind::epsworst, "epsworst", "epsworst"}};
    const auto rm = simulator::run_experiment(cfg);
    const auto& agg = rm.policies.front();
    res.pass = agg.ratio.verdict == metrics::RatioVerdict::pass;
    res.detail = std::string("fixed-gap ratio verdict = ") + metrics::to_string(agg.ratio.verdict) +
                 ", median R/K = " + fmt(agg.ratio.median);
    return res;
}

CheckResult check_adbranch(const VerifyOptions& opts) {
    CheckResult res{"adbranch", true, ""};
    const std::size_t d = 3, n_ch = 5;
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 50; ++trial) {
        RngStream rng(opts.seed, 31, Purpose::policy, static_cast<std::uint64_t>(trial));
        policies::BanditState state(d);
        for (int i = 0; i < 40; ++i) {
            double x[d];
            for (auto& v : x) v = rng.uniform(0.0, 1.0);
            state.update(x, rng.uniform() < 0.5 ? 1 : 0);
        }
        std::vector<double> feats(n_ch * d);
        for (auto& v : feats) v = rng.uniform(0.0, 2.0);
        policies::FeatureView view{feats.data(), n_ch, d};
        policies::PolicyParams params;
        params.alpha = 1.3;
        params.v = 1.0;
        policies::AdInfo info;
        info.scheduled_aoi_max = 0;  // never exceeds a positive threshold: bandit branch
        info.num_sources = 20;
        info.arrival_rate = 0.5;

        RngStream r1(opts.seed, 32, Purpose::policy, static_cast<std::uint64_t>(trial));
        RngStream r2(opts.seed, 32, Purpose::policy, static_cast<std::uint64_t>(trial));
        const auto ad_ucb =
            policies::ad_select(state, view, params, info, policies::AdBase::ucb, 2, r1);
        const auto base_ucb = policies::top_p(policies::linucb_scores(state, view, params), 2);
        if (ad_ucb != base_ucb) ++mismatches;
        r1.begin_slot(5);
        r2.begin_slot(5);
        const auto ad_ts =
            policies::ad_select(state, view, params, info, policies::AdBase::ts, 2, r1);
        const auto base_ts = policies::top_p(policies::lints_scores(state, view, params, r2), 2);
        if (ad_ts != base_ts) ++mismatches;
    }
    res.pass = mismatches == 0;
    res.detail = std::to_string(mismatches) +
                 " AD/base selection mismatches on threshold-fail slots (0 allowed)";
    return res;
}

CheckResult check_projection(const VerifyOptions& opts) {
    CheckResult res{"projection", true, ""};
    const std::size_t d = 3, n_ch = 5;
    bool all_in_range = true;
    RngStream rng(opts.seed, 41, Purpose::policy, 7);
    for (int trial = 0; trial < 100; ++trial) {
        policies::BanditState state(d);
        for (int i = 0; i < 30; ++i) {
            double x[d];
            for (auto& v : x) v = rng.uniform(0.0, 3.0);
            state.update(x, 1);  // all-success rewards push estimates high
        }
        std::vector<double> feats(n_ch * d);
        for (auto& v : feats) v = rng.uniform(0.0, 3.0);
        policies::FeatureView view{feats.data(), n_ch, d};
        policies::PolicyParams params;
        params.alpha = 2.5;
        params.v = 1.0;
        const auto ucb = policies::linucb_scores(state, view, params);
        const auto ts = policies::lints_scores(state, view, params, rng);
        for (double s : ucb) {
            if (!(s >= 0.0 && s <= 1.0)) all_in_range = false;
        }
        for (double s : ts) {
            if (!(s >= 0.0 && s <= 1.0)) all_in_range = false;
        }
    }
    res.pass = all_in_range;
    res.detail = all_in_range ? "all policy scores inside [0,1]"
                              : "policy score escaped [0,1]";
    return res;
}

}  // namespace

std::vector<CheckResult> verify_checks(const VerifyOptions& opts) {
    const std::vector<std::string> all = {"sherman",  "moments",  "coupling",
                                          "theorem1", "adbranch", "projection"};
    std::vector<std::string> wanted = opts.checks.empty() ? all : opts.checks;
    for (const auto& w : wanted) {
        if (std::find(all.begin(), all.end(), w) == all.end()) {
            throw config::ConfigError("verify: unknown check '" + w + "'");
        }
    }
    if (!opts.inject_fault.empty() && opts.inject_fault != "skip_clamp") {
        throw config::ConfigError("verify: unknown fault '" + opts.inject_fault + "'");
    }
    const bool inject = opts.inject_fault == "skip_clamp";
    std::vector<CheckResult> out;
    for (const auto& name : wanted) {
        if (inject) policies::testing_skip_clamp = true;
        CheckResult r;
        if (name == "sherman") r = check_sherman(opts);
        else if (name == "moments") r = check_moments(opts);
        else if (name == "coupling") r = check_coupling(opts);
        else if (name == "theorem1") r = check_theorem1(opts);
        else if (name == "adbranch") r = check_adbranch(opts);
        else r = check_projection(opts);
        policies::testing_skip_clamp = false;
        out.push_back(std::move(r));
    }
    return out;
}

int verify(const VerifyOptions& opts) {
    std::vector<CheckResult> results;
    try {
        results = verify_checks(opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    bool all_pass = true;
    for (const auto& r : results) {
        std::cout << (r.pass ? "PASS" : "FAIL") << " " << r.name << ": " << r.detail << "\n";
        all_pass = all_pass && r.pass;
    }
    return all_pass ? 0 : 2;
}

int sweep(const SimConfig& cfg_in, const std::string& param, const std::vector<double>& values) {
    if (values.empty()) {
        std::cerr << "error: sweep: empty value list\n";
        return 1;
    }
    SimConfig base = cfg_in;
    if (base.output_dir.empty()) base.output_dir = config::default_output_dir();
    std::ostringstream overview;
    overview << param;
    for (const auto& p : base.channel_policies) {
        overview << "," << p.label << "_regret_final," << p.label << "_k_final";
    }
    overview << "\n";
    for (double value : values) {
        SimConfig cfg = base;
        if (param == "alpha") cfg.alpha = value;
        else if (param == "v") cfg.v = value;
        else if (param == "delta") cfg.delta = value;
        else if (param == "eps") cfg.eps = value;
        else if (param == "lambda") cfg.arrival_rate = value;
        else if (param == "pairs") cfg.num_pairs = static_cast<std::size_t>(value);
        else {
            std::cerr << "error: sweep: unknown parameter '" << param << "'\n";
            return 1;
        }
        char tag[64];
        std::snprintf(tag, sizeof tag, "%s=%g", param.c_str(), value);
        cfg.output_dir = (fs::path(base.output_dir) / tag).string();
        metrics::RunMetrics rm;
        const int rc = run_impl(cfg, &rm);
        if (rc != 0) return rc;
        overview << fmt(value);
        const std::size_t last = rm.t_grid.size() - 1;
        for (const auto& p : rm.policies) {
            overview << "," << fmt(p.regret_mean[last]) << "," << fmt(p.k_mean[last]);
        }
        overview << "\n";
    }
    try {
        fs::create_directories(base.output_dir);
        std::vector<fs::path> written;
        write_one(base.output_dir, "sweep.csv", overview.str(), written);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace aoisim::runner
