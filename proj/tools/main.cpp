#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "aoisim/config.hpp"
#include "aoisim/kernels.hpp"
#include "aoisim/runner.hpp"

namespace {

using aoisim::config::SimConfig;

struct RunFlags {
    std::string config_file;
    std::string preset;
    std::string policies_csv;
    std::string out_dir;
    std::string kernels = "auto";
    std::uint64_t horizon = 0;
    std::uint64_t rounds = 0;
    std::uint64_t seed = 0;
    std::size_t sources = 0, channels = 0, pairs = 0, workers = 0, checkpoints = 0;
    double lambda = -1.0, alpha = -1.0, v = -1.0, delta = -1.0, eps = -1.0;
    bool v_theory = false;
    bool full = false;
    bool uncoupled = false;
    bool dump_traces = false;
    bool per_pair_threshold = false;
    std::string source_policy;
    std::string model;
    // flags the user actually passed
    bool has_horizon = false, has_rounds = false, has_seed = false;
};

void add_run_options(CLI::App* cmd, RunFlags& f) {
    cmd->add_option("--config", f.config_file, "JSON experiment description");
    cmd->add_option("--preset", f.preset, "desk | fig2 | fig4 | fig5");
    cmd->add_option("--horizon", f.horizon, "slots per round")->each([&](const std::string&) {
        f.has_horizon = true;
    });
    cmd->add_option("--rounds", f.rounds, "Monte Carlo rounds")->each([&](const std::string&) {
        f.has_rounds = true;
    });
    cmd->add_option("--seed", f.seed, "master seed")->each([&](const std::string&) {
        f.has_seed = true;
    });
    cmd->add_option("--sources", f.sources, "number of sources M");
    cmd->add_option("--channels", f.channels, "number of channels N");
    cmd->add_option("--pairs", f.pairs, "scheduled pairs per slot");
    cmd->add_option("--lambda", f.lambda, "packet arrival rate");
    cmd->add_option("--policies", f.policies_csv,
                    "comma list: oracle,random,linucb,lints,aducb,adts,suplinucb");
    cmd->add_option("--source-policy", f.source_policy, "maxweight | roundrobin");
    cmd->add_option("--model", f.model, "table1 | nonlinear_snr | fixed_gap");
    cmd->add_option("--alpha", f.alpha, "LinUCB width (default: formula from T, N, delta)");
    cmd->add_option("--v", f.v, "LinTS scale (default 1)");
    cmd->add_flag("--v-theory", f.v_theory, "use the theoretical v formula");
    cmd->add_option("--delta", f.delta, "confidence level");
    cmd->add_option("--eps", f.eps, "epsilon of the theoretical v formula");
    cmd->add_option("--checkpoints", f.checkpoints, "approximate checkpoint count");
    cmd->add_option("--out", f.out_dir, "output directory (default $AOISIM_OUTDIR or ./out)");
    cmd->add_option("--workers", f.workers, "worker threads (0 = hardware)");
    cmd->add_option("--kernels", f.kernels, "auto | scalar | avx2");
    cmd->add_flag("--full", f.full, "keep the full-size scale of fig presets");
    cmd->add_flag("--uncoupled", f.uncoupled,
                  "benchmark on independent randomness instead of coupled");
    cmd->add_flag("--dump-traces", f.dump_traces, "write per-round JSONL traces");
    cmd->add_flag("--per-pair-threshold", f.per_pair_threshold,
                  "age-dependent threshold tested per pair instead of once per slot");
}

SimConfig build_config(const RunFlags& f) {
    SimConfig cfg;
    if (!f.config_file.empty()) {
        std::ifstream in(f.config_file);
        if (!in) throw aoisim::config::ConfigError("cannot open config file " + f.config_file);
        std::ostringstream buf;
        buf << in.rdbuf();
        cfg = aoisim::config::parse_config(buf.str());
        if (!f.preset.empty())
            throw aoisim::config::ConfigError("--preset conflicts with --config (put it in the file)");
    } else {
        cfg = aoisim::config::preset_config(f.preset.empty() ? "desk" : f.preset);
    }

    // Fig presets carry the full-size scale; cap them to desk scale unless
    // --full or an explicit override says otherwise.
    const bool fig_preset = cfg.preset == "fig2" || cfg.preset == "fig4" || cfg.preset == "fig5";
    if (fig_preset && !f.full) {
        if (!f.has_horizon) cfg.horizon = std::min<std::uint64_t>(cfg.horizon, 10000);
        if (!f.has_rounds) cfg.rounds = std::min<std::uint64_t>(cfg.rounds, 100);
    }

    if (f.has_horizon) cfg.horizon = f.horizon;
    if (f.has_rounds) cfg.rounds = f.rounds;
    if (f.has_seed) cfg.master_seed = f.seed;
    if (f.sources) cfg.num_sources = f.sources;
    if (f.channels) cfg.num_channels = f.channels;
    if (f.pairs) cfg.num_pairs = f.pairs;
    if (f.lambda >= 0.0) cfg.arrival_rate = f.lambda;
    if (f.checkpoints) cfg.checkpoints = f.checkpoints;
    if (!f.model.empty()) {
        cfg.model = aoisim::config::model_by_name(f.model);
        cfg.model_name = f.model;
        cfg.num_channels = cfg.model.num_channels;
    }
    if (!f.policies_csv.empty()) {
        cfg.channel_policies.clear();
        std::stringstream ss(f.policies_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (!tok.empty()) cfg.channel_policies.push_back(aoisim::policies::parse_policy(tok));
        }
    }
    if (!f.source_policy.empty()) {
        if (f.source_policy == "maxweight")
            cfg.source_policy = aoisim::policies::SourcePolicy::maxweight;
        else if (f.source_policy == "roundrobin")
            cfg.source_policy = aoisim::policies::SourcePolicy::roundrobin;
        else
            throw aoisim::config::ConfigError("--source-policy: unknown policy " + f.source_policy);
    }
    if (f.alpha >= 0.0) cfg.alpha = f.alpha;
    if (f.v >= 0.0) cfg.v = f.v;
    if (f.v_theory) cfg.v_theory = true;
    if (f.delta >= 0.0) cfg.delta = f.delta;
    if (f.eps >= 0.0) cfg.eps = f.eps;
    if (!f.out_dir.empty()) cfg.output_dir = f.out_dir;
    if (f.workers) cfg.workers = f.workers;
    if (f.uncoupled) cfg.uncoupled = true;
    if (f.dump_traces) cfg.dump_traces = true;
    if (f.per_pair_threshold) cfg.per_pair_threshold = true;

    if (!aoisim::kernels::select_backend(f.kernels))
        throw aoisim::config::ConfigError("--kernels: backend '" + f.kernels +
                                          "' unknown or unsupported on this CPU");
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Age-of-Information scheduling simulator with contextual channel policies"};
    app.require_subcommand(1);

    RunFlags run_flags;
    CLI::App* run_cmd = app.add_subcommand("run", "run an experiment and write CSV outputs");
    add_run_options(run_cmd, run_flags);

    aoisim::runner::VerifyOptions verify_opts;
    std::vector<std::string> verify_checks;
    CLI::App* verify_cmd = app.add_subcommand("verify", "run the invariant battery");
    verify_cmd->add_option("--check", verify_checks,
                           "sherman | moments | coupling | theorem1 | adbranch | projection");
    verify_cmd->add_option("--horizon", verify_opts.horizon, "slots for simulation checks");
    verify_cmd->add_option("--rounds", verify_opts.rounds, "rounds for simulation checks");
    verify_cmd->add_option("--seed", verify_opts.seed, "master seed");
    verify_cmd->add_option("--inject-fault", verify_opts.inject_fault,
                           "fault-injection self test (skip_clamp)")
        ->group("");  // hidden: test hook

    RunFlags sweep_flags;
    std::string sweep_param;
    std::string sweep_values_csv;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "vary one parameter across a value list");
    add_run_options(sweep_cmd, sweep_flags);
    sweep_cmd->add_option("--param", sweep_param, "alpha | v | delta | eps | lambda | pairs")
        ->required();
    sweep_cmd->add_option("--values", sweep_values_csv, "comma list of values")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            return aoisim::runner::run(build_config(run_flags));
        }
        if (verify_cmd->parsed()) {
            verify_opts.checks = verify_checks;
            return aoisim::runner::verify(verify_opts);
        }
        if (sweep_cmd->parsed()) {
            std::vector<double> values;
            std::stringstream ss(sweep_values_csv);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                if (!tok.empty()) values.push_back(std::stod(tok));
            }
            return aoisim::runner::sweep(build_config(sweep_flags), sweep_param, values);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
