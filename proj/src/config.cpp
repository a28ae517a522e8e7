#include "aoisim/config.hpp"

#include <cstdlib>
#include <set>

#include "json.hpp"

namespace aoisim::config {

using nlohmann::json;
using stochastic::DistSpec;

void SimConfig::validate() const {
    if (num_sources == 0 || num_sources > 4096)
        throw ConfigError("sources: must be in [1, 4096]");
    if (num_channels == 0 || num_channels > 4096)
        throw ConfigError("channels: must be in [1, 4096]");
    if (num_pairs < 1 || num_pairs > std::min(num_sources, num_channels))
        throw ConfigError("pairs: must satisfy 1 <= pairs <= min(sources, channels)");
    if (num_pairs > 64) throw ConfigError("pairs: must be <= 64");
    if (!(arrival_rate > 0.0 && arrival_rate <= 1.0))
        throw ConfigError("arrival_rate: must be in (0, 1]");
    if (horizon < 1) throw ConfigError("horizon: must be >= 1");
    if (horizon > 100000000ULL)
        throw ConfigError("horizon: must be <= 1e8 (trace AoI counters are 32-bit)");
    if (rounds < 1) throw ConfigError("rounds: must be >= 1");
    if (checkpoints < 2) throw ConfigError("checkpoints: must be >= 2");
    if (channel_policies.empty()) throw ConfigError("channel_policies: must not be empty");
    std::set<std::string> seen;
    for (const auto& p : channel_policies) {
        if (!seen.insert(p.label).second)
            throw ConfigError("channel_policies: duplicate policy " + p.label);
    }
    if (alpha && !(*alpha >= 0.0)) throw ConfigError("params.alpha: must be >= 0");
    if (!(v >= 0.0)) throw ConfigError("params.v: must be >= 0");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("params.delta: must be in (0, 1)");
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("params.eps: must be in (0, 1)");
    model.validate();
    if (model.num_channels != num_channels)
        throw ConfigError("channels: does not match the channel model");
}

policies::PolicyParams SimConfig::resolved_params(std::size_t feature_dim) const {
    policies::PolicyParams p;
    p.delta = delta;
    p.eps = eps;
    p.alpha = alpha ? *alpha : policies::PolicyParams::default_alpha(horizon, num_channels, delta);
    p.v = v_theory ? policies::PolicyParams::theory_v(feature_dim, delta, eps) : v;
    p.validate();
    return p;
}

envmodel::ChannelModel model_by_name(const std::string& name) {
    if (name == "table1") return envmodel::ChannelModel::table1();
    if (name == "nonlinear_snr") return envmodel::ChannelModel::nonlinear_snr();
    if (name == "fixed_gap") return envmodel::ChannelModel::fixed_gap();
    throw ConfigError("channel_model: unknown preset '" + name + "'");
}

namespace {

std::vector<policies::PolicySpec> default_policy_list() {
    std::vector<policies::PolicySpec> out;
    for (const char* name : {"suplinucb", "linucb", "lints", "aducb", "adts"}) {
        out.push_back(policies::parse_policy(name));
    }
    return out;
}

}  // namespace

SimConfig preset_config(const std::string& name) {
    SimConfig cfg;
    cfg.preset = name;
    cfg.channel_policies = default_policy_list();
    cfg.model = envmodel::ChannelModel::table1();
    cfg.model_name = "table1";
    if (name == "desk") {
        cfg.horizon = 10000;
        cfg.rounds = 100;
        return cfg;
    }
    if (name == "fig2") {
        cfg.horizon = 100000;
        cfg.rounds = 1000;
        return cfg;
    }
    if (name == "fig4") {
        cfg.horizon = 100000;
        cfg.rounds = 1000;
        cfg.model = envmodel::ChannelModel::nonlinear_snr();
        cfg.model_name = "nonlinear_snr";
        return cfg;
    }
    if (name == "fig5") {
        cfg.horizon = 100000;
        cfg.rounds = 1000;
        cfg.num_pairs = 3;
        return cfg;
    }
    throw ConfigError("preset: unknown preset '" + name + "'");
}

std::string default_output_dir() {
    if (const char* env = std::getenv("AOISIM_OUTDIR")) {
        if (*env) return env;
    }
    return "out";
}

namespace {

void check_keys(const json& obj, const char* where, std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) {
            if (it.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) throw ConfigError(std::string(where) + ": unknown key '" + it.key() + "'");
    }
}

double num(const json& v, const char* where) {
    if (!v.is_number()) throw ConfigError(std::string(where) + ": expected a number");
    return v.get<double>();
}

DistSpec parse_dist(const json& j, const char* where) {
    if (!j.is_object()) throw ConfigError(std::string(where) + ": expected a distribution object");
    if (!j.contains("kind")) throw ConfigError(std::string(where) + ": missing 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    DistSpec s;
    if (kind == "impulse") {
        check_keys(j, where, {"kind", "a"});
        s = DistSpec::impulse(num(j.at("a"), where));
    } else if (kind == "uniform") {
        check_keys(j, where, {"kind", "a", "b"});
        s = DistSpec::uniform(num(j.at("a"), where), num(j.at("b"), where));
    } else if (kind == "triangle") {
        check_keys(j, where, {"kind", "a", "b", "c"});
        s = DistSpec::triangle(num(j.at("a"), where), num(j.at("b"), where),
                               num(j.at("c"), where));
    } else if (kind == "two_point") {
        check_keys(j, where, {"kind", "p1", "a1", "p2", "a2"});
        s = DistSpec::two_point(num(j.at("p1"), where), num(j.at("a1"), where),
                                num(j.at("p2"), where), num(j.at("a2"), where));
    } else if (kind == "scaled_beta") {
        check_keys(j, where, {"kind", "k", "alpha", "beta"});
        s = DistSpec::scaled_beta(num(j.at("k"), where), num(j.at("alpha"), where),
                                  num(j.at("beta"), where));
    } else {
        throw ConfigError(std::string(where) + ": unknown distribution kind '" + kind + "'");
    }
    try {
        s.validate();
    } catch (const stochastic::InvalidSpec& e) {
        throw ConfigError(std::string(where) + ": " + e.what());
    }
    return s;
}

envmodel::ChannelModel parse_model(const json& j) {
    if (j.is_string()) return model_by_name(j.get<std::string>());
    if (!j.is_object()) throw ConfigError("channel_model: expected preset name or object");
    check_keys(j, "channel_model", {"channels", "ctx_dim", "feature_map", "truth", "contexts"});
    envmodel::ChannelModel m;
    m.num_channels = j.at("channels").get<std::size_t>();
    m.ctx_dim = j.at("ctx_dim").get<std::size_t>();
    if (j.contains("feature_map")) {
        const std::string fm = j.at("feature_map").get<std::string>();
        if (fm == "raw") m.feature_map = envmodel::FeatureMap::raw;
        else if (fm == "affine_bias") m.feature_map = envmodel::FeatureMap::affine_bias;
        else throw ConfigError("channel_model.feature_map: unknown map '" + fm + "'");
    }
    const json& truth = j.at("truth");
    if (!truth.is_object() || !truth.contains("kind"))
        throw ConfigError("channel_model.truth: expected object with 'kind'");
    const std::string kind = truth.at("kind").get<std::string>();
    if (kind == "linear") {
        check_keys(truth, "channel_model.truth", {"kind", "theta", "noise"});
        envmodel::LinearTruth lt;
        const json& th = truth.at("theta");
        if (!th.is_array() || th.empty() || th.size() > linalg::kMaxDim)
            throw ConfigError("channel_model.truth.theta: expected array of 1..16 numbers");
        lt.theta_true = linalg::Vec(th.size());
        for (std::size_t i = 0; i < th.size(); ++i)
            lt.theta_true[i] = num(th[i], "channel_model.truth.theta");
        lt.noise = parse_dist(truth.at("noise"), "channel_model.truth.noise");
        m.truth = lt;
    } else if (kind == "nonlinear_snr") {
        check_keys(truth, "channel_model.truth", {"kind", "offset", "snr"});
        envmodel::NonLinearSNRTruth nt;
        if (truth.contains("offset")) nt.offset = num(truth.at("offset"), "channel_model.truth.offset");
        nt.snr_spec = parse_dist(truth.at("snr"), "channel_model.truth.snr");
        m.truth = nt;
        if (m.feature_map == envmodel::FeatureMap::raw && !j.contains("feature_map"))
            m.feature_map = envmodel::FeatureMap::affine_bias;
    } else {
        throw ConfigError("channel_model.truth.kind: unknown kind '" + kind + "'");
    }
    const json& rows = j.at("contexts");
    if (!rows.is_array() || rows.size() != m.num_channels)
        throw ConfigError("channel_model.contexts: expected one row per channel");
    for (const json& row : rows) {
        if (!row.is_array() || row.size() != m.ctx_dim)
            throw ConfigError("channel_model.contexts: expected ctx_dim entries per row");
        std::vector<DistSpec> specs;
        for (const json& cell : row) specs.push_back(parse_dist(cell, "channel_model.contexts"));
        m.context_specs.push_back(std::move(specs));
    }
    return m;
}

}  // namespace

SimConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: JSON parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    check_keys(j, "config",
               {"preset", "sources", "channels", "pairs", "horizon", "arrival_rate", "rounds",
                "seed", "checkpoints", "source_policy", "channel_policies", "params",
                "channel_model", "pair_matching", "output_dir", "workers", "flags"});

    SimConfig cfg =
        j.contains("preset") ? preset_config(j.at("preset").get<std::string>()) : preset_config("desk");
    if (!j.contains("preset")) cfg.preset.clear();

    if (j.contains("sources")) cfg.num_sources = j.at("sources").get<std::size_t>();
    if (j.contains("channels")) cfg.num_channels = j.at("channels").get<std::size_t>();
    if (j.contains("pairs")) cfg.num_pairs = j.at("pairs").get<std::size_t>();
    if (j.contains("horizon")) cfg.horizon = j.at("horizon").get<std::uint64_t>();
    if (j.contains("arrival_rate")) cfg.arrival_rate = num(j.at("arrival_rate"), "arrival_rate");
    if (j.contains("rounds")) cfg.rounds = j.at("rounds").get<std::uint64_t>();
    if (j.contains("seed")) cfg.master_seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("checkpoints")) cfg.checkpoints = j.at("checkpoints").get<std::size_t>();

    if (j.contains("source_policy")) {
        const std::string sp = j.at("source_policy").get<std::string>();
        if (sp == "maxweight") cfg.source_policy = policies::SourcePolicy::maxweight;
        else if (sp == "roundrobin") cfg.source_policy = policies::SourcePolicy::roundrobin;
        else throw ConfigError("source_policy: unknown policy '" + sp + "'");
    }
    if (j.contains("channel_policies")) {
        const json& arr = j.at("channel_policies");
        if (!arr.is_array()) throw ConfigError("channel_policies: expected an array of names");
        cfg.channel_policies.clear();
        for (const json& name : arr) {
            try {
                cfg.channel_policies.push_back(policies::parse_policy(name.get<std::string>()));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("channel_policies: ") + e.what());
            }
        }
    }
    if (j.contains("params")) {
        const json& p = j.at("params");
        check_keys(p, "params", {"alpha", "v", "v_theory", "delta", "eps"});
        if (p.contains("alpha") && !p.at("alpha").is_null())
            cfg.alpha = num(p.at("alpha"), "params.alpha");
        if (p.contains("v")) cfg.v = num(p.at("v"), "params.v");
        if (p.contains("v_theory")) cfg.v_theory = p.at("v_theory").get<bool>();
        if (p.contains("delta")) cfg.delta = num(p.at("delta"), "params.delta");
        if (p.contains("eps")) cfg.eps = num(p.at("eps"), "params.eps");
    }
    if (j.contains("channel_model")) {
        cfg.model = parse_model(j.at("channel_model"));
        cfg.model_name = j.at("channel_model").is_string()
                             ? j.at("channel_model").get<std::string>()
                             : std::string("custom");
        if (!j.contains("channels")) cfg.num_channels = cfg.model.num_channels;
    }
    if (j.contains("pair_matching")) {
        const std::string pm = j.at("pair_matching").get<std::string>();
        if (pm == "rank") cfg.pair_matching = PairMatching::rank;
        else if (pm == "random") cfg.pair_matching = PairMatching::random;
        else throw ConfigError("pair_matching: unknown mode '" + pm + "'");
    }
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("workers")) cfg.workers = j.at("workers").get<std::size_t>();
    if (j.contains("flags")) {
        const json& f = j.at("flags");
        check_keys(f, "flags", {"uncoupled", "dump_traces", "per_pair_threshold"});
        if (f.contains("uncoupled")) cfg.uncoupled = f.at("uncoupled").get<bool>();
        if (f.contains("dump_traces")) cfg.dump_traces = f.at("dump_traces").get<bool>();
        if (f.contains("per_pair_threshold"))
            cfg.per_pair_threshold = f.at("per_pair_threshold").get<bool>();
    }
    cfg.validate();
    return cfg;
}

}  // namespace aoisim::config
