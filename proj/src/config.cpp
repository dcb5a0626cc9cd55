#include "sst/config.hpp"

#include <fstream>
#include <set>

#include "sst/obfuscate.hpp"

namespace sst {

using nlohmann::json;

namespace {

// Tracks consumed keys so a section can reject unknown ones.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    template <typename T>
    T get(const std::string& key, T fallback) {
        seen_.insert(key);
        if (!j_.contains(key)) return fallback;
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(path_ + "." + key + ": wrong type");
        }
    }

    const json& child(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string key_path(const std::string& key) const { return path_ + "." + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw ConfigError(path_ + "." + it.key() + ": unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void parse_dataset(Section& s, ExperimentConfig& cfg) {
    cfg.dataset_name = s.get<std::string>("name", cfg.dataset_name);
    cfg.dataset.name = cfg.dataset_name;
    if (s.has("protocol_mode"))
        cfg.dataset.mode = protocol_mode_from_string(s.get<std::string>("protocol_mode", "socat"));
    cfg.dataset.n_chains = s.get<int>("n_chains", cfg.dataset.n_chains);
    cfg.dataset.base_seed = s.get<uint64_t>("base_seed", cfg.dataset.base_seed);
    cfg.burst_model_path = s.get<std::string>("burst_model", cfg.burst_model_path);
    cfg.dataset.stones_min = s.get<int>("stones_min", cfg.dataset.stones_min);
    cfg.dataset.stones_max = s.get<int>("stones_max", cfg.dataset.stones_max);
    std::string monitor = s.get<std::string>("monitor", "last");
    if (monitor == "last")
        cfg.dataset.monitor = MonitorPolicy::LastStone;
    else if (monitor == "random")
        cfg.dataset.monitor = MonitorPolicy::RandomStone;
    else
        throw ConfigError(s.key_path("monitor") + ": expected 'last' or 'random'");
    std::string format = s.get<std::string>("format", "csv");
    if (format != "csv" && format != "jsonl")
        throw ConfigError(s.key_path("format") + ": expected 'csv' or 'jsonl'");
    cfg.dataset.format = format == "csv" ? TraceFormat::Csv : TraceFormat::Jsonl;
    cfg.dataset.workers = s.get<int>("workers", cfg.dataset.workers);
    s.finish();
}

void parse_sim(Section& s, DatasetConfig& d) {
    d.wan_delay_min = s.get<double>("wan_delay_min_s", d.wan_delay_min);
    d.wan_delay_max = s.get<double>("wan_delay_max_s", d.wan_delay_max);
    d.lan_delay_min = s.get<double>("lan_delay_min_s", d.lan_delay_min);
    d.lan_delay_max = s.get<double>("lan_delay_max_s", d.lan_delay_max);
    d.jitter_frac = s.get<double>("jitter_frac", d.jitter_frac);
    d.processing_delay = s.get<double>("processing_delay_s", d.processing_delay);
    d.mtu_payload = s.get<int64_t>("mtu_payload", d.mtu_payload);
    d.proto.ssh_record_overhead = s.get<int64_t>("ssh_record_overhead", d.proto.ssh_record_overhead);
    d.proto.ssh_block_align = s.get<int64_t>("ssh_block_align", d.proto.ssh_block_align);
    d.proto.icmp_chunk_size = s.get<int64_t>("icmp_chunk_size", d.proto.icmp_chunk_size);
    d.proto.icmp_per_chunk_overhead =
        s.get<int64_t>("icmp_per_chunk_overhead", d.proto.icmp_per_chunk_overhead);
    d.proto.dns_poll_period = s.get<double>("dns_poll_period_s", d.proto.dns_poll_period);
    d.proto.dns_query_payload = s.get<int64_t>("dns_query_payload", d.proto.dns_query_payload);
    d.proto.dns_response_payload =
        s.get<int64_t>("dns_response_payload", d.proto.dns_response_payload);
    d.proto.dns_query_overhead = s.get<int64_t>("dns_query_overhead", d.proto.dns_query_overhead);
    s.finish();
}

void parse_fen(Section& s, nn::FenConfig& f) {
    f.input_channels = s.get<int>("input_channels", f.input_channels);
    f.input_len = s.get<int>("input_len", f.input_len);
    f.hidden_dim = s.get<int>("hidden_dim", f.hidden_dim);
    f.feature_dim = s.get<int>("feature_dim", f.feature_dim);
    f.depth = s.get<int>("depth", f.depth);
    f.embed_kernel = s.get<int>("embed_kernel", f.embed_kernel);
    f.embed_stride = s.get<int>("embed_stride", f.embed_stride);
    f.window_kernel = s.get<int>("window_kernel", f.window_kernel);
    f.window_stride = s.get<int>("window_stride", f.window_stride);
    if (s.has("mixer")) f.mixer = nn::mixer_from_string(s.get<std::string>("mixer", "mhsa"));
    f.head_dim = s.get<int>("head_dim", f.head_dim);
    f.kv_kernel = s.get<int>("kv_kernel", f.kv_kernel);
    f.kv_stride = s.get<int>("kv_stride", f.kv_stride);
    f.mlp_ratio = s.get<int>("mlp_ratio", f.mlp_ratio);
    f.block_dropout = s.get<double>("block_dropout", f.block_dropout);
    f.chain_token = s.get<bool>("chain_token", f.chain_token);
    f.chain_head_hidden = s.get<int>("chain_head_hidden", f.chain_head_hidden);
    s.finish();
}

void parse_train(Section& s, ExperimentConfig& cfg) {
    std::string task = s.get<std::string>("task", "correlator");
    if (task == "correlator")
        cfg.task = TrainTask::Correlator;
    else if (task == "chainlen")
        cfg.task = TrainTask::ChainLen;
    else
        throw ConfigError(s.key_path("task") + ": expected 'correlator' or 'chainlen'");

    auto& t = cfg.train;
    t.margin = s.get<double>("margin", t.margin);
    if (s.has("mining")) t.mining = nn::mining_from_string(s.get<std::string>("mining", ""));
    t.hybrid = s.get<bool>("hybrid", t.hybrid);
    t.mix_weight = s.get<double>("mix_weight", t.mix_weight);
    t.lambda_orth = s.get<double>("lambda_orth", t.lambda_orth);
    t.lambda_cov = s.get<double>("lambda_cov", t.lambda_cov);
    t.lambda_chain = s.get<double>("lambda_chain", t.lambda_chain);
    t.batch_size = s.get<int>("batch_size", t.batch_size);
    t.epochs = s.get<int>("epochs", t.epochs);
    t.lr = s.get<double>("lr", t.lr);
    t.seed = s.get<uint64_t>("seed", t.seed);
    t.val_fraction = s.get<double>("val_fraction", t.val_fraction);
    t.workers = s.get<int>("workers", t.workers);
    if (t.lambda_chain > 0.0) t.fen.chain_token = true;

    if (s.has("fen")) {
        Section fs(s.child("fen"), s.key_path("fen"));
        parse_fen(fs, t.fen);
    }
    if (s.has("head")) {
        Section hs(s.child("head"), s.key_path("head"));
        cfg.head.hidden = hs.get<int>("hidden", cfg.head.hidden);
        cfg.head.epochs = hs.get<int>("epochs", cfg.head.epochs);
        cfg.head.lr = hs.get<double>("lr", cfg.head.lr);
        cfg.head.neg_per_pos = hs.get<int>("neg_per_pos", cfg.head.neg_per_pos);
        cfg.head.batch_size = hs.get<int>("batch_size", cfg.head.batch_size);
        hs.finish();
    }
    if (s.has("chainlen")) {
        Section cs(s.child("chainlen"), s.key_path("chainlen"));
        auto& cl = cfg.chainlen;
        cl.net.max_len = cs.get<int>("max_len", cl.net.max_len);
        cl.net.kernel = cs.get<int>("kernel", cl.net.kernel);
        cl.net.stride = cs.get<int>("stride", cl.net.stride);
        cl.net.channels = cs.get<std::vector<int>>("channels", cl.net.channels);
        cl.net.mlp_hidden = cs.get<int>("mlp_hidden", cl.net.mlp_hidden);
        cl.epochs = cs.get<int>("epochs", cl.epochs);
        cl.lr = cs.get<double>("lr", cl.lr);
        cl.batch_size = cs.get<int>("batch_size", cl.batch_size);
        cl.val_fraction = cs.get<double>("val_fraction", cl.val_fraction);
        cs.finish();
    }
    s.finish();
}

void parse_eval(Section& s, EvalConfig& e) {
    if (s.has("mode")) e.mode = pair_mode_from_string(s.get<std::string>("mode", "network"));
    e.taus = s.get<std::vector<double>>("taus", e.taus);
    for (double tau : e.taus)
        if (!(tau > 0.0 && tau < 1.0)) throw ConfigError(s.key_path("taus") + ": must be in (0,1)");
    if (s.has("neg_per_pos")) {
        const json& v = s.child("neg_per_pos");
        if (v.is_string()) {
            if (v.get<std::string>() != "all")
                throw ConfigError(s.key_path("neg_per_pos") + ": expected integer or 'all'");
        } else {
            e.neg_per_pos = v.get<int>();
        }
    }
    e.seed = s.get<uint64_t>("seed", e.seed);
    s.finish();
}

void parse_obfuscation(Section& s, ObfuscationConfig& o) {
    o.pad_overhead_pct = s.get<double>("pad_overhead_pct", o.pad_overhead_pct);
    o.delay_profile = s.get<std::string>("delay_profile", o.delay_profile);
    try {
        delay_profile_from_string(o.delay_profile);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(s.key_path("delay_profile") + ": " + e.what());
    }
    o.seed = s.get<uint64_t>("seed", o.seed);
    std::string captures = s.get<std::string>("captures", "anchor");
    if (captures == "anchor")
        o.obfuscate_all_captures = false;
    else if (captures == "all")
        o.obfuscate_all_captures = true;
    else
        throw ConfigError(s.key_path("captures") + ": expected 'anchor' or 'all'");
    s.finish();
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    ExperimentConfig cfg;
    Section root(j, "config");
    if (root.has("dataset")) {
        Section s(root.child("dataset"), "dataset");
        parse_dataset(s, cfg);
    }
    if (root.has("sim")) {
        Section s(root.child("sim"), "sim");
        parse_sim(s, cfg.dataset);
    }
    if (root.has("features")) {
        Section s(root.child("features"), "features");
        cfg.features.dt = s.get<double>("dt_s", cfg.features.dt);
        cfg.features.bins = s.get<int>("bins", cfg.features.bins);
        cfg.features.packet_max_len = s.get<int>("packet_max_len", cfg.features.packet_max_len);
        s.finish();
    }
    cfg.chainlen.net.max_len = cfg.features.packet_max_len;
    if (root.has("train")) {
        Section s(root.child("train"), "train");
        parse_train(s, cfg);
    }
    if (root.has("eval")) {
        Section s(root.child("eval"), "eval");
        parse_eval(s, cfg.eval);
    }
    if (root.has("obfuscation")) {
        Section s(root.child("obfuscation"), "obfuscation");
        parse_obfuscation(s, cfg.obfuscation);
    }
    root.finish();

    // Keep the FEN input geometry in sync with the featurizer.
    cfg.train.fen.input_len = cfg.features.bins;
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return parse_experiment_config(j);
}

json fen_config_to_json(const nn::FenConfig& c) {
    return {{"input_channels", c.input_channels},
            {"input_len", c.input_len},
            {"hidden_dim", c.hidden_dim},
            {"feature_dim", c.feature_dim},
            {"depth", c.depth},
            {"embed_kernel", c.embed_kernel},
            {"embed_stride", c.embed_stride},
            {"window_kernel", c.window_kernel},
            {"window_stride", c.window_stride},
            {"mixer", nn::mixer_to_string(c.mixer)},
            {"head_dim", c.head_dim},
            {"kv_kernel", c.kv_kernel},
            {"kv_stride", c.kv_stride},
            {"mlp_ratio", c.mlp_ratio},
            {"block_dropout", c.block_dropout},
            {"chain_token", c.chain_token},
            {"chain_head_hidden", c.chain_head_hidden}};
}

nn::FenConfig fen_config_from_json(const json& j, const std::string& path) {
    Section s(j, path);
    nn::FenConfig f;
    parse_fen(s, f);
    return f;
}

json chainlen_config_to_json(const nn::ChainLenConfig& c) {
    return {{"input_channels", c.input_channels}, {"max_len", c.max_len},
            {"kernel", c.kernel},                 {"stride", c.stride},
            {"channels", c.channels},             {"mlp_hidden", c.mlp_hidden}};
}

nn::ChainLenConfig chainlen_config_from_json(const json& j, const std::string& path) {
    Section s(j, path);
    nn::ChainLenConfig c;
    c.input_channels = s.get<int>("input_channels", c.input_channels);
    c.max_len = s.get<int>("max_len", c.max_len);
    c.kernel = s.get<int>("kernel", c.kernel);
    c.stride = s.get<int>("stride", c.stride);
    c.channels = s.get<std::vector<int>>("channels", c.channels);
    c.mlp_hidden = s.get<int>("mlp_hidden", c.mlp_hidden);
    s.finish();
    return c;
}

}  // namespace sst
