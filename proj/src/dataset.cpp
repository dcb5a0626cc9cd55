#include "sst/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace sst {

namespace fs = std::filesystem;
using nlohmann::json;

ProtocolMode protocol_mode_from_string(const std::string& s) {
    if (s == "ssh") return ProtocolMode::Ssh;
    if (s == "socat") return ProtocolMode::Socat;
    if (s == "icmp") return ProtocolMode::Icmp;
    if (s == "dns") return ProtocolMode::Dns;
    if (s == "mixed") return ProtocolMode::Mixed;
    throw std::invalid_argument("unknown protocol mode: " + s);
}

std::string protocol_mode_to_string(ProtocolMode m) {
    switch (m) {
        case ProtocolMode::Ssh: return "ssh";
        case ProtocolMode::Socat: return "socat";
        case ProtocolMode::Icmp: return "icmp";
        case ProtocolMode::Dns: return "dns";
        case ProtocolMode::Mixed: return "mixed";
    }
    return "?";
}

void DatasetConfig::validate() const {
    if (n_chains < 1) throw std::invalid_argument("dataset config: n_chains must be >= 1");
    if (stones_min < 1 || stones_max > 3 || stones_min > stones_max)
        throw std::invalid_argument("dataset config: stones must lie in [1, 3]");
    if (wan_delay_min < 0 || wan_delay_max < wan_delay_min || lan_delay_min < 0 ||
        lan_delay_max < lan_delay_min)
        throw std::invalid_argument("dataset config: bad delay ranges");
    if (jitter_frac < 0) throw std::invalid_argument("dataset config: jitter_frac must be >= 0");
    proto.validate();
}

std::string DatasetManifest::capture_path(const ManifestChain& chain,
                                          const std::string& point) const {
    for (const auto& [p, path] : chain.captures)
        if (p == point) return (fs::path(root_dir) / path).string();
    throw std::out_of_range("manifest: chain " + chain.chain_id + " has no capture " + point);
}

ChainConfig sample_chain_config(const DatasetConfig& cfg, uint64_t chain_seed, Rng& rng) {
    ChainConfig config;
    config.seed = chain_seed;

    int stones = static_cast<int>(rng.uniform_int(cfg.stones_min, cfg.stones_max));
    int links = stones + 1;

    Protocol fixed = Protocol::Socat;
    switch (cfg.mode) {
        case ProtocolMode::Ssh: fixed = Protocol::Ssh; break;
        case ProtocolMode::Socat: fixed = Protocol::Socat; break;
        case ProtocolMode::Icmp: fixed = Protocol::Icmp; break;
        case ProtocolMode::Dns: fixed = Protocol::Dns; break;
        case ProtocolMode::Mixed: break;
    }

    for (int i = 0; i < links; ++i) {
        HopSpec hop;
        hop.protocol = cfg.mode == ProtocolMode::Mixed
                           ? static_cast<Protocol>(rng.uniform_int(0, 3))
                           : fixed;
        hop.propagation_delay = i == 0 ? rng.uniform(cfg.wan_delay_min, cfg.wan_delay_max)
                                       : rng.uniform(cfg.lan_delay_min, cfg.lan_delay_max);
        hop.jitter_std = cfg.jitter_frac * hop.propagation_delay;
        hop.mtu_payload = cfg.mtu_payload;
        hop.per_hop_processing_delay = cfg.processing_delay;
        config.hops.push_back(hop);
    }

    config.monitored_stone = cfg.monitor == MonitorPolicy::LastStone
                                 ? stones
                                 : static_cast<int>(rng.uniform_int(1, stones));
    return config;
}

DatasetManifest generate_dataset(const DatasetConfig& cfg, const BurstModel& model,
                                 const std::string& out_dir) {
    cfg.validate();
    fs::create_directories(out_dir);

    DatasetManifest manifest;
    manifest.dataset = cfg.name;
    manifest.protocol_mode = protocol_mode_to_string(cfg.mode);
    manifest.format = cfg.format == TraceFormat::Csv ? "csv" : "jsonl";
    manifest.n_chains = cfg.n_chains;
    manifest.base_seed = cfg.base_seed;
    manifest.root_dir = out_dir;

    const char* ext = cfg.format == TraceFormat::Csv ? ".csv" : ".jsonl";

    std::vector<std::optional<ManifestChain>> results(cfg.n_chains);
    std::vector<std::string> errors(cfg.n_chains);

    auto build_chain = [&](int i) {
        char idbuf[32];
        std::snprintf(idbuf, sizeof idbuf, "chain_%06d", i);
        std::string chain_id = idbuf;
        uint64_t seed = cfg.base_seed ^ static_cast<uint64_t>(i);
        try {
            Rng rng(seed);
            ChainConfig config = sample_chain_config(cfg, seed, rng);
            ChainSample sample = simulate_chain(config, model, cfg.proto, rng);
            sample.chain_id = chain_id;

            fs::path chain_dir = fs::path(out_dir) / chain_id;
            fs::create_directories(chain_dir);

            ManifestChain entry;
            entry.chain_id = chain_id;
            entry.seed = seed;
            entry.links = config.links();
            for (const auto& hop : config.hops)
                entry.protocols.push_back(protocol_to_string(hop.protocol));
            entry.label_up = sample.label_up_hosts;
            entry.label_down = sample.label_down_hosts;
            entry.monitored_stone = config.monitored_stone;
            for (const auto& [point, trace] : sample.captures) {
                std::string rel = chain_id + "/" + point + ext;
                save_trace(trace, (fs::path(out_dir) / rel).string(), cfg.format);
                entry.captures.emplace_back(point, rel);
            }
            results[i] = std::move(entry);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    };

    int workers = std::max(1, cfg.workers);
    if (workers == 1) {
        for (int i = 0; i < cfg.n_chains; ++i) build_chain(i);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (int i = w; i < cfg.n_chains; i += workers) build_chain(i);
            });
        for (auto& t : pool) t.join();
    }

    for (int i = 0; i < cfg.n_chains; ++i) {
        if (results[i])
            manifest.chains.push_back(std::move(*results[i]));
        else {
            char idbuf[32];
            std::snprintf(idbuf, sizeof idbuf, "chain_%06d", i);
            manifest.failures.emplace_back(idbuf, errors[i]);
        }
    }
    return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
    json j;
    j["dataset"] = manifest.dataset;
    j["protocol_mode"] = manifest.protocol_mode;
    j["format"] = manifest.format;
    j["n_chains"] = manifest.n_chains;
    j["base_seed"] = manifest.base_seed;
    j["chains"] = json::array();
    for (const auto& c : manifest.chains) {
        json jc;
        jc["chain_id"] = c.chain_id;
        jc["seed"] = c.seed;
        jc["links"] = c.links;
        jc["protocols"] = c.protocols;
        jc["label_up"] = c.label_up;
        jc["label_down"] = c.label_down;
        jc["monitored_stone"] = c.monitored_stone;
        json caps = json::array();
        for (const auto& [point, rel] : c.captures)
            caps.push_back({{"point", point}, {"path", rel}});
        jc["captures"] = caps;
        if (c.split) jc["split"] = *c.split;
        j["chains"].push_back(jc);
    }
    j["failures"] = json::array();
    for (const auto& [id, err] : manifest.failures)
        j["failures"].push_back({{"chain_id", id}, {"error", err}});

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    out << j.dump(2) << '\n';
}

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("bad manifest " + path + ": " + e.what());
    }
    DatasetManifest manifest;
    manifest.dataset = j.at("dataset").get<std::string>();
    manifest.protocol_mode = j.at("protocol_mode").get<std::string>();
    manifest.format = j.value("format", "csv");
    manifest.n_chains = j.at("n_chains").get<int>();
    manifest.base_seed = j.at("base_seed").get<uint64_t>();
    manifest.root_dir = fs::path(path).parent_path().string();
    for (const auto& jc : j.at("chains")) {
        ManifestChain c;
        c.chain_id = jc.at("chain_id").get<std::string>();
        c.seed = jc.at("seed").get<uint64_t>();
        c.links = jc.at("links").get<int>();
        c.protocols = jc.at("protocols").get<std::vector<std::string>>();
        c.label_up = jc.at("label_up").get<int>();
        c.label_down = jc.at("label_down").get<int>();
        c.monitored_stone = jc.at("monitored_stone").get<int>();
        for (const auto& cap : jc.at("captures"))
            c.captures.emplace_back(cap.at("point").get<std::string>(),
                                    cap.at("path").get<std::string>());
        if (jc.contains("split")) c.split = jc.at("split").get<std::string>();
        manifest.chains.push_back(std::move(c));
    }
    if (j.contains("failures"))
        for (const auto& f : j.at("failures"))
            manifest.failures.emplace_back(f.at("chain_id").get<std::string>(),
                                           f.at("error").get<std::string>());
    return manifest;
}

Trace load_capture(const DatasetManifest& manifest, const ManifestChain& chain,
                   const std::string& point) {
    return load_trace(manifest.capture_path(chain, point),
                      manifest.format == "csv" ? TraceFormat::Csv : TraceFormat::Jsonl);
}

}  // namespace sst
