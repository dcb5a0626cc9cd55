#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sst/simulator.hpp"

namespace sst {

enum class ProtocolMode { Ssh, Socat, Icmp, Dns, Mixed };

ProtocolMode protocol_mode_from_string(const std::string& s);
std::string protocol_mode_to_string(ProtocolMode m);

enum class MonitorPolicy { LastStone, RandomStone };

struct DatasetConfig {
    std::string name = "dataset";
    ProtocolMode mode = ProtocolMode::Socat;
    int n_chains = 1;
    uint64_t base_seed = 0;
    int stones_min = 1;
    int stones_max = 3;
    double wan_delay_min = 0.030;
    double wan_delay_max = 0.080;
    double lan_delay_min = 0.0002;
    double lan_delay_max = 0.002;
    double jitter_frac = 0.10;  // jitter_std as a fraction of the link delay
    double processing_delay = 0.0002;
    int64_t mtu_payload = 1448;
    MonitorPolicy monitor = MonitorPolicy::LastStone;
    TraceFormat format = TraceFormat::Csv;
    ProtocolModel proto;
    int workers = 1;  // wall-clock only: chains are independently seeded

    void validate() const;
};

struct ManifestChain {
    std::string chain_id;
    uint64_t seed = 0;
    int links = 0;
    std::vector<std::string> protocols;
    int label_up = 0;
    int label_down = 0;
    int monitored_stone = 0;
    std::vector<std::pair<std::string, std::string>> captures;  // (point, relative path)
    std::optional<std::string> split;                           // train / val / test
};

struct DatasetManifest {
    std::string dataset;
    std::string protocol_mode;
    std::string format = "csv";
    int n_chains = 0;
    uint64_t base_seed = 0;
    std::string root_dir;  // set on load; not serialized
    std::vector<ManifestChain> chains;
    std::vector<std::pair<std::string, std::string>> failures;  // (chain_id, error)

    std::string capture_path(const ManifestChain& chain, const std::string& point) const;
};

// Draws the chain's structure (stones, protocols, link delays,
// monitored stone) from the chain's own seeded rng.
ChainConfig sample_chain_config(const DatasetConfig& cfg, uint64_t chain_seed, Rng& rng);

// Generates n_chains chains, chain i seeded with base_seed XOR i, and
// persists every capture under out_dir. Per-chain failures are
// recorded in the manifest without aborting the run.
DatasetManifest generate_dataset(const DatasetConfig& cfg, const BurstModel& model,
                                 const std::string& out_dir);

void save_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

Trace load_capture(const DatasetManifest& manifest, const ManifestChain& chain,
                   const std::string& point);

}  // namespace sst
