#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "sst/dataset.hpp"
#include "sst/metrics.hpp"
#include "sst/nn/train.hpp"

namespace sst {

// Configuration failures name the offending key path (e.g.
// "train.fen.depht"); the CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FeatureConfig {
    double dt = 0.030;
    int bins = 1200;
    int packet_max_len = 4096;
};

struct EvalConfig {
    PairMode mode = PairMode::Network;
    std::vector<double> taus = {1e-3, 1e-4, 1e-5};
    std::optional<int> neg_per_pos;  // absent = exhaustive
    uint64_t seed = 17;
};

struct ObfuscationConfig {
    double pad_overhead_pct = 0.0;           // 0 disables padding
    std::string delay_profile = "none";
    uint64_t seed = 3;
    bool obfuscate_all_captures = false;     // default: attacker-side only
};

enum class TrainTask { Correlator, ChainLen };

struct ExperimentConfig {
    std::string dataset_name = "dataset";
    DatasetConfig dataset;
    std::string burst_model_path;
    FeatureConfig features;
    TrainTask task = TrainTask::Correlator;
    nn::FenTrainConfig train;
    nn::HeadTrainConfig head;
    nn::ChainLenTrainConfig chainlen;
    EvalConfig eval;
    ObfuscationConfig obfuscation;
};

// Parses and validates the experiment config document. Unknown keys
// anywhere are errors (fail-fast against silently ignored typos).
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);

nlohmann::json fen_config_to_json(const nn::FenConfig& c);
nn::FenConfig fen_config_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json chainlen_config_to_json(const nn::ChainLenConfig& c);
nn::ChainLenConfig chainlen_config_from_json(const nlohmann::json& j, const std::string& path);

}  // namespace sst
