#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "sst/config.hpp"

namespace sst {

// High-level command implementations behind the CLI and the shared
// library surface. Each returns the structured result record the
// harness prints on success.

// Parses every trace under trace_dir into bursts and fits the model.
// A nonpositive gap_threshold derives one from the given percentile of
// inter-packet delays, either pooled over all flows or per flow.
BurstModel fit_burst_model_from_dir(const std::string& trace_dir, double gap_threshold,
                                    double percentile, bool per_flow, int* n_traces = nullptr,
                                    double* used_threshold = nullptr);
nlohmann::json run_fit(const std::string& trace_dir, double gap_threshold,
                       const std::string& out_path, double percentile = 0.97,
                       bool per_flow = false);

nlohmann::json run_simulate(const ExperimentConfig& cfg, const std::string& out_dir);

nlohmann::json run_featurize(const ExperimentConfig& cfg, const std::string& manifest_path,
                             const std::string& out_dir);

nlohmann::json run_train(const ExperimentConfig& cfg, const std::string& manifest_path,
                         const std::string& out_checkpoint, bool quiet = false);

nlohmann::json run_score(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                         const std::string& manifest_path, const std::string& out_csv);

nlohmann::json run_evaluate(const std::vector<double>& taus, const std::string& scores_csv,
                            const std::string& links_csv, const std::string& out_report,
                            const std::string& out_roc_csv);

nlohmann::json run_obfuscate(const ExperimentConfig& cfg, const std::string& manifest_path,
                             const std::string& out_dir);

nlohmann::json run_predict_length(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                                  const std::string& manifest_path, const std::string& out_csv);

// Shared builders (also used by tests and the acceptance suite).
std::vector<nn::PairExample> build_pair_examples(const DatasetManifest& manifest, double dt,
                                                 int bins);
std::vector<nn::ChainLenExample> build_chainlen_examples(const DatasetManifest& manifest,
                                                         int max_len);

struct LoadedCorrelator {
    nn::CorrelatorBundle bundle;
    nlohmann::json meta;
};
LoadedCorrelator load_correlator(const std::string& checkpoint_path);

struct LoadedChainLen {
    nn::ParamStore params;
    nn::ChainLenNet net;
    nlohmann::json meta;
};
LoadedChainLen load_chainlen(const std::string& checkpoint_path);

struct ScoreRow {
    std::string a_chain, a_point, b_chain, b_point;
    int label = 0;
    double score = 0.0;
};
std::vector<ScoreRow> read_score_csv(const std::string& path);

}  // namespace sst
