#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sst/nn/chainlen.hpp"
#include "sst/nn/fen.hpp"
#include "sst/nn/head.hpp"

namespace sst::nn {

enum class MiningMode { BatchAll, BatchHard };

MiningMode mining_from_string(const std::string& s);
std::string mining_to_string(MiningMode m);

struct PairExample {
    std::vector<double> anchor;    // interval tensor, channels x T row-major
    std::vector<double> positive;
    Eigen::Vector2d label = Eigen::Vector2d::Zero();  // (up_hosts, down_hosts)
};

struct FenTrainConfig {
    FenConfig fen;
    double margin = 0.5;
    MiningMode mining = MiningMode::BatchHard;
    bool hybrid = false;       // adds the temporal-alignment loss term
    double mix_weight = 0.5;   // window/temporal mix (only with hybrid)
    double lambda_orth = 0.0;
    double lambda_cov = 0.0;
    double lambda_chain = 0.0;  // multi-task chain-length weight
    int batch_size = 64;
    int epochs = 30;
    double lr = 1e-3;
    uint64_t seed = 7;
    double val_fraction = 0.1;
    int workers = 2;  // declared worker count; results depend on it, not on CLI flags

    void validate() const;
};

struct EpochLog {
    int epoch = 0;
    double triplet = 0.0;
    double orth = 0.0;
    double cov = 0.0;
    double chain_mse = 0.0;
    double total = 0.0;
    double val_auc = 0.0;
};

using EpochLogger = std::function<void(const EpochLog&)>;

struct FenTrainResult {
    ParamStore params;
    Fen fen;
    std::vector<EpochLog> log;
    bool diverged = false;
};

// Online-mined triplet training of the shared encoder. Anchors are
// attacker-side captures, positives target-side; negatives come from
// the other positives in the batch. Per-sample dropout streams are
// derived from (seed, step, slot) so the two forward passes agree and
// results do not depend on scheduling.
FenTrainResult train_fen(const std::vector<PairExample>& examples, const FenTrainConfig& config,
                         const EpochLogger& logger = nullptr);

// Eval-mode embedding (deterministic).
Mat fen_embed(const ParamStore& ps, const Fen& fen, const std::vector<double>& x,
              Eigen::Vector2d* chain_out = nullptr);

struct HeadTrainConfig {
    int hidden = 128;
    int epochs = 60;
    double lr = 1e-3;
    int neg_per_pos = 2;
    int batch_size = 128;
    uint64_t seed = 11;
};

struct HeadTrainResult {
    ParamStore params;
    SimilarityHead head;
    std::vector<double> epoch_loss;
    double train_accuracy = 0.0;
};

// Trains the classification head on frozen embeddings: the positive
// pair of each chain plus sampled cross-chain negatives.
HeadTrainResult train_head(const std::vector<Mat>& anchor_embs,
                           const std::vector<Mat>& positive_embs, const HeadTrainConfig& config,
                           const EpochLogger& logger = nullptr);

struct ChainLenExample {
    std::vector<double> tensor;  // packet tensor, channels x max_len row-major
    Eigen::Vector2d label = Eigen::Vector2d::Zero();
};

struct ChainLenTrainConfig {
    ChainLenConfig net;
    int epochs = 40;
    double lr = 1e-2;  // regression targets sit at 1..3; Adam moves ~lr per step
    int batch_size = 32;
    uint64_t seed = 5;
    double val_fraction = 0.1;

    void validate() const;
};

struct ChainLenTrainResult {
    ParamStore params;
    ChainLenNet net;
    std::vector<double> epoch_mse;
    bool diverged = false;
};

ChainLenTrainResult train_chainlen(const std::vector<ChainLenExample>& examples,
                                   const ChainLenTrainConfig& config,
                                   const EpochLogger& logger = nullptr);

Eigen::Vector2d chainlen_predict(ParamStore& ps, ChainLenNet& net, const std::vector<double>& x);

// Trained FEN + head; the unit of deployment for pair scoring.
struct CorrelatorBundle {
    ParamStore fen_params;
    Fen fen;
    ParamStore head_params;
    SimilarityHead head;
};

// Featurize-embed-score one pair of embeddings through the head.
double correlation_score(const CorrelatorBundle& bundle, const Mat& emb_a, const Mat& emb_b);

// Rank AUC of scores against binary labels (trapezoidal, ties grouped).
double auc_score(const std::vector<double>& scores, const std::vector<int>& labels);

}  // namespace sst::nn
