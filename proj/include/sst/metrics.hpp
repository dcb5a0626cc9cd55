#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sst/dataset.hpp"

namespace sst {

enum class PairMode { Host, Network };

PairMode pair_mode_from_string(const std::string& s);
std::string pair_mode_to_string(PairMode m);

// References a capture by chain index + capture point name.
struct TraceRef {
    int chain = 0;
    std::string point;
};

struct ScoredPair {
    TraceRef a;
    TraceRef b;
    bool correlated = false;
    double score = 0.0;  // filled by the scorer
};

struct PairPopulation {
    PairMode mode = PairMode::Network;
    std::vector<ScoredPair> pairs;
};

struct RocPoint {
    double threshold = 0.0;
    double tpr = 0.0;
    double fpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;  // sorted by descending threshold, (0,0) .. (1,1)
    int64_t positives = 0;
    int64_t negatives = 0;
};

struct ChainReportRow {
    double tau = 0.0;
    double threshold = 0.0;
    double avg_tpr_mean = 0.0;  // mean over chains of per-link recall
    double avg_tpr_std = 0.0;
    double chain_accuracy = 0.0;  // all links recalled
};

struct ChainReport {
    std::vector<ChainReportRow> rows;
};

// Builds the candidate pair population. Network mode pairs the
// attacker egress with target ingress captures; host mode pairs each
// stone's ingress with an egress. Correlated pairs come from the same
// chain, uncorrelated pairs are drawn cross-chain, exhaustively when
// neg_per_pos is absent or sampled (deterministically) otherwise.
PairPopulation make_pairs(const DatasetManifest& manifest, PairMode mode,
                          std::optional<int> neg_per_pos, uint64_t seed);

// Standard threshold sweep over the unique scores, ties grouped.
RocCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& labels);

// Highest TPR over operating points with fpr <= tau (0 if none).
double max_tpr_at_fpr(const RocCurve& roc, double tau);

// Trapezoidal integral of the (linearly interpolated) ROC over
// fpr in [0, tau]. Normalized divides by tau so a perfect classifier
// scores 1.0.
double pauc(const RocCurve& roc, double tau, bool normalized = true);

// Full-path reconstruction: for each tau the decision threshold is the
// smallest score whose fpr on (scores, labels) stays within tau; a
// chain counts as traced when every per-link score clears it.
ChainReport chain_trace_accuracy(const std::vector<double>& scores, const std::vector<int>& labels,
                                 const std::vector<std::vector<double>>& chain_link_scores,
                                 const std::vector<double>& taus);

struct ChainLenAccuracy {
    double up = 0.0;
    double down = 0.0;
    double avg = 0.0;
};

// Accuracy of round-half-away-from-zero predictions per direction.
ChainLenAccuracy chainlen_accuracy(const std::vector<std::pair<double, double>>& preds,
                                   const std::vector<std::pair<int, int>>& labels);

}  // namespace sst
