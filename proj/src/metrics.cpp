#include "sst/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

namespace sst {

PairMode pair_mode_from_string(const std::string& s) {
    if (s == "host") return PairMode::Host;
    if (s == "network") return PairMode::Network;
    throw std::invalid_argument("unknown pair mode: " + s);
}

std::string pair_mode_to_string(PairMode m) {
    return m == PairMode::Host ? "host" : "network";
}

namespace {

int stones_of(const ManifestChain& c) { return c.links - 1; }

std::string stone_in(int s) { return "stone" + std::to_string(s) + "_ingress"; }
std::string stone_eg(int s) { return "stone" + std::to_string(s) + "_egress"; }

}  // namespace

PairPopulation make_pairs(const DatasetManifest& manifest, PairMode mode,
                          std::optional<int> neg_per_pos, uint64_t seed) {
    int n = static_cast<int>(manifest.chains.size());
    if (n < 2) throw std::invalid_argument("make_pairs: need at least 2 chains");

    PairPopulation pop;
    pop.mode = mode;
    Rng rng(seed);

    if (mode == PairMode::Network) {
        for (int i = 0; i < n; ++i)
            pop.pairs.push_back({{i, "attacker_egress"}, {i, "target_ingress"}, true, 0.0});
        if (!neg_per_pos) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (i != j)
                        pop.pairs.push_back(
                            {{i, "attacker_egress"}, {j, "target_ingress"}, false, 0.0});
        } else {
            std::set<std::pair<int, int>> used;
            for (int i = 0; i < n; ++i) {
                int wanted = std::min(*neg_per_pos, n - 1);
                while (wanted > 0) {
                    int j = static_cast<int>(rng.uniform_int(0, n - 1));
                    if (j == i || used.count({i, j})) continue;
                    used.insert({i, j});
                    pop.pairs.push_back(
                        {{i, "attacker_egress"}, {j, "target_ingress"}, false, 0.0});
                    --wanted;
                }
            }
        }
        return pop;
    }

    // Host mode: one positive per stepping stone.
    for (int i = 0; i < n; ++i)
        for (int s = 1; s <= stones_of(manifest.chains[i]); ++s)
            pop.pairs.push_back({{i, stone_in(s)}, {i, stone_eg(s)}, true, 0.0});

    if (!neg_per_pos) {
        for (int i = 0; i < n; ++i)
            for (int s = 1; s <= stones_of(manifest.chains[i]); ++s)
                for (int j = 0; j < n; ++j) {
                    if (j == i) continue;
                    for (int t = 1; t <= stones_of(manifest.chains[j]); ++t)
                        pop.pairs.push_back({{i, stone_in(s)}, {j, stone_eg(t)}, false, 0.0});
                }
    } else {
        std::set<std::tuple<int, int, int, int>> used;
        for (int i = 0; i < n; ++i)
            for (int s = 1; s <= stones_of(manifest.chains[i]); ++s) {
                int wanted = *neg_per_pos;
                int guard = 0;
                while (wanted > 0 && ++guard < 100000) {
                    int j = static_cast<int>(rng.uniform_int(0, n - 1));
                    if (j == i) continue;
                    int t = static_cast<int>(rng.uniform_int(1, stones_of(manifest.chains[j])));
                    if (used.count({i, s, j, t})) continue;
                    used.insert({i, s, j, t});
                    pop.pairs.push_back({{i, stone_in(s)}, {j, stone_eg(t)}, false, 0.0});
                    --wanted;
                }
            }
    }
    return pop;
}

RocCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("roc_curve: scores/labels size mismatch");
    int64_t pos = std::count(labels.begin(), labels.end(), 1);
    int64_t neg = static_cast<int64_t>(labels.size()) - pos;
    if (pos == 0 || neg == 0)
        throw std::invalid_argument("roc_curve: both classes must be present");

    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] > scores[b]; });

    RocCurve roc;
    roc.positives = pos;
    roc.negatives = neg;
    roc.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});

    int64_t tp = 0, fp = 0;
    size_t i = 0;
    while (i < order.size()) {
        double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            if (labels[order[i]] == 1)
                ++tp;
            else
                ++fp;
            ++i;
        }
        roc.points.push_back({s, static_cast<double>(tp) / static_cast<double>(pos),
                              static_cast<double>(fp) / static_cast<double>(neg)});
    }
    return roc;
}

double max_tpr_at_fpr(const RocCurve& roc, double tau) {
    double best = 0.0;
    for (const auto& p : roc.points)
        if (p.fpr <= tau) best = std::max(best, p.tpr);
    return best;
}

double pauc(const RocCurve& roc, double tau, bool normalized) {
    if (!(tau > 0.0)) throw std::invalid_argument("pauc: tau must be > 0");
    double area = 0.0;
    for (size_t i = 1; i < roc.points.size(); ++i) {
        double f0 = roc.points[i - 1].fpr, t0 = roc.points[i - 1].tpr;
        double f1 = roc.points[i].fpr, t1 = roc.points[i].tpr;
        if (f0 >= tau) break;
        if (f1 <= f0) continue;  // vertical segment, no width
        double fhi = std::min(f1, tau);
        // Linear interpolation of tpr across the segment.
        double thi = t0 + (t1 - t0) * (fhi - f0) / (f1 - f0);
        area += 0.5 * (t0 + thi) * (fhi - f0);
    }
    return normalized ? area / tau : area;
}

ChainReport chain_trace_accuracy(const std::vector<double>& scores, const std::vector<int>& labels,
                                 const std::vector<std::vector<double>>& chain_link_scores,
                                 const std::vector<double>& taus) {
    RocCurve roc = roc_curve(scores, labels);
    ChainReport report;
    for (double tau : taus) {
        // Smallest score whose FPR stays within tau.
        double theta = std::numeric_limits<double>::infinity();
        for (const auto& p : roc.points)
            if (p.fpr <= tau && p.threshold < theta) theta = p.threshold;

        ChainReportRow row;
        row.tau = tau;
        row.threshold = theta;
        std::vector<double> recalls;
        int64_t traced = 0;
        for (const auto& links : chain_link_scores) {
            if (links.empty()) continue;
            int64_t hit = 0;
            for (double s : links)
                if (s >= theta) ++hit;
            double recall = static_cast<double>(hit) / static_cast<double>(links.size());
            recalls.push_back(recall);
            if (hit == static_cast<int64_t>(links.size())) ++traced;
        }
        if (!recalls.empty()) {
            double mean = std::accumulate(recalls.begin(), recalls.end(), 0.0) /
                          static_cast<double>(recalls.size());
            double var = 0.0;
            for (double r : recalls) var += (r - mean) * (r - mean);
            var /= static_cast<double>(recalls.size());
            row.avg_tpr_mean = mean;
            row.avg_tpr_std = std::sqrt(var);
            row.chain_accuracy = static_cast<double>(traced) / static_cast<double>(recalls.size());
        }
        report.rows.push_back(row);
    }
    return report;
}

ChainLenAccuracy chainlen_accuracy(const std::vector<std::pair<double, double>>& preds,
                                   const std::vector<std::pair<int, int>>& labels) {
    if (preds.size() != labels.size() || preds.empty())
        throw std::invalid_argument("chainlen_accuracy: bad inputs");
    int64_t up_ok = 0, down_ok = 0;
    for (size_t i = 0; i < preds.size(); ++i) {
        if (std::llround(preds[i].first) == labels[i].first) ++up_ok;
        if (std::llround(preds[i].second) == labels[i].second) ++down_ok;
    }
    double n = static_cast<double>(preds.size());
    ChainLenAccuracy acc;
    acc.up = up_ok / n;
    acc.down = down_ok / n;
    acc.avg = 0.5 * (acc.up + acc.down);
    return acc;
}

}  // namespace sst
