#include "sst/nn/mining.hpp"

#include <stdexcept>

#include "sst/nn/losses.hpp"

namespace sst::nn {

Mat mean_window_sim_matrix(const std::vector<Mat>& anchors, const std::vector<Mat>& positives) {
    int b = static_cast<int>(anchors.size());
    if (static_cast<int>(positives.size()) != b)
        throw std::invalid_argument("mining: anchor/positive count mismatch");
    Mat sims(b, b);
    for (int i = 0; i < b; ++i)
        for (int j = 0; j < b; ++j) {
            auto ws = window_similarities(anchors[i], positives[j]);
            double total = 0.0;
            for (double s : ws) total += s;
            sims(i, j) = total / static_cast<double>(ws.size());
        }
    return sims;
}

std::vector<Triplet> mine_batch_hard(const Mat& sim_matrix) {
    int b = static_cast<int>(sim_matrix.rows());
    if (b < 2) throw std::invalid_argument("mine_batch_hard: batch must have at least 2 items");
    std::vector<Triplet> triplets;
    triplets.reserve(b);
    for (int i = 0; i < b; ++i) {
        int best = -1;
        double best_sim = 0.0;
        for (int j = 0; j < b; ++j) {
            if (j == i) continue;
            if (best < 0 || sim_matrix(i, j) > best_sim) {
                best = j;
                best_sim = sim_matrix(i, j);
            }
        }
        triplets.push_back({i, i, best});
    }
    return triplets;
}

std::vector<Triplet> mine_batch_hard(const std::vector<Mat>& anchors,
                                     const std::vector<Mat>& positives) {
    return mine_batch_hard(mean_window_sim_matrix(anchors, positives));
}

std::vector<Triplet> mine_batch_all(const std::vector<Mat>& anchors,
                                    const std::vector<Mat>& positives, double margin) {
    int b = static_cast<int>(anchors.size());
    if (b < 2) throw std::invalid_argument("mine_batch_all: batch must have at least 2 items");
    std::vector<Triplet> triplets;
    for (int i = 0; i < b; ++i) {
        auto sim_ap = window_similarities(anchors[i], positives[i]);
        for (int j = 0; j < b; ++j) {
            if (j == i) continue;
            auto sim_an = window_similarities(anchors[i], positives[j]);
            if (triplet_loss(sim_ap, sim_an, margin) > 0.0) triplets.push_back({i, i, j});
        }
    }
    return triplets;
}

}  // namespace sst::nn
