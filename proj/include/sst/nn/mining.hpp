#pragma once

#include <vector>

#include "sst/nn/param_store.hpp"

namespace sst::nn {

struct Triplet {
    int anchor = 0;
    int positive = 0;  // always == anchor: one positive per anchor
    int negative = 0;
};

// Mean window similarity matrix: entry (i, j) compares anchor i with
// positive j.
Mat mean_window_sim_matrix(const std::vector<Mat>& anchors, const std::vector<Mat>& positives);

// For each anchor the negative is the j != i maximizing mean window
// similarity; ties break to the lowest index. Requires B >= 2.
std::vector<Triplet> mine_batch_hard(const std::vector<Mat>& anchors,
                                     const std::vector<Mat>& positives);
std::vector<Triplet> mine_batch_hard(const Mat& sim_matrix);

// All (i, j != i) whose window-form triplet loss is nonzero.
std::vector<Triplet> mine_batch_all(const std::vector<Mat>& anchors,
                                    const std::vector<Mat>& positives, double margin);

}  // namespace sst::nn
