#pragma once

#include <vector>

#include "sst/nn/layers.hpp"

namespace sst::nn {

struct HeadConfig {
    int input_dim = 117;  // window count of the paired FEN
    int hidden_dim = 128;

    void validate() const;
};

// Small classifier over the per-window similarity vector:
// input -> 128 -> 128 -> 1 with rectified-linear hidden units and a
// sigmoid output. Decides pair correlation without threshold tuning.
class SimilarityHead {
public:
    struct Cache {
        Mat x, h1, a1, h2, a2, logit;
    };

    SimilarityHead() = default;
    SimilarityHead(const HeadConfig& config, ParamStore& ps, Rng& rng);

    // Columns of x are similarity vectors; returns probabilities (1 x B).
    Mat forward(const ParamStore& ps, const Mat& x, Cache& cache) const;

    // Binary cross-entropy against labels (0/1); accumulates grads.
    double bce_backward(ParamStore& ps, const Cache& cache, const Mat& probs,
                        const std::vector<int>& labels) const;

    const HeadConfig& config() const { return config_; }

private:
    HeadConfig config_;
    Dense d1_, d2_, d3_;
};

}  // namespace sst::nn
