#pragma once

#include <vector>

#include "sst/nn/layers.hpp"

namespace sst::nn {

struct ChainLenConfig {
    int input_channels = 4;
    int max_len = 4096;
    int kernel = 7;
    int stride = 2;
    std::vector<int> channels = {32, 64, 128, 256};
    int mlp_hidden = 128;

    void validate() const;
};

// 1-D CNN regressor for upstream/downstream host counts: four strided
// conv blocks with batch normalization, global average pooling, and a
// two-output MLP.
class ChainLenNet {
public:
    struct Cache {
        // Per layer, concatenated over the batch; per-sample column
        // extents are uniform because inputs share max_len.
        std::vector<std::vector<Conv1d::Cache>> conv;  // [layer][sample]
        std::vector<Mat> pre_bn;                       // conv output, batch-concatenated
        std::vector<Mat> xhat;                         // batch-norm normalized
        std::vector<Vec> inv_std;
        std::vector<Mat> post_act;                     // relu output
        Mat pooled;  // channels x batch
        Mat h1;      // mlp pre-activation
        Mat a1;
    };

    ChainLenNet() = default;
    ChainLenNet(const ChainLenConfig& config, ParamStore& ps, Rng& rng);

    // Inputs are packet tensors (channels x max_len); column k of the
    // result holds (up, down) for sample k. Train mode uses batch
    // statistics and updates the running estimates.
    Mat forward_batch(ParamStore& ps, const std::vector<const std::vector<double>*>& inputs,
                      Cache& cache, bool train);

    // dout: 2 x batch gradient on the predictions.
    void backward(ParamStore& ps, const Cache& cache, const Mat& dout) const;

    const ChainLenConfig& config() const { return config_; }

private:
    ChainLenConfig config_;
    std::vector<Conv1d> convs_;
    std::vector<size_t> bn_gamma_, bn_beta_, bn_mean_, bn_var_;  // running stats non-trainable
    Dense m1_, m2_;
    std::vector<int> layer_len_;  // per-sample sequence length after each conv
};

}  // namespace sst::nn
