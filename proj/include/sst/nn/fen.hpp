#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sst/nn/layers.hpp"

namespace sst::nn {

enum class MixerType { Mhsa, Conv7, Identity };

MixerType mixer_from_string(const std::string& s);
std::string mixer_to_string(MixerType m);

struct FenConfig {
    int input_channels = 9;
    int input_len = 1200;
    int hidden_dim = 96;
    int feature_dim = 64;
    int depth = 9;
    int embed_kernel = 3;
    int embed_stride = 3;
    int window_kernel = 50;
    int window_stride = 3;
    MixerType mixer = MixerType::Mhsa;
    int head_dim = 16;
    int kv_kernel = 3;
    int kv_stride = 2;
    int mlp_ratio = 4;
    double block_dropout = 0.1;
    bool chain_token = false;  // multi-task mode
    int chain_head_hidden = 128;

    int tokens() const { return (input_len + embed_stride - 1) / embed_stride; }
    int windows() const { return (tokens() - window_kernel) / window_stride + 1; }
    double window_span_seconds(double dt) const {
        return dt * embed_stride * window_kernel;
    }
    void validate() const;
};

// Transformer feature extraction network. The whole sequence is
// encoded first; window embeddings come from a final large-kernel
// convolution (post-encoder windowing). Convolutional key/value
// projections halve the attention sequence length. Inputs carry
// positional information through the time-binned features, so no
// positional encoding is added.
class Fen {
public:
    struct BlockCache {
        LayerNorm::Cache ln1, ln2;
        Conv1d::Cache qc, kc, vc, mixc;
        Mat q, k, v;
        std::vector<Mat> attn;  // per-head softmax, Lq x Lk
        Mat attn_out;           // input to the output projection
        Mat ffn_in, ffn_h, ffn_g;
        Mat mask;               // block dropout (train mode)
    };

    struct Cache {
        Mat input;  // compressed input
        Conv1d::Cache embed;
        std::vector<Mat> block_in;  // residual stream entering each block
        std::vector<BlockCache> blocks;
        Mat final_tokens;  // stream entering the windowing conv
        Conv1d::Cache window;
        Vec chain_tok_final;
        Mat chain_h1;
    };

    Fen() = default;
    Fen(const FenConfig& config, ParamStore& ps, Rng& rng);

    // x is the raw interval tensor (channels x input_len, row-major).
    // Count/size channels are compressed with sign(v) * log1p(|v|)
    // before the embedding so activations stay O(10) for byte-scale
    // inputs. Train mode applies block dropout from drop_rng.
    Mat forward(const ParamStore& ps, const std::vector<double>& x, Cache& cache, bool train,
                Rng* drop_rng, Eigen::Vector2d* chain_out) const;

    // dE is the loss gradient on the window embeddings; dchain (if the
    // chain token is enabled) on the two chain-length outputs.
    void backward(ParamStore& ps, const Cache& cache, const Mat& dE,
                  const Eigen::Vector2d* dchain) const;

    const FenConfig& config() const { return config_; }

private:
    FenConfig config_;
    Conv1d embed_;
    struct Block {
        LayerNorm ln1, ln2;
        Conv1d convq, convk, convv, conv_mix;
        Dense wo;
        Dense ffn1, ffn2;
    };
    std::vector<Block> blocks_;
    Conv1d window_;
    size_t chain_token_ = 0;
    Dense chain1_, chain2_;
};

}  // namespace sst::nn
